"""Exception hierarchy shared by all modules."""


class LithographyError(Exception):
    """Base class for every error raised by :mod:`spdc_litho`."""


class QuadratureError(LithographyError):
    """Base class for numerical integration failures."""


class NonConvergent(QuadratureError):
    """The subdivision budget (or a domain-doubling check) was exhausted
    before the requested tolerance was met."""


class InvalidInterval(QuadratureError, ValueError):
    """Integration limits are not ordered (``a >= b``)."""


class NonFiniteIntegrand(QuadratureError):
    """The integrand returned ``nan`` or ``inf`` at a quadrature node."""


class DegenerateGain(LithographyError, ValueError):
    """A quantity is undefined because the coupling vanishes (``g == 0``)."""


class InsufficientSpan(LithographyError, ValueError):
    """A fringe scan does not cover the positions an estimator needs."""


class ConfigError(LithographyError, ValueError):
    """Invalid run configuration."""
