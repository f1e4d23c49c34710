"""Input-output coefficients of a type-I optical parametric amplifier.

The output field in transverse wavevector ``q`` and detuning ``omega``
is ``U * a_in(q, omega) + V * a_in^dagger(-q, -omega)`` with

    U = theta * (cosh(G) + 1j*delta/(2G) * sinh(G))
    V = theta * g/G * sinh(G)
    G = sqrt(g**2 - delta**2/4)
    delta = delta0 + (omega/omega0)**2 - (q/q0)**2

``G`` is taken as the principal complex square root, so the far
off-phase-matched region (``|delta| > 2g``) runs through the same code
with an imaginary ``G``.

The longitudinal wavevector inside the phase ``theta`` is modelled as
``k_z = k + k'*omega + k''*omega**2/2 - q**2/(2k)``; with the bandwidths
``q0**2 = k/l_c`` and ``omega0**2 = 1/(k''*l_c)`` the quadratic terms
cancel against ``delta/2`` and ``theta = exp(1j*(group_delay*omega/omega0
- delta0/2))``.  ``group_delay`` is the dimensionless ``k'*l_c*omega0``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "CrystalParams",
    "GainPair",
    "gain_pair_batch",
    "mismatch",
    "gamma",
    "sinhc",
    "theta_phase",
    "gain_pair",
    "gain_coefficients",
    "SERIES_CUTOFF",
]

# below this |Gamma| sinh(Gamma)/Gamma is summed as a series
SERIES_CUTOFF = 1e-4


@dataclass(frozen=True)
class CrystalParams:
    """Nonlinear crystal seen as an OPA.

    Attributes
    ----------
    g : float
        Dimensionless coupling strength, ``g >= 0``.
    delta0 : float
        Phase-matching parameter.
    q0 : float
        Spatial-frequency bandwidth [rad/length].
    omega0 : float
        Frequency bandwidth [rad/time].
    group_delay : float
        Linear phase slope of ``theta`` per ``omega0``; every observable
        in this package is independent of it.
    """

    g: float
    delta0: float = 0.0
    q0: float = 1.0
    omega0: float = 1.0
    group_delay: float = 0.0

    def __post_init__(self):
        for name in ("g", "delta0", "q0", "omega0", "group_delay"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if self.g < 0:
            raise ValueError(f"g must be >= 0, got {self.g}")
        if self.q0 <= 0:
            raise ValueError(f"q0 must be > 0, got {self.q0}")
        if self.omega0 <= 0:
            raise ValueError(f"omega0 must be > 0, got {self.omega0}")


@dataclass(frozen=True)
class GainPair:
    """Bogoliubov pair ``(u, v)``; scalars or equally shaped arrays."""

    u: np.ndarray
    v: np.ndarray

    def commutator_defect(self) -> np.ndarray:
        """``|u|**2 - |v|**2 - 1``, zero for an exact Bogoliubov pair."""
        return np.abs(self.u) ** 2 - np.abs(self.v) ** 2 - 1


def mismatch(q, omega, params: CrystalParams):
    """Dimensionless phase mismatch ``delta0 + (omega/omega0)**2 - (q/q0)**2``."""
    return params.delta0 + (np.asarray(omega) / params.omega0) ** 2 - (np.asarray(q) / params.q0) ** 2


def _real_type(dtype):
    return np.finfo(dtype).dtype.type


def _gamma_from_delta(g, delta, dtype=complex):
    real = _real_type(dtype)
    d = np.asarray(delta).astype(real)
    # a real radicand cast to complex has +0 imaginary part, so the
    # principal root lands on the positive imaginary axis
    return np.sqrt((real(g) ** 2 - d * d / 4).astype(dtype))


def gamma(q, omega, params: CrystalParams):
    """Principal ``sqrt(g**2 - delta**2/4)``: real for ``|delta| <= 2g``,
    positive imaginary beyond."""
    return _gamma_from_delta(params.g, mismatch(q, omega, params))


def sinhc(z):
    """``sinh(z)/z`` with the removable singularity at ``z = 0`` filled in."""
    z = np.asarray(z)
    small = np.abs(z) < SERIES_CUTOFF
    z2 = z * z
    series = 1 + z2 / 6 + z2 * z2 / 120
    safe = np.where(small, 1, z)
    return np.where(small, series, np.sinh(safe) / safe)


def theta_phase(q, omega, params: CrystalParams, *, dtype=complex):
    """Unit-modulus propagation phase of the OPA coefficients.

    Independent of ``q`` under the adopted dispersion model, and
    ``theta(q, w) * theta(-q, -w) == exp(-1j*delta0)``.
    """
    real = _real_type(dtype)
    omega = np.asarray(omega).astype(real)
    q = np.asarray(q).astype(real)
    phase = real(params.group_delay) * omega / real(params.omega0) - real(params.delta0) / 2 + 0 * q
    return np.cos(phase).astype(dtype) + 1j * np.sin(phase).astype(dtype)


def _coefficients(q, omega, params, dtype):
    return _coefficients_raw(q, omega, params.g, params.delta0, params.q0, params.omega0,
                             params.group_delay, dtype)


def _coefficients_raw(q, omega, g, delta0, q0, omega0, group_delay, dtype):
    real = _real_type(dtype)
    q, omega, g, delta0, q0, omega0, group_delay = (
        np.asarray(a).astype(real) for a in (q, omega, g, delta0, q0, omega0, group_delay))
    delta = delta0 + (omega / omega0) ** 2 - (q / q0) ** 2
    G = _gamma_from_delta(g, delta, dtype)
    sc = sinhc(G)
    u_core = np.cosh(G) + 1j * (delta / 2).astype(dtype) * sc
    v_core = g * sc
    phase = group_delay * omega / omega0 - delta0 / 2
    th = np.cos(phase).astype(dtype) + 1j * np.sin(phase).astype(dtype)
    return th * u_core, th * v_core


def gain_pair(q, omega, params: CrystalParams, *, dtype=np.clongdouble) -> GainPair:
    """OPA coefficients ``U(q, omega)`` and ``V(q, omega)``.

    Evaluated in extended precision by default so that the Bogoliubov
    identity ``|U|**2 - |V|**2 = 1`` survives at high gain, where both
    terms are of order ``cosh(g)**2``.  Pass ``dtype=complex`` for plain
    double precision.
    """
    u, v = _coefficients(q, omega, params, dtype)
    return GainPair(u, v)


def gain_coefficients(q, omega, params: CrystalParams):
    """Double-precision ``(U, V)`` arrays for use inside integrands."""
    return _coefficients(q, omega, params, complex)


def gain_pair_batch(q, omega, g, delta0=0.0, q0=1.0, omega0=1.0, group_delay=0.0, *,
                    dtype=np.clongdouble) -> GainPair:
    """:func:`gain_pair` with every crystal parameter broadcast as an array.

    For scanning many crystals at once; the parameters obey the same
    constraints as :class:`CrystalParams`.
    """
    arrays = np.broadcast_arrays(*(np.asarray(a, dtype=float)
                                   for a in (q, omega, g, delta0, q0, omega0, group_delay)))
    if not all(np.all(np.isfinite(a)) for a in arrays):
        raise ValueError("all arguments must be finite")
    _, _, g, _, q0, omega0, _ = arrays
    if np.any(g < 0):
        raise ValueError("g must be >= 0")
    if np.any(q0 <= 0) or np.any(omega0 <= 0):
        raise ValueError("q0 and omega0 must be > 0")
    u, v = _coefficients_raw(*arrays, dtype)
    return GainPair(u, v)
