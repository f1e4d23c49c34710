"""Two-photon double-slit interference of down-converted light.

Submodules
----------
quadrature
    Adaptive Gauss-Kronrod integration.
opa_gain
    Parametric-amplifier coefficients ``U``, ``V``.
aperture
    Double-slit indicator, spectrum and Fresnel kernel.
spectral
    Frequency integrals of the gain functions with exact tails.
correlator
    Second-order correlation, full and broadband.
observables
    Fringe scans, visibilities, periods, coherent-light reference.
cli
    ``spdc-litho`` command line.
"""
from .aperture import (
    DetectionGeometry,
    SlitGeometry,
    aperture_kernel,
    far_field_kernel,
    fresnel_aperture_kernel,
    slit_indicator,
    slit_spectrum,
)
from .correlator import (
    BroadbandCoefficients,
    CorrelationMatrices,
    SpdcScene,
    correlation_matrices,
    f_integrals,
    g2_broadband,
    g2_full,
    g2_full_pairs,
    m_kernel,
    n_kernel,
)
from .errors import (
    ConfigError,
    DegenerateGain,
    InsufficientSpan,
    InvalidInterval,
    LithographyError,
    NonConvergent,
    NonFiniteIntegrand,
    QuadratureError,
)
from .observables import (
    FringeScan,
    VisibilityReport,
    antidiagonal_scan,
    classical_g1,
    classical_g2,
    diagonal_scan,
    fringe_period,
    gain_sweep,
    normalized_position,
    null_position,
    visibility_formula,
    visibility_from_scan,
    visibility_report,
)
from .opa_gain import CrystalParams, GainPair, gain_pair, gain_pair_batch, gamma, mismatch, theta_phase
from .quadrature import QuadResult, QuadSpec, integrate_1d, integrate_2d, truncate_omega_domain

__version__ = "0.1.0"
