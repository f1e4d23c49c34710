"""Symmetric double slit: indicator, spectrum and Fresnel aperture kernel."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import wofz

from .quadrature import DEFAULT_SPEC, QuadSpec, integrate_1d

__all__ = [
    "SlitGeometry",
    "DetectionGeometry",
    "slit_indicator",
    "slit_spectrum",
    "fresnel_aperture_kernel",
    "aperture_kernel",
    "far_field_kernel",
]

_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class SlitGeometry:
    """Two slits of width ``b`` whose centres sit at ``-d/2`` and ``+d/2``."""

    b: float
    d: float

    def __post_init__(self):
        if not (math.isfinite(self.b) and math.isfinite(self.d)):
            raise ValueError("slit dimensions must be finite")
        if not 0 < self.b < self.d:
            raise ValueError(f"need 0 < b < d, got b={self.b}, d={self.d}")

    @property
    def intervals(self) -> tuple[tuple[float, float], tuple[float, float]]:
        lo, hi = (self.d - self.b) / 2, (self.d + self.b) / 2
        return (-hi, -lo), (lo, hi)


@dataclass(frozen=True)
class DetectionGeometry:
    """Wavenumber ``k`` and slit-to-detector distance ``z``."""

    k: float
    z: float

    def __post_init__(self):
        if not (math.isfinite(self.k) and math.isfinite(self.z)):
            raise ValueError("k and z must be finite")
        if self.k <= 0 or self.z <= 0:
            raise ValueError(f"need k > 0 and z > 0, got k={self.k}, z={self.z}")

    @property
    def wavelength(self) -> float:
        return 2.0 * math.pi / self.k

    def spatial_frequency(self, x):
        """Map a detector position to the transverse wavevector ``k*x/z``."""
        return self.k * np.asarray(x) / self.z


def slit_indicator(x, slits: SlitGeometry):
    """1 inside either (closed) slit, 0 elsewhere."""
    ax = np.abs(np.asarray(x, dtype=float))
    lo, hi = (slits.d - slits.b) / 2, (slits.d + slits.b) / 2
    return ((ax >= lo) & (ax <= hi)).astype(int)


def slit_spectrum(q, slits: SlitGeometry):
    """Fourier transform of the slit indicator,
    ``2b/sqrt(2pi) * sinc(q*b/2) * cos(q*d/2)`` with ``sinc(u) = sin(u)/u``."""
    q = np.asarray(q, dtype=float)
    return 2 * slits.b * _INV_SQRT_2PI * np.sinc(q * slits.b / (2 * np.pi)) * np.cos(q * slits.d / 2)


def fresnel_aperture_kernel(q: float, x: float, slits: SlitGeometry, det: DetectionGeometry,
                            spec: QuadSpec | None = None) -> complex:
    """Fresnel kernel of the double slit by adaptive quadrature.

    Integrates ``exp(1j*(k/2z)*s**2 + 1j*(q - k*x/z)*s) / sqrt(2pi)``
    over the two slit intervals.  :func:`aperture_kernel` evaluates the
    same quantity in closed form and is what the correlator uses.
    """
    spec = DEFAULT_SPEC if spec is None else spec
    alpha = det.k / (2 * det.z)
    beta = q - det.k * x / det.z

    def integrand(s):
        return np.exp(1j * (alpha * s * s + beta * s))

    total = 0j
    for lo, hi in slits.intervals:
        # a few initial panels per oscillation keeps the first pass meaningful
        cycles = (abs(beta) + 2 * alpha * max(abs(lo), abs(hi))) * (hi - lo) / (2 * np.pi)
        n = int(min(max(1, math.ceil(cycles)), spec.max_subdivisions // 2))
        pts = np.linspace(lo, hi, n + 1)[1:-1]
        total += integrate_1d(integrand, lo, hi, spec, vectorized=True, breakpoints=pts).value
    return total * _INV_SQRT_2PI


def _slit_integral(alpha, kappa, h):
    """``int_{-h}^{h} exp(1j*(alpha*s**2 + kappa*s)) ds`` for ``alpha > 0``.

    Written with the Faddeeva function so that no large, nearly
    cancelling Fresnel integrals appear when ``|kappa| >> alpha*h``.
    """
    c = kappa / (2 * alpha)
    root = math.sqrt(alpha)
    rot = np.exp(0.25j * np.pi)

    def edge(s):
        u = s + c
        sign = np.where(u >= 0, 1.0, -1.0)
        e = np.exp(1j * (alpha * s * s + kappa * s))
        return -sign * e * wofz(rot * root * np.abs(u)), sign

    a_hi, sign_hi = edge(h)
    a_lo, sign_lo = edge(-h)
    # stationary point of the phase inside the slit
    inside = sign_hi > sign_lo
    stationary = np.where(inside, 2 * np.exp(-1j * alpha * np.where(inside, c, 0) ** 2), 0)
    pref = 1j * math.sqrt(np.pi) / (2 * rot * root)
    return pref * (a_hi - a_lo + stationary)


def aperture_kernel(q, x, slits: SlitGeometry, det: DetectionGeometry):
    """Closed-form Fresnel aperture kernel, broadcasting over ``q`` and ``x``.

    Equal to :func:`fresnel_aperture_kernel` to rounding error.
    """
    q = np.asarray(q, dtype=float)
    x = np.asarray(x, dtype=float)
    alpha = det.k / (2 * det.z)
    beta = q - det.k * x / det.z
    h = slits.b / 2
    out = 0j
    for centre in (-slits.d / 2, slits.d / 2):
        phase = np.exp(1j * (alpha * centre * centre + beta * centre))
        out = out + phase * _slit_integral(alpha, beta + 2 * alpha * centre, h)
    return out * _INV_SQRT_2PI


def far_field_kernel(q, x, slits: SlitGeometry, det: DetectionGeometry):
    """Far-field limit of the aperture kernel, ``slit_spectrum(k*x/z - q)``."""
    return slit_spectrum(det.spatial_frequency(x) - np.asarray(q), slits)
