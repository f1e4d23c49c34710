"""Fringe scans, visibilities, fringe periods and the coherent-light reference."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.interpolate import CubicSpline

from .aperture import DetectionGeometry, SlitGeometry, slit_spectrum
from .correlator import (
    BroadbandCoefficients,
    SpdcScene,
    correlation_matrices,
    f_integrals,
    g2_broadband,
)
from .errors import DegenerateGain, InsufficientSpan
from .opa_gain import CrystalParams

__all__ = [
    "SCAN_KINDS",
    "MODES",
    "FringeScan",
    "VisibilityReport",
    "GainSweepRow",
    "null_position",
    "normalized_position",
    "diagonal_scan",
    "antidiagonal_scan",
    "visibility_formula",
    "visibility_from_scan",
    "visibility_report",
    "fringe_period",
    "classical_g1",
    "classical_g2",
    "gain_sweep",
]

SCAN_KINDS = ("diagonal", "antidiagonal", "classical_g1", "classical_g2_diagonal", "grid_row")
MODES = ("full", "broadband")


@dataclass(frozen=True)
class FringeScan:
    """Correlation values sampled along a line of detector positions.

    ``normalization`` records how the values were produced (mode, the
    unit proportionality constant, scene parameters).
    """

    positions: np.ndarray
    values: np.ndarray
    kind: str
    normalization: dict = field(default_factory=dict)

    def __post_init__(self):
        pos = np.asarray(self.positions, dtype=float)
        val = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "values", val)
        if self.kind not in SCAN_KINDS:
            raise ValueError(f"kind must be one of {SCAN_KINDS}, got {self.kind!r}")
        if pos.ndim != 1 or pos.shape != val.shape:
            raise ValueError("positions and values must be 1-D and of equal length")
        if pos.size == 0:
            raise ValueError("scan is empty")
        if np.any(np.diff(pos) <= 0):
            raise ValueError("positions must be strictly increasing")
        if not (np.all(np.isfinite(pos)) and np.all(np.isfinite(val))):
            raise ValueError("scan contains non-finite entries")
        if np.any(val < 0):
            raise ValueError("correlation values must be non-negative")


@dataclass(frozen=True)
class VisibilityReport:
    """Predicted and read-off fringe visibility plus the fringe strength."""

    v_formula: float
    v_extracted: float
    xi: float
    strength: float

    def __post_init__(self):
        for name in ("v_formula", "v_extracted"):
            v = getattr(self, name)
            if not 0 <= v <= 1:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")
        if not self.strength >= 0:
            raise ValueError(f"strength must be >= 0, got {self.strength}")


@dataclass(frozen=True)
class GainSweepRow:
    g: float
    delta0: float
    xi: float
    f1sq: float
    f2sq: float


def null_position(slits: SlitGeometry, det: DetectionGeometry) -> float:
    """First zero of the two-photon fringe, ``pi*z/(2*k*d)``."""
    return math.pi * det.z / (2 * det.k * slits.d)


def normalized_position(x, slits: SlitGeometry, det: DetectionGeometry):
    """Dimensionless detector coordinate ``k*b*x/(2*pi*z)``."""
    return det.k * slits.b * np.asarray(x, dtype=float) / (2 * math.pi * det.z)


def _check_mode(mode):
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")


def _positions(xs):
    xs = np.asarray(xs, dtype=float).ravel()
    if xs.size == 0:
        raise ValueError("need at least one position")
    return xs


def _normalization(scene: SpdcScene, mode: str, coeffs: BroadbandCoefficients | None) -> dict:
    c = scene.crystal
    info = {
        "mode": mode,
        "proportionality": 1.0,
        "g": c.g, "delta0": c.delta0, "q0": c.q0, "omega0": c.omega0,
        "b": scene.slits.b, "d": scene.slits.d, "k": scene.det.k, "z": scene.det.z,
        "q0_d": scene.broadband_ratio,
    }
    if coeffs is not None:
        info.update(xi=coeffs.xi, f1=coeffs.f1, f2_abs=abs(coeffs.f2))
    return info


def _pair_scan(xs, partner, scene, mode, kind):
    _check_mode(mode)
    xs = _positions(xs)
    x2 = partner * xs
    if mode == "broadband":
        coeffs = f_integrals(scene)
        values = g2_broadband(xs, x2, coeffs, scene.slits, scene.det)
    else:
        coeffs = None
        mats = correlation_matrices(np.concatenate([xs, x2]), scene)
        values = mats.g2(xs, x2)
    return FringeScan(xs, np.atleast_1d(values), kind, _normalization(scene, mode, coeffs))


def diagonal_scan(xs: Sequence[float], scene: SpdcScene, mode: str = "broadband") -> FringeScan:
    """``G2(x, x)`` at each ``x`` in ``xs``: both photons at one point.

    ``mode`` is ``"broadband"`` (closed form) or ``"full"`` (kernel
    quadrature).
    """
    return _pair_scan(xs, 1.0, scene, mode, "diagonal")


def antidiagonal_scan(xs: Sequence[float], scene: SpdcScene, mode: str = "broadband") -> FringeScan:
    """``G2(x, -x)`` at each ``x`` in ``xs``: detectors placed symmetrically."""
    return _pair_scan(xs, -1.0, scene, mode, "antidiagonal")


def visibility_formula(xi: float, kind: str) -> float:
    """Fringe visibility of the broadband form.

    ``1/(1 + 4*xi)`` for the diagonal scan and ``1/(3 + 2/xi)`` for the
    antidiagonal one.
    """
    if not xi >= 0:
        raise ValueError(f"xi must be >= 0, got {xi}")
    if kind == "diagonal":
        return 1.0 / (1.0 + 4.0 * xi)
    if kind == "antidiagonal":
        if xi == 0:
            raise DegenerateGain("antidiagonal visibility is undefined at xi = 0")
        return 1.0 / (3.0 + 2.0 / xi)
    raise ValueError(f"kind must be 'diagonal' or 'antidiagonal', got {kind!r}")


def _value_at(scan: FringeScan, x: float) -> float:
    pos = scan.positions
    i = int(np.argmin(np.abs(pos - x)))
    if math.isclose(pos[i], x, rel_tol=1e-12, abs_tol=1e-12 * max(1.0, abs(x))):
        return float(scan.values[i])
    if len(pos) < 4:
        raise InsufficientSpan("too few samples to interpolate the visibility read-off points")
    return float(CubicSpline(pos, scan.values)(x))


def visibility_from_scan(scan: FringeScan, scene: SpdcScene) -> float:
    """``(G(0) - G(x0))/(G(0) + G(x0))`` with ``x0`` the first fringe null.

    The two read-off points are the central maximum and the first zero
    of the oscillating term, where the slit envelope is still 1.  Points
    not sampled exactly are taken from a cubic spline through the scan.

    Raises
    ------
    InsufficientSpan
        If the scan does not cover ``[0, x0]``.
    """
    x0 = null_position(scene.slits, scene.det)
    tol = 1e-12 * x0
    if scan.positions[0] > tol or scan.positions[-1] < x0 - tol:
        raise InsufficientSpan(
            f"scan covers [{scan.positions[0]:.6g}, {scan.positions[-1]:.6g}], "
            f"needs [0, {x0:.6g}]")
    top = _value_at(scan, 0.0)
    bottom = _value_at(scan, x0)
    if top + bottom == 0:
        raise DegenerateGain("scan is identically zero")
    return float(np.clip((top - bottom) / (top + bottom), 0.0, 1.0))


def visibility_report(scan: FringeScan, scene: SpdcScene,
                      coeffs: BroadbandCoefficients | None = None) -> VisibilityReport:
    """Formula and read-off visibility of a diagonal or antidiagonal scan.

    ``strength`` is the oscillation amplitude of the broadband form:
    ``|f2|**2 * D(0)**2`` on the diagonal and ``|f1|**2 * D(0)**2`` on the
    antidiagonal, ``D`` being the slit spectrum.
    """
    coeffs = f_integrals(scene) if coeffs is None else coeffs
    s0 = float(slit_spectrum(0.0, scene.slits)) ** 2
    strength = (abs(coeffs.f2) ** 2 if scan.kind == "diagonal" else coeffs.f1 ** 2) * s0
    return VisibilityReport(
        v_formula=visibility_formula(coeffs.xi, scan.kind),
        v_extracted=visibility_from_scan(scan, scene),
        xi=coeffs.xi,
        strength=strength,
    )


def _refined_minima(x, y):
    """Sampled interior minima, each moved to the vertex of the local parabola."""
    inner = np.flatnonzero((y[1:-1] < y[:-2]) & (y[1:-1] <= y[2:])) + 1
    out = []
    for i in inner:
        x0, x1, x2 = x[i - 1], x[i], x[i + 1]
        y0, y1, y2 = y[i - 1], y[i], y[i + 1]
        denom = (x0 - x1) * (x0 - x2) * (x1 - x2)
        a = (x2 * (y1 - y0) + x1 * (y0 - y2) + x0 * (y2 - y1)) / denom
        b = (x2 * x2 * (y0 - y1) + x1 * x1 * (y2 - y0) + x0 * x0 * (y1 - y2)) / denom
        out.append(-b / (2 * a) if a > 0 else x1)
    return np.array(out)


def fringe_period(scan: FringeScan) -> float:
    """Fringe period from the mean spacing of successive minima.

    Each sampled minimum is refined by fitting a parabola through it and
    its two neighbours.  The scan should cover at least three periods
    inside the central envelope lobe.

    Raises
    ------
    InsufficientSpan
        If fewer than three minima are found.
    """
    minima = _refined_minima(scan.positions, scan.values)
    if len(minima) < 3:
        raise InsufficientSpan(f"found {len(minima)} fringe minima, need at least 3")
    return float((minima[-1] - minima[0]) / (len(minima) - 1))


def classical_g1(x, alpha_sq: float, slits: SlitGeometry, det: DetectionGeometry):
    """Intensity of coherent light behind the slits,
    ``k/(4*pi**2*z) * |alpha|**2 * D(k*x/z)**2``."""
    if not alpha_sq >= 0:
        raise ValueError(f"alpha_sq must be >= 0, got {alpha_sq}")
    spec = slit_spectrum(det.spatial_frequency(x), slits)
    out = det.k / (4 * math.pi ** 2 * det.z) * alpha_sq * spec * spec
    return float(out) if np.ndim(out) == 0 else out


def classical_g2(x1, x2, alpha_sq: float, slits: SlitGeometry, det: DetectionGeometry):
    """Intensity correlation of coherent light; the product of the two intensities."""
    return classical_g1(x1, alpha_sq, slits, det) * classical_g1(x2, alpha_sq, slits, det)


def gain_sweep(g_values: Iterable[float], delta0: float, scene_template: SpdcScene) -> list[GainSweepRow]:
    """Broadband coefficients along a sweep of the coupling strength.

    ``scene_template`` supplies everything except ``g`` and ``delta0``.
    ``g_values`` must be positive and strictly increasing.
    """
    gs = np.asarray(list(g_values), dtype=float)
    if gs.size == 0:
        raise ValueError("need at least one coupling strength")
    if np.any(gs <= 0) or np.any(np.diff(gs) <= 0):
        raise ValueError("g values must be positive and strictly increasing")
    rows = []
    base = scene_template.crystal
    for g in gs:
        crystal = CrystalParams(g=float(g), delta0=delta0, q0=base.q0, omega0=base.omega0,
                                group_delay=base.group_delay)
        scene = SpdcScene(crystal, scene_template.slits, scene_template.det, scene_template.quad)
        co = f_integrals(scene)
        rows.append(GainSweepRow(g=float(g), delta0=float(delta0), xi=co.xi,
                                 f1sq=co.f1 ** 2, f2sq=abs(co.f2) ** 2))
    return rows
