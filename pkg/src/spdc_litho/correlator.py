"""Second-order correlation of the down-converted field behind a double slit.

Two evaluation paths are provided:

* the full path, ``G2 = M11*M22 + |M12|**2 + |N12|**2`` with the kernels
  ``M`` and ``N`` integrated over transverse wavevector and frequency;
* the broadband path, where the gain is frozen at ``q = 0`` and the
  kernels collapse onto the slit spectrum with the two scalar integrals
  ``f1`` and ``f2``.

Frequency is always integrated first.  With the propagation phase pulled
out (it contributes the constant ``exp(-1j*delta0)`` to ``V*U``), the
frequency integrals only depend on ``Delta = delta0 - (q/q0)**2`` and are
supplied by :func:`spdc_litho.spectral.frequency_moments`, which treats
the algebraically decaying frequency tails exactly.  What remains is a
1-D integral over ``q``.

The ``q`` integrands decay like ``|q|**-3`` (aperture kernel squared
times the ring-shaped gain profile), so the window is doubled until a
Richardson-extrapolated value settles; see :func:`correlation_matrices`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .aperture import DetectionGeometry, SlitGeometry, aperture_kernel, slit_spectrum
from .errors import DegenerateGain, NonConvergent
from .opa_gain import CrystalParams, gain_coefficients
from .quadrature import (
    DEFAULT_SPEC,
    POINTWISE_SPEC,
    QuadSpec,
    adaptive_panels,
    integrate_1d,
    kronrod_rule,
)
from .spectral import frequency_moments, tail_integrals, tail_start

__all__ = [
    "SpdcScene",
    "BroadbandCoefficients",
    "CorrelationMatrices",
    "f_integrals",
    "correlation_matrices",
    "m_kernel",
    "n_kernel",
    "g2_full",
    "g2_full_pairs",
    "g2_broadband",
    "q_window",
]

# largest number of window doublings before giving up
MAX_DOUBLINGS = 10
# q nodes per block when forming the kernel products
_BLOCK = 8192


@dataclass(frozen=True)
class SpdcScene:
    """Crystal, slits, detector and quadrature settings of one setup.

    ``quad`` governs the per-point correlation integrals; its
    ``tail_cut`` also sets the frequency and wavevector windows.
    """

    crystal: CrystalParams
    slits: SlitGeometry
    det: DetectionGeometry
    quad: QuadSpec = POINTWISE_SPEC

    def __post_init__(self):
        for name, cls in (("crystal", CrystalParams), ("slits", SlitGeometry),
                          ("det", DetectionGeometry), ("quad", QuadSpec)):
            if not isinstance(getattr(self, name), cls):
                raise TypeError(f"{name} must be a {cls.__name__}")

    @property
    def broadband_ratio(self) -> float:
        """``q0*d``; the broadband form needs this to be large."""
        return self.crystal.q0 * self.slits.d


@dataclass(frozen=True)
class BroadbandCoefficients:
    """Scalar gain integrals of the broadband form, with ``xi = |f1/f2|**2``."""

    f1: float
    f2: complex
    xi: float

    def __post_init__(self):
        if not self.f1 >= 0:
            raise ValueError(f"f1 must be >= 0, got {self.f1}")
        if not self.xi >= 0:
            raise ValueError(f"xi must be >= 0, got {self.xi}")


def _require_gain(crystal: CrystalParams):
    if crystal.g == 0:
        raise DegenerateGain("g = 0: no pairs are generated, f2 vanishes and xi is undefined")


def _broadband_prefactor(det: DetectionGeometry) -> float:
    return det.k / ((2 * math.pi) ** 1.5 * det.z)


def _f_window(crystal: CrystalParams, T: float, spec: QuadSpec) -> tuple[np.ndarray, float]:
    """``(int |V|**2, int V*U(-omega))`` in units of ``t = omega/omega0``.

    ``|t| <= T`` is integrated directly from the gain coefficients, the
    rest from the tail expansion.
    """
    g, d0 = crystal.g, crystal.delta0

    def integrand(t):
        om = t * crystal.omega0
        u_minus, _ = gain_coefficients(0.0, -om, crystal)
        _, v = gain_coefficients(0.0, om, crystal)
        return np.stack([np.abs(v) ** 2 + 0j, v * u_minus], axis=-1)

    breaks = np.linspace(-T, T, 2 * int(math.ceil(4 * T)) + 1)[1:-1]
    core = integrate_1d(integrand, -T, T, spec, vectorized=True, breakpoints=breaks)
    tail, tail_err = tail_integrals([d0], g, T)
    tail = 2 * tail[0] * np.array([1.0, np.exp(-1j * d0)])
    return core.value + tail, core.error_estimate + 2 * float(tail_err[0])


def f_integrals(scene: SpdcScene, spec: QuadSpec | None = None) -> BroadbandCoefficients:
    """``f1``, ``f2`` and ``xi`` of the broadband form.

    ``f1 = k/((2pi)**1.5 z) * int |V(0, w)|**2 dw`` and
    ``f2 = k/((2pi)**1.5 z) * int V(0, w) U(0, -w) dw``.

    Parameters
    ----------
    scene : SpdcScene
    spec : QuadSpec, optional
        Tolerances for the two scalar integrals; defaults to
        ``DEFAULT_SPEC`` with the scene's ``tail_cut``.

    Raises
    ------
    DegenerateGain
        For ``g = 0``.
    NonConvergent
        If the quadrature fails, or doubling the frequency window moves
        ``f1`` or ``|f2|`` by more than ``rel_tol``.
    """
    crystal = scene.crystal
    _require_gain(crystal)
    spec = DEFAULT_SPEC.replace(tail_cut=scene.quad.tail_cut) if spec is None else spec
    T = float(tail_start(crystal.delta0, crystal.g, spec.tail_cut))
    base, _ = _f_window(crystal, T, spec)
    wide, _ = _f_window(crystal, 2 * T, spec)
    for name, a, b in (("f1", base[0].real, wide[0].real), ("|f2|", abs(base[1]), abs(wide[1]))):
        if abs(a - b) > max(spec.abs_tol, spec.rel_tol * abs(b)):
            raise NonConvergent(f"{name} changed from {a!r} to {b!r} when the frequency window was doubled")
    pref = _broadband_prefactor(scene.det) * crystal.omega0
    f1 = pref * max(base[0].real, 0.0)
    f2 = complex(pref * base[1])
    return BroadbandCoefficients(f1=f1, f2=f2, xi=abs(f1 / f2) ** 2)


def g2_broadband(x1, x2, coeffs: BroadbandCoefficients, slits: SlitGeometry, det: DetectionGeometry):
    """Broadband ``G2 = |f2|**2 * (xi*D(0)**2 + xi*D(k(x1-x2)/z)**2 + D(k(x1+x2)/z)**2)``
    with ``D`` the slit spectrum.  Broadcasts over ``x1`` and ``x2``."""
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    s0 = slit_spectrum(0.0, slits) ** 2
    s_minus = slit_spectrum(det.spatial_frequency(x1 - x2), slits) ** 2
    s_plus = slit_spectrum(det.spatial_frequency(x1 + x2), slits) ** 2
    out = abs(coeffs.f2) ** 2 * (coeffs.xi * s0 + coeffs.xi * s_minus + s_plus)
    return float(out) if out.ndim == 0 else out


def q_window(scene: SpdcScene) -> float:
    """Initial half-width of the ``q`` window.

    The larger of the gain extent ``q0*sqrt(delta0 + 2g*tail_cut)`` and
    an aperture guard ``4pi*tail_cut/b``.
    """
    c, tc = scene.crystal, scene.quad.tail_cut
    return max(c.q0 * math.sqrt(max(0.0, c.delta0 + 2 * c.g * tc)), 4 * math.pi * tc / scene.slits.b)


class _GainMoments:
    """Frequency-integrated gain ``W(q)``, ``P(q)`` with a per-call cache.

    The adaptive pass and the final shared rule visit the same nodes, so
    the expensive moments are computed once.
    """

    def __init__(self, scene: SpdcScene):
        c = scene.crystal
        self.crystal = c
        self.spec = scene.quad.tightened(100).replace(abs_tol=1e-15)
        self.phase = np.exp(-1j * c.delta0)
        self._q = np.empty(0)
        self._wp = np.empty((0, 2), dtype=complex)

    def __call__(self, q: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        q = np.asarray(q, dtype=float)
        out = np.empty((len(q), 2), dtype=complex)
        if len(self._q):
            pos = np.minimum(np.searchsorted(self._q, q), len(self._q) - 1)
            hit = self._q[pos] == q
            out[hit] = self._wp[pos[hit]]
        else:
            hit = np.zeros(len(q), dtype=bool)
        miss = ~hit
        if np.any(miss):
            c = self.crystal
            delta_eff = c.delta0 - (q[miss] / c.q0) ** 2
            vals, _ = frequency_moments(delta_eff, c.g, self.spec)
            vals[:, 0] = vals[:, 0].real
            vals[:, 1] *= self.phase
            out[miss] = vals * c.omega0
            q_all = np.concatenate([self._q, q[miss]])
            wp_all = np.concatenate([self._wp, out[miss]])
            order = np.argsort(q_all, kind="stable")
            self._q, self._wp = q_all[order], wp_all[order]
        return out[:, 0].real, out[:, 1]


@dataclass(frozen=True)
class CorrelationMatrices:
    """``M`` and ``N`` kernels on all pairs of a set of positions.

    Attributes
    ----------
    positions : ndarray, shape (n,)
    m : ndarray, shape (n, n)
        Hermitian.
    n : ndarray, shape (n, n)
        Symmetric.
    error_estimate : float
        Estimated absolute error, max-norm over the diagonal entries.
    q_max : float
        Final half-width of the ``q`` window.
    """

    positions: np.ndarray
    m: np.ndarray
    n: np.ndarray
    error_estimate: float
    q_max: float

    def index(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        idx = np.searchsorted(self.positions, x)
        idx = np.minimum(idx, len(self.positions) - 1)
        if not np.all(self.positions[idx] == x):
            raise KeyError("position not among those the kernels were computed for")
        return idx

    def g2(self, x1, x2):
        """``M11*M22 + |M12|**2 + |N12|**2`` for positions in ``positions``."""
        i, j = self.index(x1), self.index(x2)
        diag = self.m.diagonal().real
        out = diag[i] * diag[j] + np.abs(self.m[i, j]) ** 2 + np.abs(self.n[i, j]) ** 2
        return float(out) if out.ndim == 0 else out


def _kernels(q, xs, scene):
    d_plus = aperture_kernel(q[:, None], xs[None, :], scene.slits, scene.det)
    d_minus = aperture_kernel(-q[:, None], xs[None, :], scene.slits, scene.det)
    return d_plus, d_minus


def _panels(moments, xs, scene, lo, hi, spec):
    """Adaptive panels on ``[lo, hi]`` for the symmetrised diagonal integrands."""
    h = math.pi / (scene.slits.d + scene.slits.b)
    breaks = np.arange(lo, hi, h)[1:]

    def integrand(q):
        w, p = moments(q)
        dp, dm = _kernels(q, xs, scene)
        m_diag = w[:, None] * (np.abs(dp) ** 2 + np.abs(dm) ** 2)
        n_diag = 2 * p[:, None] * dp * dm
        return np.concatenate([m_diag, n_diag], axis=1)

    res, panels = adaptive_panels(integrand, lo, hi, spec, vectorized=True, breakpoints=breaks)
    return np.asarray(res.value), res.error_estimate, panels


def _accumulate(moments, xs, scene, panels, weight):
    """``weight * (M, N)`` over the shared rule on ``panels``."""
    nodes, wts = kronrod_rule(panels)
    n_x = len(xs)
    m = np.zeros((n_x, n_x), dtype=complex)
    n = np.zeros((n_x, n_x), dtype=complex)
    for start in range(0, len(nodes), _BLOCK):
        q = nodes[start:start + _BLOCK]
        w_q = wts[start:start + _BLOCK] * weight
        w, p = moments(q)
        dp, dm = _kernels(q, xs, scene)
        cw = (w_q * w)[:, None]
        m += (cw * dp).T @ dp.conj() + (cw * dm).T @ dm.conj()
        cp = (w_q * p)[:, None]
        half = (cp * dp).T @ dm
        n += half + half.T
    return m, n


def correlation_matrices(xs, scene: SpdcScene) -> CorrelationMatrices:
    """``M(x_m, x_n)`` and ``N(x_m, x_n)`` for every pair of ``xs``.

    ``M = k/((2pi)**2 z) * int int |V|**2 K(q, x_m) conj(K(q, x_n)) dq dw``
    and ``N = k/((2pi)**2 z) * int int V U(-q, -w) K(q, x_m) K(-q, x_n) dq dw``
    with ``K`` the Fresnel aperture kernel.

    The ``q`` axis is folded onto ``q >= 0``.  Panels are refined
    adaptively against the diagonal entries ``M(x, x)`` and ``N(x, x)``
    and the resulting rule is reused for every pair.  The window starts
    at :func:`q_window` and is doubled; since the integrands fall off as
    ``q**-3`` the truncation error scales as ``Q**-2``, and the value is
    Richardson-extrapolated from the last two windows.  Doubling stops
    when two successive extrapolations agree to ``scene.quad``.

    Raises
    ------
    DegenerateGain
        For ``g = 0``, where both kernels vanish identically.
    NonConvergent
        If the window or the panel budget runs out.
    """
    _require_gain(scene.crystal)
    xs = np.unique(np.asarray(xs, dtype=float).ravel())
    if xs.size == 0:
        raise ValueError("need at least one position")
    if not np.all(np.isfinite(xs)):
        raise ValueError("positions must be finite")
    spec = scene.quad
    moments = _GainMoments(scene)
    pref = scene.det.k / ((2 * math.pi) ** 2 * scene.det.z)

    Q = q_window(scene)
    core, core_err, core_panels = _panels(moments, xs, scene, 0.0, Q, spec)
    shells, shell_panels = [], []
    total = core
    quad_err = core_err
    prev_extrap = None
    # shells are small next to the core; hold them to a share of its tolerance
    shell_spec = spec.replace(abs_tol=max(spec.abs_tol, spec.rel_tol * float(np.max(np.abs(core)))) / 4)
    for level in range(1, MAX_DOUBLINGS + 1):
        value, err, panels = _panels(moments, xs, scene, Q, 2 * Q, shell_spec)
        Q *= 2
        shells.append(value)
        shell_panels.append(panels)
        total = total + value
        quad_err += err
        extrap = total + value / 3
        if prev_extrap is not None:
            trunc_err = float(np.max(np.abs(extrap - prev_extrap)))
            tol = max(spec.abs_tol, spec.rel_tol * float(np.max(np.abs(extrap))))
            if trunc_err + quad_err <= tol:
                break
        prev_extrap = extrap
    else:
        raise NonConvergent(
            f"q window reached {Q:.4g} without the correlation kernels settling "
            f"(error {trunc_err + quad_err:.3g} > tolerance {tol:.3g})")

    m = np.zeros((len(xs), len(xs)), dtype=complex)
    n = np.zeros_like(m)
    # the last shell carries the 4/3 Richardson weight
    parts = [(core_panels, 1.0)] + [(p, 1.0) for p in shell_panels[:-1]] + [(shell_panels[-1], 4.0 / 3.0)]
    for panels, weight in parts:
        dm_, dn_ = _accumulate(moments, xs, scene, panels, weight)
        m += dm_
        n += dn_
    m = 0.5 * (m + m.conj().T) * pref
    n = 0.5 * (n + n.T) * pref
    err = (trunc_err + quad_err) * pref
    return CorrelationMatrices(positions=xs, m=m, n=n, error_estimate=err, q_max=Q)


def m_kernel(x_m: float, x_n: float, scene: SpdcScene) -> complex:
    """``M(x_m, x_n)``; Hermitian in its two arguments."""
    mats = correlation_matrices([x_m, x_n], scene)
    i, j = mats.index([x_m, x_n])
    return complex(mats.m[i, j])


def n_kernel(x_m: float, x_n: float, scene: SpdcScene) -> complex:
    """``N(x_m, x_n)``; symmetric in its two arguments."""
    mats = correlation_matrices([x_m, x_n], scene)
    i, j = mats.index([x_m, x_n])
    return complex(mats.n[i, j])


def g2_full(x1: float, x2: float, scene: SpdcScene) -> float:
    """``G2(x1, x2) = M(x1, x1) M(x2, x2) + |M(x1, x2)|**2 + |N(x1, x2)|**2``."""
    return correlation_matrices([x1, x2], scene).g2(x1, x2)


def g2_full_pairs(x1, x2, scene: SpdcScene) -> np.ndarray:
    """:func:`g2_full` on many pairs at once, sharing one quadrature rule."""
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    x1, x2 = np.broadcast_arrays(x1, x2)
    mats = correlation_matrices(np.concatenate([x1.ravel(), x2.ravel()]), scene)
    return np.asarray(mats.g2(x1, x2), dtype=float)
