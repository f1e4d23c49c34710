"""Frequency integrals of the OPA gain functions.

Everything here depends on ``omega`` only through the mismatch
``delta = Delta + t**2`` with ``t = omega/omega0`` and an effective
phase-matching offset ``Delta = delta0 - (q/q0)**2``.  With the
propagation phase removed the two integrands are

    |v|**2          with v = g*sinh(G)/G
    v*u             with u = cosh(G) + 1j*delta/2 * sinh(G)/G

Both decay only algebraically in ``t`` (``v*u`` carries a non-oscillating
``1j*g/delta`` piece), so a plain cut-off converges far too slowly.
Beyond ``t = T`` each integrand is split, exactly, into a smooth part and
two parts proportional to ``exp(+-1j*w)``, ``w = sqrt(delta**2 - 4g**2)``.
The smooth part is integrated after the substitution ``w = W0/s**2``;
the oscillating parts are integrated along rays ``w = W0 +- 1j*y`` on
which ``exp(+-1j*w)`` decays like ``exp(-y)``.
"""
from __future__ import annotations

import math

import numpy as np

from .errors import NonConvergent
from .opa_gain import sinhc
from .quadrature import WG15, WK15, XK15, QuadSpec

__all__ = [
    "stripped_integrands",
    "tail_start",
    "tail_integrals",
    "frequency_moments",
]

# mismatch spacing of the initial panels on the finite part
PANEL_WIDTH = 0.5
# ray panels in y; exp(-y) is below 1e-19 past the last edge
_RAY_EDGES = np.array([0, 0.5, 1, 2, 3, 4, 6, 8, 11, 15, 20, 27, 36, 45], dtype=float)
_SQRT_RAY_EDGES = np.array([0, 0.25, 0.5, 0.75, 1, 1.5, 2, 2.5, 3, 3.5, 4, 5, 6.5], dtype=float)
# smooth tail: panels geometric in w out to this multiple of max(|Delta|, W0)
_SMOOTH_REACH = 1e3
_SMOOTH_PANELS = 16


def stripped_integrands(delta, g):
    """``(|v|**2, v*u)`` at mismatch ``delta`` with the phase ``theta`` removed."""
    delta = np.asarray(delta, dtype=float)
    G = np.sqrt((g * g - delta * delta / 4).astype(complex))
    sc = sinhc(G)
    v = g * sc
    u = np.cosh(G) + 0.5j * delta * sc
    return np.abs(v) ** 2, v * u


def tail_start(delta_eff, g, tail_cut):
    """Normalised frequency ``T`` where the tail treatment takes over.

    Same rule as :func:`~spdc_litho.quadrature.truncate_omega_domain`:
    ``T**2 = max(0, 2*g*tail_cut - Delta) + tail_cut``.
    """
    delta_eff = np.asarray(delta_eff, dtype=float)
    return np.sqrt(np.maximum(0.0, 2 * g * tail_cut - delta_eff) + tail_cut)


def _tail_pieces(w, delta_eff, g, branch=1):
    """Coefficients ``(A, B, C)`` of ``1, exp(1j*w), exp(-1j*w)`` times ``dt/dw``.

    ``branch=+1`` is the region ``delta > 2g``, ``branch=-1`` the region
    ``delta < -2g``.  Returns arrays with a trailing axis of length 2 for
    the two integrands.  ``w`` may be complex (points on deformed contours).
    """
    d = branch * np.sqrt(w * w + 4 * g * g)
    t = np.sqrt(d - delta_eff)
    jac = w / (2 * t * d)
    inv_w = 1 / w
    inv_w2 = inv_w * inv_w
    a = np.stack([2 * g * g * inv_w2, 1j * g * d * inv_w2], axis=-1)
    b = np.stack([-g * g * inv_w2, -0.5j * g * inv_w - 0.5j * g * d * inv_w2], axis=-1)
    c = np.stack([-g * g * inv_w2, 0.5j * g * inv_w - 0.5j * g * d * inv_w2], axis=-1)
    jac = jac[..., None]
    return a * jac, b * jac, c * jac


def _gk_panels(fun, lo, hi):
    """Gauss-Kronrod sums on panels ``[lo, hi]`` (arrays of shape ``(n, p)``).

    ``fun`` maps node arrays of shape ``(n, p, 15)`` to values of shape
    ``(n, p, 15, m)``.  Returns per-row integrals ``(n, m)`` and per-row
    error estimates ``(n,)``.
    """
    centre = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    nodes = centre[..., None] + half[..., None] * XK15
    vals = fun(nodes)
    kron = np.einsum("k,npkm->npm", WK15, vals) * half[..., None]
    gauss = np.einsum("k,npkm->npm", WG15, vals) * half[..., None]
    err = np.abs(kron - gauss).max(axis=-1).sum(axis=1)
    return kron.sum(axis=1), err


def _rows(edges, n):
    return (np.broadcast_to(edges[:-1], (n, len(edges) - 1)),
            np.broadcast_to(edges[1:], (n, len(edges) - 1)))


def _ray(w_start, delta_eff, g, branch, piece, direction, singular=False):
    """``int_0^inf f(w_start + direction*1j*y) exp(-y) dy`` for one tail piece.

    With ``singular=True`` the substitution ``y = u**2`` absorbs the
    inverse-square-root behaviour of ``dt/dw`` where ``t`` vanishes.
    """
    n = len(w_start)
    w0 = w_start[:, None, None]
    de = delta_eff[:, None, None]
    if singular:
        lo, hi = _rows(_SQRT_RAY_EDGES, n)

        def fun(u):
            pieces = _tail_pieces(w0 + direction * 1j * u * u, de, g, branch)
            return pieces[piece] * (2 * u * np.exp(-u * u))[..., None]
    else:
        lo, hi = _rows(_RAY_EDGES, n)

        def fun(y):
            pieces = _tail_pieces(w0 + direction * 1j * y, de, g, branch)
            return pieces[piece] * np.exp(-y)[..., None]

    return _gk_panels(fun, lo, hi)


def _contour_pair(w_start, delta_eff, g, branch, singular=False):
    """``int_{w_start}^inf (B e^{iw} + C e^{-iw}) dt/dw dw`` along rays."""
    vb, eb = _ray(w_start, delta_eff, g, branch, 1, +1, singular)
    vc, ec = _ray(w_start, delta_eff, g, branch, 2, -1, singular)
    phase = np.exp(1j * w_start)[:, None]
    return 1j * phase * vb - 1j * np.conj(phase) * vc, eb + ec


def tail_integrals(delta_eff, g, T):
    """``int_T^inf`` of both stripped integrands, vectorised over ``Delta``.

    Returns ``(values, errors)`` with ``values`` of shape ``(n, 2)``.
    Requires ``Delta + T**2 > 2g`` so that the tail lies beyond the gain
    region.
    """
    delta_eff = np.atleast_1d(np.asarray(delta_eff, dtype=float))
    T = np.broadcast_to(np.asarray(T, dtype=float), delta_eff.shape)
    d_T = delta_eff + T * T
    if np.any(d_T <= 2 * g):
        raise ValueError("tail must start beyond the gain region")
    w0 = np.sqrt(d_T * d_T - 4 * g * g)
    n = len(delta_eff)
    de = delta_eff[:, None, None]
    w0n = w0[:, None, None]

    # smooth part: w = W0/s**2, dw = 2*W0/s**3 ds
    def smooth(s):
        a, _, _ = _tail_pieces(w0n / (s * s), de, g)
        return a * (2 * w0n / (s * s * s))[..., None]

    # the integrand changes character where delta ~ |Delta|, so the panels
    # follow w geometrically past that scale before a last panel to s = 0
    reach = _SMOOTH_REACH * np.maximum(np.abs(delta_eff), w0) / w0
    frac = np.linspace(0.0, 1.0, _SMOOTH_PANELS + 1)
    s_edges = reach[:, None] ** (-0.5 * frac)
    s_edges = np.concatenate([s_edges, np.zeros((n, 1))], axis=1)
    va, ea = _gk_panels(smooth, s_edges[:, 1:], s_edges[:, :-1])
    vo, eo = _contour_pair(w0, delta_eff, g, +1)
    return va + vo, ea + eo


def _head_integrals(delta_eff, g, delta_c):
    """``int_0^{t_c}`` where ``Delta + t**2`` runs from ``Delta`` up to ``-delta_c``.

    Only meaningful for ``Delta < -delta_c``: the whole stretch lies in the
    oscillating region on the negative-mismatch side, so it gets the same
    smooth/oscillating split as the tail.  The oscillating parts are moved
    onto rays leaving both ends of the stretch; the ray from ``t = 0``
    starts on the inverse-square-root point of ``dt/dw``.
    """
    n = len(delta_eff)
    w_far = np.sqrt(delta_eff * delta_eff - 4 * g * g)
    w_near = np.full(n, math.sqrt(delta_c * delta_c - 4 * g * g))
    # smooth part directly in t, panels geometric in |delta|
    ratio = -delta_eff / delta_c
    n_pan = max(2, int(math.ceil(math.log(float(ratio.max())) / math.log(1.25))) + 1)
    frac = np.linspace(0.0, 1.0, n_pan + 1)
    mag = delta_c * ratio[:, None] ** (1 - frac)
    t_edges = np.sqrt(np.maximum(0.0, -mag - delta_eff[:, None]))
    t_edges[:, 0] = 0.0
    de = delta_eff[:, None, None]

    def smooth(t):
        dl = de + t * t
        w = np.sqrt(dl * dl - 4 * g * g)
        inv_w2 = 1 / (w * w)
        return np.stack([2 * g * g * inv_w2 + 0j, 1j * g * dl * inv_w2], axis=-1)

    va, ea = _gk_panels(smooth, t_edges[:, :-1], t_edges[:, 1:])
    # int_0^{t_c} = int_{w_far}^{w_near} = (ray at w_near) - (ray at w_far), reversed
    v_near, e_near = _contour_pair(w_near, delta_eff, g, -1)
    v_far, e_far = _contour_pair(w_far, delta_eff, g, -1, singular=True)
    return va + v_far - v_near, ea + e_near + e_far


def _mid_integrals(delta_eff, t_lo, T, g, n_panels):
    """``int_{t_lo}^T`` of both stripped integrands, panels uniform in mismatch."""
    frac = np.linspace(0.0, 1.0, n_panels + 1)
    d_lo = (delta_eff + t_lo * t_lo)[:, None]
    d_hi = (delta_eff + T * T)[:, None]
    t_edges = np.sqrt(np.maximum(0.0, d_lo + (d_hi - d_lo) * frac - delta_eff[:, None]))
    t_edges[:, 0] = t_lo
    t_edges[:, -1] = T
    de = delta_eff[:, None, None]

    def fun(t):
        f1, f2 = stripped_integrands(de + t * t, g)
        return np.stack([f1 + 0j, f2], axis=-1)

    return _gk_panels(fun, t_edges[:, :-1], t_edges[:, 1:])


def frequency_moments(delta_eff, g, spec: QuadSpec, *, max_nodes=200_000):
    """``int dt |v|**2`` and ``int dt v*u`` over the whole line, per ``Delta``.

    The line is split at ``|delta| = (2g + 1)*tail_cut``: inside, panels of
    width 0.5 in mismatch (halved until the error estimate passes); outside,
    the smooth/oscillating split with contour rotation.  The cost per offset
    is therefore bounded independently of ``Delta``.

    Parameters
    ----------
    delta_eff : array_like
        Effective offsets ``Delta``.
    g : float
        Coupling strength.
    spec : QuadSpec
        ``rel_tol``/``abs_tol`` apply per offset to both moments (max-norm).

    Returns
    -------
    values : ndarray, shape (n, 2)
        Complex moments; the first column is real and non-negative.
    errors : ndarray, shape (n,)
        Error estimates.
    """
    delta_eff = np.atleast_1d(np.asarray(delta_eff, dtype=float))
    tc = spec.tail_cut
    delta_c = (2 * g + 1) * tc
    out = np.empty((len(delta_eff), 2), dtype=complex)
    errs = np.empty(len(delta_eff))
    order = np.argsort(delta_eff)
    base_panels = int(math.ceil(3 * delta_c / PANEL_WIDTH))
    chunk = max(1, max_nodes // (15 * base_panels))
    for start in range(0, len(order), chunk):
        idx = order[start:start + chunk]
        de = delta_eff[idx]
        T = tail_start(de, g, tc)
        val, err = tail_integrals(de, g, T)
        # the head needs its rays well separated from the t = 0 branch point
        head = de < -2 * delta_c
        t_lo = np.where(head, np.sqrt(np.maximum(0.0, -delta_c - de)), 0.0)
        if np.any(head):
            hv, he = _head_integrals(de[head], g, delta_c)
            val[head] += hv
            err[head] += he
        span = float(np.max(T * T - t_lo * t_lo))
        n_panels = int(math.ceil(span / PANEL_WIDTH))
        while True:
            mv, me = _mid_integrals(de, t_lo, T, g, n_panels)
            total = 2 * (val + mv)
            total_err = 2 * (err + me)
            tol = np.maximum(spec.abs_tol, spec.rel_tol * np.abs(total).max(axis=1))
            if np.all(total_err <= tol):
                break
            n_panels *= 2
            if n_panels > spec.max_subdivisions * 64:
                raise NonConvergent(
                    f"frequency moments at Delta in [{de.min():.4g}, {de.max():.4g}] "
                    f"did not reach tolerance {tol.max():.3g}")
        out[idx] = total
        errs[idx] = total_err
    return out, errs
