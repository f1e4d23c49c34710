"""Checking the closed-form broadband pattern against full kernel quadrature.

The broadband form freezes the gain at q = 0 inside the aperture
integrals.  Here the full q-resolved correlation kernels are computed
for a few crystal bandwidths and compared along the diagonal scan.
Each full scan takes 10 to 30 seconds.

Run with ``python demos/full_vs_broadband.py``.
"""
import time

import numpy as np

from spdc_litho import CrystalParams, DetectionGeometry, SlitGeometry, SpdcScene, diagonal_scan, null_position

b, d, k = 1.0, 5.0, 1.0
slits = SlitGeometry(b, d)
det = DetectionGeometry(k, 1e4 * k * d * d)
xs = np.linspace(0, 4 * null_position(slits, det), 21)

# %%
# A narrow bandwidth (q0*d of order one) filters the slit spectrum and
# washes the fringes out; as q0*d grows the two evaluations converge.
print(f"{'q0*d':>6} {'sup rel. deviation':>20} {'seconds':>8}")
for q0d in (3.0, 10.0, 30.0, 100.0):
    scene = SpdcScene(CrystalParams(g=1.84, q0=q0d / d), slits, det)
    start = time.perf_counter()
    full = diagonal_scan(xs, scene, mode="full").values
    elapsed = time.perf_counter() - start
    closed = diagonal_scan(xs, scene).values
    dev = np.max(np.abs(full - closed)) / np.max(closed)
    print(f"{q0d:6g} {dev:20.4f} {elapsed:8.1f}")
