"""Two-photon fringes behind a double slit, next to the classical pattern.

Run with ``python demos/two_photon_fringes.py``.  Prints a coarse table
of both patterns and the fringe periods read off each.
"""
import math

import numpy as np

from spdc_litho import (
    CrystalParams,
    DetectionGeometry,
    FringeScan,
    SlitGeometry,
    SpdcScene,
    classical_g1,
    diagonal_scan,
    fringe_period,
    null_position,
)

# %%
# Slits of width b = 1 separated by d = 5, detector deep in the far field.
# The crystal bandwidth q0 is 100/d, far wider than the slit spectrum.
b, d, k = 1.0, 5.0, 1.0
slits = SlitGeometry(b, d)
det = DetectionGeometry(k, 1e4 * k * d * d)
scene = SpdcScene(CrystalParams(g=1.0, q0=100 / d), slits, det)

x0 = null_position(slits, det)
xs = np.linspace(-10 * x0, 10 * x0, 2001)

# %%
# Both photons land at the same point x.  The pair term oscillates with
# 2kxd/z, twice as fast as single-photon interference.
pairs = diagonal_scan(xs, scene)
light = FringeScan(xs, classical_g1(xs, 1.0, slits, det), "classical_g1")

print(f"{'x/x0':>8} {'G2(x,x)':>12} {'classical':>12}")
for i in range(0, len(xs), 100):
    print(f"{xs[i] / x0:8.2f} {pairs.values[i] / pairs.values.max():12.4f} "
          f"{light.values[i] / light.values.max():12.4f}")

# %%
# Period of each pattern.  The two-photon fringes sit at (lambda/2)(z/d).
wavelength = 2 * math.pi / k
p_pairs, p_light = fringe_period(pairs), fringe_period(light)
print(f"\ntwo-photon period  {p_pairs:.6g}  (lambda/2 * z/d = {wavelength / 2 * det.z / d:.6g})")
print(f"classical period   {p_light:.6g}  (lambda * z/d     = {wavelength * det.z / d:.6g})")
print(f"ratio              {p_pairs / p_light:.4f}")
