"""How the coupling strength trades fringe visibility between detection schemes.

One two-photon detector sees the diagonal G2(x, x); two single-photon
detectors placed symmetrically see G2(x, -x).  The ratio
xi = |f1/f2|**2 of the two frequency integrals fixes both visibilities.

Run with ``python demos/visibility_tradeoff.py``.
"""
import numpy as np

from spdc_litho import CrystalParams, DetectionGeometry, SlitGeometry, SpdcScene, gain_sweep, visibility_formula

b, d, k = 1.0, 5.0, 1.0
template = SpdcScene(CrystalParams(g=1.0, q0=100 / d), SlitGeometry(b, d), DetectionGeometry(k, 1e4 * k * d * d))

# %%
# Weak coupling gives xi ~ g**2: almost only pairs, so the diagonal
# fringes are nearly perfect while the symmetric-detector fringes vanish.
# Stronger coupling adds uncorrelated photons and xi settles close to 1,
# where both schemes show 20% visibility.
for delta0 in (0.0, 2.0, -2.0):
    print(f"\ndelta0 = {delta0:+g}")
    print(f"{'g':>6} {'xi':>10} {'V diagonal':>12} {'V symmetric':>12} {'|f2|^2':>12}")
    for row in gain_sweep(np.linspace(0.25, 6.0, 24), delta0, template):
        print(f"{row.g:6.2f} {row.xi:10.4f} {visibility_formula(row.xi, 'diagonal'):12.4f} "
              f"{visibility_formula(row.xi, 'antidiagonal'):12.4f} {row.f2sq:12.4e}")
