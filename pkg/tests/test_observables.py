import math

import numpy as np
import pytest

from spdc_litho.aperture import DetectionGeometry, SlitGeometry, slit_spectrum
from spdc_litho.correlator import SpdcScene, f_integrals, g2_broadband, g2_full_pairs
from spdc_litho.errors import DegenerateGain, InsufficientSpan
from spdc_litho.observables import (
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
from spdc_litho.opa_gain import CrystalParams


def make_scene(g=1.0, delta0=0.0, d=5.0, z_ratio=1e4, q0d=100.0):
    b, k = 1.0, 1.0
    return SpdcScene(CrystalParams(g=g, delta0=delta0, q0=q0d / d), SlitGeometry(b, d),
                     DetectionGeometry(k, z_ratio * k * d * d))


def test_geometry_helpers():
    scene = make_scene()
    x0 = null_position(scene.slits, scene.det)
    assert x0 == pytest.approx(math.pi * 2.5e5 / 10)
    assert slit_spectrum(scene.det.spatial_frequency(2 * x0), scene.slits) == pytest.approx(0, abs=1e-16)
    assert normalized_position(2 * math.pi * scene.det.z, scene.slits, scene.det) == pytest.approx(1.0)


def test_scans_follow_closed_form():
    scene = make_scene(g=1.84)
    coeffs = f_integrals(scene)
    xs = np.linspace(-3, 3, 31) * null_position(scene.slits, scene.det)
    diag = diagonal_scan(xs, scene)
    anti = antidiagonal_scan(xs, scene)
    assert np.allclose(diag.values, g2_broadband(xs, xs, coeffs, scene.slits, scene.det), rtol=1e-15)
    assert np.allclose(anti.values, g2_broadband(xs, -xs, coeffs, scene.slits, scene.det), rtol=1e-15)
    assert diag.values[15] == pytest.approx(anti.values[15], rel=1e-15)
    assert diag.kind == "diagonal" and anti.kind == "antidiagonal"
    info = diag.normalization
    assert info["mode"] == "broadband" and info["proportionality"] == 1.0
    assert info["xi"] == coeffs.xi and info["q0_d"] == pytest.approx(100)


def test_full_mode_scan_uses_kernel_quadrature():
    scene = make_scene(g=1.0, delta0=0.5, d=2.5, z_ratio=1.0, q0d=50.0)
    xs = np.array([-1.0, 0.5, 2.0])
    scan = antidiagonal_scan(xs, scene, mode="full")
    assert scan.normalization["mode"] == "full" and "xi" not in scan.normalization
    assert np.allclose(scan.values, g2_full_pairs(xs, -xs, scene), rtol=1e-12)


def test_bad_mode_rejected():
    with pytest.raises(ValueError):
        diagonal_scan([0.0], make_scene(), mode="exact")


def test_visibility_formula_values():
    assert visibility_formula(1.0, "diagonal") == pytest.approx(0.2, abs=1e-15)
    assert visibility_formula(1.0, "antidiagonal") == pytest.approx(0.2, abs=1e-15)
    assert visibility_formula(0.0, "diagonal") == 1.0
    assert visibility_formula(1e12, "antidiagonal") == pytest.approx(1 / 3)
    with pytest.raises(DegenerateGain):
        visibility_formula(0.0, "antidiagonal")
    with pytest.raises(ValueError):
        visibility_formula(1.0, "other")
    with pytest.raises(ValueError):
        visibility_formula(-1.0, "diagonal")


@pytest.mark.parametrize("g", [0.3, 1.0, 1.84, 4.0])
def test_visibility_read_off_matches_formula(g):
    scene = make_scene(g=g)
    x0 = null_position(scene.slits, scene.det)
    xs = np.linspace(0, 2 * x0, 41)
    for scan in (diagonal_scan(xs, scene), antidiagonal_scan(xs, scene)):
        rep = visibility_report(scan, scene)
        assert abs(rep.v_extracted - rep.v_formula) <= 1e-12
        assert rep.strength > 0


def test_visibility_between_samples_uses_spline():
    scene = make_scene(g=1.0)
    x0 = null_position(scene.slits, scene.det)
    xs = np.linspace(-0.013, 1.3, 400) * x0
    scan = diagonal_scan(xs, scene)
    assert visibility_from_scan(scan, scene) == pytest.approx(
        visibility_formula(f_integrals(scene).xi, "diagonal"), rel=1e-6)


def test_visibility_needs_span():
    scene = make_scene()
    x0 = null_position(scene.slits, scene.det)
    scan = diagonal_scan(np.linspace(0, 0.8 * x0, 20), scene)
    with pytest.raises(InsufficientSpan):
        visibility_from_scan(scan, scene)


def test_container_validation():
    with pytest.raises(ValueError):
        FringeScan([0, 1], [1, 1], "sideways")
    with pytest.raises(ValueError):
        FringeScan([1, 0], [1, 1], "diagonal")
    with pytest.raises(ValueError):
        FringeScan([0, 1], [1, np.nan], "diagonal")
    with pytest.raises(ValueError):
        FringeScan([0, 1], [1, -1], "diagonal")
    with pytest.raises(ValueError):
        VisibilityReport(1.2, 0.5, 1.0, 1.0)


def test_fringe_period_of_synthetic_cosine():
    period = 0.37
    x = np.linspace(0, 3, 301)
    scan = FringeScan(x, 1 + np.cos(2 * np.pi * x / period), "grid_row")
    assert fringe_period(scan) == pytest.approx(period, rel=1e-3)
    with pytest.raises(InsufficientSpan):
        fringe_period(FringeScan(x[:60], 1 + np.cos(2 * np.pi * x[:60] / period), "grid_row"))


def test_two_photon_fringes_are_half_the_classical_ones():
    scene = make_scene(g=1.0)
    x0 = null_position(scene.slits, scene.det)
    xs = np.linspace(-10 * x0, 10 * x0, 2001)
    quantum = fringe_period(diagonal_scan(xs, scene))
    g1 = classical_g1(xs, 1.0, scene.slits, scene.det)
    classical = fringe_period(FringeScan(xs, g1, "classical_g1"))
    wavelength = 2 * math.pi / scene.det.k
    assert quantum == pytest.approx(wavelength / 2 * scene.det.z / scene.slits.d, rel=1e-2)
    assert quantum / classical == pytest.approx(0.5, rel=1e-2)


def test_classical_intensity():
    slits, det = SlitGeometry(1.0, 5.0), DetectionGeometry(2.0, 50.0)
    s0 = slit_spectrum(0.0, slits) ** 2
    assert classical_g1(0.0, 3.0, slits, det) == pytest.approx(2 / (4 * math.pi ** 2 * 50) * 3 * s0)
    x = np.linspace(-20, 20, 9)
    prod = classical_g1(x, 2.0, slits, det)[:, None] * classical_g1(x, 2.0, slits, det)[None, :]
    assert np.allclose(classical_g2(x[:, None], x[None, :], 2.0, slits, det), prod, rtol=1e-15)
    with pytest.raises(ValueError):
        classical_g1(0.0, -1.0, slits, det)


def test_gain_sweep_rows():
    template = make_scene()
    rows = gain_sweep([0.5, 1.0, 2.0], 2.0, template)
    assert [r.g for r in rows] == [0.5, 1.0, 2.0]
    for r in rows:
        co = f_integrals(make_scene(g=r.g, delta0=2.0))
        assert r.delta0 == 2.0
        assert r.xi == co.xi and r.f1sq == co.f1 ** 2 and r.f2sq == abs(co.f2) ** 2
    for bad in ([], [0.0, 1.0], [2.0, 1.0]):
        with pytest.raises(ValueError):
            gain_sweep(bad, 0.0, template)
