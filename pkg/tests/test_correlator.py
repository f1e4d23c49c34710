import math

import numpy as np
import pytest

from spdc_litho.aperture import DetectionGeometry, SlitGeometry, slit_spectrum
from spdc_litho.correlator import (
    BroadbandCoefficients,
    SpdcScene,
    correlation_matrices,
    f_integrals,
    g2_broadband,
    g2_full,
    m_kernel,
    n_kernel,
)
from spdc_litho.errors import DegenerateGain
from spdc_litho.opa_gain import CrystalParams


def far_field_scene(g=1.0, delta0=0.0, q0d=100.0, group_delay=0.0):
    b, d, k = 1.0, 5.0, 1.0
    crystal = CrystalParams(g=g, delta0=delta0, q0=q0d / d, group_delay=group_delay)
    return SpdcScene(crystal, SlitGeometry(b, d), DetectionGeometry(k, 1e4 * k * d * d))


@pytest.fixture(scope="module")
def oracle_scene(oracle):
    c = oracle["correlation"]
    crystal = CrystalParams(g=c["g"], delta0=c["delta0"], q0=c["q0"], omega0=c["omega0"])
    return SpdcScene(crystal, SlitGeometry(c["b"], c["d"]), DetectionGeometry(c["k"], c["z"]))


@pytest.fixture(scope="module")
def oracle_matrices(oracle, oracle_scene):
    c = oracle["correlation"]
    return correlation_matrices([c["xm"], c["xn"]], oracle_scene)


def test_f_integrals_against_dense_grid(oracle):
    scene = far_field_scene()
    pref = scene.det.k / ((2 * math.pi) ** 1.5 * scene.det.z)
    for case in oracle["gain"]:
        sc = far_field_scene(g=case["g"], delta0=case["delta0"])
        coeffs = f_integrals(sc)
        f2 = pref * np.exp(-1j * case["delta0"]) * complex(case["j2_re"], case["j2_im"])
        assert abs(coeffs.f1 - pref * case["j1"]) <= 1e-6 * coeffs.f1
        assert abs(coeffs.f2 - f2) <= 1e-6 * abs(f2)
        assert abs(coeffs.xi - case["xi"]) <= 1e-6 * case["xi"]


def test_group_delay_leaves_magnitudes_unchanged():
    ref = f_integrals(far_field_scene(g=2.0, delta0=1.0))
    for gd in (1.0, 10.0):
        c = f_integrals(far_field_scene(g=2.0, delta0=1.0, group_delay=gd))
        assert abs(c.f1 - ref.f1) <= 1e-8 * ref.f1
        assert abs(abs(c.f2) - abs(ref.f2)) <= 1e-8 * abs(ref.f2)


def test_weak_coupling_scaling():
    a = f_integrals(far_field_scene(g=1e-3))
    b = f_integrals(far_field_scene(g=2e-3))
    assert b.f1 / a.f1 == pytest.approx(4, rel=1e-5)
    assert abs(b.f2) / abs(a.f2) == pytest.approx(2, rel=1e-5)
    assert b.xi / a.xi == pytest.approx(4, rel=1e-5)


def test_zero_coupling_is_degenerate():
    scene = far_field_scene(g=0.0)
    with pytest.raises(DegenerateGain):
        f_integrals(scene)
    with pytest.raises(DegenerateGain):
        correlation_matrices([0.0], scene)


def test_scene_type_checks():
    scene = far_field_scene()
    with pytest.raises(TypeError):
        SpdcScene(scene.crystal, scene.slits, scene.det, quad=1e-6)
    assert scene.broadband_ratio == pytest.approx(100)


def test_coefficient_validation():
    with pytest.raises(ValueError):
        BroadbandCoefficients(f1=-1.0, f2=1.0, xi=1.0)


def test_g2_broadband_values():
    slits = SlitGeometry(1.0, 5.0)
    det = DetectionGeometry(1.0, 2.5e5)
    c = BroadbandCoefficients(f1=2.0, f2=2.0, xi=1.0)
    s0 = slit_spectrum(0.0, slits) ** 2
    assert g2_broadband(0.0, 0.0, c, slits, det) == pytest.approx(3 * 4 * s0)
    # at the first null of the diagonal scan the pair term vanishes
    x_null = math.pi * det.z / (2 * det.k * slits.d)
    assert g2_broadband(x_null, x_null, c, slits, det) == pytest.approx(2 * 4 * s0)
    grid = g2_broadband(np.zeros((3, 1)), np.zeros((1, 4)), c, slits, det)
    assert grid.shape == (3, 4)


def test_matrices_against_oracle(oracle, oracle_matrices):
    c = oracle["correlation"]
    i, j = oracle_matrices.index([c["xm"], c["xn"]])
    got = {"m_mm": oracle_matrices.m[i, i], "m_nn": oracle_matrices.m[j, j],
           "m_mn": oracle_matrices.m[i, j], "n_mn": oracle_matrices.n[i, j]}
    for name, value in got.items():
        ref = complex(c[name + "_re"], c[name + "_im"])
        # the reference is itself extrapolated; its spline and cut-off residue sit near 1e-6
        assert abs(value - ref) <= 2e-6 * abs(ref)


def test_matrix_symmetries(oracle_matrices):
    m, n = oracle_matrices.m, oracle_matrices.n
    assert np.max(np.abs(m - m.conj().T)) <= 1e-10 * np.max(np.abs(m))
    assert np.max(np.abs(n - n.T)) <= 1e-10 * np.max(np.abs(n))
    assert np.all(np.linalg.eigvalsh(m) >= -1e-12)


def test_pointwise_kernels_match_matrices(oracle, oracle_scene, oracle_matrices):
    c = oracle["correlation"]
    i, j = oracle_matrices.index([c["xm"], c["xn"]])
    assert abs(m_kernel(c["xm"], c["xn"], oracle_scene) - oracle_matrices.m[i, j]) < 1e-14
    assert abs(n_kernel(c["xn"], c["xm"], oracle_scene) - oracle_matrices.n[i, j]) < 1e-14
    g2 = g2_full(c["xm"], c["xn"], oracle_scene)
    assert g2 == pytest.approx(oracle_matrices.g2(c["xm"], c["xn"]), rel=1e-12)
    assert g2 > 0


def test_broadband_limit_of_kernels():
    scene = far_field_scene(g=1.84, q0d=100.0)
    coeffs = f_integrals(scene)
    x_null = math.pi * scene.det.z / (2 * scene.det.k * scene.slits.d)
    xs = np.array([-0.7, 0.0, 0.4, 1.0]) * x_null
    mats = correlation_matrices(xs, scene)
    kappa = scene.det.k * mats.positions / scene.det.z
    for a in range(len(xs)):
        for b in range(len(xs)):
            m_ref = coeffs.f1 * abs(slit_spectrum(kappa[a] - kappa[b], scene.slits))
            n_ref = abs(coeffs.f2) * abs(slit_spectrum(kappa[a] + kappa[b], scene.slits))
            scale = coeffs.f1 * slit_spectrum(0.0, scene.slits)
            assert abs(abs(mats.m[a, b]) - m_ref) <= 0.02 * scale
            assert abs(abs(mats.n[a, b]) - n_ref) <= 0.02 * scale


def test_unknown_position_rejected(oracle_matrices):
    with pytest.raises(KeyError):
        oracle_matrices.index(0.123)
