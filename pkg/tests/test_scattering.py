import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import gaussian_state
from sgist import scattering
from sgist.field import BreatherParams, FieldState, KinkParams, eval_breather, eval_kink, uniform_grid
from sgist.inverse import reconstruct_reflectionless
from sgist.kernels import available_backends
from sgist.scattering import (
    Box,
    Scatterer,
    ScatteringData,
    SpectralGrid,
    SpectralSingularityError,
    find_eigenvalues,
    jost_solve,
    norming_constants,
    reflection_coefficient,
    scatter,
    scattering_matrix,
)


@pytest.fixture(scope="module")
def zero_state():
    xs = uniform_grid(-10, 10, 0.05)
    return FieldState(xs, np.zeros_like(xs), np.zeros_like(xs))


@pytest.fixture(scope="module")
def kink_state():
    return eval_kink(KinkParams(0.0), uniform_grid(-30, 30, 0.01))


@pytest.fixture(scope="module")
def breather_state():
    return eval_breather(BreatherParams(0.5), uniform_grid(-50, 50, 0.01))


# -- spectral grid and containers ----------------------------------------------


def test_cayley_grid_shape():
    g = SpectralGrid.cayley(64)
    assert g.zs.size == 64 and g.is_cayley
    np.testing.assert_allclose(g.zs, -g.zs[::-1], atol=1e-15)
    assert not np.any(g.zs == 0)
    # z -> -1/z is a shift by half the grid
    np.testing.assert_allclose(-1 / g.zs, np.roll(g.zs, 32), rtol=1e-12)


@pytest.mark.parametrize("zs", [[-1.0, 0.0, 1.0, 2.0], [-2.0, 1.0], [1.0, -1.0], [-1.0, 0.5, 1.0]])
def test_grid_validation(zs):
    with pytest.raises(ValueError):
        SpectralGrid(np.array(zs))


def test_data_json_round_trip(tmp_path):
    g = SpectralGrid.cayley(16)
    r = 0.1 * np.exp(1j * g.zs)
    r = 0.5 * (r + np.conj(r[::-1]))
    d = ScatteringData(g, r, [(0.5, 1j)], [(0.6 + 0.8j, 0.3 - 0.1j)])
    d.save(tmp_path / "d.json")
    back = ScatteringData.load(tmp_path / "d.json")
    np.testing.assert_array_equal(back.r, d.r)
    assert back.kinks == d.kinks and back.breathers == d.breathers
    assert back.meta["generic"] is True
    assert back.symmetry_defect() == 0.0


def test_genericity_flag():
    assert not ScatteringData.reflectionless(kinks=[(1.0, 1j)], breathers=[(np.exp(0.5j), 1.0)]).is_generic()
    assert ScatteringData.reflectionless(kinks=[(1.0, 1j), (0.5, 1j)]).is_generic()


@pytest.mark.parametrize("kinks, breathers", [([(-1.0, 1j)], []), ([], [(-0.5 + 0.5j, 1.0)]), ([], [(0.5 - 0.5j, 1.0)])])
def test_data_rejects_misplaced_eigenvalues(kinks, breathers):
    with pytest.raises(ValueError):
        ScatteringData.reflectionless(kinks, breathers)


# -- Jost solutions -------------------------------------------------------------


@pytest.mark.parametrize("z", [2.0, 0.3, 0.5 + 0.7j, 2j])
def test_zero_potential_jost_is_identity(zero_state, z):
    for side in (-1, 1):
        np.testing.assert_allclose(jost_solve(zero_state, z, side, 1.0), np.eye(2), atol=1e-14)


def test_kink_jost_converges_under_refinement(kink_state):
    # only the column analytic in the upper half plane is well conditioned:
    # m^-_1 from the left and m^+_2 from the right
    fine = eval_kink(KinkParams(0.0), uniform_grid(-30, 30, 0.005))
    for side, col in ((-1, 0), (1, 1)):
        coarse_m = jost_solve(kink_state, 2j, side, 0.0)[:, col]
        fine_m = jost_solve(fine, 2j, side, 0.0)[:, col]
        np.testing.assert_allclose(coarse_m, fine_m, atol=1e-8)


def test_kink_jost_columns_decay_at_the_expected_rate(kink_state):
    # (m e^{-i lam x sigma3}) columns behave like e^{-+ Im(lam) x} away from the kink
    z = 2j
    lam = 0.25 * (z - 1 / z)
    left = np.array([jost_solve(kink_state, z, -1, x)[:, 0] for x in (-20.0, -15.0)])
    # normalised column tends to a constant vector far from the kink
    np.testing.assert_allclose(left[0], left[1], atol=1e-5)
    psi = [col * np.exp(-1j * lam * x) for col, x in zip(left, (-20.0, -15.0))]
    assert abs(psi[1][0] / psi[0][0]) == pytest.approx(np.exp(lam.imag * 5.0), rel=1e-5)


@pytest.mark.parametrize("z", [0.7 + 0.4j, 1.6 + 0.2j, 0.4 + 1.1j])
def test_jost_conjugation_symmetry(gauss, z):
    for side in (-1, 1):
        m = jost_solve(gauss, z, side, 0.0)
        mc = jost_solve(gauss, np.conj(z), side, 0.0)
        assert abs(m[0, 0] - np.conj(mc[1, 1])) < 1e-9


def test_jost_rejects_zero(gauss):
    with pytest.raises(ValueError):
        jost_solve(gauss, 0.0, 1)


# -- scattering matrix ----------------------------------------------------------


def test_zero_field_scattering_matrix_is_identity(zero_state):
    s = scattering_matrix(zero_state, np.array([0.2, 1.0, 3.0]))
    np.testing.assert_allclose(s.a, 1, atol=1e-14)
    np.testing.assert_allclose(s.b, 0, atol=1e-14)


def test_unitarity_and_determinant(gauss):
    s = scattering_matrix(gauss, SpectralGrid.cayley().zs)
    assert np.max(np.abs(np.abs(s.a) ** 2 + np.abs(s.b) ** 2 - 1)) < 1e-8
    assert np.max(np.abs(s.det - 1)) < 1e-8
    np.testing.assert_allclose(s.abar, np.conj(s.a), atol=1e-12)
    np.testing.assert_allclose(s.bbar, -np.conj(s.b), atol=1e-12)


def test_static_kink_is_reflectionless(kink_state):
    s = scattering_matrix(kink_state, SpectralGrid.cayley(256).positive)
    assert np.max(np.abs(s.b)) < 1e-6


def test_reflection_two_ways(gauss):
    s = scattering_matrix(gauss, np.linspace(0.1, 5, 50))
    np.testing.assert_allclose(np.abs(s.r) ** 2, np.abs(s.b) ** 2 / np.abs(s.a) ** 2, rtol=1e-9)


def test_gauge_switch_overlap(gauss):
    sc = Scatterer(gauss)
    zs = np.linspace(0.5, 2.0, 31)
    psi_only = sc.matrix(zs, switch=0.0)
    rotated_only = sc.matrix(zs, switch=np.inf)
    assert np.max(np.abs(psi_only.r - rotated_only.r)) < 1e-7


def test_abar_is_independent_of_the_meeting_point(gauss):
    sc = Scatterer(gauss)
    z = np.array([0.6 + 0.3j, 1.5 + 0.8j])
    n = gauss.xs.size
    np.testing.assert_allclose(sc.abar(z, n // 3), sc.abar(z, 2 * n // 3), atol=1e-8)


@pytest.mark.skipif("compiled" not in available_backends(), reason="extension not built")
def test_backends_agree(gauss):
    zs = np.array([0.2, 0.9, 1.7])
    a = Scatterer(gauss, backend="compiled")
    b = Scatterer(gauss, backend="python")
    np.testing.assert_allclose(a.matrix(zs).b, b.matrix(zs).b, atol=1e-12)
    z = np.array([0.7 + 0.3j])
    np.testing.assert_allclose(a.abar(z), b.abar(z), atol=1e-11)


# -- reflection coefficient -----------------------------------------------------


def test_zero_field_reflection_vanishes(zero_state):
    assert np.max(np.abs(reflection_coefficient(zero_state, SpectralGrid.cayley(64)))) < 1e-14


def test_reflection_symmetry(gauss_data):
    assert gauss_data.symmetry_defect() < 1e-10


def test_reflection_vanishes_faster_than_z_at_origin(gauss):
    # below z ~ 0.1 the reflection coefficient is already at roundoff level
    zs = np.array([0.3, 0.2, 0.15])
    ratio = np.abs(scattering_matrix(gauss, zs).r) / zs
    assert ratio[0] > ratio[1] > ratio[2]


def test_spectral_singularity_is_reported(gauss):
    with pytest.raises(SpectralSingularityError, match="z ="):
        reflection_coefficient(gauss, SpectralGrid.cayley(16), singular_tol=10.0)


# -- eigenvalues ------------------------------------------------------------------


def test_small_data_has_no_eigenvalues(gauss, gauss_data):
    # int |U| < 1 for this bump
    assert find_eigenvalues(gauss) == []
    assert gauss_data.kinks == [] and gauss_data.breathers == []


def test_static_kink_eigenvalue(kink_state):
    (ev,) = find_eigenvalues(kink_state)
    assert ev.kind == "kink"
    assert abs(ev.z - 1j) < 1e-6
    zeta = ev.z.imag
    assert abs((1 - zeta**2) / (1 + zeta**2)) < 1e-6


def test_breather_eigenvalue_quadruple(breather_state):
    evs = find_eigenvalues(breather_state)
    assert [e.kind for e in evs] == ["breather", "breather"]
    z1, z2 = (e.z for e in evs)
    assert abs(z1 + np.conj(z2)) < 1e-8
    assert abs(abs(z1) - 1) < 1e-6


def test_argument_principle_count(kink_state):
    sc = Scatterer(kink_state)
    (count,), _ = scattering._count_zeros(sc, [Box(-5.0, 5.0, 0.02, 5.0)])
    assert count == len(find_eigenvalues(kink_state, scatterer=sc)) == 1


def test_search_box_must_avoid_real_axis(kink_state):
    with pytest.raises(ValueError):
        find_eigenvalues(kink_state, (-5.0, 5.0, 0.0, 5.0))


# -- norming constants --------------------------------------------------------------


def test_kink_norming_constant_is_imaginary(kink_state):
    (c,) = norming_constants(kink_state, [1j])
    assert abs(c.real) < 1e-6


@pytest.mark.parametrize("shift", [0.5, 1.0])
def test_shift_multiplies_b(shift):
    xs = uniform_grid(-30, 30, 0.01)
    _, (b0,) = norming_constants(eval_kink(KinkParams(0.0), xs), [1j], return_b=True)
    _, (b1,) = norming_constants(eval_kink(KinkParams(0.0, x0=shift), xs), [1j], return_b=True)
    lam = 0.25 * (1j - 1 / 1j)
    assert b1 / b0 == pytest.approx(np.exp(2j * lam * shift), rel=1e-8)


def test_shift_multiplies_breather_b(breather_state):
    z = complex(np.exp(1j * np.pi / 6))
    xs = breather_state.xs
    _, (b0,) = norming_constants(breather_state, [z], return_b=True)
    _, (b1,) = norming_constants(eval_breather(BreatherParams(0.5, x2=0.7), xs), [z], return_b=True)
    lam = 0.25 * (z - 1 / z)
    assert b1 / b0 == pytest.approx(np.exp(2j * lam * 0.7), rel=1e-8)


def test_round_trip_of_discrete_data():
    data = ScatteringData.reflectionless(
        kinks=[(1.3, 0.8j), (0.6, -1.5j)], breathers=[(0.9 * np.exp(0.7j), 0.4 + 0.9j)]
    )
    xs = uniform_grid(-30, 30, 0.01)
    rec = reconstruct_reflectionless(data, xs, 0.0)
    back = scatter(rec.state, SpectralGrid.cayley(256))
    assert np.max(np.abs(back.r)) < 1e-5
    assert len(back.kinks) == 2 and len(back.breathers) == 1
    for (zeta, c), (zeta2, c2) in zip(sorted(data.kinks), sorted(back.kinks)):
        assert zeta2 == pytest.approx(zeta, abs=1e-6)
        assert abs(c2 - c) < 1e-5 * abs(c)
    (z, c), (z2, c2) = data.breathers[0], back.breathers[0]
    assert abs(z2 - z) < 1e-6
    assert abs(c2 - c) < 1e-5 * abs(c)


# -- properties ------------------------------------------------------------------


@settings(deadline=None, max_examples=10)
@given(amp=st.floats(0.01, 0.4), width=st.floats(0.5, 2.0), zs=st.lists(st.floats(0.05, 20.0), min_size=1, max_size=8))
def test_unitarity_property(amp, width, zs):
    xs = uniform_grid(-25, 25, 0.02)
    g = np.exp(-((xs / width) ** 2))
    state = FieldState(xs, amp * g, -amp * xs * g)
    s = scattering_matrix(state, np.array(sorted(set(zs))))
    assert np.max(np.abs(np.abs(s.a) ** 2 + np.abs(s.b) ** 2 - 1)) < 1e-8


@settings(deadline=None, max_examples=5)
@given(amp=st.floats(0.01, 0.5))
def test_reflection_symmetry_property(amp):
    state = gaussian_state(uniform_grid(-20, 20, 0.02), amp)
    r = reflection_coefficient(state, SpectralGrid.cayley(64))
    np.testing.assert_array_equal(r, np.conj(r[::-1]))
