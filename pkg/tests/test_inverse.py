import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from sgist.inverse import (
    ReconstructionError,
    angle_from_trig,
    breather_closed_form,
    evolve_scattering,
    kink_trig,
    pole_matrix,
    pole_set,
    re_i_theta,
    reconstruct_full,
    reconstruct_reflectionless,
    stationary_point,
    theta,
    theta_tilde,
)
from sgist.scattering import ScatteringData, SpectralGrid

XS = np.linspace(-15, 15, 121)

moduli = st.floats(0.3, 3.0)
angles = st.floats(0.15, 1.4)
constants = st.complex_numbers(min_magnitude=0.2, max_magnitude=5.0)
# a real kink needs c = i b with b real
kink_constants = st.one_of(st.floats(0.2, 5.0), st.floats(-5.0, -0.2)).map(lambda b: 1j * b)


def _soliton_data(kink_moduli, kink_cs, br):
    return ScatteringData.reflectionless(kinks=list(zip(kink_moduli, kink_cs)), breathers=br)


# -- phase functions -------------------------------------------------------------


@given(z=st.floats(0.05, 20), x=st.floats(-50, 50), t=st.floats(0, 50))
def test_theta_real_on_the_real_axis(z, x, t):
    assert abs(theta(z, x, t).imag) == 0.0
    assert re_i_theta(z, x, t) == 0.0
    assert theta(-z, x, t) == pytest.approx(-theta(z, x, t))


def test_re_i_theta_vanishes_at_i_on_the_time_axis():
    assert re_i_theta(1j, 0.0, 1.0) == pytest.approx(0.0, abs=1e-16)


@given(xi=st.floats(0.1, 2), eta=st.floats(0.1, 2), x=st.floats(-20, 20), t=st.floats(0.1, 20))
def test_re_i_theta_closed_form(xi, eta, x, t):
    # -(1 + x/t) eta t/4 + (1 - x/t) eta t / (4 (xi^2 + eta^2)), written without dividing by t
    expected = 0.25 * (-(t + x) * eta + (t - x) * eta / (xi**2 + eta**2))
    assert re_i_theta(complex(xi, eta), x, t) == pytest.approx(expected, abs=1e-12)


@given(v=st.floats(-0.95, 0.95), t=st.floats(1, 100))
def test_theta_is_stationary_at_z0(v, t):
    x = v * t
    z0 = stationary_point(x, t)
    h = 1e-6 * z0
    slope = (theta(z0 + h, x, t) - theta(z0 - h, x, t)) / (2 * h)
    assert abs(slope) < 1e-6 * t
    assert abs(theta(-z0 + h, x, t) - theta(-z0 - h, x, t)) / (2 * h) < 1e-6 * t


def test_theta_rejects_zero_and_exterior():
    with pytest.raises(ValueError):
        theta(0.0, 1.0, 1.0)
    with pytest.raises(ValueError):
        stationary_point(2.0, 1.0)


def test_theta_tilde_swaps_roles():
    z = 0.7 + 0.2j
    assert theta_tilde(z, 1.3, 0.4) == pytest.approx(theta(z, 0.4, 1.3))


# -- time evolution --------------------------------------------------------------


def test_evolution_at_time_zero_is_identity(gauss_data):
    d = evolve_scattering(gauss_data, 0.0)
    np.testing.assert_array_equal(d.r, gauss_data.r)


@given(t=st.floats(-100, 100))
@settings(deadline=None, max_examples=20)
def test_evolution_preserves_modulus(gauss_data, t):
    d = evolve_scattering(gauss_data, t)
    np.testing.assert_allclose(np.abs(d.r), np.abs(gauss_data.r), atol=1e-15)


def test_evolution_full_turn_at_unit_z():
    grid = SpectralGrid(np.array([-1.0, 1.0]))
    d = ScatteringData(grid, np.array([0.1 - 0.2j, 0.1 + 0.2j]), [(0.5, 1j)])
    e = evolve_scattering(d, 2 * np.pi)
    np.testing.assert_allclose(e.r, d.r, atol=1e-14)


def test_evolution_moves_norming_constants():
    d = ScatteringData.reflectionless(kinks=[(0.5, 1j)], breathers=[(0.6 + 0.3j, 1.0)])
    e = evolve_scattering(d, 2.0)
    assert e.kinks[0][1] == pytest.approx(1j * np.exp(0.5j * (0.5j + 1 / 0.5j) * 2.0))
    z = 0.6 + 0.3j
    assert e.breathers[0][1] == pytest.approx(np.exp(0.5j * (z + 1 / z) * 2.0))


@settings(deadline=None, max_examples=15)
@given(zeta=moduli, c=kink_constants, t=st.floats(-3, 3), s=st.floats(0, 4))
def test_evolving_data_equals_reconstructing_later(zeta, c, t, s):
    d = ScatteringData.reflectionless(kinks=[(zeta, c)])
    later = reconstruct_reflectionless(d, XS, t + s, with_ft=False)
    moved = reconstruct_reflectionless(evolve_scattering(d, s), XS, t, with_ft=False)
    np.testing.assert_allclose(later.sin_f, moved.sin_f, atol=1e-10)


# -- reflectionless reconstruction ---------------------------------------------


def test_empty_data_gives_vacuum():
    rec = reconstruct_reflectionless(ScatteringData.reflectionless(), XS, 1.0)
    assert np.all(rec.state.f == 0) and np.all(rec.sin_f == 0) and np.all(rec.cos_f == 1)


def test_single_kink_matches_closed_form():
    # classical b = -2 corresponds to the package constant conj(i b) = 2i
    xs = np.linspace(-10, 10, 201)
    d = ScatteringData.reflectionless(kinks=[(1.0, 2j)])
    for t in (0.0, 1.7):
        rec = reconstruct_reflectionless(d, xs, t, with_ft=False)
        cos_f, sin_f = kink_trig(1.0, -2.0, xs, t)
        np.testing.assert_allclose(rec.cos_f, cos_f, atol=1e-10)
        np.testing.assert_allclose(rec.sin_f, sin_f, atol=1e-10)


@pytest.mark.parametrize("rho", [1.0, 0.8])
def test_single_breather_matches_closed_form(rho):
    w = np.pi / 4
    c = 0.7 * np.exp(0.4j)
    d = ScatteringData.reflectionless(breathers=[(rho * np.exp(1j * w), np.conj(c))])
    xs = np.linspace(-12, 12, 241)
    for t in (0.0, 2.5):
        rec = reconstruct_reflectionless(d, xs, t, with_ft=False)
        f = breather_closed_form(rho, w, c, xs, t)
        np.testing.assert_allclose(rec.sin_f, np.sin(f), atol=1e-8)
        np.testing.assert_allclose(rec.cos_f, np.cos(f), atol=1e-8)


@settings(deadline=None, max_examples=25)
@given(
    kz=st.lists(moduli, max_size=2),
    kc=st.lists(kink_constants, min_size=2, max_size=2),
    br=st.lists(st.tuples(moduli, angles, constants), max_size=1),
    x=st.floats(-10, 10),
    t=st.floats(-5, 5),
)
def test_trig_identity_and_reality(kz, kc, br, x, t):
    breathers = [(r * np.exp(1j * a), c) for r, a, c in br]
    mods = kz + [r for r, _, _ in br]
    assume(len(mods) < 2 or min(np.diff(sorted(mods))) > 1e-2)
    d = _soliton_data(kz, kc, breathers)
    m0 = pole_matrix(pole_set(d, x, t), 0.0)
    s, c = 2 * m0[1, 0] * m0[1, 1], 1 + 2 * m0[0, 1] * m0[1, 0]
    assert abs(s.imag) < 1e-9 and abs(c.imag) < 1e-9
    assert abs(s.real**2 + c.real**2 - 1) < 1e-10


@pytest.mark.parametrize("zeta", [0.5, 1.0, 1.8])
def test_single_kink_velocity_law(zeta):
    d = ScatteringData.reflectionless(kinks=[(zeta, 1j)])
    v = (1 - zeta**2) / (1 + zeta**2)
    step = 0.05
    a = reconstruct_reflectionless(d, XS, 1.0 + step, with_ft=False).state.f
    b = reconstruct_reflectionless(d, XS - v * step, 1.0, with_ft=False).state.f
    np.testing.assert_allclose(a, b, atol=1e-8)


def test_far_field_is_vacuum():
    d = ScatteringData.reflectionless(kinks=[(1.2, 1j)], breathers=[(0.5 + 0.4j, 1 + 1j)])
    for x in (-2000.0, -300.0, 300.0, 2000.0):
        for t in (0.0, 50.0, 1e4):
            m0 = pole_matrix(pole_set(d, x, t), 0.0)
            assert abs(2 * m0[1, 0] * m0[1, 1]) < 1e-12
            assert abs(1 + 2 * m0[0, 1] * m0[1, 0] - 1) < 1e-12


def test_coincident_eigenvalues_name_the_point():
    d = ScatteringData.reflectionless(kinks=[(1.0, 2j), (1.0 + 1e-14, -1j)])
    with pytest.raises(ReconstructionError, match=r"\(x, t\)"):
        reconstruct_reflectionless(d, XS, 0.0)


def test_reflectionless_requires_zero_r(gauss_data):
    with pytest.raises(ValueError):
        reconstruct_reflectionless(gauss_data, XS)


def test_angle_unwrapping_follows_left_branch():
    f = np.linspace(0, 6 * np.pi, 200)
    np.testing.assert_allclose(angle_from_trig(np.sin(f), np.cos(f)), f, atol=1e-12)
    np.testing.assert_allclose(angle_from_trig(np.sin(f), np.cos(f), l_minus=-1), f - 2 * np.pi, atol=1e-12)


def test_time_derivative_of_kink_reconstruction():
    d = ScatteringData.reflectionless(kinks=[(0.5, 1j)])
    xs = np.linspace(-15, 15, 601)
    rec = reconstruct_reflectionless(d, xs, 0.3)
    v = 0.6  # travelling wave: f_t = -v f_x
    np.testing.assert_allclose(rec.state.ft, -v * rec.state.fx, atol=1e-5)


# -- full reconstruction --------------------------------------------------------


def test_full_solver_reduces_to_reflectionless():
    d = ScatteringData.reflectionless(
        kinks=[(1.0, 2j)], breathers=[(0.8 * np.exp(0.6j), 0.7 + 0.2j)], grid=SpectralGrid.cayley(256)
    )
    xs = np.linspace(-10, 10, 41)
    a = reconstruct_reflectionless(d, xs, 0.5, with_ft=False)
    b = reconstruct_full(d, xs, 0.5, with_ft=False)
    np.testing.assert_allclose(a.sin_f, b.sin_f, atol=1e-12)
    np.testing.assert_allclose(a.cos_f, b.cos_f, atol=1e-12)


def test_full_round_trip_and_flux(gauss, gauss_data):
    xq = np.linspace(-4, 4, 33)
    rec = reconstruct_full(gauss_data, xq, 0.0)
    f = np.interp(xq, gauss.xs, gauss.f)
    ft = np.interp(xq, gauss.xs, gauss.ft)
    fx = np.interp(xq, gauss.xs, gauss.fx)
    assert np.max(np.abs(rec.state.f - f)) < 1e-4
    assert np.max(np.abs(rec.state.ft - ft)) < 1e-4
    # second reconstruction: f_x + f_t from the first moment of mu_11
    assert np.max(np.abs(rec.diagnostics["flux"] - (fx + ft))) < 1e-6
    assert rec.diagnostics["residual"] < 1e-10


def test_large_reflection_is_flagged(caplog):
    g = SpectralGrid.cayley(64)
    r = 1.5 * np.exp(-((g.zs - 1) ** 2)) * (g.zs > 0)
    r = r + np.conj(r[::-1])
    d = ScatteringData(g, r)
    with caplog.at_level("WARNING"):
        try:
            reconstruct_full(d, np.array([0.0, 0.1, 0.2]), 0.0, with_ft=False)
        except ReconstructionError:
            pass
    assert "sup|r|" in caplog.text
