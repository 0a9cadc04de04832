import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import gaussian_state
from sgist import pde
from sgist.field import (
    Breather,
    BreatherParams,
    FieldState,
    Kink,
    KinkParams,
    Wobbler,
    WobblerParams,
    eval_breather,
    eval_kink,
    sample,
    superpose,
    uniform_grid,
)
from sgist.kernels import available_backends
from sgist.pde import SolverConfig, SolverError, evolve, residual, step


def _kink_centre(state):
    """Linear interpolation of the crossing f = pi."""
    g = state.f - np.pi
    i = int(np.flatnonzero(np.sign(g[:-1]) != np.sign(g[1:]))[0])
    return state.xs[i] - g[i] * state.h / (g[i + 1] - g[i])


# -- residual operator -----------------------------------------------------------


def test_zero_field_residual():
    zero = lambda x, t: (np.zeros_like(x), np.zeros_like(x), np.zeros_like(x))
    assert residual(zero, np.linspace(-1, 1, 5), 0.0, 0.1) == 0.0


@pytest.mark.parametrize(
    "fn",
    [Kink(KinkParams(0.3, 0.2)), Wobbler(WobblerParams(0.2)), Breather(BreatherParams(0.5, 0.2))],
    ids=["kink", "wobbler", "breather"],
)
def test_residual_is_second_order(fn):
    xs = np.linspace(-8, 8, 65)
    ratio = residual(fn, xs, 0.7, 0.02) / residual(fn, xs, 0.7, 0.01)
    assert 3.6 <= ratio <= 4.4


def test_wrong_wobbler_frequency_is_not_a_solution():
    xs = np.linspace(-8, 8, 65)
    fn = Wobbler(WobblerParams(0.2, alpha=0.5))
    assert residual(fn, xs, 0.7, 0.005) > 1e-2


# -- stepping --------------------------------------------------------------------


def test_vacuum_stays_vacuum():
    xs = uniform_grid(-5, 5, 0.05)
    st0 = FieldState(xs, np.zeros_like(xs), np.zeros_like(xs))
    out = evolve(st0, SolverConfig(dt=0.02, T=2.0)).states[-1]
    assert np.all(out.f == 0) and np.all(out.ft == 0)


def test_single_step_advances_time():
    st0 = gaussian_state(uniform_grid(-10, 10, 0.05))
    out = step(st0, SolverConfig(dt=0.02))
    assert out.t == pytest.approx(0.02)
    assert np.max(np.abs(out.f - st0.f - 0.02 * st0.ft)) < 1e-3


def test_static_kink_does_not_drift():
    st0 = eval_kink(KinkParams(0.0), uniform_grid(-30, 30, 0.02))
    out = evolve(st0, SolverConfig(dt=0.01, T=10.0)).states[-1]
    assert abs(_kink_centre(out)) < 1e-3


def test_breather_period_error_is_second_order():
    p = BreatherParams(0.5)
    period = 2 * np.pi / p.alpha
    errs = []
    for h in (0.04, 0.02):
        xs = uniform_grid(-30, 30, h)
        dt = 0.5 * h
        out = evolve(eval_breather(p, xs), SolverConfig(dt=dt, T=round(period / dt) * dt)).states[-1]
        exact = eval_breather(p, xs, out.t)
        errs.append(np.sqrt(h * np.sum((out.f - exact.f) ** 2)))
    assert 3.6 <= errs[0] / errs[1] <= 4.4


def test_boosted_kink_conserves_momentum():
    st0 = eval_kink(KinkParams(0.5, 10.0), uniform_grid(-40, 40, 0.02))
    traj = evolve(st0, SolverConfig(dt=0.01, T=20.0, checkpoints=(5, 10, 15)))
    assert traj.momentum_drift() < 1e-6
    assert traj.energy_drift() < 1e-6
    # it also moves at its own velocity
    assert _kink_centre(traj.states[-1]) - _kink_centre(st0) == pytest.approx(10.0, abs=2e-3)


def test_kink_antikink_collision_is_elastic():
    v = 0.5
    fn = superpose(Kink(KinkParams(v, 15.0)), Kink(KinkParams(-v, -15.0, sign=-1)))
    xs = uniform_grid(-60, 60, 0.02)
    st0 = sample(fn, xs, 0.0)
    traj = evolve(st0, SolverConfig(dt=0.01, T=70.0, checkpoints=(5, 10, 60, 65)))

    def peaks(state):
        dens = 0.5 * (state.ft**2 + state.fx**2) + 1 - np.cos(state.f)
        left, right = xs < 0, xs >= 0
        return xs[left][np.argmax(dens[left])], xs[right][np.argmax(dens[right])]

    pos = {round(s.t): peaks(s) for s in traj.states}
    before = [(pos[10][k] - pos[5][k]) / 5 for k in (0, 1)]
    after = [(pos[65][k] - pos[60][k]) / 5 for k in (0, 1)]
    np.testing.assert_allclose(before, [v, -v], atol=1e-3 * 5 + 0.02 / 5)
    np.testing.assert_allclose(after, [-v, v], atol=1e-3 * 5 + 0.02 / 5)


def test_time_reversal():
    errs = []
    for dt in (0.02, 0.01):
        st0 = gaussian_state(uniform_grid(-30, 30, 0.025), 0.5)
        fwd = evolve(st0, SolverConfig(dt=dt, T=5.0)).states[-1]
        back = evolve(fwd.with_values(ft=-fwd.ft, t=0.0), SolverConfig(dt=dt, T=5.0)).states[-1]
        errs.append(np.max(np.abs(back.f - st0.f)))
    assert errs[1] < 1e-3
    assert errs[0] / errs[1] > 3.0


def test_translation_equivariance():
    xs = uniform_grid(-20, 20, 0.05)
    st0 = gaussian_state(xs, 0.6)
    shifted = st0.with_values(f=np.roll(st0.f, 1), ft=np.roll(st0.ft, 1))
    cfg = SolverConfig(dt=0.04, T=4.0)
    a = evolve(st0, cfg).states[-1]
    b = evolve(shifted, cfg).states[-1]
    np.testing.assert_allclose(np.roll(a.f, 1), b.f, rtol=0, atol=1e-14)


def test_sponge_absorbs_outgoing_radiation():
    st0 = gaussian_state(uniform_grid(-40, 40, 0.05), 0.5)
    cfg = SolverConfig(dt=0.04, T=80.0, boundary="sponge")
    traj = evolve(st0, cfg)
    assert traj.log[-1][1] < 0.5 * traj.log[0][1]


def test_cfl_violation():
    with pytest.raises(SolverError):
        SolverConfig(dt=0.1, h=0.1)
    st0 = gaussian_state(uniform_grid(-5, 5, 0.05))
    with pytest.raises(SolverError, match="CFL"):
        evolve(st0, SolverConfig(dt=0.05))


def test_nan_aborts_with_step_index():
    st0 = gaussian_state(uniform_grid(-5, 5, 0.05))
    bad = st0.f.copy()
    bad[10] = np.nan
    with pytest.raises(SolverError, match="steps"):
        evolve(st0.with_values(f=bad), SolverConfig(dt=0.02, T=1.0))


def test_config_validation():
    with pytest.raises(ValueError):
        SolverConfig(dt=-1.0)
    with pytest.raises(ValueError):
        SolverConfig(boundary="reflecting")


def test_trajectory_files(tmp_path):
    st0 = gaussian_state(uniform_grid(-10, 10, 0.05))
    traj = evolve(st0, SolverConfig(dt=0.02, T=1.0, checkpoints=(0.5,)), out_dir=tmp_path)
    assert traj.times == pytest.approx([0.0, 0.5, 1.0])
    lines = (tmp_path / "energy.csv").read_text().splitlines()
    assert lines[0] == "t,E,P" and len(lines) == 4
    assert sorted(p.name for p in tmp_path.glob("state_*.csv")) == ["state_0000.csv", "state_0001.csv", "state_0002.csv"]


@pytest.mark.skipif("compiled" not in available_backends(), reason="extension not built")
def test_backends_agree():
    st0 = eval_kink(KinkParams(0.3), uniform_grid(-20, 20, 0.05))
    for boundary in ("periodic", "sponge"):
        a = evolve(st0, SolverConfig(dt=0.02, T=2.0, boundary=boundary, backend="compiled")).states[-1]
        b = evolve(st0, SolverConfig(dt=0.02, T=2.0, boundary=boundary, backend="python")).states[-1]
        np.testing.assert_allclose(a.f, b.f, atol=1e-12)


@settings(deadline=None, max_examples=6)
@given(amp=st.floats(0.2, 1.5))
def test_energy_drift_scales_like_dt_squared(amp):
    st0 = gaussian_state(uniform_grid(-20, 20, 0.05), amp)
    drift = []
    for dt in (0.04, 0.02):
        traj = evolve(st0, SolverConfig(dt=dt, T=4.0, checkpoints=(1, 2, 3)))
        drift.append(traj.energy_drift())
    assert drift[1] < 1e-4
    assert drift[0] / drift[1] > 3.0
