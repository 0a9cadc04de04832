import math

import numpy as np
import pytest

from sgist.diagnostics import WeightedNormSpec, weighted_norm
from sgist.field import (
    BreatherParams,
    FieldState,
    KinkParams,
    WobblerParams,
    eval_breather,
    eval_kink,
    eval_wobbler,
    uniform_grid,
)
from sgist.scattering import scatter

GAUSS_AMP = 0.3


def gaussian_state(xs, amp=GAUSS_AMP):
    """Small localized data: a Gaussian bump with a skewed velocity profile."""
    g = np.exp(-xs**2)
    return FieldState(xs, amp * g, amp * (2.0 / 3.0) * xs * g)


def breather_norm(beta, s):
    half = 25.0 / beta
    st = eval_breather(BreatherParams(beta), uniform_grid(-half, half, 0.05))
    return weighted_norm(st, WeightedNormSpec(s))


def wobble_norm(beta, s):
    """Kink minus wobbling kink at the quarter period, where the oscillating terms vanish."""
    p = WobblerParams(beta)
    t = math.pi / (2 * p.alpha)
    xs = uniform_grid(-30.0 / beta, 30.0 / beta, 0.05)
    w = eval_wobbler(p, xs, t)
    k = eval_kink(KinkParams(0.0), xs)
    return weighted_norm(FieldState(xs, k.f - w.f, k.ft - w.ft, t=t), WeightedNormSpec(s))


def family_exponent(norm, s, betas):
    vals = [norm(b, s) for b in betas]
    return float(np.polyfit(np.log(betas), np.log(vals), 1)[0])


@pytest.fixture(scope="session")
def gauss():
    return gaussian_state(uniform_grid(-30.0, 30.0, 0.01))


@pytest.fixture(scope="session")
def gauss_data(gauss):
    return scatter(gauss)


def pytest_terminal_summary(terminalreporter):
    """One line per acceptance criterion, from the ``criterion`` user property."""
    lines = []
    for outcome in ("passed", "failed"):
        for rep in terminalreporter.stats.get(outcome, []):
            if rep.when != "call":
                continue
            props = dict(rep.user_properties)
            if "criterion" in props:
                lines.append((props["criterion"], outcome.upper(), props.get("measured", "")))
    if lines:
        terminalreporter.section("acceptance criteria")
        for num, outcome, measured in sorted(lines):
            terminalreporter.write_line(f"criterion {num:>2}: {'PASS' if outcome == 'PASSED' else 'FAIL'}  {measured}")
