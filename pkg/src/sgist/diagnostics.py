"""Weighted norms, windowed energies, field comparisons and decay fits."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass

import numpy as np
from scipy.integrate import simpson
from scipy.stats import linregress

from .field import FieldState

NORM_KINDS = ("H1sin_x_L2s", "L2s", "localized")
EDGE_LIMIT = 1e-8


class TruncationError(RuntimeError):
    """Integrand has not decayed at the ends of the grid."""


class WindowError(ValueError):
    pass


@dataclass(frozen=True)
class WeightedNormSpec:
    s: float = 0.0
    kind: str = "H1sin_x_L2s"
    c: float = 0.0  # frame velocity (localized only)
    L: float = 10.0  # window half-width (localized only)

    def __post_init__(self):
        if self.s < 0:
            raise ValueError("weight exponent s must be nonnegative")
        if self.kind not in NORM_KINDS:
            raise ValueError(f"kind must be one of {NORM_KINDS}")
        if self.kind == "localized" and not (abs(self.c) < 1 and self.L > 0):
            raise ValueError("localized norms need |c| < 1 and L > 0")


def _wrapped(f):
    """``f`` reduced to ``(-pi, pi]``."""
    return np.angle(np.exp(1j * np.asarray(f)))


def weighted_norm(state: FieldState, spec: WeightedNormSpec) -> float:
    """Squared weighted norm ``int <x>^{2s} (f_x^2 + f_t^2 + sin^2(f/2)) dx``.

    ``L2s`` drops the gradient term.  ``localized`` defers to
    :func:`localized_energy` at the state's own time.
    """
    if spec.kind == "localized":
        return localized_energy(state, spec, state.t)
    weight = (1.0 + state.xs**2) ** spec.s
    dens = state.ft**2 + np.sin(0.5 * state.f) ** 2
    if spec.kind == "H1sin_x_L2s":
        dens = dens + state.fx**2
    integrand = weight * dens
    edge = max(abs(integrand[0]), abs(integrand[-1]))
    if edge > EDGE_LIMIT:
        raise TruncationError(f"weighted integrand is {edge:.2e} at the grid ends")
    return float(simpson(integrand, dx=state.h))


def localized_energy(state: FieldState, spec: WeightedNormSpec, t: float) -> float:
    """``|f|^2 + |f_x|^2 + |f_t|^2`` integrated over ``|x - c t| < L``.

    ``f`` is taken modulo ``2 pi`` so a kink background far from the window
    does not contribute.
    """
    centre = spec.c * t
    lo, hi = centre - spec.L, centre + spec.L
    xs = state.xs
    if lo < xs[0] or hi > xs[-1]:
        raise WindowError(f"window [{lo:g}, {hi:g}] is clipped by the grid [{xs[0]:g}, {xs[-1]:g}]")
    inside = (xs >= lo) & (xs <= hi)
    dens = _wrapped(state.f) ** 2 + state.fx**2 + state.ft**2
    return float(simpson(dens[inside], x=xs[inside]))


def fit_decay_exponent(samples) -> tuple[float, float]:
    """Least-squares slope of ``log value`` against ``log t``, with its standard error."""
    t, v = np.asarray(samples, dtype=float).T
    if t.size < 3:
        raise ValueError("need at least three samples")
    if np.any(v <= 0) or np.any(t <= 0):
        raise ValueError("times and values must be positive")
    fit = linregress(np.log(t), np.log(v))
    return float(fit.slope), float(fit.stderr)


@dataclass
class Metrics:
    max: float
    l2: float
    windowed_l2: float | None = None
    slope: float | None = None
    stderr: float | None = None

    def to_json(self) -> str:
        return json.dumps(asdict(self))


def compare_fields(a: FieldState, b: FieldState, window: tuple | None = None, component: str = "f") -> Metrics:
    """Differences of ``f`` (or ``ft``) between two states on the same grid."""
    if a.xs.shape != b.xs.shape or np.max(np.abs(a.xs - b.xs)) > 1e-12 * max(1.0, abs(a.xs).max()):
        raise ValueError("states live on different grids")
    if component not in ("f", "ft"):
        raise ValueError("component must be 'f' or 'ft'")
    d = getattr(a, component) - getattr(b, component)
    h = a.h
    out = Metrics(float(np.max(np.abs(d))), float(np.sqrt(simpson(d * d, dx=h))))
    if window is not None:
        lo, hi = window
        inside = (a.xs >= lo) & (a.xs <= hi)
        if inside.sum() < 3:
            raise WindowError("window holds fewer than three grid points")
        out.windowed_l2 = float(np.sqrt(simpson(d[inside] ** 2, x=a.xs[inside])))
    return out
