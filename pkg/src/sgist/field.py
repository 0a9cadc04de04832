"""Sampled fields and closed-form sine-Gordon solutions.

Every exact solution is exposed twice: as an analytic field object that can be
evaluated at arbitrary ``(x, t)`` (returning ``f``, ``f_x`` and ``f_t``), and
through an ``eval_*`` helper that samples it onto a grid as a :class:`FieldState`.
Time derivatives are always analytic.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Protocol

import numpy as np
from scipy.integrate import simpson

TWO_PI = 2.0 * np.pi
TRUNCATION_LEVEL = 1e-14


class TruncationWarning(UserWarning):
    """Integrand has not decayed at the ends of the grid."""


@dataclass(frozen=True)
class FieldState:
    """A field ``f`` and its time derivative sampled on a uniform grid at time ``t``.

    ``l_minus`` and ``l_plus`` are the integers with ``f -> 2*pi*l`` at the left and
    right ends; when omitted they are read off the end samples.
    """

    xs: np.ndarray
    f: np.ndarray
    ft: np.ndarray
    t: float = 0.0
    l_minus: int | None = None
    l_plus: int | None = None
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        xs = np.asarray(self.xs, dtype=np.float64)
        f = np.asarray(self.f, dtype=np.float64)
        ft = np.asarray(self.ft, dtype=np.float64)
        if xs.ndim != 1 or f.shape != xs.shape or ft.shape != xs.shape:
            raise ValueError("xs, f, ft must be 1-D arrays of equal length")
        if xs.size < 3:
            raise ValueError("a field needs at least 3 samples")
        dx = np.diff(xs)
        if np.any(dx <= 0):
            raise ValueError("xs must be strictly increasing")
        h = (xs[-1] - xs[0]) / (xs.size - 1)
        if np.max(np.abs(dx - h)) > 1e-12 * max(abs(xs[0]), abs(xs[-1]), 1.0) + 1e-12 * h:
            raise ValueError("xs must be uniformly spaced")
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "f", f)
        object.__setattr__(self, "ft", ft)
        object.__setattr__(self, "t", float(self.t))
        if self.l_minus is None:
            object.__setattr__(self, "l_minus", int(np.rint(f[0] / TWO_PI)))
        if self.l_plus is None:
            object.__setattr__(self, "l_plus", int(np.rint(f[-1] / TWO_PI)))

    @property
    def h(self) -> float:
        return float((self.xs[-1] - self.xs[0]) / (self.xs.size - 1))

    @property
    def fx(self) -> np.ndarray:
        return d_dx(self.f, self.h)

    def with_values(self, f=None, ft=None, t=None) -> "FieldState":
        return FieldState(
            self.xs,
            self.f if f is None else f,
            self.ft if ft is None else ft,
            self.t if t is None else t,
            self.l_minus,
            self.l_plus,
        )


def uniform_grid(a: float, b: float, h: float) -> np.ndarray:
    n = int(round((b - a) / h))
    return a + h * np.arange(n + 1)


def d_dx(u: np.ndarray, h: float) -> np.ndarray:
    """Fourth-order finite-difference derivative (one-sided stencils at the ends)."""
    u = np.asarray(u, dtype=np.float64)
    if u.size < 5:
        return np.gradient(u, h)
    out = np.empty_like(u)
    out[2:-2] = (u[:-4] - 8.0 * u[1:-3] + 8.0 * u[3:-1] - u[4:]) / (12.0 * h)
    out[0] = (-25 * u[0] + 48 * u[1] - 36 * u[2] + 16 * u[3] - 3 * u[4]) / (12.0 * h)
    out[1] = (-3 * u[0] - 10 * u[1] + 18 * u[2] - 6 * u[3] + u[4]) / (12.0 * h)
    out[-1] = (25 * u[-1] - 48 * u[-2] + 36 * u[-3] - 16 * u[-4] + 3 * u[-5]) / (12.0 * h)
    out[-2] = (3 * u[-1] + 10 * u[-2] - 18 * u[-3] + 6 * u[-4] - u[-5]) / (12.0 * h)
    return out


# --------------------------------------------------------------------------
# analytic fields


class AnalyticField(Protocol):
    def __call__(self, x, t) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Return ``(f, f_x, f_t)`` at the given points."""


def _arctan_exp(u):
    """``arctan(exp(u))`` and ``d/du`` of it without overflow."""
    u = np.asarray(u, dtype=np.float64)
    e = np.exp(-np.abs(u))
    val = np.where(u > 0, 0.5 * np.pi - np.arctan(e), np.arctan(e))
    return val, e / (1.0 + e * e)


@dataclass(frozen=True)
class KinkParams:
    beta: float = 0.0
    x0: float = 0.0
    sign: int = 1

    def __post_init__(self):
        if not abs(self.beta) < 1.0:
            raise ValueError(f"kink velocity must satisfy |beta| < 1, got {self.beta}")
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 (kink) or -1 (antikink)")

    @property
    def gamma(self) -> float:
        return 1.0 / math.sqrt(1.0 - self.beta**2)


@dataclass(frozen=True)
class Kink:
    p: KinkParams

    def __call__(self, x, t):
        g, b = self.p.gamma, self.p.beta
        u = g * (np.asarray(x, dtype=np.float64) - b * t + self.p.x0)
        val, dval = _arctan_exp(u)
        s = self.p.sign
        return s * 4.0 * val, s * 4.0 * g * dval, -s * 4.0 * g * b * dval


@dataclass(frozen=True)
class BreatherParams:
    beta: float
    v: float = 0.0
    x1: float = 0.0
    x2: float = 0.0

    def __post_init__(self):
        if not abs(self.v) < 1.0:
            raise ValueError(f"breather velocity must satisfy |v| < 1, got {self.v}")
        if not 0.0 < self.beta < self.gamma:
            raise ValueError(f"need 0 < beta < gamma = {self.gamma}, got {self.beta}")

    @property
    def gamma(self) -> float:
        return 1.0 / math.sqrt(1.0 - self.v**2)

    @property
    def alpha(self) -> float:
        return math.sqrt(self.gamma**2 - self.beta**2)


@dataclass(frozen=True)
class Breather:
    p: BreatherParams

    def __call__(self, x, t):
        a, b, v = self.p.alpha, self.p.beta, self.p.v
        x = np.asarray(x, dtype=np.float64)
        y1 = t - v * x + self.p.x1
        y2 = x - v * t + self.p.x2
        sech = 1.0 / np.cosh(b * y2)
        th = np.tanh(b * y2)
        c, s = np.cos(a * y1), np.sin(a * y1)
        g = (b / a) * c * sech
        w = 4.0 / (1.0 + g * g)
        # d/dy1 and d/dy2 of g
        g1 = -b * s * sech
        g2 = -(b * b / a) * c * sech * th
        return 4.0 * np.arctan(g), w * (-v * g1 + g2), w * (g1 - v * g2)


@dataclass(frozen=True)
class WobblerParams:
    beta: float
    alpha: float | None = None

    def __post_init__(self):
        if not 0.0 < self.beta < 1.0:
            raise ValueError(f"wobbler needs beta in (0, 1), got {self.beta}")
        if self.alpha is None:
            object.__setattr__(self, "alpha", math.sqrt(1.0 - self.beta**2))
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")


@dataclass(frozen=True)
class Wobbler:
    """Kink with an internal oscillation, ``4 atan2(V, U)``."""

    p: WobblerParams

    def __call__(self, x, t):
        b, a = self.p.beta, self.p.alpha
        x = np.asarray(x, dtype=np.float64)
        # common positive rescaling keeps every exponential finite
        m = np.where(x > 0, (1.0 + 2.0 * b) * x, 0.0)
        k = (1.0 + b) / (1.0 - b)
        q = 2.0 * b / (1.0 - b)
        e0 = np.exp(-m)
        e2b = np.exp(2 * b * x - m)
        e1b = np.exp((1 + b) * x - m)
        e1 = np.exp(x - m)
        e12b = np.exp((1 + 2 * b) * x - m)
        eb = np.exp(b * x - m)
        c, s = np.cos(a * t), np.sin(a * t)
        U = e0 + k * e2b - q * e1b * c
        V = k * e1 + e12b - q * eb * c
        Ux = k * 2 * b * e2b - q * (1 + b) * e1b * c
        Vx = k * e1 + (1 + 2 * b) * e12b - q * b * eb * c
        Ut = q * a * e1b * s
        Vt = q * a * eb * s
        # the common rescaling cancels in the ratios below
        den = U * U + V * V
        f = 4.0 * np.arctan2(V, U)
        fx = 4.0 * (U * Vx - V * Ux) / den
        ft = 4.0 * (U * Vt - V * Ut) / den
        return f, fx, ft


@dataclass(frozen=True)
class Boosted:
    base: AnalyticField
    beta: float

    def __call__(self, x, t):
        g = 1.0 / math.sqrt(1.0 - self.beta**2)
        x = np.asarray(x, dtype=np.float64)
        X = g * (x - self.beta * t)
        T = g * (t - self.beta * x)
        f, fX, fT = self.base(X, T)
        return f, g * (fX - self.beta * fT), g * (fT - self.beta * fX)


def lorentz_boost(state_fn: AnalyticField, beta: float) -> AnalyticField:
    """Compose an analytic field with the boost ``(x, t) -> (g(x - beta t), g(t - beta x))``."""
    if not abs(beta) < 1.0:
        raise ValueError(f"boost velocity must satisfy |beta| < 1, got {beta}")
    if beta == 0.0:
        return state_fn
    return Boosted(state_fn, float(beta))


def sample(fn: AnalyticField, xs, t: float = 0.0) -> FieldState:
    f, _, ft = fn(np.asarray(xs, dtype=np.float64), t)
    return FieldState(xs, f, ft, t)


def eval_kink(p: KinkParams, xs, t: float = 0.0) -> FieldState:
    return sample(Kink(p), xs, t)


def eval_breather(p: BreatherParams, xs, t: float = 0.0) -> FieldState:
    return sample(Breather(p), xs, t)


def eval_wobbler(p: WobblerParams, xs, t: float = 0.0) -> FieldState:
    return sample(Wobbler(p), xs, t)


def superpose(*fields: AnalyticField) -> AnalyticField:
    """Sum of analytic fields; exact only when the pieces are far apart."""

    def fn(x, t):
        parts = [g(x, t) for g in fields]
        return tuple(sum(p[i] for p in parts) for i in range(3))

    return fn


# --------------------------------------------------------------------------
# conserved quantities


def _integrate(integrand: np.ndarray, h: float, what: str) -> float:
    edge = max(abs(integrand[0]), abs(integrand[-1]))
    if edge > TRUNCATION_LEVEL:
        warnings.warn(
            f"{what} integrand is {edge:.2e} at the grid ends; domain may be truncated",
            TruncationWarning,
            stacklevel=3,
        )
    return float(simpson(integrand, dx=h))


def energy_density(state: FieldState) -> np.ndarray:
    fx = state.fx
    return 0.5 * (state.ft**2 + fx**2) + (1.0 - np.cos(state.f))


def energy(state: FieldState) -> float:
    return _integrate(energy_density(state), state.h, "energy")


def momentum(state: FieldState) -> float:
    return _integrate(0.5 * state.ft * state.fx, state.h, "momentum")


# --------------------------------------------------------------------------
# CSV + JSON sidecar


def sidecar_path(path) -> Path:
    return Path(path).with_suffix(".json")


def save_state(state: FieldState, path) -> None:
    path = Path(path)
    rows = np.column_stack([state.xs, state.f, state.ft])
    with open(path, "w", newline="\n") as fh:
        fh.write("x,f,ft\n")
        for x, f, ft in rows:
            fh.write(f"{float(x)!r},{float(f)!r},{float(ft)!r}\n")
    side = {"t": state.t, "l_minus": state.l_minus, "l_plus": state.l_plus}
    sidecar_path(path).write_text(json.dumps(side, indent=2) + "\n")


def load_state(path) -> FieldState:
    path = Path(path)
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    side = {}
    sp = sidecar_path(path)
    if sp.exists():
        side = json.loads(sp.read_text())
    return FieldState(
        data[:, 0],
        data[:, 1],
        data[:, 2],
        side.get("t", 0.0),
        side.get("l_minus"),
        side.get("l_plus"),
    )


FieldFunction = Callable[[np.ndarray, float], tuple]
