"""Long-time asymptotic formulas in a frame ``x = v t``.

Inside the light cone the phase ``theta`` has the real stationary points
``+-z0``; radiation is governed by ``r(z0)`` through ``kappa`` and by the
scalar function ``delta`` that removes the jump on ``(-z0, z0)``.  Soliton frames
use the dressed one-soliton problem (norming constant multiplied by
``delta(z_l)^-2``), solved with the same pole machinery as the reflectionless
reconstruction, plus ``tau^-1/2`` corrections from the parabolic-cylinder
constants.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy.interpolate import CubicSpline
from scipy.special import loggamma

from .inverse import pole_matrix, pole_set, theta
from .scattering import ScatteringData

EXTERIOR_P = 1.9
FRAME_TOLERANCE = 0.5  # soliton frame if |v - v_l| < FRAME_TOLERANCE / sqrt(tau)
QUAD_NODES = 200
# sign of the discrete-spectrum sum in the radiation phase
PHASE_SUM_SIGN = 1

_SIGMA3 = np.diag([1.0, -1.0]).astype(complex)


class FrameError(ValueError):
    pass


# --------------------------------------------------------------------------
# frames


def eigen_velocity(z: complex) -> float:
    """Velocity of the soliton whose eigenvalue has modulus ``|z|``."""
    rho2 = abs(z) ** 2
    return (1.0 - rho2) / (1.0 + rho2)


@dataclass(frozen=True)
class AsymptoticFrame:
    v: float
    z0: float  # nan outside the cone
    tau: float
    kind: str  # "kink", "breather", "interior-solitonless" or "exterior"
    index: int | None = None  # position in data.kinks / data.breathers

    @property
    def is_exterior(self) -> bool:
        return self.kind == "exterior"


def classify(data: ScatteringData, x: float, t: float, tolerance: float = FRAME_TOLERANCE) -> AsymptoticFrame:
    if t <= 0:
        raise FrameError("frames need t > 0")
    v = x / t
    if abs(v) >= 1:
        return AsymptoticFrame(v, float("nan"), float("nan"), "exterior")
    z0 = float(np.sqrt((t - x) / (t + x)))
    tau = t * z0 / (1.0 + z0 * z0)
    best = None
    for kind, items in (("kink", [1j * zeta for zeta, _ in data.kinks]), ("breather", [z for z, _ in data.breathers])):
        for i, z in enumerate(items):
            gap = abs(v - eigen_velocity(z))
            if gap < tolerance / np.sqrt(tau) and (best is None or gap < best[0]):
                best = (gap, kind, i)
    if best is None:
        return AsymptoticFrame(v, z0, tau, "interior-solitonless")
    return AsymptoticFrame(v, z0, tau, best[1], best[2])


def _frame_set(data: ScatteringData, frame: AsymptoticFrame):
    """Kink and breather eigenvalues strictly inside ``|z| < z0``, minus the frame's own."""
    kinks = [1j * zeta for i, (zeta, _) in enumerate(data.kinks) if zeta < frame.z0 and not (frame.kind == "kink" and frame.index == i)]
    brs = [complex(z) for i, (z, _) in enumerate(data.breathers) if abs(z) < frame.z0 and not (frame.kind == "breather" and frame.index == i)]
    return kinks, brs


# --------------------------------------------------------------------------
# reflection coefficient on the real line


class ReflectionSampler:
    """Smooth interpolant of ``r`` on the real axis (periodic spline in ``phi``)."""

    def __init__(self, data: ScatteringData):
        self.data = data
        r = data.r
        if data.grid.is_cayley:
            phi = data.grid.phis
            step = phi[1] - phi[0]
            knots = np.append(phi, phi[0] + 2 * np.pi)
            vals = np.append(r, r[0])
            self._spline = CubicSpline(knots, vals, bc_type="periodic")
            self._lo = phi[0]
            self._step = step
            self._cayley = True
        else:
            self._spline = CubicSpline(data.grid.zs, r)
            self._cayley = False

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        if self._cayley:
            phi = 2.0 * np.arctan(s)
            phi = np.where(phi < self._lo, phi + 2 * np.pi, phi)
            return self._spline(phi)
        zs = self.data.grid.zs
        if np.any(np.abs(s) > zs[-1]):
            raise ValueError("r grid does not cover the requested interval")
        return self._spline(s)

    def log_weight(self, s):
        return np.log1p(np.abs(self(s)) ** 2)


def kappa(r_at_z0: complex) -> float:
    return -np.log1p(abs(r_at_z0) ** 2) / (2.0 * np.pi)


def _gauss(z0, n=QUAD_NODES):
    nodes, weights = np.polynomial.legendre.leggauss(n)
    return z0 * nodes, z0 * weights


def chi_breve(z, z0: float, r: ReflectionSampler, n: int = QUAD_NODES):
    """``(1/2 pi i) int log((1+|r(s)|^2)/(1+|r(z0)|^2)) / (s - z) ds`` over ``[-z0, z0]``.

    The integrand vanishes at both endpoints (``|r|`` is even), so plain
    Gauss-Legendre applies, including at ``z = +-z0``.  Points on the open
    interval need ``chi`` with a side, not this function.
    """
    z = np.asarray(z, dtype=complex)
    s, w = _gauss(z0, n)
    g = r.log_weight(s) - r.log_weight(z0)
    return np.einsum("k,...k->...", w * g, 1.0 / (s - z[..., None])) / (2j * np.pi)


def chi(z, z0: float, r: ReflectionSampler, side: int = 0, n: int = QUAD_NODES):
    """``chi(z)`` with the logarithmic endpoint part split off analytically.

    For real ``z`` in ``(-z0, z0)`` pass ``side=+1`` or ``-1`` for the boundary
    value from the upper or lower half plane.
    """
    z = np.asarray(z, dtype=complex)
    k = kappa(r(z0))
    on_cut = (np.abs(z.imag) == 0) & (np.abs(z.real) < z0)
    if np.any(on_cut) and side == 0:
        raise ValueError("z lies on the cut; choose a side")
    safe = np.where(on_cut, 2j * z0, z)
    out = np.array(1j * k * (np.log(safe - z0) - np.log(safe + z0)) + chi_breve(safe, z0, r, n), dtype=complex)
    dens = lambda s: float(r.log_weight(s) - r.log_weight(z0))
    for idx in np.ndindex(z.shape):
        if not on_cut[idx]:
            continue
        # boundary value: principal value plus or minus half the density, and
        # arg(z - z0) = +-pi for the endpoint factor
        s0 = z[idx].real
        pv = integrate.quad(dens, -z0, z0, weight="cauchy", wvar=s0, limit=200)[0]
        head = 1j * k * (np.log(z0 - s0) - np.log(s0 + z0)) - np.pi * k * side
        out[idx] = head + pv / (2j * np.pi) + 0.5 * side * dens(s0)
    return out


def _product(z, kinks, breathers):
    z = np.asarray(z, dtype=complex)
    out = np.ones_like(z)
    for zk in kinks:
        out = out * (z - np.conj(zk)) / (z - zk)
    for zj in breathers:
        out = out * (z - np.conj(zj)) / (z - zj) * (z + zj) / (z + np.conj(zj))
    return out


def delta(z, frame: AsymptoticFrame, data: ScatteringData, side: int = 0, r: ReflectionSampler | None = None):
    """Scalar jump-removing function for ``frame``; ``side`` as in :func:`chi`."""
    if frame.is_exterior:
        raise FrameError("delta is defined inside the light cone only")
    z = np.asarray(z, dtype=complex)
    kinks, brs = _frame_set(data, frame)
    for p in kinks + brs + [-np.conj(b) for b in brs]:
        if np.any(np.abs(z - p) < 1e-14):
            raise ValueError(f"z collides with eigenvalue {p}")
    r = r or ReflectionSampler(data)
    return _product(z, kinks, brs) * np.exp(chi(z, frame.z0, r, side))


# --------------------------------------------------------------------------
# parabolic-cylinder constants


@dataclass(frozen=True)
class SteepestConstants:
    kappa: float
    r_z0: complex
    chi_z0: complex  # chi(z) - i kappa log(z - z0) at z0
    chibar_z0: complex
    eta0_plus: complex
    eta0_minus: complex
    delta0_A: complex
    delta0_B: complex
    beta12: complex
    beta21: complex
    phi_z0: float
    degenerate: bool = False

    @property
    def m_B1(self) -> np.ndarray:
        return np.array([[0.0, -1j * self.beta12], [1j * self.beta21, 0.0]])

    @property
    def m_A1(self) -> np.ndarray:
        return -_SIGMA3 @ np.conj(self.m_B1) @ _SIGMA3


def _arg_gamma(y: float) -> float:
    """Continuous ``arg Gamma(i y)`` for ``y <= 0``, anchored at ``y -> 0-``."""
    return float(np.imag(loggamma(1j * y))) if y != 0 else np.pi / 2


def pc_constants(data: ScatteringData, frame: AsymptoticFrame, r: ReflectionSampler | None = None) -> SteepestConstants:
    if frame.is_exterior:
        raise FrameError("parabolic-cylinder constants need |v| < 1")
    r = r or ReflectionSampler(data)
    z0, tau = frame.z0, frame.tau
    rz0 = complex(r(z0))
    k = kappa(rz0)
    kinks, brs = _frame_set(data, frame)
    eta_p = complex(_product(z0, kinks, brs))
    eta_m = complex(_product(-z0, kinks, brs))
    cb_p = complex(chi_breve(z0, z0, r))
    cb_m = complex(chi_breve(-z0, z0, r))
    # e^{chi(z)} = ((z - z0)/(z + z0))^{i kappa} e^{chi_breve}; the (8 tau) powers
    # carry the endpoint factor, leaving e^{chi_breve} at the stationary point
    d0B = (8 * tau) ** (-0.5j * k) * np.exp(-1j * tau) * np.exp(cb_p) * eta_p
    d0A = (8 * tau) ** (0.5j * k) * np.exp(1j * tau) * np.exp(cb_m) * eta_m
    integral = float(np.real(2j * cb_p))  # (1/pi) int log(ratio) / (s - z0)
    disc = sum(np.angle(z0 - zk) for zk in kinks) + sum(np.angle(z0 - zj) + np.angle(z0 + np.conj(zj)) for zj in brs)
    if rz0 == 0:
        return SteepestConstants(0.0, 0j, cb_p, cb_p, eta_p, eta_m, d0A, d0B, 0j, 0j, 0.0, degenerate=True)
    phi = -_arg_gamma(k) + np.pi / 4 - np.angle(np.conj(rz0)) + integral + PHASE_SUM_SIGN * 4 * disc
    amp = np.sqrt(2 * np.pi) * np.exp(-np.pi * k / 2)
    b12 = amp * np.exp(0.25j * np.pi) / (rz0 * np.exp(loggamma(-1j * k)))
    b21 = -amp * np.exp(-0.25j * np.pi) / (np.conj(rz0) * np.exp(loggamma(1j * k)))
    chi_z0 = cb_p - 1j * k * np.log(2 * z0)
    return SteepestConstants(k, rz0, chi_z0, cb_p, eta_p, eta_m, d0A, d0B, complex(b12), complex(b21), float(phi))


# --------------------------------------------------------------------------
# leading terms


def radiation_solitonless(data: ScatteringData, x, t: float, r: ReflectionSampler | None = None):
    """Leading ``(cos f, sin f)`` of the radiation at points ``x`` (same ``t``)."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    r = r or ReflectionSampler(data)
    cos_out, sin_out = np.empty_like(x), np.empty_like(x)
    for i, xi in enumerate(x):
        frame = classify(data, xi, t)
        if frame.kind != "interior-solitonless":
            raise FrameError(f"x = {xi} is in a {frame.kind} frame")
        cst = pc_constants(data, frame, r)
        tau, k = frame.tau, cst.kappa
        phase = 2 * tau + k * np.log(8 * tau) + cst.phi_z0
        cos_out[i] = 1 - 4 * abs(k) / tau * np.cos(phase) ** 2
        sin_out[i] = np.sqrt(8 * abs(k) / tau) * np.cos(phase)
    return cos_out, sin_out


def _dressed_data(data: ScatteringData, frame: AsymptoticFrame, r: ReflectionSampler):
    """One-soliton data whose constant carries ``delta(z_l)^-2``."""
    if frame.kind == "kink":
        zeta, c = data.kinks[frame.index]
        d = complex(delta(1j * zeta, frame, data, r=r))
        return ScatteringData.reflectionless(kinks=[(zeta, c * d**-2)])
    z, c = data.breathers[frame.index]
    d = complex(delta(z, frame, data, r=r))
    return ScatteringData.reflectionless(breathers=[(z, c * d**-2)])


def _corrections(m_plus, m_minus, m0, cst: SteepestConstants, tau):
    """``tau^-1/2`` corrections to ``cos f`` and ``sin f`` at one point."""
    if cst.degenerate:
        return 0.0, 0.0
    pre = 2.0 / np.sqrt(tau)
    A2, B2 = cst.delta0_A**2, cst.delta0_B**2
    a12, a21 = 1j * A2 * np.conj(cst.beta12), 1j * np.conj(cst.beta21) / A2
    b12, b21 = 1j * B2 * cst.beta12, 1j * cst.beta21 / B2
    upper = -m_minus[0, 0] ** 2 * a12 - m_minus[0, 1] ** 2 * a21 + m_plus[0, 0] ** 2 * b12 + m_plus[0, 1] ** 2 * b21
    lower = m_minus[1, 0] ** 2 * a12 + m_minus[1, 1] ** 2 * a21 - m_plus[1, 0] ** 2 * b12 - m_plus[1, 1] ** 2 * b21
    R_cos = pre * (upper * m0[1, 0] * m0[1, 1] + lower * m0[0, 0] * m0[0, 1])
    R_sin = pre * lower * (m0[0, 0] * m0[1, 1] + m0[0, 1] * m0[1, 0])
    return float(np.real(R_cos)), float(np.real(R_sin))


def dressed(data: ScatteringData, kind: str, x, t: float, r: ReflectionSampler | None = None):
    """``(cos_lead, sin_lead, R_cos, R_sin)`` in a ``kind`` ("kink" or "breather") frame."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    r = r or ReflectionSampler(data)
    out = np.empty((4, x.size))
    for i, xi in enumerate(x):
        frame = classify(data, xi, t)
        if frame.kind != kind:
            raise FrameError(f"x = {xi} is in a {frame.kind} frame, not {kind}")
        model = _dressed_data(data, frame, r)
        poles = pole_set(model, xi, t)
        m = pole_matrix(poles, np.array([0.0, frame.z0, -frame.z0]))
        m0 = m[0]
        cos_lead = float(np.real(1 + 2 * m0[0, 1] * m0[1, 0]))
        sin_lead = float(np.real(2 * m0[1, 0] * m0[1, 1]))
        cst = pc_constants(data, frame, r)
        R_cos, R_sin = _corrections(m[1], m[2], m0, cst, frame.tau)
        out[:, i] = cos_lead, sin_lead, R_cos, R_sin
    return tuple(out)


def dressed_kink(data: ScatteringData, x, t: float, r: ReflectionSampler | None = None):
    """``(cos_lead, sin_lead, R_cos, R_sin)`` in a kink frame."""
    return dressed(data, "kink", x, t, r)


def dressed_breather(data: ScatteringData, x, t: float, r: ReflectionSampler | None = None):
    """``(cos_lead, sin_lead, R_cos, R_sin)`` in a breather frame."""
    return dressed(data, "breather", x, t, r)


def kink_centre(data: ScatteringData, index: int, t: float, r: ReflectionSampler | None = None, iterations: int = 8) -> float:
    """Position where the dressed kink ``index`` has ``cos f = -1`` at time ``t``.

    The shift from ``delta(i zeta)^-2`` depends on the ray through ``z0``, so the
    centre is found by fixed-point iteration starting from the undressed path.
    """
    r = r or ReflectionSampler(data)
    zeta, c = data.kinks[index]
    speed = 0.5 * (zeta + 1 / zeta)
    x = eigen_velocity(1j * zeta) * t
    for _ in range(iterations):
        frame = classify(data, x, t)
        if frame.kind != "kink" or frame.index != index:
            raise FrameError(f"kink {index} leaves its frame at t = {t}")
        b = abs(c * complex(delta(1j * zeta, frame, data, r=r)) ** -2)
        x = (np.log(b / (2 * zeta)) - 0.5 * (zeta - 1 / zeta) * t) / speed
    return float(x)


def kink_frame_closed_form(zeta: float, b_shifted: float, x, t: float):
    """Leading ``(cos, sin)`` of a kink frame from its sech form.

    ``b_shifted`` is ``c delta(i zeta)^-2 / i`` for the package constant ``c``
    (positive for the kink rising from 0 to 2 pi, negative for the antikink).
    """
    x = np.asarray(x, dtype=float)
    u = 0.5 * ((zeta + 1 / zeta) * x + (zeta - 1 / zeta) * t) - np.log(b_shifted / (2 * zeta) + 0j)
    return np.real(1 - 2 / np.cosh(u) ** 2), np.real(-2 * np.sinh(u) / np.cosh(u) ** 2)


def breather_frame_closed_form(z: complex, c_shifted: complex, x, t: float):
    """Leading ``(cos u, sin u)`` of a breather frame.

    ``c_shifted`` is the package norming constant times ``delta(z)^-2``.
    """
    x = np.asarray(x, dtype=float)
    xi, eta = z.real, z.imag
    two_i_theta = 2j * theta(z, x, t)
    h = np.log(xi * abs(c_shifted) / (2 * eta * abs(z)))
    alpha = np.angle(c_shifted) - np.arctan(eta / xi)
    g = (eta / xi) * np.cos(two_i_theta.imag + alpha) / np.cosh(two_i_theta.real + h)
    cos_u = 1 - 8 * g**2 / (1 + g**2) ** 2
    sin_u = -4 * g * (1 - g**2) / (1 + g**2) ** 2
    return cos_u, sin_u


def exterior_bound(x: float, t: float, p: float = EXTERIOR_P):
    """Decay exponents ``(cos f - 1, sin f)`` outside the light cone."""
    if abs(x) <= abs(t):
        raise FrameError("exterior bounds apply for |x| > t only")
    if not 1 < p < 2:
        raise ValueError("p must lie in (1, 2)")
    return -3 + 2 / p, -1.5 + 1 / p


# --------------------------------------------------------------------------
# table output

CSV_HEADER = ("x", "t", "frame", "cos_lead", "sin_lead", "R_cos", "R_sin", "cos_total", "sin_total")


def asymptote_rows(data: ScatteringData, xs, t: float):
    """One row per point, each evaluated in the frame the point falls into."""
    r = ReflectionSampler(data)
    rows = []
    for x in np.atleast_1d(xs):
        frame = classify(data, float(x), t)
        if frame.kind == "exterior":
            cl, sl, rc, rs = 1.0, 0.0, 0.0, 0.0
            label = "exterior"
        elif frame.kind == "interior-solitonless":
            c, s = radiation_solitonless(data, x, t, r)
            cl, sl, rc, rs = c[0], s[0], 0.0, 0.0
            label = frame.kind
        else:
            cl, sl, rc, rs = (v[0] for v in dressed(data, frame.kind, x, t, r))
            label = f"{frame.kind}({frame.index})"
        rows.append((float(x), float(t), label, cl, sl, rc, rs, cl + rc, sl + rs))
    return rows


def write_asymptote_csv(rows, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for row in rows:
            w.writerow([row[0], row[1], row[2], *(repr(float(v)) for v in row[3:])])
