"""Time evolution of scattering data and reconstruction of the field.

The reconstruction solves the matrix Riemann-Hilbert problem on the real line
through its Beals-Coifman integral equation.  With ``r == 0`` the equation
collapses to a small linear system for the pole residues; otherwise the
continuum unknowns live on a Cayley grid ``z = tan(phi/2)`` where the Cauchy
projectors are exact Fourier masks in ``phi``.  The field is read off from
``m0 = M(z = 0)`` via ``sin f = 2 m21 m22`` and ``cos f = 1 + 2 m12 m21``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace

import numpy as np
from scipy.sparse.linalg import LinearOperator, gmres

from .field import FieldState, d_dx
from .scattering import ScatteringData, SpectralGrid

log = logging.getLogger(__name__)


class ReconstructionError(RuntimeError):
    pass


def theta(z, x, t):
    """Phase ``(1/4)((z - 1/z) x + (z + 1/z) t)``."""
    z = np.asarray(z, dtype=complex)
    if np.any(z == 0):
        raise ValueError("theta is singular at z = 0")
    return 0.25 * ((z - 1.0 / z) * x + (z + 1.0 / z) * t)


def theta_tilde(z, x, t):
    z = np.asarray(z, dtype=complex)
    return 0.25 * ((z + 1.0 / z) * x + (z - 1.0 / z) * t)


def re_i_theta(z, x, t):
    """Real part of ``i theta``; zero on the real axis."""
    return np.real(1j * theta(z, x, t))


def stationary_point(x, t):
    """Positive stationary point of theta for ``|x| < t``."""
    if not abs(x) < t:
        raise ValueError("stationary points are real only inside the light cone")
    return np.sqrt((t - x) / (t + x))


def _time_phase(z, t):
    return np.exp(0.5j * (z + 1.0 / z) * t)


def evolve_scattering(data: ScatteringData, t: float) -> ScatteringData:
    """Linear time flow of ``r`` and of the norming constants."""
    if t == 0:
        return replace(data, meta=dict(data.meta))
    r = data.r * _time_phase(data.zs.astype(complex), t)
    kinks = [(zeta, c * _time_phase(1j * zeta, t)) for zeta, c in data.kinks]
    breathers = [(z, c * _time_phase(z, t)) for z, c in data.breathers]
    meta = dict(data.meta)
    meta["t"] = meta.get("t", 0.0) + t
    return ScatteringData(data.grid, r, kinks, breathers, meta)


# --------------------------------------------------------------------------
# pole bookkeeping


@dataclass(frozen=True)
class _Poles:
    """Pole locations and residue coefficients (as logarithms) at one (x, t).

    Upper poles ``p`` carry first-column residues ``A_p = C_p M_2(p)``, lower
    poles ``q`` carry second-column residues ``B_q = D_q M_1(q)``.
    """

    up: np.ndarray
    log_up: np.ndarray
    lo: np.ndarray
    log_lo: np.ndarray

    @property
    def size(self):
        return self.up.size + self.lo.size


def pole_set(data: ScatteringData, x: float, t: float) -> _Poles:
    """Poles and residue coefficients of the discrete data at ``(x, t)``."""
    up, lup, lo, llo = [], [], [], []
    for zeta, c in data.kinks:
        zk = 1j * zeta
        up.append(zk)
        lup.append(np.log(complex(c)) + 2j * theta(zk, x, t))
        lo.append(np.conj(zk))
        llo.append(np.log(-np.conj(c)) - 2j * theta(np.conj(zk), x, t))
    for zj, c in data.breathers:
        zj = complex(zj)
        up += [zj, -np.conj(zj)]
        lup += [
            np.log(complex(c)) + 2j * theta(zj, x, t),
            np.log(-np.conj(c)) + 2j * theta(-np.conj(zj), x, t),
        ]
        lo += [np.conj(zj), -zj]
        llo += [
            np.log(-np.conj(c)) - 2j * theta(np.conj(zj), x, t),
            np.log(complex(c)) - 2j * theta(-zj, x, t),
        ]
    arr = lambda v: np.asarray(v, dtype=complex)
    return _Poles(arr(up), arr(lup), arr(lo), arr(llo))


def _scaled_rows(logc):
    """Row factors: rows with ``|C| > 1`` are divided by ``C``.

    Returns ``(diag, rhs)`` where the scaled row reads ``diag * X - (coupling) = rhs``
    with ``rhs`` multiplying the constant vector.  Overflow cannot occur: the
    large factor only ever appears as ``exp(-log C)``, which underflows to the
    saturated limit.
    """
    big = logc.real > 0
    diag = np.where(big, np.exp(-np.where(big, logc, 0.0)), 1.0)
    rhs = np.where(big, 1.0, np.exp(np.where(big, 0.0, logc)))
    return diag, rhs


# --------------------------------------------------------------------------
# reflectionless reconstruction


def pole_residues(poles: _Poles):
    """Residue vectors ``(A, B)`` of the pure-pole problem at one (x, t).

    ``A[p]`` is the first-column residue at ``poles.up[p]``, ``B[q]`` the
    second-column residue at ``poles.lo[q]``.
    """
    P, Q = poles.up, poles.lo
    n1, n2 = P.size, Q.size
    for pts in (P, Q):
        if pts.size > 1:
            gap = np.abs(pts[:, None] - pts[None, :]) + np.eye(pts.size)
            if gap.min() < 1e-10 * max(1.0, np.abs(pts).max()):
                raise ReconstructionError("coincident poles (non-generic data)")
    dP, rP = _scaled_rows(poles.log_up)
    dQ, rQ = _scaled_rows(poles.log_lo)
    K = np.zeros((n1 + n2, n1 + n2), complex)
    K[:n1, :n1] = np.diag(dP)
    K[n1:, n1:] = np.diag(dQ)
    K[:n1, n1:] = -rP[:, None] / (P[:, None] - Q[None, :])
    K[n1:, :n1] = -rQ[:, None] / (Q[:, None] - P[None, :])
    rhs = np.zeros((n1 + n2, 2), complex)
    rhs[:n1, 1] = rP  # A_p = C_p (e2 + ...)
    rhs[n1:, 0] = rQ  # B_q = D_q (e1 + ...)
    try:
        sol = np.linalg.solve(K, rhs)
    except np.linalg.LinAlgError as exc:
        raise ReconstructionError("singular pole system") from exc
    if not np.all(np.isfinite(sol)):
        raise ReconstructionError("singular pole system")
    return sol[:n1], sol[n1:]


def pole_matrix(poles: _Poles, z) -> np.ndarray:
    """``M(z)`` of the pure-pole problem, shape ``(2, 2)`` (or ``(..., 2, 2)``)."""
    z = np.asarray(z, dtype=complex)
    m = np.zeros(z.shape + (2, 2), complex)
    m[..., 0, 0] = m[..., 1, 1] = 1.0
    if poles.size == 0:
        return m
    A, B = pole_residues(poles)
    zz = z[..., None]
    if A.size:
        m[..., :, 0] += np.einsum("...p,pi->...i", 1.0 / (zz - poles.up), A)
    if B.size:
        m[..., :, 1] += np.einsum("...q,qi->...i", 1.0 / (zz - poles.lo), B)
    return m


def _m0_reflectionless(poles: _Poles):
    return pole_matrix(poles, 0.0)


def _located(solve, data, x, t):
    """Run ``solve(pole_set(...))``, naming ``(x, t)`` if the pole system is singular."""
    try:
        return solve(pole_set(data, x, t))
    except ReconstructionError as exc:
        raise ReconstructionError(f"{exc} at (x, t) = ({x:.6g}, {t:.6g})") from exc


@dataclass
class Reconstruction:
    """Output of a reconstruction: the state plus the raw trigonometric data."""

    state: FieldState
    sin_f: np.ndarray
    cos_f: np.ndarray
    diagnostics: dict


def angle_from_trig(sin_f, cos_f, l_minus: int = 0):
    """Continuous angle from its sine and cosine, anchored at ``2 pi l_minus`` on the left."""
    f = np.unwrap(np.arctan2(sin_f, cos_f))
    return f - 2.0 * np.pi * np.round(f[0] / (2.0 * np.pi)) + 2.0 * np.pi * l_minus


def _trig_from_m0(m0):
    return 2.0 * m0[1, 0] * m0[1, 1], 1.0 + 2.0 * m0[0, 1] * m0[1, 0]


def _ft_by_difference(fn, xs, t, dt=1e-4):
    """Fourth-order centred time difference of a reconstruction ``fn(t) -> f``."""
    fs = [fn(t + k * dt) for k in (-2, -1, 1, 2)]
    return (fs[0] - 8 * fs[1] + 8 * fs[2] - fs[3]) / (12 * dt)


def reconstruct_reflectionless(
    data: ScatteringData, xs, t: float = 0.0, with_ft: bool = True
) -> Reconstruction:
    """N-soliton field from pure discrete data, evaluated on ``xs`` at time ``t``.

    The data are taken at time 0; the time dependence enters through the pole
    coefficients ``c exp(+-2 i theta)``.
    """
    if not data.is_reflectionless:
        raise ValueError("data carry radiation; use reconstruct_full")
    xs = np.asarray(xs, dtype=float)

    def trig(tt):
        s = np.empty(xs.size)
        c = np.empty(xs.size)
        imag = 0.0
        for i, x in enumerate(xs):
            m0 = _located(_m0_reflectionless, data, x, tt)
            sv, cv = _trig_from_m0(m0)
            imag = max(imag, abs(sv.imag), abs(cv.imag))
            s[i], c[i] = sv.real, cv.real
        return s, c, imag

    s, c, imag = trig(t)
    f = angle_from_trig(s, c)
    if with_ft:
        ft = _ft_by_difference(lambda tt: angle_from_trig(*trig(tt)[:2]), xs, t)
    else:
        ft = np.zeros_like(f)
    state = FieldState(xs, f, ft, t)
    diag = {"imag_defect": imag, "unit_defect": float(np.max(np.abs(s**2 + c**2 - 1)))}
    return Reconstruction(state, s, c, diag)


# --------------------------------------------------------------------------
# Cauchy projectors on the Cayley circle


class CayleyProjector:
    """Cauchy projectors for functions sampled on a Cayley grid.

    With ``z = tan(phi/2)`` the upper half plane maps to the unit disc in
    ``-exp(i phi)``, so ``C+`` keeps the nonnegative Fourier modes in ``phi`` and
    subtracts the value at ``z = infinity`` (``phi = +-pi``).
    """

    def __init__(self, grid: SpectralGrid):
        if not grid.is_cayley:
            raise ValueError("projector needs a Cayley grid")
        n = grid.zs.size
        self.n = n
        self.z = grid.zs
        k = np.fft.fftfreq(n, 1.0 / n)
        self.plus = (k >= 0).astype(float)
        self.plus[n // 2] = 0.5  # split the Nyquist mode
        dphi = 2.0 * np.pi / n
        phis = grid.phis
        # Fourier coefficient g_k = (1/n) e^{i k (pi - dphi/2)} FFT[g]_k
        shift = np.exp(1j * k * (np.pi - 0.5 * dphi)) / n
        self._at_inf = shift * np.cos(np.pi * k)  # e^{i k pi}
        self._at_zero = shift.copy()
        self.weights = dphi * (1.0 + self.z**2) / 2.0  # dz = (1 + z^2)/2 dphi
        self.phis = phis

    def plus_minus(self, g):
        """``(C+ g, C- g)`` at the grid nodes."""
        G = np.fft.fft(g, axis=-1)
        Gp = G * self.plus
        pp = np.fft.ifft(Gp, axis=-1)
        pm = g - pp
        inf_p = np.sum(Gp * self._at_inf, axis=-1)
        inf_m = np.sum((G - Gp) * self._at_inf, axis=-1)
        return pp - inf_p[..., None], -(pm - inf_m[..., None])

    def plus_at_zero(self, g):
        """``C+ g`` evaluated at ``z = 0`` (``phi = 0``)."""
        G = np.fft.fft(g, axis=-1)
        Gp = G * self.plus
        return np.sum(Gp * self._at_zero, axis=-1) - np.sum(Gp * self._at_inf, axis=-1)

    def cauchy_off_axis(self, g, pts):
        """``(1/2 pi i) int g(s)/(s - p) ds`` for points off the real line."""
        pts = np.asarray(pts, complex)
        if pts.size == 0:
            return np.zeros(0, complex)
        ker = self.weights[None, :] / (self.z[None, :] - pts[:, None])
        return ker @ g / (2j * np.pi)


def _resample_to_cayley(data: ScatteringData, n: int | None):
    if data.grid.is_cayley and (n is None or n == data.grid.zs.size):
        return data.grid, data.r
    grid = SpectralGrid.cayley(n or 1024)
    src = data.grid.phis
    r = np.interp(grid.phis, src, data.r.real) + 1j * np.interp(grid.phis, src, data.r.imag)
    return grid, r


def _solve_point(proj: CayleyProjector, r, poles: _Poles, x, t, tol, maxiter):
    """Solve the Beals-Coifman system at one (x, t); returns ``(m0, fx+ft, info)``."""
    z = proj.z
    n = proj.n
    e2 = np.exp(2j * theta(z, x, t))
    rho = r * e2  # jump weight for the first column
    rho_t = np.conj(r) * np.conj(e2)  # jump weight for the second column
    P, Q = poles.up, poles.lo
    n1, n2 = P.size, Q.size
    for pts in (P, Q):
        if pts.size > 1:
            gap = np.abs(pts[:, None] - pts[None, :]) + np.eye(pts.size)
            if gap.min() < 1e-10 * max(1.0, np.abs(pts).max()):
                raise ReconstructionError("coincident poles (non-generic data)")
    dP, rP = _scaled_rows(poles.log_up)
    dQ, rQ = _scaled_rows(poles.log_lo)
    invSP = 1.0 / (z[None, :] - P[:, None]) if n1 else np.zeros((0, n))
    invSQ = 1.0 / (z[None, :] - Q[:, None]) if n2 else np.zeros((0, n))
    PQ = 1.0 / (P[:, None] - Q[None, :]) if n1 and n2 else np.zeros((n1, n2))
    KP = proj.weights[None, :] * invSP / (2j * np.pi) if n1 else np.zeros((0, n))
    KQ = proj.weights[None, :] * invSQ / (2j * np.pi) if n2 else np.zeros((0, n))
    size = 2 * n + n1 + n2

    def split(v):
        return v[:n], v[n : 2 * n], v[2 * n : 2 * n + n1], v[2 * n + n1 :]

    def matvec(v):
        u, w, A, B = split(v)
        _, cm = proj.plus_minus(rho * w)
        cp, _ = proj.plus_minus(rho_t * u)
        out_u = u - cm - (A @ invSP if n1 else 0.0)
        out_w = w - cp - (B @ invSQ if n2 else 0.0)
        out_A = dP * A - rP * (KP @ (rho_t * u) + (PQ @ B if n2 else 0.0)) if n1 else A
        out_B = dQ * B - rQ * (KQ @ (rho * w) + (-(PQ.T) @ A if n1 else 0.0)) if n2 else B
        return np.concatenate([out_u, out_w, np.atleast_1d(out_A), np.atleast_1d(out_B)])

    op = LinearOperator((size, size), matvec=matvec, dtype=complex)
    cols, info = [], []
    for comp in (0, 1):
        b = np.zeros(size, complex)
        if comp == 0:
            b[:n] = 1.0
            b[2 * n + n1 :] = rQ
        else:
            b[n : 2 * n] = 1.0
            b[2 * n : 2 * n + n1] = rP
        x0 = b.copy()
        sol, code = gmres(op, b, x0=x0, rtol=tol, atol=0.0, restart=min(size, 60), maxiter=maxiter)
        res = np.linalg.norm(op.matvec(sol) - b) / np.linalg.norm(b)
        if code != 0 or not np.isfinite(res) or res > 10 * tol:
            raise ReconstructionError(f"Beals-Coifman solve did not converge at x={x:.6g}, t={t:.6g} (residual {res:.2e})")
        cols.append(sol)
        info.append(res)
    m0 = np.empty((2, 2), complex)
    mu11 = None
    for comp, sol in enumerate(cols):
        u, w, A, B = split(sol)
        if comp == 0:
            mu11 = u
        m0[comp, 0] = (1.0 if comp == 0 else 0.0) + proj.plus_at_zero(rho * w) - (np.sum(A / P) if n1 else 0.0)
        m0[comp, 1] = (1.0 if comp == 1 else 0.0) + proj.plus_at_zero(rho_t * u) - (np.sum(B / Q) if n2 else 0.0)
    flux = np.sum(proj.weights * mu11 * rho_t) / np.pi
    return m0, flux, max(info)


def reconstruct_full(
    data: ScatteringData,
    xs,
    t: float = 0.0,
    n_grid: int | None = None,
    tol: float = 1e-12,
    maxiter: int = 20,
    with_ft: bool = True,
) -> Reconstruction:
    """Field from scattering data with radiation, on ``xs`` at time ``t``.

    ``data`` describe time 0.  Besides ``sin f``/``cos f`` from ``m0`` the solve
    also returns ``f_x + f_t`` from the first moment of ``mu_11``; the mismatch
    between that and a finite-difference of the angle is reported as
    ``flux_defect``.
    """
    xs = np.asarray(xs, dtype=float)
    grid, r = _resample_to_cayley(data, n_grid)
    sup_r = float(np.max(np.abs(r))) if r.size else 0.0
    if sup_r >= 1.0:
        log.warning("sup|r| = %.3g >= 1: outside the regime where convergence is expected", sup_r)
    proj = CayleyProjector(grid)

    def run(tt):
        s = np.empty(xs.size)
        c = np.empty(xs.size)
        flux = np.empty(xs.size)
        worst, imag = 0.0, 0.0
        for i, x in enumerate(xs):
            m0, fl, res = _located(lambda poles: _solve_point(proj, r, poles, x, tt, tol, maxiter), data, x, tt)
            sv, cv = _trig_from_m0(m0)
            s[i], c[i], flux[i] = sv.real, cv.real, fl.real
            imag = max(imag, abs(sv.imag), abs(cv.imag))
            worst = max(worst, res)
        return s, c, flux, worst, imag

    s, c, flux, worst, imag = run(t)
    f = angle_from_trig(s, c)
    diag = {"residual": worst, "imag_defect": imag, "sup_r": sup_r, "flux": flux}
    if with_ft:
        ft = _ft_by_difference(lambda tt: angle_from_trig(*run(tt)[:2]), xs, t)
        if xs.size >= 5:
            h = xs[1] - xs[0]
            diag["flux_defect"] = float(np.max(np.abs(d_dx(f, h) + ft - flux)[2:-2]))
    else:
        ft = np.zeros_like(f)
    return Reconstruction(FieldState(xs, f, ft, t), s, c, diag)


# --------------------------------------------------------------------------
# closed forms used as oracles


def kink_trig(zeta: float, b: float, xs, t: float = 0.0):
    """``(cos f, sin f)`` of the classical one-kink formula with parameter ``b``.

    In this package's residue convention the same field is produced by the
    norming constant ``conj(i b) = -i b``; ``b < 0`` is the kink rising from 0 to
    2 pi.
    """
    xs = np.asarray(xs, dtype=float)
    e = np.exp(2j * theta(1j * zeta, xs, t)).real  # exp(2 i theta(i zeta)) is real
    s = b * e / (2.0 * zeta)
    den = (zeta + b * b * e * e / (4.0 * zeta)) ** 2
    cos_f = 1.0 - 2.0 * b * b * e * e / den
    sin_f = 2.0 * b * e * (zeta - b * b * e * e / (4.0 * zeta)) / den
    return cos_f, sin_f


def breather_closed_form(rho: float, w: float, c: complex, xs, t: float = 0.0):
    """Classical one-breather field for eigenvalue ``rho e^{i w}`` and constant ``c = e^{p + i q}``.

    The same field is reconstructed here from the norming constant ``conj(c)``.
    """
    xs = np.asarray(xs, dtype=float)
    p, q = np.log(abs(c)), np.angle(c)
    K = 0.5 * np.log(1.0 / np.tan(w) ** 2 / 4.0)
    osc = 2.0 * np.cos(w) * theta(rho, xs, t).real - q - w
    env = 2.0 * np.sin(w) * theta_tilde(rho, xs, t).real - p - K + np.log(rho)
    return -4.0 * np.arctan(0.5 * np.exp(-K) * np.cos(osc) / np.cosh(env))
