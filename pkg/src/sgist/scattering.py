"""Direct scattering for the sine-Gordon spatial Lax operator.

The spatial problem is ``Psi_x = (-J + U) Psi`` with ``J = i lam sigma_3``,
``lam = (z - 1/z)/4`` and a potential built from ``cos f``, ``sin f`` and
``f_x + f_t``.  For ``|z| < 1`` the potential carries a ``1/z`` factor, so the
solver switches to the rotated unknown ``Phi = R(-f/2) Psi`` whose potential is
``O(z)`` there.  Both systems are integrated with the same fourth-order Magnus
sweep (see :mod:`sgist.kernels`).

Conventions: ``Psi^+ = Psi^- S`` with ``S = [[a, b_], [b, a_]]`` (``a_`` is the
entry written with a breve), ``r = -b / a_``, eigenvalues are zeros of ``a_`` in
the upper half plane and norming constants are ``c = b_i / a_'(z_i)`` with
``m^-_1 = b_i m^+_2 exp(2 i lam x)``.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import kernels
from .field import FieldState, d_dx

log = logging.getLogger(__name__)


class ScatteringError(RuntimeError):
    pass


class SpectralSingularityError(ScatteringError):
    pass


class NonGenericDataError(ScatteringError):
    pass


# --------------------------------------------------------------------------
# spectral grid


@dataclass(frozen=True)
class SpectralGrid:
    """Real nonzero spectral nodes, sorted and symmetric under ``z -> -z``.

    The default construction places nodes uniformly in the angle ``phi`` of the
    Cayley map ``z = tan(phi / 2)``; this grades them geometrically toward both
    ``0`` and ``infinity`` and makes ``z -> -1/z`` a shift by half the grid.
    """

    zs: np.ndarray

    def __post_init__(self):
        zs = np.asarray(self.zs, dtype=np.float64)
        if zs.ndim != 1 or zs.size < 2 or zs.size % 2:
            raise ValueError("grid must hold an even number of nodes")
        if np.any(zs == 0):
            raise ValueError("grid may not contain z = 0")
        if np.any(np.diff(zs) <= 0):
            raise ValueError("grid must be strictly increasing")
        if np.max(np.abs(zs + zs[::-1])) > 1e-12 * np.max(np.abs(zs)):
            raise ValueError("grid must be symmetric about 0")
        object.__setattr__(self, "zs", zs)

    @classmethod
    def cayley(cls, n: int = 1024) -> "SpectralGrid":
        if n < 4 or n % 2:
            raise ValueError("n must be even and at least 4")
        phi = -np.pi + (np.arange(n) + 0.5) * (2.0 * np.pi / n)
        return cls(np.tan(phi / 2.0))

    @property
    def phis(self) -> np.ndarray:
        return 2.0 * np.arctan(self.zs)

    @property
    def positive(self) -> np.ndarray:
        return self.zs[self.zs.size // 2 :]

    @property
    def is_cayley(self) -> bool:
        n = self.zs.size
        ref = -np.pi + (np.arange(n) + 0.5) * (2.0 * np.pi / n)
        return bool(np.max(np.abs(self.phis - ref)) < 1e-9)


# --------------------------------------------------------------------------
# scattering data containers


@dataclass(frozen=True)
class ScatteringMatrixSample:
    z: np.ndarray
    a: np.ndarray
    abar: np.ndarray
    b: np.ndarray
    bbar: np.ndarray

    @property
    def det(self):
        return self.a * self.abar - self.b * self.bbar

    @property
    def r(self):
        return -self.b / self.abar


@dataclass
class ScatteringData:
    """Reflection samples plus discrete spectrum.

    ``kinks`` holds ``(zeta, c)`` for eigenvalues ``i zeta``; ``breathers`` holds
    ``(z, c)`` with ``z`` in the first quadrant standing for ``{+-z, +-conj z}``.
    """

    grid: SpectralGrid
    r: np.ndarray
    kinks: list = field(default_factory=list)
    breathers: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.r = np.asarray(self.r, dtype=complex)
        if self.r.shape != self.grid.zs.shape:
            raise ValueError("r must be sampled on the grid")
        self.kinks = [(float(z), complex(c)) for z, c in self.kinks]
        self.breathers = [(complex(z), complex(c)) for z, c in self.breathers]
        for zeta, _ in self.kinks:
            if zeta <= 0:
                raise ValueError("kink eigenvalues need zeta > 0")
        for z, _ in self.breathers:
            if not (z.real > 0 and z.imag > 0):
                raise ValueError("breather eigenvalues must lie in the first quadrant")

    @classmethod
    def reflectionless(cls, kinks=(), breathers=(), grid: SpectralGrid | None = None):
        grid = grid or SpectralGrid.cayley(64)
        return cls(grid, np.zeros(grid.zs.size, complex), list(kinks), list(breathers))

    @property
    def zs(self):
        return self.grid.zs

    @property
    def is_reflectionless(self) -> bool:
        return not np.any(self.r)

    def symmetry_defect(self) -> float:
        return float(np.max(np.abs(self.r - np.conj(self.r[::-1]))))

    def is_generic(self) -> bool:
        moduli = [z for z, _ in self.kinks] + [abs(z) for z, _ in self.breathers]
        m = np.sort(np.asarray(moduli))
        return bool(m.size < 2 or np.min(np.diff(m)) > 1e-9)

    def to_json(self) -> dict:
        meta = dict(self.meta)
        meta.setdefault("generic", self.is_generic())
        return {
            "grid": self.grid.zs.tolist(),
            "r": [[float(v.real), float(v.imag)] for v in self.r],
            "kinks": [{"zeta": z, "c": [c.real, c.imag]} for z, c in self.kinks],
            "breathers": [{"z": [z.real, z.imag], "c": [c.real, c.imag]} for z, c in self.breathers],
            "meta": meta,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "ScatteringData":
        grid = SpectralGrid(np.asarray(obj["grid"], dtype=float))
        r = np.array([complex(a, b) for a, b in obj.get("r", [])] or np.zeros(grid.zs.size), dtype=complex)
        kinks = [(k["zeta"], complex(*k["c"])) for k in obj.get("kinks", [])]
        breathers = [(complex(*b["z"]), complex(*b["c"])) for b in obj.get("breathers", [])]
        return cls(grid, r, kinks, breathers, dict(obj.get("meta", {})))

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), indent=1) + "\n")

    @classmethod
    def load(cls, path) -> "ScatteringData":
        return cls.from_json(json.loads(Path(path).read_text()))


# --------------------------------------------------------------------------
# the solver


def _lagrange4(xs, h, vals, xq):
    """Cubic Lagrange interpolation on a uniform grid (4 nearest samples)."""
    n = xs.size
    j = np.clip(np.floor((xq - xs[0]) / h).astype(int) - 1, 0, n - 4)
    u = (xq - xs[j]) / h
    w0 = -(u - 1) * (u - 2) * (u - 3) / 6.0
    w1 = u * (u - 2) * (u - 3) / 2.0
    w2 = -u * (u - 1) * (u - 3) / 2.0
    w3 = u * (u - 1) * (u - 2) / 6.0
    return [w0 * v[j] + w1 * v[j + 1] + w2 * v[j + 2] + w3 * v[j + 3] for v in vals]


def _rot(theta):
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [s, c]])


@dataclass
class _Cells:
    C: np.ndarray
    S: np.ndarray
    Wpsi: np.ndarray
    Wphi: np.ndarray

    def sliced(self, lo, hi):
        return _Cells(self.C[:, lo:hi], self.S[:, lo:hi], self.Wpsi[:, lo:hi], self.Wphi[:, lo:hi])


class Scatterer:
    """Scattering computations for one sampled field.

    Gauss-node samples of the potential are prepared once; every query is then
    a vectorised sweep over an array of spectral parameters.
    """

    def __init__(self, state: FieldState, stride: int = 1, backend: str | None = None):
        if stride < 1 or (state.xs.size - 1) % stride:
            raise ValueError("stride must divide the number of grid cells")
        self.state = state
        self.H = state.h * stride
        self.xb = state.xs[::stride]
        self.fb = state.f[::stride]
        self.backend = backend
        fx = d_dx(state.f, state.h)
        nodes = []
        for c in kernels.NODE:
            xq = self.xb[:-1] + c * self.H
            f, ft, fxq = _lagrange4(state.xs, state.h, (state.f, state.ft, fx), xq)
            nodes.append((f, ft, fxq))
        f = np.array([n[0] for n in nodes])
        ft = np.array([n[1] for n in nodes])
        fxn = np.array([n[2] for n in nodes])
        self.cells = _Cells(-2.0 * np.sin(0.5 * f) ** 2, np.sin(f), fxn + ft, fxn - ft)
        edge = np.abs(np.array([state.f[0], state.f[-1]]) - 2 * np.pi * np.array([state.l_minus, state.l_plus]))
        edge = max(edge.max(), np.abs(state.ft[[0, -1]]).max(), np.abs(fx[[0, -1]]).max())
        if edge > 1e-6:
            log.warning("potential has not decayed at the grid ends (%.2e)", edge)
        self.edge_defect = float(edge)

    # -- helpers -------------------------------------------------------------

    @staticmethod
    def _lam(z):
        return 0.25 * (z - 1.0 / z)

    def _system(self, z, gauge):
        c = self.cells
        if gauge:
            return (c.C, c.S, c.Wphi), -0.25j * z, -1.0
        return (c.C, c.S, c.Wpsi), 0.25j / z, 1.0

    def _gauge(self, idx):
        """Rotation taking Psi to Phi at boundary index ``idx``."""
        return _rot(-0.5 * self.fb[idx])

    def _meet_index(self):
        dens = np.abs(np.sin(0.5 * self.fb)) + np.abs(np.diff(self.fb, append=self.fb[-1]))
        if dens.sum() == 0:
            return self.xb.size // 2
        return int(np.clip(np.round(np.sum(np.arange(dens.size) * dens) / dens.sum()), 1, self.xb.size - 2))

    # -- real axis -----------------------------------------------------------

    def matrix(self, zs, switch: float = 1.0) -> ScatteringMatrixSample:
        """Scattering matrix on real ``z`` (any shape-1 array of nonzero reals).

        Nodes with ``|z| < switch`` use the rotated system; moving ``switch``
        lets the two systems be compared on an annulus.
        """
        zs = np.atleast_1d(np.asarray(zs, dtype=float))
        if np.any(zs == 0):
            raise ValueError("z = 0 is excluded")
        a = np.empty(zs.size, complex)
        abar, b, bbar = np.empty_like(a), np.empty_like(a), np.empty_like(a)
        xL, xR = self.xb[0], self.xb[-1]
        for gauge in (False, True):
            sel = (np.abs(zs) < switch) if gauge else (np.abs(zs) >= switch)
            if not np.any(sel):
                continue
            z = zs[sel].astype(complex)
            lam = self._lam(z)
            nodes, k, sig = self._system(z, gauge)
            t11, t12, t21, t22 = kernels.transfer(nodes, lam, k, sig, self.H, self.backend)
            if gauge:
                gl, gr = self._gauge(0), self._gauge(-1).T
                # T_psi = G_R^{-1} T_phi G_L, with G^{-1} = G^T for rotations
                p11 = t11 * gl[0, 0] + t12 * gl[1, 0]
                p12 = t11 * gl[0, 1] + t12 * gl[1, 1]
                p21 = t21 * gl[0, 0] + t22 * gl[1, 0]
                p22 = t21 * gl[0, 1] + t22 * gl[1, 1]
                t11 = gr[0, 0] * p11 + gr[0, 1] * p21
                t12 = gr[0, 0] * p12 + gr[0, 1] * p22
                t21 = gr[1, 0] * p11 + gr[1, 1] * p21
                t22 = gr[1, 0] * p12 + gr[1, 1] * p22
            # M = e^{J xR} T e^{-J xL} = S^{-1} = [[a_, -b_], [-b, a]]
            ph = np.exp(1j * lam * (xR + xL))
            m11 = t11 * np.exp(1j * lam * (xR - xL))
            m22 = t22 * np.exp(-1j * lam * (xR - xL))
            m12 = t12 * ph
            m21 = t21 / ph
            abar[sel], a[sel], b[sel], bbar[sel] = m11, m22, -m21, -m12
        return ScatteringMatrixSample(zs, a, abar, b, bbar)

    # -- complex z -----------------------------------------------------------

    def _columns(self, z, meet=None, keep=False):
        """Normalised Jost columns m^-_1 (from the left) and m^+_2 (from the right).

        Returns the two columns in the Psi frame either at the meeting index or,
        with ``keep``, at every boundary.
        """
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        nb = self.xb.size
        meet = self._meet_index() if meet is None else meet
        if keep:
            out_l = np.empty((2, nb, z.size), complex)
            out_r = np.empty_like(out_l)
        else:
            out_l = np.empty((2, z.size), complex)
            out_r = np.empty_like(out_l)
        for gauge in (False, True):
            sel = (np.abs(z) < 1.0) if gauge else (np.abs(z) >= 1.0)
            if not np.any(sel):
                continue
            zz = z[sel]
            lam = self._lam(zz)
            nodes, k, sig = self._system(zz, gauge)
            gl = self._gauge(0) if gauge else np.eye(2)
            gr = self._gauge(-1) if gauge else np.eye(2)
            if keep:
                lo, hi = nb - 1, 0
            else:
                lo, hi = meet, meet
            left_nodes = tuple(n[:, :lo] for n in nodes)
            right_nodes = tuple(n[:, hi:] for n in nodes)
            l1, l2 = kernels.columns(left_nodes, lam, k, sig, self.H, gl[0, 0], gl[1, 0], True, 1, keep, self.backend)
            r1, r2 = kernels.columns(right_nodes, lam, k, sig, self.H, gr[0, 1], gr[1, 1], False, 1, keep, self.backend)
            if keep:
                idx = np.arange(nb)
                ridx = idx
            else:
                idx = np.array([meet])
                ridx = idx
                l1, l2, r1, r2 = l1[None], l2[None], r1[None], r2[None]
            if gauge:
                # back to the Psi frame: Psi = G^T Phi
                ang = -0.5 * self.fb[idx]
                c, s = np.cos(ang)[:, None], np.sin(ang)[:, None]
                l1, l2 = c * l1 + s * l2, -s * l1 + c * l2
                angr = -0.5 * self.fb[ridx]
                c, s = np.cos(angr)[:, None], np.sin(angr)[:, None]
                r1, r2 = c * r1 + s * r2, -s * r1 + c * r2
            if keep:
                out_l[0][:, sel], out_l[1][:, sel] = l1, l2
                out_r[0][:, sel], out_r[1][:, sel] = r1, r2
            else:
                out_l[0][sel], out_l[1][sel] = l1[0], l2[0]
                out_r[0][sel], out_r[1][sel] = r1[0], r2[0]
        return out_l, out_r

    def abar(self, z, meet=None) -> np.ndarray:
        """``a_(z) = det[m^-_1, m^+_2]`` for ``z`` in the closed upper half plane."""
        (l1, l2), (r1, r2) = self._columns(z, meet)
        return l1 * r2 - l2 * r1

    def jost(self, z: complex, side: int, x0: float | None = None) -> np.ndarray:
        """Full normalised Jost matrix ``m^{side}`` at ``x0`` (nearest boundary).

        Columns that grow away from the normalising end are integrated anyway;
        this is accurate only for moderate ``|Im lam| * distance``.
        """
        z = complex(z)
        if z == 0:
            raise ValueError("z = 0 is excluded")
        x0 = 0.0 if x0 is None else x0
        i0 = int(np.argmin(np.abs(self.xb - x0)))
        gauge = abs(z) < 1.0
        zz = np.array([z])
        lam = self._lam(zz)
        nodes, k, sig = self._system(zz, gauge)
        if side < 0:
            g0 = self._gauge(0) if gauge else np.eye(2)
            sub = tuple(n[:, :i0] for n in nodes)
            c1 = kernels.columns(sub, lam, k, sig, self.H, g0[0, 0], g0[1, 0], True, 1, False, self.backend)
            c2 = kernels.columns(sub, lam, k, sig, self.H, g0[0, 1], g0[1, 1], True, -1, False, self.backend)
        else:
            g0 = self._gauge(-1) if gauge else np.eye(2)
            sub = tuple(n[:, i0:] for n in nodes)
            c1 = kernels.columns(sub, lam, k, sig, self.H, g0[0, 0], g0[1, 0], False, -1, False, self.backend)
            c2 = kernels.columns(sub, lam, k, sig, self.H, g0[0, 1], g0[1, 1], False, 1, False, self.backend)
        m = np.array([[c1[0][0], c2[0][0]], [c1[1][0], c2[1][0]]])
        if gauge:
            m = self._gauge(i0).T @ m
        return m


# --------------------------------------------------------------------------
# module-level operations


def jost_solve(state: FieldState, z: complex, side: int, x0: float = 0.0, stride: int = 1) -> np.ndarray:
    if side not in (-1, 1):
        raise ValueError("side must be -1 (left) or +1 (right)")
    return Scatterer(state, stride).jost(z, side, x0)


def scattering_matrix(state: FieldState, z, stride: int = 1) -> ScatteringMatrixSample:
    return Scatterer(state, stride).matrix(z)


def reflection_coefficient(
    state: FieldState,
    grid: SpectralGrid | None = None,
    stride: int = 1,
    singular_tol: float = 1e-8,
    scatterer: Scatterer | None = None,
) -> np.ndarray:
    """Reflection coefficient on the grid; negative nodes filled by ``r(-z) = conj r(z)``."""
    grid = grid or SpectralGrid.cayley()
    sc = scatterer or Scatterer(state, stride)
    pos = grid.positive
    s = sc.matrix(pos)
    bad = np.abs(s.abar) < singular_tol
    if np.any(bad):
        raise SpectralSingularityError(f"near spectral singularity at z = {pos[bad][0]:.6g}")
    r_pos = -s.b / s.abar
    return np.concatenate([np.conj(r_pos[::-1]), r_pos])


# -- eigenvalues -------------------------------------------------------------


def _winding(vals):
    d = np.angle(vals[..., 1:] / vals[..., :-1])
    return d


SPLIT = 0.5 + 0.0371


@dataclass(frozen=True)
class Box:
    x0: float
    x1: float
    y0: float
    y1: float

    def boundary(self, n):
        t = (np.arange(n) / n)
        bottom = self.x0 + (self.x1 - self.x0) * t + 1j * self.y0
        right = self.x1 + 1j * (self.y0 + (self.y1 - self.y0) * t)
        top = self.x1 - (self.x1 - self.x0) * t + 1j * self.y1
        left = self.x0 + 1j * (self.y1 - (self.y1 - self.y0) * t)
        return np.concatenate([bottom, right, top, left])

    def split(self):
        # off-centre cut so symmetric zeros (kinks sit on the imaginary axis)
        # never land on a dividing line
        xm = self.x0 + SPLIT * (self.x1 - self.x0)
        ym = self.y0 + SPLIT * (self.y1 - self.y0)
        return [
            Box(self.x0, xm, self.y0, ym),
            Box(xm, self.x1, self.y0, ym),
            Box(self.x0, xm, ym, self.y1),
            Box(xm, self.x1, ym, self.y1),
        ]

    @property
    def size(self):
        return max(self.x1 - self.x0, self.y1 - self.y0)

    @property
    def center(self):
        return complex(0.5 * (self.x0 + self.x1), 0.5 * (self.y0 + self.y1))


def _count_zeros(sc: Scatterer, boxes, per_edge=64, max_refine=8):
    """Argument-principle zero counts of ``a_`` inside each box.

    Segments whose phase jump exceeds pi/4 are bisected locally.  Also returns,
    per box, the first contour moment divided by the count, which is the zero
    itself when the box holds exactly one.
    """
    loops = [np.append(b.boundary(per_edge), b.boundary(per_edge)[:1]) for b in boxes]
    sizes = [l.size for l in loops]
    vals_all = sc.abar(np.concatenate(loops))
    vals = np.split(vals_all, np.cumsum(sizes)[:-1])
    for _ in range(max_refine):
        bad = [np.abs(_winding(v)) > np.pi / 4 for v in vals]
        if not any(m.any() for m in bad):
            break
        mids = [0.5 * (l[:-1][m] + l[1:][m]) for l, m in zip(loops, bad)]
        new = sc.abar(np.concatenate(mids)) if sum(x.size for x in mids) else np.empty(0, complex)
        pos = 0
        for i, (l, m, md) in enumerate(zip(loops, bad, mids)):
            nv = new[pos : pos + md.size]
            pos += md.size
            idx = np.flatnonzero(m) + 1
            loops[i] = np.insert(l, idx, md)
            vals[i] = np.insert(vals[i], idx, nv)
    counts, centres = [], []
    for l, v in zip(loops, vals):
        if np.any(v == 0):
            raise ScatteringError("a_ vanishes on a counting contour")
        dlog = np.log(np.abs(v[1:] / v[:-1])) + 1j * _winding(v)
        n = int(np.rint(np.sum(dlog.imag) / (2 * np.pi)))
        counts.append(n)
        zmid = 0.5 * (l[1:] + l[:-1])
        centres.append(np.sum(zmid * dlog) / (2j * np.pi * n) if n else np.nan)
    return counts, centres


def _cauchy_derivative(sc: Scatterer, zs, radii, npts=16):
    zs = np.asarray(zs, complex)
    w = np.exp(2j * np.pi * np.arange(npts) / npts)
    pts = zs[:, None] + radii[:, None] * w[None, :]
    vals = sc.abar(pts.ravel()).reshape(pts.shape)
    return np.mean(vals / w[None, :], axis=1) / radii


def _newton(sc: Scatterer, z0, maxit=40):
    """Batched Newton iteration on ``a_`` with Cauchy-integral derivatives."""
    z = np.asarray(z0, complex).copy()
    done = np.zeros(z.size, bool)
    for _ in range(maxit):
        act = ~done
        if not np.any(act):
            break
        za = z[act]
        radii = np.minimum(0.05 * np.abs(za), 0.5 * za.imag)
        if z.size > 1:
            dist = np.abs(za[:, None] - z[None, :])
            dist[dist == 0] = np.inf
            radii = np.minimum(radii, 0.3 * dist.min(axis=1))
        f = sc.abar(za)
        df = _cauchy_derivative(sc, za, radii)
        step = f / df
        z[act] = za - step
        done[act] = np.abs(step) < 1e-14 * np.maximum(1.0, np.abs(za))
        if np.any(~np.isfinite(z)):
            raise ScatteringError("Newton iteration diverged")
    return z, sc.abar(z)


@dataclass
class Eigenvalue:
    z: complex
    multiplicity: int
    kind: str
    residual: float


def find_eigenvalues(
    state: FieldState,
    search_box: tuple = (-5.0, 5.0, 0.02, 5.0),
    stride: int = 1,
    per_edge: int = 64,
    kink_tol: float = 1e-6,
    scatterer: Scatterer | None = None,
) -> list[Eigenvalue]:
    """All zeros of ``a_`` in an upper-half-plane rectangle, Newton-refined."""
    box = Box(*search_box)
    if box.y0 <= 0:
        raise ValueError("search box must stay off the real axis")
    sc = scatterer or Scatterer(state, stride)
    (total,), (centre,) = _count_zeros(sc, [box], per_edge)
    if total < 0:
        raise ScatteringError("negative zero count: contour resolution too coarse")
    if total == 0:
        return []
    active = [(box, total, centre)]
    leaves, roots, res = [], [], []
    for _ in range(60):
        if not active:
            break
        # a box holding one zero is first tried by Newton from its centre
        single = [(b, c) for b, n, c in active if n == 1]
        if single:
            z, f = _newton(sc, np.array([c for _, c in single]), maxit=12)
            accepted = set()
            for i, (b, _) in enumerate(single):
                inside = b.x0 <= z[i].real <= b.x1 and b.y0 <= z[i].imag <= b.y1
                if inside and np.isfinite(f[i]) and abs(f[i]) < 1e-9:
                    leaves.append(b)
                    roots.append(z[i])
                    res.append(f[i])
                    accepted.add(id(b))
            active = [a for a in active if id(a[0]) not in accepted]
        todo = []
        for b, n, _ in active:
            if b.size < 1e-6:
                raise NonGenericDataError(f"multiple zero of a_ near {b.center:.6g}")
            todo.extend(b.split())
        if not todo:
            break
        edge = [max(16, int(per_edge * b.size / box.size)) for b in todo]
        counts = []
        for ne in sorted(set(edge)):
            grp = [b for b, e in zip(todo, edge) if e == ne]
            cnt, cen = _count_zeros(sc, grp, ne)
            counts.extend(zip(grp, cnt, cen))
        if any(n < 0 for _, n, _ in counts):
            raise ScatteringError("negative zero count: contour resolution too coarse")
        active = [a for a in counts if a[1] != 0]
    found = []
    for z, fres in zip(roots, res):
        kind = "kink" if abs(z.real) < kink_tol * max(1.0, abs(z)) else "breather"
        if kind == "kink":
            z = complex(0.0, z.imag)
        found.append(Eigenvalue(complex(z), 1, kind, float(abs(fres))))
    if len(found) != total:
        raise ScatteringError(f"argument principle counts {total} zeros but {len(found)} converged")
    zs = np.array([e.z for e in found])
    if zs.size > 1:
        gaps = np.abs(zs[:, None] - zs[None, :]) + np.eye(zs.size)
        if gaps.min() < 1e-8:
            raise NonGenericDataError("two eigenvalues coincide")
    return sorted(found, key=lambda e: (abs(e.z), e.z.real))


def norming_constants(
    state: FieldState,
    eigenvalues,
    stride: int = 1,
    spread_tol: float = 1e-4,
    window: float = 6.0,
    scatterer: Scatterer | None = None,
    return_b: bool = False,
):
    """Norming constants ``c_i = b_i / a_'(z_i)``.

    ``b_i`` is the least-squares ratio between ``m^-_1`` and ``m^+_2 e^{2 i lam x}``
    over a window around the field's centre; its relative spread is checked.
    """
    sc = scatterer or Scatterer(state, stride)
    zs = np.array([e.z if isinstance(e, Eigenvalue) else e for e in eigenvalues], complex)
    if zs.size == 0:
        return []
    (l1, l2), (r1, r2) = sc._columns(zs, keep=True)
    xb = sc.xb
    lam = 0.25 * (zs - 1.0 / zs)
    xc = xb[sc._meet_index()]
    win = np.abs(xb - xc) <= window
    bs = []
    for i in range(zs.size):
        ph = np.exp(2j * lam[i] * xb[win])
        v1, v2 = r1[win, i] * ph, r2[win, i] * ph
        u1, u2 = l1[win, i], l2[win, i]
        den = np.sum(np.abs(v1) ** 2 + np.abs(v2) ** 2)
        b = np.sum(np.conj(v1) * u1 + np.conj(v2) * u2) / den
        spread = np.max(np.abs(u1 - b * v1) + np.abs(u2 - b * v2)) / np.max(np.abs(u1) + np.abs(u2))
        if spread > spread_tol:
            raise ScatteringError(f"ill-conditioned norming constant at z = {zs[i]:.6g} (spread {spread:.2e})")
        bs.append(b)
    bs = np.array(bs)
    radii = np.minimum(0.05 * np.abs(zs), 0.5 * zs.imag)
    if zs.size > 1:
        dist = np.abs(zs[:, None] - zs[None, :]) + np.eye(zs.size) * 1e9
        radii = np.minimum(radii, 0.3 * dist.min(axis=1))
    da = _cauchy_derivative(sc, zs, radii)
    if np.any(np.abs(da) < 1e-12):
        raise NonGenericDataError("a_' vanishes at an eigenvalue")
    cs = bs / da
    return (list(cs), list(bs)) if return_b else list(cs)


def scatter(
    state: FieldState,
    grid: SpectralGrid | None = None,
    search_box: tuple | None = (-5.0, 5.0, 0.02, 5.0),
    stride: int = 1,
) -> ScatteringData:
    """Full forward transform: reflection samples, eigenvalues and norming constants."""
    grid = grid or SpectralGrid.cayley()
    sc = Scatterer(state, stride)
    r = reflection_coefficient(state, grid, scatterer=sc)
    eig = find_eigenvalues(state, search_box, scatterer=sc) if search_box else []
    kinks, breathers = [], []
    keep = [e for e in eig if e.kind == "kink" or e.z.real > 0]
    cs = norming_constants(state, keep, scatterer=sc) if keep else []
    for e, c in zip(keep, cs):
        if e.kind == "kink":
            kinks.append((e.z.imag, c))
        else:
            breathers.append((e.z, c))
    n_br = sum(1 for e in eig if e.kind == "breather")
    if n_br != 2 * len(breathers):
        raise NonGenericDataError("breather eigenvalues are not paired as z, -conj(z)")
    meta = {
        "t": state.t,
        "l_minus": state.l_minus,
        "l_plus": state.l_plus,
        "tolerances": {"edge_defect": sc.edge_defect},
        "eigen_residuals": [e.residual for e in eig],
    }
    data = ScatteringData(grid, r, kinks, breathers, meta)
    data.meta["generic"] = data.is_generic()
    return data
