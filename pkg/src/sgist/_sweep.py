# Pure-numpy transfer-matrix sweeps for the spatial Lax operator.
#
# Each cell [x_n, x_n + H] is advanced by a fourth-order commutator-free Magnus
# step built from two Gauss-node samples of the coefficient matrix
#     [[-i lam + k C,  sig (k S - W/4)], [sig (k S + W/4),  i lam - k C]]
# where C = cos f - 1, S = sin f and W is a first-derivative combination of f.
# All coefficient matrices are traceless, so exp(A) = cosh(s) I + sinh(s)/s A
# with s^2 = -det A.  Arrays are vectorised over the spectral parameter and
# cells are processed in blocks to bound memory.

from __future__ import annotations

import numpy as np

SQ3 = np.sqrt(3.0)
NODE = (0.5 - SQ3 / 6.0, 0.5 + SQ3 / 6.0)
W_LO = (3.0 - 2.0 * SQ3) / 12.0
W_HI = (3.0 + 2.0 * SQ3) / 12.0
BLOCK = 64


def expm_traceless(p, q, r):
    """exp of [[p, q], [r, -p]] returned as its four entries."""
    s2 = p * p + q * r
    s = np.sqrt(s2)
    small = np.abs(s) < 1e-4
    ss = np.where(small, 1.0, s)
    ch = np.where(small, 1.0 + s2 / 2.0 + s2 * s2 / 24.0, np.cosh(ss))
    sh = np.where(small, 1.0 + s2 / 6.0 + s2 * s2 / 120.0, np.sinh(ss) / ss)
    return ch + sh * p, sh * q, sh * r, ch - sh * p


def _block_steps(nodes, lo, hi, lam, k, sig, H):
    C, S, W = nodes
    ilam = 1j * lam[None, :]
    kk = k[None, :]

    def combo(wa, wb):
        c = (wa * C[0, lo:hi] + wb * C[1, lo:hi])[:, None]
        s = (wa * S[0, lo:hi] + wb * S[1, lo:hi])[:, None]
        w = (wa * W[0, lo:hi] + wb * W[1, lo:hi])[:, None]
        p = H * (-(wa + wb) * ilam + kk * c)
        q = H * sig * (kk * s - 0.25 * w)
        r = H * sig * (kk * s + 0.25 * w)
        return expm_traceless(p, q, r)

    a = combo(W_HI, W_LO)
    b = combo(W_LO, W_HI)
    return (
        b[0] * a[0] + b[1] * a[2],
        b[0] * a[1] + b[1] * a[3],
        b[2] * a[0] + b[3] * a[2],
        b[2] * a[1] + b[3] * a[3],
    )


def transfer(nodes, lam, k, sig, H):
    """Ordered product of all cell propagators, entries of shape ``(nz,)``."""
    ncell = nodes[0].shape[1]
    m11 = np.ones(lam.shape, dtype=complex)
    m12 = np.zeros_like(m11)
    m21 = np.zeros_like(m11)
    m22 = np.ones_like(m11)
    for lo in range(0, ncell, BLOCK):
        hi = min(lo + BLOCK, ncell)
        e11, e12, e21, e22 = _block_steps(nodes, lo, hi, lam, k, sig, H)
        for n in range(hi - lo):
            a, b, c, d = e11[n], e12[n], e21[n], e22[n]
            m11, m12, m21, m22 = a * m11 + b * m21, a * m12 + b * m22, c * m11 + d * m21, c * m12 + d * m22
    return m11, m12, m21, m22


def columns(nodes, lam, k, sig, H, v1, v2, forward=True, phase=1, keep=True):
    """Carry a column across the grid with the per-cell factor ``exp(phase i lam H)``.

    Forward sweeps use the propagators, backward sweeps their inverses; the
    scalar factor removes the free oscillation so Jost columns stay of order
    one.  Returns the column at every cell boundary, shape ``(ncell + 1, nz)``,
    or only the final column when ``keep`` is false.
    """
    ncell = nodes[0].shape[1]
    scale = np.exp(phase * 1j * lam * H)
    v1 = np.broadcast_to(np.asarray(v1, dtype=complex), lam.shape).copy()
    v2 = np.broadcast_to(np.asarray(v2, dtype=complex), lam.shape).copy()
    if not keep:
        return _final_column(nodes, lam, k, sig, H, v1, v2, forward, scale)
    out1 = np.empty((ncell + 1,) + lam.shape, dtype=complex)
    out2 = np.empty_like(out1)
    if forward:
        out1[0], out2[0] = v1, v2
        for lo in range(0, ncell, BLOCK):
            hi = min(lo + BLOCK, ncell)
            e11, e12, e21, e22 = _block_steps(nodes, lo, hi, lam, k, sig, H)
            for n in range(hi - lo):
                v1, v2 = scale * (e11[n] * v1 + e12[n] * v2), scale * (e21[n] * v1 + e22[n] * v2)
                out1[lo + n + 1], out2[lo + n + 1] = v1, v2
    else:
        out1[ncell], out2[ncell] = v1, v2
        starts = list(range(0, ncell, BLOCK))
        for lo in reversed(starts):
            hi = min(lo + BLOCK, ncell)
            e11, e12, e21, e22 = _block_steps(nodes, lo, hi, lam, k, sig, H)
            for n in range(hi - lo - 1, -1, -1):
                v1, v2 = scale * (e22[n] * v1 - e12[n] * v2), scale * (-e21[n] * v1 + e11[n] * v2)
                out1[lo + n], out2[lo + n] = v1, v2
    return out1, out2


def _final_column(nodes, lam, k, sig, H, v1, v2, forward, scale):
    ncell = nodes[0].shape[1]
    starts = list(range(0, ncell, BLOCK))
    for lo in starts if forward else reversed(starts):
        hi = min(lo + BLOCK, ncell)
        e11, e12, e21, e22 = _block_steps(nodes, lo, hi, lam, k, sig, H)
        if forward:
            for n in range(hi - lo):
                v1, v2 = scale * (e11[n] * v1 + e12[n] * v2), scale * (e21[n] * v1 + e22[n] * v2)
        else:
            for n in range(hi - lo - 1, -1, -1):
                v1, v2 = scale * (e22[n] * v1 - e12[n] * v2), scale * (-e21[n] * v1 + e11[n] * v2)
    return v1, v2
