# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
# Compiled versions of the Magnus sweeps in _sweep.py and the leapfrog loop in
# _leapfrog.py.  Same arguments, same results up to rounding.

import numpy as np
cimport numpy as cnp
from libc.math cimport sin, sqrt

cdef extern from "complex.h" nogil:
    double complex csqrt(double complex)
    double complex cexp(double complex)
    double cabs(double complex)

cnp.import_array()

cdef double SQ3 = sqrt(3.0)
cdef double W_LO = (3.0 - 2.0 * SQ3) / 12.0
cdef double W_HI = (3.0 + 2.0 * SQ3) / 12.0


cdef inline void expm2(double complex p, double complex q, double complex r,
                       double complex* out) noexcept nogil:
    cdef double complex s2 = p * p + q * r
    cdef double complex s = csqrt(s2)
    cdef double complex ch, sh, ep, em
    if cabs(s) < 1e-4:
        ch = 1.0 + s2 / 2.0 + s2 * s2 / 24.0
        sh = 1.0 + s2 / 6.0 + s2 * s2 / 120.0
    else:
        ep = cexp(s)
        em = 1.0 / ep
        ch = 0.5 * (ep + em)
        sh = 0.5 * (ep - em) / s
    out[0] = ch + sh * p
    out[1] = sh * q
    out[2] = sh * r
    out[3] = ch - sh * p


ctypedef struct Nodes:
    const double* c0
    const double* c1
    const double* s0
    const double* s1
    const double* w0
    const double* w1


cdef Nodes make_nodes(const double[:, ::1] C, const double[:, ::1] S, const double[:, ::1] W):
    cdef Nodes nd
    nd.c0 = &C[0, 0]
    nd.c1 = &C[1, 0]
    nd.s0 = &S[0, 0]
    nd.s1 = &S[1, 0]
    nd.w0 = &W[0, 0]
    nd.w1 = &W[1, 0]
    return nd


cdef inline void cell(Nodes* nd, Py_ssize_t n, double complex ilam, double complex k, double sig,
                      double H, double complex* e) noexcept nogil:
    cdef double complex a[4]
    cdef double complex b[4]
    cdef double c, s, w
    c = W_HI * nd.c0[n] + W_LO * nd.c1[n]
    s = W_HI * nd.s0[n] + W_LO * nd.s1[n]
    w = W_HI * nd.w0[n] + W_LO * nd.w1[n]
    expm2(H * (-0.5 * ilam + k * c), H * sig * (k * s - 0.25 * w), H * sig * (k * s + 0.25 * w), a)
    c = W_LO * nd.c0[n] + W_HI * nd.c1[n]
    s = W_LO * nd.s0[n] + W_HI * nd.s1[n]
    w = W_LO * nd.w0[n] + W_HI * nd.w1[n]
    expm2(H * (-0.5 * ilam + k * c), H * sig * (k * s - 0.25 * w), H * sig * (k * s + 0.25 * w), b)
    e[0] = b[0] * a[0] + b[1] * a[2]
    e[1] = b[0] * a[1] + b[1] * a[3]
    e[2] = b[2] * a[0] + b[3] * a[2]
    e[3] = b[2] * a[1] + b[3] * a[3]


def transfer(const double[:, ::1] C, const double[:, ::1] S, const double[:, ::1] W,
             const double complex[::1] lam, const double complex[::1] k, double sig, double H):
    cdef Py_ssize_t nz = lam.shape[0], ncell = C.shape[1], i, n
    out = np.empty((4, nz), dtype=np.complex128)
    cdef double complex[:, ::1] o = out
    cdef double complex e[4]
    cdef double complex m11, m12, m21, m22, t11, t12, t21
    if ncell == 0:
        one = np.ones(nz, complex)
        return one, np.zeros(nz, complex), np.zeros(nz, complex), one.copy()
    cdef Nodes nd = make_nodes(C, S, W)
    with nogil:
        for i in range(nz):
            m11 = 1.0
            m12 = 0.0
            m21 = 0.0
            m22 = 1.0
            for n in range(ncell):
                cell(&nd, n, 1j * lam[i], k[i], sig, H, e)
                t11 = e[0] * m11 + e[1] * m21
                t12 = e[0] * m12 + e[1] * m22
                t21 = e[2] * m11 + e[3] * m21
                m22 = e[2] * m12 + e[3] * m22
                m11 = t11
                m12 = t12
                m21 = t21
            o[0, i] = m11
            o[1, i] = m12
            o[2, i] = m21
            o[3, i] = m22
    return out[0], out[1], out[2], out[3]


def columns(const double[:, ::1] C, const double[:, ::1] S, const double[:, ::1] W,
            const double complex[::1] lam, const double complex[::1] k, double sig, double H,
            const double complex[::1] v1in, const double complex[::1] v2in,
            bint forward, int phase, bint keep):
    cdef Py_ssize_t nz = lam.shape[0], ncell = C.shape[1], i, n, j
    cdef Py_ssize_t nout = ncell + 1 if keep else 1
    out1 = np.empty((nout, nz), dtype=np.complex128)
    out2 = np.empty((nout, nz), dtype=np.complex128)
    cdef double complex[:, ::1] o1 = out1
    cdef double complex[:, ::1] o2 = out2
    cdef double complex e[4]
    cdef double complex v1, v2, t1, sc
    cdef Nodes nd
    if ncell > 0:
        nd = make_nodes(C, S, W)
    with nogil:
        for i in range(nz):
            sc = cexp(phase * 1j * lam[i] * H)
            v1 = v1in[i]
            v2 = v2in[i]
            if forward:
                if keep:
                    o1[0, i] = v1
                    o2[0, i] = v2
                for n in range(ncell):
                    cell(&nd, n, 1j * lam[i], k[i], sig, H, e)
                    t1 = sc * (e[0] * v1 + e[1] * v2)
                    v2 = sc * (e[2] * v1 + e[3] * v2)
                    v1 = t1
                    if keep:
                        o1[n + 1, i] = v1
                        o2[n + 1, i] = v2
            else:
                if keep:
                    o1[ncell, i] = v1
                    o2[ncell, i] = v2
                for j in range(ncell):
                    n = ncell - 1 - j
                    cell(&nd, n, 1j * lam[i], k[i], sig, H, e)
                    t1 = sc * (e[3] * v1 - e[1] * v2)
                    v2 = sc * (-e[2] * v1 + e[0] * v2)
                    v1 = t1
                    if keep:
                        o1[n, i] = v1
                        o2[n, i] = v2
            if not keep:
                o1[0, i] = v1
                o2[0, i] = v2
    if keep:
        return out1, out2
    return out1[0], out2[0]


def leapfrog(double[::1] prev, double[::1] cur, const double[::1] bg, const double[::1] src,
             const double[::1] damp, double dt, double h, Py_ssize_t nsteps, bint periodic):
    """Advance ``nsteps`` leapfrog steps in place; returns nothing.

    Unknown w with f = bg + w:  w'' = D2 w + src - sin(bg + w) - damp * w'.
    """
    cdef Py_ssize_t n = cur.shape[0], i, it
    cdef double r = dt * dt / (h * h), dt2 = dt * dt, lap, s, nxt
    cdef double[::1] tmp = np.empty(n)
    cdef double[::1] a = prev
    cdef double[::1] b = cur
    with nogil:
        for it in range(nsteps):
            for i in range(n):
                if i == 0:
                    lap = (b[n - 1] if periodic else b[1]) - 2.0 * b[0] + b[1]
                elif i == n - 1:
                    lap = b[n - 2] - 2.0 * b[n - 1] + (b[0] if periodic else b[n - 2])
                else:
                    lap = b[i - 1] - 2.0 * b[i] + b[i + 1]
                s = 0.5 * damp[i] * dt
                nxt = 2.0 * b[i] - (1.0 - s) * a[i] + r * lap + dt2 * (src[i] - sin(bg[i] + b[i]))
                tmp[i] = nxt / (1.0 + s)
            for i in range(n):
                a[i] = b[i]
                b[i] = tmp[i]
