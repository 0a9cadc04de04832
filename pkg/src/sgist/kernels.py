"""Backend selection for the hot loops.

The compiled extension ``sgist._ckernels`` is used when it imports; otherwise
the numpy implementations run.  Set ``SG_IST_BACKEND=python`` to force the
fallback.
"""

from __future__ import annotations

import os

import numpy as np

from . import _leapfrog, _sweep
from ._sweep import NODE

try:  # pragma: no cover - depends on the build
    from . import _ckernels
except ImportError:  # pragma: no cover
    _ckernels = None

__all__ = ["NODE", "transfer", "columns", "leapfrog", "available_backends", "default_backend"]


def available_backends() -> list[str]:
    return ["compiled", "python"] if _ckernels is not None else ["python"]


def default_backend() -> str:
    want = os.environ.get("SG_IST_BACKEND", "").strip().lower()
    if want == "python" or _ckernels is None:
        return "python"
    return "compiled"


def _use_compiled(backend):
    backend = backend or default_backend()
    if backend == "compiled" and _ckernels is None:
        raise RuntimeError("compiled kernels are not built")
    return backend == "compiled"


def _prep(nodes, lam, k):
    C, S, W = (np.ascontiguousarray(n, dtype=np.float64) for n in nodes)
    lam = np.ascontiguousarray(lam, dtype=complex)
    k = np.ascontiguousarray(np.broadcast_to(k, lam.shape), dtype=complex)
    return (C, S, W), lam, k


def transfer(nodes, lam, k, sig, H, backend=None):
    nodes, lam, k = _prep(nodes, lam, k)
    if _use_compiled(backend):
        return _ckernels.transfer(*nodes, lam, k, float(sig), float(H))
    return _sweep.transfer(nodes, lam, k, sig, H)


def columns(nodes, lam, k, sig, H, v1, v2, forward=True, phase=1, keep=True, backend=None):
    nodes, lam, k = _prep(nodes, lam, k)
    v1 = np.ascontiguousarray(np.broadcast_to(np.asarray(v1, complex), lam.shape))
    v2 = np.ascontiguousarray(np.broadcast_to(np.asarray(v2, complex), lam.shape))
    if _use_compiled(backend):
        return _ckernels.columns(*nodes, lam, k, float(sig), float(H), v1, v2, bool(forward), int(phase), bool(keep))
    return _sweep.columns(nodes, lam, k, sig, H, v1, v2, forward, phase, keep)


def leapfrog(prev, cur, bg, src, damp, dt, h, nsteps, periodic, backend=None):
    """In-place leapfrog steps; ``prev`` and ``cur`` must be contiguous float64."""
    if _use_compiled(backend):
        args = [np.ascontiguousarray(a, dtype=np.float64) for a in (bg, src, damp)]
        _ckernels.leapfrog(prev, cur, *args, float(dt), float(h), int(nsteps), bool(periodic))
    else:
        _leapfrog.leapfrog(prev, cur, bg, src, damp, dt, h, nsteps, periodic)
