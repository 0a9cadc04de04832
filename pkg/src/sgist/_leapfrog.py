# Numpy leapfrog loop; mirrors the compiled version in _ckernels.pyx.
#
# Unknown w with f = bg + w:  w'' = D2 w + src - sin(bg + w) - damp * w'.
# The damping term is discretised with a centred difference, which keeps the
# scheme explicit:  (1 + s) w+ = 2 w - (1 - s) w- + dt^2 (...),  s = damp dt / 2.

import numpy as np


def leapfrog(prev, cur, bg, src, damp, dt, h, nsteps, periodic):
    """Advance ``nsteps`` steps in place on ``prev`` and ``cur``."""
    r = dt * dt / (h * h)
    dt2 = dt * dt
    s = 0.5 * damp * dt
    a, b = prev, cur
    lap = np.empty_like(b)
    for _ in range(nsteps):
        lap[1:-1] = b[:-2] - 2.0 * b[1:-1] + b[2:]
        if periodic:
            lap[0] = b[-1] - 2.0 * b[0] + b[1]
            lap[-1] = b[-2] - 2.0 * b[-1] + b[0]
        else:
            lap[0] = 2.0 * (b[1] - b[0])
            lap[-1] = 2.0 * (b[-2] - b[-1])
        nxt = (2.0 * b - (1.0 - s) * a + r * lap + dt2 * (src - np.sin(bg + b))) / (1.0 + s)
        a[:] = b
        b[:] = nxt
