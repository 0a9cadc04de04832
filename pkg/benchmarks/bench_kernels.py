"""Time the compiled kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 3]

Reports the best wall time per backend and checks that both backends agree.
"""

import argparse
import time

import numpy as np

from sgist.field import KinkParams, eval_kink, uniform_grid
from sgist.kernels import available_backends
from sgist.pde import SolverConfig, evolve
from sgist.scattering import Scatterer, SpectralGrid


def best_of(fn, repeat):
    times, out = [], None
    for _ in range(repeat):
        start = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - start)
    return min(times), out


def cases():
    xs = uniform_grid(-30, 30, 0.01)
    state = eval_kink(KinkParams(0.3), xs)
    g = np.exp(-(xs**2))
    state = state.with_values(f=state.f + 0.3 * g)
    zs = SpectralGrid.cayley(256).zs

    def scatter(backend):
        return lambda: Scatterer(state, backend=backend).matrix(zs).a

    def leapfrog(backend):
        cfg = SolverConfig(dt=0.008, T=20.0, backend=backend)
        return lambda: evolve(state, cfg).states[-1].f

    return {"scattering matrix (6001 pts x 256 z)": scatter, "leapfrog (6001 pts x 2500 steps)": leapfrog}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    backends = available_backends()
    if "compiled" not in backends:
        print("compiled extension not built; only the python backend is available")
    print(f"{'case':40s} " + " ".join(f"{b:>10s}" for b in backends) + "   speedup  max diff")
    for name, make in cases().items():
        res = {b: best_of(make(b), args.repeat) for b in backends}
        row = f"{name:40s} " + " ".join(f"{res[b][0]:9.3f}s" for b in backends)
        if len(backends) == 2:
            speed = res["python"][0] / res["compiled"][0]
            diff = float(np.max(np.abs(res["python"][1] - res["compiled"][1])))
            row += f"   {speed:6.1f}x  {diff:.1e}"
        print(row)


if __name__ == "__main__":
    main()
