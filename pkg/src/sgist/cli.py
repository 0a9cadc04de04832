"""``sg-ist`` command-line driver.

Each subcommand reads and writes the package file formats: FieldState CSV
with a JSON sidecar, ScatteringData JSON, checkpoint directories with
``energy.csv``, the asymptote CSV and metrics JSON.  Defaults can be
overridden by a flat ``key=value`` file (``--config``); explicit flags win.

Exit status: 0 when every tolerance gate passes, 1 when a gate fails, 2 for
bad input, 3 when a computation fails.
"""

from __future__ import annotations

import os

_threads = os.environ.get("SG_IST_THREADS")
if _threads:  # must happen before numpy loads its BLAS
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ.setdefault(_var, _threads)

import argparse  # noqa: E402
import json  # noqa: E402
import logging  # noqa: E402
import sys  # noqa: E402
from pathlib import Path  # noqa: E402

import numpy as np  # noqa: E402

from . import asymptotics, diagnostics, field, inverse, pde, scattering  # noqa: E402

log = logging.getLogger("sgist")

EXIT_OK, EXIT_GATE, EXIT_INPUT, EXIT_COMPUTE = 0, 1, 2, 3


class InputError(ValueError):
    pass


# --------------------------------------------------------------------------
# argument helpers


def grid_arg(text: str) -> np.ndarray:
    """``a:b:h`` -> uniform grid from a to b with spacing h."""
    try:
        a, b, h = (float(v) for v in text.split(":"))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"grid must look like a:b:h, got {text!r}") from exc
    if not (b > a and h > 0):
        raise argparse.ArgumentTypeError("grid needs b > a and h > 0")
    return field.uniform_grid(a, b, h)


def float_list(text: str) -> list[float]:
    if not text:
        return []
    try:
        return [float(v) for v in text.split(",")]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def read_config(path) -> dict:
    cfg = {}
    for n, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InputError(f"{path}:{n}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        cfg[key.replace("-", "_")] = value
    return cfg


def _load_state(path) -> field.FieldState:
    if not Path(path).exists():
        raise InputError(f"no such file: {path}")
    return field.load_state(path)


def _load_data(path) -> scattering.ScatteringData:
    if not Path(path).exists():
        raise InputError(f"no such file: {path}")
    return scattering.ScatteringData.load(path)


def _emit_json(obj, out):
    text = json.dumps(obj, indent=2) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


# --------------------------------------------------------------------------
# commands


def cmd_exact(args) -> int:
    xs = args.grid
    if args.solution == "kink":
        st = field.eval_kink(field.KinkParams(args.beta, args.x0, args.sign), xs, args.t)
    elif args.solution == "breather":
        st = field.eval_breather(field.BreatherParams(args.beta, args.v), xs, args.t)
    elif args.solution == "wobbler":
        st = field.eval_wobbler(field.WobblerParams(args.beta, args.alpha), xs, args.t)
    else:
        if not args.spec:
            raise InputError("nsoliton needs --spec with discrete scattering data")
        data = _load_data(args.spec)
        if not data.is_reflectionless:
            raise InputError("nsoliton data must have r == 0; use 'invert' otherwise")
        st = inverse.reconstruct_reflectionless(data, xs, args.t).state
    field.save_state(st, args.out)
    log.info("wrote %s (%d points)", args.out, xs.size)
    return EXIT_OK


def cmd_scatter(args) -> int:
    st = _load_state(args.input)
    box = None if args.no_eigen else tuple(args.search_box)
    data = scattering.scatter(st, scattering.SpectralGrid.cayley(args.n_grid), search_box=box, stride=args.stride)
    data.save(args.out)
    log.info("%d kinks, %d breathers, sup|r| = %.3g", len(data.kinks), len(data.breathers), np.max(np.abs(data.r)))
    return EXIT_OK


def cmd_evolve(args) -> int:
    st = _load_state(args.input)
    cfg = pde.SolverConfig(dt=args.dt, T=args.T, boundary=args.boundary, checkpoints=tuple(args.checkpoints))
    traj = pde.evolve(st, cfg, out_dir=args.out_dir)
    drift = traj.energy_drift()
    log.info("%d checkpoints, energy drift %.2e", len(traj.states), drift)
    if args.max_energy_drift is not None and drift > args.max_energy_drift:
        log.error("energy drift %.3g exceeds %.3g", drift, args.max_energy_drift)
        return EXIT_GATE
    return EXIT_OK


def cmd_invert(args) -> int:
    data = _load_data(args.input)
    if data.is_reflectionless:
        rec = inverse.reconstruct_reflectionless(data, args.grid, args.t)
    else:
        rec = inverse.reconstruct_full(data, args.grid, args.t, n_grid=args.nystrom, tol=args.tol, maxiter=args.maxiter)
    field.save_state(rec.state, args.out)
    log.info("diagnostics %s", {k: float(v) for k, v in rec.diagnostics.items()})
    return EXIT_OK


def cmd_asymptote(args) -> int:
    data = _load_data(args.input)
    rows = asymptotics.asymptote_rows(data, args.xs, args.t)
    asymptotics.write_asymptote_csv(rows, args.out)
    return EXIT_OK


def _frame_errors(data, states, v, r):
    """Max |sin f_PDE - sin f_as| in a narrow band of rays around ``v``."""
    out = []
    for st in states:
        t = st.t
        xs = np.linspace(v - 0.02, v + 0.02, 21) * t
        fp = np.interp(xs, st.xs, st.f)
        frame = asymptotics.classify(data, float(v * t), t)
        if frame.kind == "exterior":
            out.append((round(t, 9), float(np.max(np.abs(np.sin(fp))))))
            continue
        if frame.kind == "interior-solitonless":
            _, s = asymptotics.radiation_solitonless(data, xs, t, r)
        else:
            _, s, _, rs = asymptotics.dressed(data, frame.kind, xs, t, r)
            s = s + rs
        out.append((round(t, 9), float(np.max(np.abs(np.sin(fp) - s)))))
    return out


def _pde_kink_centre(state, near: float, width: float = 5.0) -> float:
    """Zero of ``cos(f/2)`` (that is ``f = pi mod 2 pi``) closest to ``near``."""
    xs = state.xs
    win = np.flatnonzero(np.abs(xs - near) <= width)
    g = np.cos(0.5 * state.f[win])
    cross = np.flatnonzero(np.sign(g[:-1]) != np.sign(g[1:]))
    if cross.size == 0:
        raise scattering.ScatteringError(f"no kink centre within {width} of x = {near:.4g} at t = {state.t:.4g}")
    roots = [xs[win[i]] - g[i] * state.h / (g[i + 1] - g[i]) for i in cross]
    return float(min(roots, key=lambda x: abs(x - near)))


def _centre_offsets(data, states, index, r):
    out = []
    for st in states:
        x_as = asymptotics.kink_centre(data, index, st.t, r)
        out.append((round(st.t, 9), abs(_pde_kink_centre(st, x_as) - x_as)))
    return out


def cmd_compare(args) -> int:
    st = _load_state(args.input)
    data = scattering.scatter(st, scattering.SpectralGrid.cayley(args.n_grid))
    times = sorted(args.times)
    reach = max(1.0, max(abs(v) for v in args.velocities))
    pad = reach * max(times) + 20.0
    states = pde.reference_states(
        st, st.xs[0] - pad, st.xs[-1] + pad, args.h, args.cfl, times, args.boundary, args.richardson
    )
    r = asymptotics.ReflectionSampler(data)
    report, ok = {"frames": []}, True
    for v in args.velocities:
        errs = _frame_errors(data, states, v, r)
        limit = args.max_exponent if abs(v) < 1 else args.max_exterior_exponent
        row = {"v": v, "errors": errs, "limit": limit}
        if all(e == 0.0 for _, e in errs):
            # nothing reached this ray (e.g. compact data outside the cone): no fit, bound holds
            row.update(slope=None, stderr=None, note="identically zero on this ray", ok=True)
        else:
            slope, stderr = diagnostics.fit_decay_exponent([(t, max(e, 1e-300)) for t, e in errs])
            row.update(slope=slope, stderr=stderr, ok=slope <= limit)
        frame = asymptotics.classify(data, v * times[-1], times[-1])
        if frame.kind == "kink":
            offsets = _centre_offsets(data, states, frame.index, r)
            row.update(centre_offsets=offsets, centre_limit=args.kink_eps)
            row["ok"] = row["ok"] and max(e for _, e in offsets) <= args.kink_eps
        row["pass"] = row.pop("ok")
        ok &= row["pass"]
        report["frames"].append(row)
    _emit_json(report, args.out)
    return EXIT_OK if ok else EXIT_GATE


def cmd_norms(args) -> int:
    spec = diagnostics.WeightedNormSpec(s=args.s, kind=args.kind, c=args.c, L=args.L)
    rows = []
    for path in args.inputs:
        st = _load_state(path)
        rows.append({"file": str(path), "t": st.t, "value": diagnostics.weighted_norm(st, spec)})
    out = {"norms": rows}
    if len(rows) >= 3:
        slope, stderr = diagnostics.fit_decay_exponent([(r["t"], r["value"]) for r in rows])
        out.update(slope=slope, stderr=stderr)
    _emit_json(out, args.out)
    return EXIT_OK


# --------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sg-ist", description="Sine-Gordon inverse scattering toolkit")
    p.add_argument("--config", help="flat key=value file with default overrides")
    p.add_argument("--print-config", action="store_true", help="print every default as key=value and exit")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command")

    e = sub.add_parser("exact", help="sample a closed-form solution")
    e.add_argument("solution", choices=["kink", "breather", "wobbler", "nsoliton"])
    e.add_argument("--beta", type=float, default=0.0)
    e.add_argument("--v", type=float, default=0.0)
    e.add_argument("--x0", type=float, default=0.0)
    e.add_argument("--sign", type=int, default=1, choices=[1, -1])
    e.add_argument("--alpha", type=float, default=None)
    e.add_argument("--spec", help="ScatteringData JSON (nsoliton)")
    e.add_argument("--grid", type=grid_arg, default="-30:30:0.01")
    e.add_argument("--t", type=float, default=0.0)
    e.add_argument("--out", default="state.csv")
    e.set_defaults(func=cmd_exact)

    s = sub.add_parser("scatter", help="direct transform of a FieldState")
    s.add_argument("input")
    s.add_argument("--out", default="data.json")
    s.add_argument("--n-grid", type=int, default=1024)
    s.add_argument("--stride", type=int, default=1)
    s.add_argument("--search-box", type=float_list, default="-5,5,0.02,5")
    s.add_argument("--no-eigen", action="store_true")
    s.set_defaults(func=cmd_scatter)

    v = sub.add_parser("evolve", help="finite-difference evolution with checkpoints")
    v.add_argument("input")
    v.add_argument("--out-dir", default="run")
    v.add_argument("--dt", type=float, default=0.005)
    v.add_argument("--T", type=float, default=1.0)
    v.add_argument("--boundary", choices=pde.BOUNDARIES, default="periodic")
    v.add_argument("--checkpoints", type=float_list, default="")
    v.add_argument("--max-energy-drift", type=float, default=None)
    v.set_defaults(func=cmd_evolve)

    i = sub.add_parser("invert", help="reconstruct a field from ScatteringData")
    i.add_argument("input")
    i.add_argument("--grid", type=grid_arg, default="-30:30:0.1")
    i.add_argument("--t", type=float, default=0.0)
    i.add_argument("--nystrom", type=int, default=None, help="Cayley grid size for the integral equation")
    i.add_argument("--tol", type=float, default=1e-12)
    i.add_argument("--maxiter", type=int, default=20)
    i.add_argument("--out", default="state.csv")
    i.set_defaults(func=cmd_invert)

    a = sub.add_parser("asymptote", help="evaluate long-time formulas on a line x at time t")
    a.add_argument("input")
    a.add_argument("--t", type=float, default=100.0)
    a.add_argument("--xs", type=grid_arg, default="-90:90:1")
    a.add_argument("--out", default="asymptote.csv")
    a.set_defaults(func=cmd_asymptote)

    c = sub.add_parser("compare", help="PDE against asymptotic formulas along rays x = v t")
    c.add_argument("input")
    c.add_argument("--velocities", type=float_list, default="0.3")
    c.add_argument("--times", type=float_list, default="50,100,200")
    c.add_argument("--h", type=float, default=0.025, help="grid step of the PDE reference run")
    c.add_argument("--cfl", type=float, default=0.8)
    c.add_argument("--richardson", action=argparse.BooleanOptionalAction, default=True)
    c.add_argument("--boundary", choices=pde.BOUNDARIES, default="periodic")
    c.add_argument("--n-grid", type=int, default=1024)
    c.add_argument("--max-exponent", type=float, default=-0.6)
    c.add_argument("--max-exterior-exponent", type=float, default=-0.9)
    c.add_argument("--kink-eps", type=float, default=1e-3, help="bound on the kink-centre offset in kink frames")
    c.add_argument("--out", default=None)
    c.set_defaults(func=cmd_compare)

    n = sub.add_parser("norms", help="weighted norms of states, with a decay fit over time")
    n.add_argument("inputs", nargs="+")
    n.add_argument("--s", type=float, default=0.0)
    n.add_argument("--kind", choices=diagnostics.NORM_KINDS, default="H1sin_x_L2s")
    n.add_argument("--c", type=float, default=0.0)
    n.add_argument("--L", type=float, default=10.0)
    n.add_argument("--out", default=None)
    n.set_defaults(func=cmd_norms)
    return p


def _subparsers(parser):
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            return action.choices
    return {}


def print_config(parser, stream=None) -> None:
    stream = stream or sys.stdout
    for name, sp in _subparsers(parser).items():
        for act in sp._actions:
            if act.dest in ("help", "func") or not act.option_strings:
                continue
            stream.write(f"{name}.{act.dest}={'' if act.default is None else act.default}\n")


def _flag_value(text: str) -> bool:
    low = str(text).strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise InputError(f"not a boolean: {text!r}")


def _apply_config(parser, cfg: dict) -> None:
    """Install config values as defaults; ``cmd.key`` targets one command."""
    subs = _subparsers(parser)
    for key, value in cfg.items():
        cmd, _, dest = key.rpartition(".")
        if cmd and cmd not in subs:
            raise InputError(f"unknown command in config key {key!r}")
        targets = [subs[cmd]] if cmd else list(subs.values())
        hit = False
        for sp in targets:
            act = next((a for a in sp._actions if a.dest == dest), None)
            if act is not None:
                sp.set_defaults(**{dest: _flag_value(value) if isinstance(act.default, bool) else value})
                hit = True
        if not hit:
            raise InputError(f"unknown config key {key!r}")


_VALUE_FLAGS = ("--grid", "--xs", "--search-box", "--velocities", "--times", "--checkpoints")


def _glue_values(argv):
    """Join ``--grid -30:30:0.1`` into ``--grid=-30:30:0.1`` so leading minus signs parse."""
    out, it = [], iter(argv)
    for tok in it:
        if tok in _VALUE_FLAGS:
            nxt = next(it, None)
            out.append(tok if nxt is None else f"{tok}={nxt}")
        else:
            out.append(tok)
    return out


def main(argv=None) -> int:
    argv = _glue_values(sys.argv[1:] if argv is None else list(argv))
    parser = build_parser()
    pre, _ = parser.parse_known_args(argv)
    logging.basicConfig(level=logging.INFO if pre.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    args = None
    try:
        if pre.config:
            _apply_config(parser, read_config(pre.config))
        if pre.print_config:
            print_config(parser)
            return EXIT_OK
        args = parser.parse_args(argv)
        if args.command is None:
            parser.print_usage(sys.stderr)
            return EXIT_INPUT
        return args.func(args)
    except (InputError, FileNotFoundError) as exc:
        log.error("%s", exc)
        return EXIT_INPUT
    except ValueError as exc:
        log.error("invalid parameters: %s", exc)
        return EXIT_INPUT
    except (pde.SolverError, scattering.ScatteringError, inverse.ReconstructionError) as exc:
        log.error("%s failed: %s", getattr(args, "command", "command"), exc)
        return EXIT_COMPUTE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
