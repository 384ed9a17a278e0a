"""Command-line entry points.

Four subcommands share one flag vocabulary:

  eval   criterion value, certificate, and optimality check of a design
  bound  deletion threshold and per-candidate keep/delete verdicts
  solve  multiplicative algorithm with certified deletion
  bench  timing table and curve data for the built-in examples

Candidates come from a CSV (--candidates) or a built-in example grid
(--example 1 or 2, optionally --grid-step).  Designs come from a JSON
file (--design), the three-point family (--tau), or --uniform.  Reports
are written under --out-dir with every float at 17 significant digits;
figures render alongside them unless --no-figures is given.

Exit codes: 0 success, 2 input error, 3 numeric failure, 4 solver ran
out of iterations (artifacts are still written).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import bench as bench_mod
from . import figures
from .bound import RootBracketError, prune_mask, support_bound
from .criteria import (
    CriterionConfig,
    efficiency_bounds,
    epsilon,
    equivalence_check,
    info_matrix,
    make_state,
    variance_function,
)
from .designspace import (
    CandidateSet,
    ModelSpec,
    format_float,
    grid_candidates,
    load_candidates_csv,
    load_design_json,
    save_design_json,
    uniform_weights,
    validate_weights,
)
from .solver import SolveConfig, solve, write_trace_csv
from .symmat import SingularityError

__all__ = ["main", "build_parser"]

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NUMERIC = 3
EXIT_NO_CONVERGENCE = 4

_SWEEP_LO = 3.0 / 16.0
_SWEEP_HI = 5.0 / 16.0
_SWEEP_POINTS = 41  # includes 7/32, 1/4, 9/32 exactly


def _json_text(value, indent: str = "") -> str:
    """JSON with floats at 17 significant digits (json.dumps would use
    shortest-roundtrip repr, which diffs badly across writers)."""
    if isinstance(value, bool) or value is None:
        return json.dumps(value)
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format_float(float(value))
    if isinstance(value, str):
        return json.dumps(value)
    if isinstance(value, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_json_text(v) for v in value) + "]"
    if isinstance(value, dict):
        inner = indent + "  "
        body = ",\n".join(
            f'{inner}"{k}": {_json_text(v, inner)}' for k, v in value.items()
        )
        return "{\n" + body + "\n" + indent + "}"
    raise TypeError(f"cannot serialize {type(value).__name__}")


def _write_json(path: Path, doc: dict) -> None:
    path.write_text(_json_text(doc) + "\n")


def _out_dir(args) -> Path:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _tau_design_on_grid(cands: CandidateSet, tau: float) -> np.ndarray:
    """Product design with per-factor weights (tau, 1-2*tau, tau) on
    {-1, 0, 1}, placed onto matching grid labels."""
    if not 0.0 <= tau <= 0.5:
        raise ValueError(f"--tau must lie in [0, 1/2], got {tau}")
    if cands.labels is None:
        raise ValueError("--tau requires labeled (grid) candidates")
    atom_w = {-1.0: tau, 0.0: 1.0 - 2.0 * tau, 1.0: tau}
    w = np.ones(cands.n)
    for f in range(cands.labels.shape[1]):
        col = cands.labels[:, f]
        wf = np.zeros(cands.n)
        for s, ws in atom_w.items():
            wf[np.abs(col - s) < 1e-9] = ws
        w *= wf
    if abs(w.sum() - 1.0) > 1e-9:
        raise ValueError(
            "grid does not contain the {-1, 0, 1} support in every factor"
        )
    return w


def _load_candidates(args) -> CandidateSet:
    if args.candidates and args.example is not None:
        raise ValueError("give --candidates or --example, not both")
    if args.candidates:
        return load_candidates_csv(args.candidates)
    if args.example == 1:
        step = args.grid_step if args.grid_step is not None else 0.01
        return grid_candidates(
            ModelSpec(degrees=(2,), ranges=((-1.0, 1.0),), steps=(step,))
        )
    if args.example == 2:
        step = args.grid_step if args.grid_step is not None else 0.1
        return grid_candidates(
            ModelSpec(
                degrees=(2, 2),
                ranges=((-1.0, 1.0), (-1.0, 1.0)),
                steps=(step, step),
            )
        )
    raise ValueError("no candidates given: use --candidates FILE or --example {1,2}")


def _load_inputs(args, default_uniform: bool) -> tuple[CandidateSet, np.ndarray]:
    cands = _load_candidates(args)
    given = [
        name
        for name, flag in [
            ("--design", args.design),
            ("--tau", args.tau is not None),
            ("--uniform", args.uniform),
        ]
        if flag
    ]
    if len(given) > 1:
        raise ValueError(f"{' and '.join(given)} are mutually exclusive")
    if args.design:
        w, active = load_design_json(args.design)
        if w.shape[0] != cands.n:
            raise ValueError(
                f"design length {w.shape[0]} does not match {cands.n} candidates"
            )
        cands.active[:] = active
        return cands, validate_weights(cands, w)
    if args.tau is not None:
        return cands, _tau_design_on_grid(cands, args.tau)
    if args.uniform or default_uniform:
        return cands, uniform_weights(cands)
    raise ValueError("no design given: use --design FILE, --tau T, or --uniform")


def _print(*parts):
    print(" ".join(str(p) for p in parts))


def cmd_eval(args) -> int:
    cands, w = _load_inputs(args, default_uniform=False)
    cfg = CriterionConfig(p=args.p, t_star=args.t_star)
    state = make_state(info_matrix(cands, w), cfg)
    eps, argmax = epsilon(cands, state, threads=args.threads)
    eps = max(eps, 0.0)
    lo, hi = efficiency_bounds(state, eps)
    ok, eq = equivalence_check(cands, w, cfg)
    report = {
        "m": state.m,
        "N": cands.n,
        "n_active": cands.n_active,
        "p": args.p,
        "phi": state.phi,
        "t": state.t,
        "eps": eps,
        "phi_lower": lo,
        "phi_upper": hi,
        "argmax_index": argmax,
        "equivalence_ok": ok,
        "equivalence": eq,
    }
    out = _out_dir(args)
    _write_json(out / "eval_report.json", report)
    _print("phi =", format_float(state.phi), " t =", format_float(state.t))
    _print("eps =", format_float(eps), " certificate = [",
           format_float(lo), ",", format_float(hi), "]")
    _print("equivalence:", "pass" if ok else "FAIL",
           f"(max_d = {format_float(eq['max_d'])} at index {eq['argmax_index']})")
    if not args.no_figures:
        idx = cands.active_indices()
        d = variance_function(state, cands.points[idx], threads=args.threads)
        figures.plot_bound_profile(
            d, state.t, d <= state.t * (1 + eq["tol"]),
            out / "variance_profile.png", threshold_label="t",
        )
    _print("wrote", out / "eval_report.json")
    return EXIT_OK


def _write_sweep_csv(path: Path, rows: list[dict]) -> None:
    cols = ["tau", "t", "eps", "beta", "C_known", "C_unknown", "lam_min"]
    with open(path, "w") as fh:
        fh.write(",".join(cols) + "\n")
        for r in rows:
            fh.write(
                ",".join(
                    "" if r[c] is None else format_float(r[c]) for c in cols
                )
                + "\n"
            )


def cmd_bound(args) -> int:
    out = _out_dir(args)
    if args.sweep:
        if args.candidates or args.design:
            raise ValueError("--sweep generates its own designs; drop "
                             "--candidates/--design")
        # Known-regime column defaults to the family's optimum at p = 1.
        t_star = args.t_star
        if t_star is None and args.p == 1.0:
            t_star = 8.0
        taus = np.linspace(_SWEEP_LO, _SWEEP_HI, _SWEEP_POINTS)
        rows = bench_mod.bound_sweep(
            taus,
            p=args.p,
            t_star=t_star,
            grid_step=args.grid_step if args.grid_step is not None else 0.01,
        )
        _write_sweep_csv(out / "bound_sweep.csv", rows)
        if not args.no_figures:
            figures.plot_bound_sweep(rows, out / "bound_regimes.png")
        _print("wrote", out / "bound_sweep.csv", f"({len(rows)} rows)")
        return EXIT_OK

    cands, w = _load_inputs(args, default_uniform=False)
    cfg = CriterionConfig(p=args.p, t_star=args.t_star)
    state = make_state(info_matrix(cands, w), cfg)
    report = support_bound(cands, state, cfg, threads=args.threads)
    mask = prune_mask(cands, state, report, threads=args.threads)
    d_all = variance_function(state, cands.points, threads=args.threads)
    _write_json(out / "bound_report.json", report.to_dict())
    with open(out / "bound_points.csv", "w") as fh:
        fh.write("index,d,keep\n")
        for i in range(cands.n):
            fh.write(f"{i},{format_float(d_all[i])},{int(mask[i])}\n")
    n_active = cands.n_active
    n_kept = int(mask.sum())
    _print(f"pruned {n_active - n_kept} of {n_active} active candidates",
           f"(C = {format_float(report.C)}, t = {format_float(report.t)})")
    if not args.no_figures:
        figures.plot_bound_profile(
            d_all, report.C, mask, out / "bound_profile.png"
        )
    _print("wrote", out / "bound_report.json")
    return EXIT_OK


def cmd_solve(args) -> int:
    cands, w = _load_inputs(args, default_uniform=True)
    cfg = SolveConfig(
        p=args.p,
        a=args.a,
        max_iters=args.max_iters,
        eff_tol=args.eff_tol,
        prune_period=args.prune_period,
        t_star=args.t_star,
        trace_every=args.trace_every,
        threads=args.threads,
    )
    res = solve(cands, cfg, weights=w)
    out = _out_dir(args)
    save_design_json(out / "design.json", res.weights, res.active)
    write_trace_csv(out / "trace.csv", res.trace)
    _write_json(out / "bound_report.json", res.report.to_dict())
    if not args.no_figures:
        figures.plot_trace(res.trace, out / "trace.png")
        figures.plot_active_staircase(res.trace, out / "active_set.png")
    lo, hi = res.certificate
    _print(f"{'converged' if res.converged else 'NOT converged'} after",
           f"{res.n_iters} iterations")
    _print("phi =", format_float(res.phi),
           " certificate = [", format_float(lo), ",", format_float(hi), "]")
    _print(f"active candidates: {int(res.active.sum())} of {cands.n}")
    _print("wrote", out / "design.json")
    return EXIT_OK if res.converged else EXIT_NO_CONVERGENCE


def _write_rows_csv(path: Path, rows: list[dict], cols: list[str]) -> None:
    with open(path, "w") as fh:
        fh.write(",".join(cols) + "\n")
        for r in rows:
            cells = []
            for c in cols:
                v = r.get(c)
                if v is None:
                    cells.append("")
                elif isinstance(v, bool):
                    cells.append(str(int(v)))
                elif isinstance(v, float):
                    cells.append(format_float(v))
                else:
                    cells.append(str(v))
            fh.write(",".join(cells) + "\n")


def cmd_bench(args) -> int:
    out = _out_dir(args)
    step = 0.01 if args.full else (
        args.grid_step if args.grid_step is not None else 0.1
    )
    _print(f"timing table on the {step}-step product grid "
           f"(eff_tol = {format_float(args.eff_tol)})")
    rows = bench_mod.timing_table(
        grid_step=step, eff_tol=args.eff_tol, max_iters=args.max_iters
    )
    cols = ["p", "prune_period", "iterations", "phi", "n_final",
            "seconds", "time_ratio", "converged", "error"]
    _write_rows_csv(out / "bench_table.csv", rows, cols)
    for r in rows:
        if "error" in r:
            _print(f"  p={r['p']} period={r['prune_period']}: {r['error']}")
        else:
            _print(f"  p={r['p']} period={r['prune_period']}:",
                   f"{r['iterations']} iters, N={r['n_final']},",
                   f"{r['seconds']:.3f}s (x{r['time_ratio']:.2f})")

    ps = np.linspace(-0.9, 4.0, 50)
    ts_rows = bench_mod.tau_star_scan(ps)
    _write_rows_csv(out / "tau_star.csv", ts_rows, ["p", "tau_star", "phi"])
    bp_rows = bench_mod.bound_vs_p(np.linspace(-0.9, 4.0, 23))
    _write_rows_csv(
        out / "bound_vs_p.csv", bp_rows,
        ["p", "tau", "eps", "t", "C_known", "C_unknown"],
    )
    if not args.no_figures:
        figures.plot_tau_star(ts_rows, out / "tau_star.png")
        figures.plot_bound_vs_p(bp_rows, out / "bound_vs_p.png")
    _print("wrote", out / "bench_table.csv")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="designprune",
        description="phi_p-optimal approximate designs on finite candidate "
                    "sets, with certified candidate deletion.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def add_common(sp, with_solver_flags=False):
        sp.add_argument("--p", type=float, default=1.0,
                        help="criterion exponent, p > -1 (default 1)")
        sp.add_argument("--t-star", type=float, default=None, dest="t_star",
                        help="known optimal value of tr(M^-p), if any")
        sp.add_argument("--threads", type=int, default=1,
                        help="threads for candidate scans (default 1)")
        sp.add_argument("--out-dir", default=".", dest="out_dir",
                        help="directory for reports and figures (default .)")
        sp.add_argument("--no-figures", action="store_true",
                        help="skip figure rendering")
        sp.add_argument("--candidates", default=None,
                        help="candidate CSV (header x0..; optional s_ labels)")
        sp.add_argument("--design", default=None,
                        help="design JSON with weights (and active mask)")
        sp.add_argument("--example", type=int, choices=(1, 2), default=None,
                        help="built-in candidate grid: 1 = quadratic on "
                             "[-1,1], 2 = its two-factor product")
        sp.add_argument("--grid-step", type=float, default=None,
                        dest="grid_step",
                        help="grid spacing for --example (defaults: 0.01 "
                             "for 1, 0.1 for 2)")
        sp.add_argument("--tau", type=float, default=None,
                        help="three-point design weight: mass tau at -1 and "
                             "1 per factor, 1-2*tau at 0")
        sp.add_argument("--uniform", action="store_true",
                        help="uniform design over active candidates")
        if with_solver_flags:
            sp.add_argument("--a", type=float, default=None,
                            help="step exponent (default 1/(p+1))")
            sp.add_argument("--eff-tol", type=float, default=1e-6,
                            dest="eff_tol",
                            help="stop once eps/t falls below this "
                                 "(default 1e-6)")
            sp.add_argument("--max-iters", type=int, default=100_000,
                            dest="max_iters",
                            help="iteration cap (default 100000)")
            sp.add_argument("--prune-period", type=int, default=10,
                            dest="prune_period",
                            help="delete candidates every this many "
                                 "iterations; 0 disables (default 10)")
            sp.add_argument("--trace-every", type=int, default=1,
                            dest="trace_every",
                            help="record every k-th iteration (default 1)")

    sp_eval = sub.add_parser("eval", help="evaluate a design")
    add_common(sp_eval)
    sp_eval.set_defaults(func=cmd_eval)

    sp_bound = sub.add_parser("bound", help="deletion threshold for a design")
    add_common(sp_bound)
    sp_bound.add_argument("--sweep", action="store_true",
                          help="threshold curve over the three-point family, "
                               "tau in [3/16, 5/16]")
    sp_bound.set_defaults(func=cmd_bound)

    sp_solve = sub.add_parser("solve", help="run the multiplicative algorithm")
    add_common(sp_solve, with_solver_flags=True)
    sp_solve.set_defaults(func=cmd_solve)

    sp_bench = sub.add_parser("bench", help="timing table and curve data")
    add_common(sp_bench, with_solver_flags=True)
    sp_bench.add_argument("--full", action="store_true",
                          help="full-scale 0.01-step product grid "
                               "(40401 points)")
    sp_bench.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SingularityError as exc:
        print(f"error: singular information matrix: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except RootBracketError as exc:
        print(f"error: threshold root solve failed: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ArithmeticError as exc:
        print(f"error: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
