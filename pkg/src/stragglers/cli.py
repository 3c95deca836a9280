"""Command-line front end.

    stragglers eval      closed-form metrics for one plan
    stragglers simulate  Monte Carlo estimate for one plan
    stragglers sweep     cost-vs-latency curve over c, n, or the relaunch delay
    stragglers optimize  approximate and exact optimal relaunch delay
    stragglers trace     tail / simulate / export on task event logs

Distributions: ``sexp:D,mu`` (job-level shift D, each task gets D/k unless
--per-task-shift), ``pareto:lambda,alpha``, ``empirical:PATH`` (one lifetime
per line, optional ``lifetime`` header).  Exit codes: 0 ok, 1 failure,
2 no closed form for the request, 3 no data after filtering.
"""
from __future__ import annotations

import argparse
import csv
import math
import os
import sys
from contextlib import contextmanager
from typing import Optional

import numpy as np

from . import analytic, simulator, trace
from .distributions import Empirical, Pareto, ShiftedExp
from .plan import Metrics, Mode, RedundancyPlan

EXIT_FAIL, EXIT_UNSUPPORTED, EXIT_EMPTY = 1, 2, 3
SEED_ENV = "STRAGGLERS_SEED"


class CliError(Exception):
    def __init__(self, msg: str, code: int = EXIT_FAIL):
        super().__init__(msg)
        self.code = code


def fmt(x) -> str:
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    return format(float(x), ".10g")


@contextmanager
def _out(path: Optional[str]):
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            yield fh


def _write_rows(stream, header, rows) -> None:
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) if isinstance(v, (int, float, np.number)) else v for v in row])


# -- argument parsing helpers ----------------------------------------------

def read_lifetimes(path: str) -> Empirical:
    try:
        fh = sys.stdin if path == "-" else open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise CliError(f"cannot read empirical file {path!r}: {exc}") from exc
    vals = []
    with fh if fh is not sys.stdin else _noclose(fh):
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or not row[0].strip():
                continue
            try:
                vals.append(float(row[0]))
            except ValueError:
                if lineno == 1:
                    continue  # header
                raise CliError(f"{path}:{lineno}: not a number: {row[0]!r}")
    if not vals:
        raise CliError(f"empirical file {path!r} holds no lifetimes", EXIT_EMPTY)
    return Empirical.from_values(vals)


@contextmanager
def _noclose(fh):
    yield fh


def parse_dist(spec: str, k: int, per_task_shift: bool = False):
    kind, _, rest = spec.partition(":")
    kind = kind.lower()
    try:
        if kind == "empirical":
            return read_lifetimes(rest)
        vals = [float(v) for v in rest.split(",")]
        if kind == "pareto" and len(vals) == 2:
            return Pareto(*vals)
        if kind == "sexp" and len(vals) == 2:
            D, mu = vals
            return ShiftedExp(D if per_task_shift else D / k, mu)
    except ValueError as exc:
        raise CliError(f"bad distribution {spec!r}: {exc}") from exc
    raise CliError(f"bad distribution {spec!r}; expected sexp:D,mu | pareto:lambda,alpha | empirical:PATH")


def parse_grid(spec: str, integer: bool = False) -> list:
    """``a:b`` (step 1), ``a:b:step``, ``log:a:b:num`` or ``v1,v2,...``."""
    conv = int if integer else float
    try:
        if spec.startswith("log:"):
            a, b, num = spec[4:].split(":")
            vals = np.geomspace(float(a), float(b), int(num)).tolist()
        elif ":" in spec:
            parts = spec.split(":")
            a, b = float(parts[0]), float(parts[1])
            step = float(parts[2]) if len(parts) == 3 else 1.0
            if step <= 0:
                raise ValueError("step must be positive")
            count = int(math.floor((b - a) / step + 1e-9)) + 1
            vals = [a + i * step for i in range(count)]
        else:
            vals = [float(v) for v in spec.split(",") if v.strip()]
        vals = [conv(v) if not integer or float(v).is_integer() else _bad_int(v) for v in vals]
    except ValueError as exc:
        raise CliError(f"invalid grid {spec!r}: {exc}") from exc
    if not vals:
        raise CliError(f"invalid grid {spec!r}: empty")
    if any(b <= a for a, b in zip(vals, vals[1:])):
        raise CliError(f"invalid grid {spec!r}: values must be strictly increasing")
    return vals


def _bad_int(v):
    raise ValueError(f"{v!r} is not an integer")


def _delta(s: str) -> float:
    return math.inf if s.lower() in ("inf", "infinity") else float(s)


def plan_from_args(a) -> RedundancyPlan:
    mode = Mode(a.mode)
    try:
        return RedundancyPlan(
            k=a.k, mode=mode, c=a.c if mode is Mode.REPLICATE else 0,
            n=a.n if mode is Mode.CODE else None,
            delay=a.delta, relaunch=a.relaunch, cancel=not a.no_cancel,
        )
    except ValueError as exc:
        raise CliError(str(exc)) from exc


def _add_plan_args(p, k_required=True) -> None:
    p.add_argument("--k", type=int, required=k_required, help="tasks per job")
    p.add_argument("--mode", choices=[m.value for m in Mode], default="none")
    p.add_argument("--c", type=int, default=0, help="extra replicas per task (replicate mode)")
    p.add_argument("--n", type=int, help="total tasks with parity (code mode)")
    p.add_argument("--delta", type=_delta, default=0.0, help="redundancy/relaunch delay (default 0)")
    p.add_argument("--relaunch", action="store_true")
    p.add_argument("--no-cancel", action="store_true", help="mark the plan as running leftovers to completion")


def _add_dist_args(p) -> None:
    p.add_argument("--dist", required=True, help="sexp:D,mu | pareto:lambda,alpha | empirical:PATH")
    p.add_argument("--per-task-shift", action="store_true", help="treat sexp D as the per-task shift")


def _add_sim_args(p, runs_default=None) -> None:
    p.add_argument("--runs", type=int, default=runs_default)
    p.add_argument("--seed", type=int, default=int(os.environ.get(SEED_ENV, "0")))
    p.add_argument("--threads", type=int, default=1, help="worker threads; results do not depend on it")


# -- commands ---------------------------------------------------------------

METRIC_COLS = ["E_T", "E_C_cancel", "E_C_nocancel"]
MOMENT_COLS = ["E_T2", "E_C2", "sd_T", "sd_C"]


def _evaluate(plan, model, second_moments=False) -> Metrics:
    try:
        return analytic.evaluate(plan, model, second_moments=second_moments)
    except analytic.UnsupportedCombination as exc:
        raise CliError(str(exc), EXIT_UNSUPPORTED) from exc
    except (ValueError, ArithmeticError) as exc:
        raise CliError(str(exc)) from exc


def cmd_eval(a) -> None:
    plan = plan_from_args(a)
    model = parse_dist(a.dist, a.k, a.per_task_shift)
    m = _evaluate(plan, model, second_moments=True)
    d = m.as_dict()
    cols = METRIC_COLS + (MOMENT_COLS if m.E_T2 is not None else [])
    with _out(a.output) as fh:
        _write_rows(fh, cols, [[d[c] for c in cols]])


SIM_COLS = ["runs", "seed", "E_T", "se_T", "E_C_cancel", "se_C_cancel",
            "E_C_nocancel", "se_C_nocancel", "mean_relaunched"]


def cmd_simulate(a) -> None:
    if a.runs is None or a.runs < 2:
        raise CliError("--runs must be >= 2")
    plan = plan_from_args(a)
    model = parse_dist(a.dist, a.k, a.per_task_shift)
    e = simulator.estimate(plan, model, a.runs, a.seed, threads=a.threads)
    row = [e.runs, e.seed, e.E_T.mean, e.E_T.se, e.E_C_cancel.mean, e.E_C_cancel.se,
           e.E_C_nocancel.mean, e.E_C_nocancel.se, e.mean_relaunched]
    with _out(a.output) as fh:
        _write_rows(fh, SIM_COLS, [row])


FAMILIES = ("replicate", "code", "relaunch", "relaunch-replicate", "relaunch-code")


def family_plan(family: str, k: int, value, c: int = 0, n: Optional[int] = None) -> RedundancyPlan:
    if family == "replicate":
        return RedundancyPlan(k, Mode.REPLICATE, c=int(value))
    if family == "code":
        return RedundancyPlan(k, Mode.CODE, n=int(value))
    if family == "relaunch":
        return RedundancyPlan(k, Mode.NONE, delay=float(value), relaunch=True)
    if family == "relaunch-replicate":
        return RedundancyPlan(k, Mode.REPLICATE, c=c, delay=float(value), relaunch=True)
    if family == "relaunch-code":
        if n is None:
            raise CliError("relaunch-code needs --n")
        return RedundancyPlan(k, Mode.CODE, n=n, delay=float(value), relaunch=True)
    raise CliError(f"unknown family {family!r}")


def sweep_rows(family, k, grid, model, c=0, n=None, sd=False, runs=None, seed=0, threads=1):
    """Header and rows of a SweepCurve, analytic unless ``runs`` is given."""
    header = ["param"] + METRIC_COLS + (["sd_T", "sd_C"] if sd else [])
    if runs is not None:
        header += ["se_T", "se_C_cancel", "se_C_nocancel"]
    rows = []
    for v in grid:
        try:
            plan = family_plan(family, k, v, c=c, n=n)
        except ValueError as exc:
            raise CliError(str(exc)) from exc
        if runs is None:
            m = _evaluate(plan, model, second_moments=sd)
            row = [v, m.E_T, m.E_C_cancel, m.E_C_nocancel]
            if sd:
                row += [m.sd_T if m.sd_T is not None else "", m.sd_C if m.sd_C is not None else ""]
        else:
            e = simulator.estimate(plan, model, runs, seed, threads=threads)
            row = [v, e.E_T.mean, e.E_C_cancel.mean, e.E_C_nocancel.mean]
            if sd:
                row += [math.sqrt(max(e.E_T2.mean - e.E_T.mean ** 2, 0.0)),
                        math.sqrt(max(e.E_C2.mean - e.E_C_cancel.mean ** 2, 0.0))]
            row += [e.E_T.se, e.E_C_cancel.se, e.E_C_nocancel.se]
        rows.append(row)
    return header, rows


def cmd_sweep(a) -> None:
    model = parse_dist(a.dist, a.k, a.per_task_shift)
    grid = parse_grid(a.grid, integer=a.family in ("replicate", "code"))
    runs = a.runs
    if isinstance(model, Empirical) and runs is None:
        runs = 10_000
    if runs is not None and runs < 2:
        raise CliError("--runs must be >= 2")
    header, rows = sweep_rows(a.family, a.k, grid, model, c=a.c, n=a.n, sd=a.sd,
                              runs=runs, seed=a.seed, threads=a.threads)
    with _out(a.output) as fh:
        _write_rows(fh, header, rows)


OPT_COLS = ["k", "lambda", "alpha", "delta_star", "delta_exact", "p_star",
            "alpha_sufficient", "E_T_at_exact", "E_T_norelaunch"]


def cmd_optimize(a) -> None:
    try:
        r = analytic.opt_relaunch(a.k, a.lam, a.alpha)
    except (ValueError, ArithmeticError, analytic.ConvergenceError) as exc:
        raise CliError(str(exc)) from exc
    with _out(a.output) as fh:
        _write_rows(fh, OPT_COLS, [[a.k, a.lam, a.alpha, r.delta_star, r.delta_exact, r.p_star,
                                    r.alpha_sufficient, r.E_T_at_exact, r.g]])


def _k_filter(a):
    if a.k_range:
        try:
            lo, hi = (int(v) for v in a.k_range.split(":"))
        except ValueError as exc:
            raise CliError(f"bad --k-range {a.k_range!r}; expected LO:HI") from exc
        return (lo, hi)
    return a.k


def _parse_columns(spec: Optional[str]) -> Optional[dict]:
    if not spec:
        return None
    try:
        return dict(item.split("=", 1) for item in spec.split(","))
    except ValueError as exc:
        raise CliError(f"bad --columns {spec!r}; expected name=header,...") from exc


def load_trace_model(a) -> Empirical:
    events, nerr = [], 0
    cols = _parse_columns(a.columns)
    for path in a.inputs:
        try:
            if path == "-":
                res = trace.parse_events(sys.stdin, cols)
            else:
                with open(path, newline="", encoding="utf-8") as fh:
                    res = trace.parse_events(fh, cols)
        except trace.MissingColumnsError as exc:
            raise CliError(f"{path}: {exc}") from exc
        except OSError as exc:
            raise CliError(f"cannot read {path!r}: {exc}") from exc
        for lineno, msg in res.errors:
            print(f"{path}:{lineno}: {msg}", file=sys.stderr)
        nerr += len(res.errors)
        events.extend(res.events)
    built = trace.build_job_records(events)
    if built.dropped or built.duplicates:
        print(f"dropped {built.dropped} task(s), {built.duplicates} duplicate SCHEDULE event(s)",
              file=sys.stderr)
    try:
        return trace.empirical_model(built.records, _k_filter(a), time_unit=a.time_unit)
    except trace.EmptySelectionError as exc:
        raise CliError(str(exc), EXIT_EMPTY) from exc


def cmd_trace(a) -> None:
    model = load_trace_model(a)
    if a.trace_cmd == "export":
        with _out(a.output) as fh:
            _write_rows(fh, ["lifetime"], [[v] for v in model.samples.tolist()])
    elif a.trace_cmd == "tail":
        if a.grid:
            grid = parse_grid(a.grid)
        else:
            lo, hi = model.samples[0], model.samples[-1]
            grid = np.geomspace(lo, hi, 50).tolist() if hi > lo else [lo]
        try:
            pts = trace.tail_points(model, grid)
        except ValueError as exc:
            raise CliError(str(exc)) from exc
        with _out(a.output) as fh:
            trace.write_tail_csv(pts, fh)
    else:
        k = a.plan_k or (a.k if a.k else None)
        if k is None:
            raise CliError("trace simulate needs --plan-k when filtering by --k-range")
        grid = parse_grid(a.grid, integer=a.family in ("replicate", "code"))
        header, rows = sweep_rows(a.family, k, grid, model, c=a.c, n=a.n, sd=a.sd,
                                  runs=a.runs, seed=a.seed, threads=a.threads)
        with _out(a.output) as fh:
            _write_rows(fh, header, rows)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="stragglers", description=__doc__.split("\n\n")[0])
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("eval", help="closed-form metrics for one plan")
    _add_plan_args(p)
    _add_dist_args(p)
    p.add_argument("--output", "-o")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("simulate", help="Monte Carlo estimate for one plan")
    _add_plan_args(p)
    _add_dist_args(p)
    _add_sim_args(p, runs_default=100_000)
    p.add_argument("--output", "-o")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="cost-vs-latency curve")
    p.add_argument("--family", choices=FAMILIES, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--c", type=int, default=0, help="fixed replicas for relaunch-replicate")
    p.add_argument("--n", type=int, help="fixed total tasks for relaunch-code")
    p.add_argument("--grid", required=True, help="a:b | a:b:step | log:a:b:num | v1,v2,...")
    p.add_argument("--sd", action="store_true", help="add standard-deviation columns")
    _add_dist_args(p)
    _add_sim_args(p)
    p.add_argument("--output", "-o")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("optimize", help="optimal relaunch delay for Pareto tasks")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--lam", type=float, default=1.0)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--output", "-o")
    p.set_defaults(func=cmd_optimize)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("inputs", nargs="+", help="event CSV files, '-' for stdin")
    g = common.add_mutually_exclusive_group()
    g.add_argument("--k", type=int, help="keep jobs with exactly k tasks")
    g.add_argument("--k-range", help="keep jobs with LO <= k <= HI")
    common.add_argument("--time-unit", type=float, default=1.0, help="seconds per trace time unit")
    common.add_argument("--columns", help="header mapping, e.g. job_id=JobID,timestamp=time")
    common.add_argument("--output", "-o")

    p = sub.add_parser("trace", help="task event log pipeline")
    tsub = p.add_subparsers(dest="trace_cmd", required=True)
    tsub.add_parser("export", parents=[common], help="pooled lifetimes")
    tp = tsub.add_parser("tail", parents=[common], help="empirical tail curve")
    tp.add_argument("--grid")
    tp = tsub.add_parser("simulate", parents=[common], help="simulate a plan family")
    tp.add_argument("--family", choices=FAMILIES, required=True)
    tp.add_argument("--grid", required=True)
    tp.add_argument("--plan-k", type=int)
    tp.add_argument("--c", type=int, default=0)
    tp.add_argument("--n", type=int)
    tp.add_argument("--sd", action="store_true")
    _add_sim_args(tp, runs_default=10_000)
    p.set_defaults(func=cmd_trace)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except CliError as exc:
        print(f"stragglers: {exc}", file=sys.stderr)
        return exc.code
    except OSError as exc:
        print(f"stragglers: {exc}", file=sys.stderr)
        return EXIT_FAIL
    return 0


if __name__ == "__main__":
    sys.exit(main())
