"""``applab`` command line: run an experiment config and write CSV reports.

Exit codes: 0 success, 1 malformed config or usage, 2 bound-check
violation, 3 validation failure, 4 numerical non-convergence.
"""

from __future__ import annotations

import argparse
import csv
import logging
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from pathlib import Path
from typing import Callable, Sequence

from .appell import PowerSeriesPair, appell_value, derivatives_at_one, validate
from .config import CHECK_KINDS, EXPERIMENTS, ConfigError, ExperimentConfig, load_config
from .exceptions import AccuracyError, DomainError, PositivityError, TruncationError, ValidationError
from .functions import function_from_config
from .kernel import KernelParams
from .moments import (
    PUBLISHED_FORMULAS,
    ROUTES,
    _verdict,
    discrepancy_report,
    limit_estimate,
    raw_moments,
    summarize_verdicts,
)
from .numerics import Accuracy
from .operator import EvalOptions, OperatorSpec, apply_grid, operator_weights, preset
from .published import published_formula
from . import rates

log = logging.getLogger("applab")

EXIT_OK, EXIT_CONFIG, EXIT_BOUND, EXIT_VALIDATION, EXIT_CONVERGENCE = 0, 1, 2, 3, 4

SCHEMAS = {
    "validate": ("check", "i", "x", "value", "ok"),
    "eval": ("n", "x", "value", "truncation_mass"),
    "moments": ("n", "x", "r", "route", "value"),
    "limits": ("order", "x", "estimate", "slope", "residual", "paper_value", "verdict"),
    "verify-paper": ("quantity", "n", "x", "oracle", "paper", "abs_diff", "rel_diff", "verdict"),
    "rates": ("theorem", "n", "x", "lhs", "rhs", "holds", "margin"),
    "dbv": ("theorem", "n", "x", "lhs", "rhs", "holds", "margin"),
}
SUMMARY_SCHEMA = ("quantity", "verdict")

_CONFIG_FIELDS = """\
config fields (JSON object):
  operator     {"preset": name} or {"a": [...], "b": [...]}, plus optional rho, c, discrete
  grids        {"x": [...], "n": [...], "i_max": int}
  function     preset name, {"polynomial": [c0, c1, ...]} or
               {"piecewise": {"breakpoints": [...], "pieces": [[...], ...]}}
  tolerances   rel_tol, abs_tol, limit_rel_tol, limit_abs_tol, weight_eps, quad_rel_tol, quad_abs_tol
  output_path  CSV file name inside --out (default <experiment>.csv)"""

_EXTRA_FIELDS = {
    "moments": "  routes       subset of " + ", ".join(ROUTES),
    "limits": "  orders       subset of 1, 2, 4",
    "verify-paper": "  (also writes <output>_summary.csv with columns quantity, verdict)",
    "rates": "  checks       list of {kind: " + "|".join(CHECK_KINDS) + ", function, b, a, tau, alpha, x_max, interval}",
    "dbv": "  function     must be polynomial or piecewise polynomial (default |z - 1|)",
}

_DEFAULT_CHECKS = (
    {"kind": "lipschitz", "function": "sqrt"},
    {"kind": "local", "function": "square", "b": 2.0},
    {"kind": "local", "function": "sin", "b": 3.0},
    {"kind": "steklov", "function": "abs_shift1", "a": 2.0},
)
_CHECK_DEFAULT_FUNCTION = {
    "korovkin": "square",
    "lipschitz": "sqrt",
    "voronovskaja": "exp_neg",
    "local": "square",
    "dt": "exp_neg",
    "steklov": "square",
    "weighted": "rational",
}


def describe(experiment: str) -> str:
    if experiment not in SCHEMAS:
        raise ConfigError(f"unknown experiment {experiment!r}; choose from {list(EXPERIMENTS)}", "describe")
    lines = [f"experiment: {experiment}", "columns: " + ", ".join(SCHEMAS[experiment]), _CONFIG_FIELDS]
    if experiment in _EXTRA_FIELDS:
        lines.append(_EXTRA_FIELDS[experiment])
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# formatting


def _cell(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return "%.17g" % v
    if hasattr(v, "dtype"):
        return _cell(v.item())
    return str(v)


def write_csv(path: Path, header: Sequence[str], rows: Sequence[Sequence]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            if len(row) != len(header):
                raise RuntimeError(f"row width {len(row)} does not match header width {len(header)}")
            writer.writerow([_cell(v) for v in row])


# --------------------------------------------------------------------------
# building blocks


def build_spec(cfg: ExperimentConfig, n: float = 1.0) -> OperatorSpec:
    op = cfg.operator
    if "preset" in op:
        spec = preset(op["preset"], n=n, rho=op.get("rho", 1.0), c=op.get("c", 0), a=op.get("a"), b=op.get("b"))
        if op.get("discrete") and not spec.discrete:
            spec = OperatorSpec(spec.series, spec.kernel, discrete=True)
        return spec
    series = PowerSeriesPair(tuple(op["a"]), tuple(op.get("b", ())))
    return OperatorSpec(series, KernelParams(n, op.get("rho", 1.0), op.get("c", 0)), op.get("discrete", False))


def _options(cfg: ExperimentConfig) -> EvalOptions:
    acc = Accuracy(cfg.tolerance("quad_rel_tol", 1e-10), cfg.tolerance("quad_abs_tol", 1e-14))
    return EvalOptions(weight_eps=cfg.tolerance("weight_eps", 1e-12), quad_acc=acc)


def _function(cfg: ExperimentConfig, override=None, fallback: str = "identity"):
    spec = override if override is not None else cfg.function
    return function_from_config(spec if spec is not None else fallback)


class _Runner:
    def __init__(self, cfg: ExperimentConfig, threads: int):
        self.cfg = cfg
        self.threads = max(1, int(threads))

    def map(self, func: Callable, tasks: Sequence) -> list:
        """Run tasks on the pool; results come back in task order."""
        if self.threads == 1 or len(tasks) <= 1:
            return [func(t) for t in tasks]
        with ThreadPoolExecutor(max_workers=self.threads) as pool:
            return list(pool.map(func, tasks))


# --------------------------------------------------------------------------
# experiments; each returns (rows, exit code, extra files)


def _run_validate(run: _Runner):
    cfg = run.cfg
    op = cfg.operator
    if "a" in op:
        series = PowerSeriesPair(tuple(op["a"]), tuple(op.get("b", ())))
    else:
        series = build_spec(cfg).series
    i_max = cfg.grids.get("i_max", 40)
    table = derivatives_at_one(series)
    a0, b0 = series.coeff_a(0), series.coeff_b(0)
    values = {"a0^2-b0^2!=0": a0 * a0 - b0 * b0, "A(1)>0": table.A[0], "B(1)>=0": table.B[0]}
    rows = []
    failed = []
    for name, ok, detail in series.constraint_flags():
        rows.append((name, "", "", values[name], ok))
        if not ok:
            failed.append(f"{name} violated ({detail})")
    xs = cfg.grids["x"]
    report = validate(series, xs, i_max)
    bad = {(i, x) for i, x, _ in report.positivity_violations}
    for x in xs:
        for i in range(i_max + 1):
            p = appell_value(series, i, x)
            rows.append(("p_i(x)>0", i, x, p, (i, float(x)) not in bad))
    if report.positivity_violations:
        i, x, p = report.positivity_violations[0]
        failed.append(f"p_{i}({x:g}) = {p:.6g} is not positive ({len(report.positivity_violations)} violations)")
    code = EXIT_OK
    if failed:
        for msg in failed:
            print(f"validation failed: {msg}", file=sys.stderr)
        code = EXIT_VALIDATION
    return rows, code, {}


def _run_eval(run: _Runner):
    cfg = run.cfg
    f = _function(cfg)
    opts = _options(cfg)
    xs = cfg.grids["x"]

    def task(n):
        spec = build_spec(cfg, n)
        vals = apply_grid(spec, f, xs, opts)
        return [(n, x, float(v), operator_weights(spec, x, opts).truncation_mass) for x, v in zip(xs, vals)]

    rows = [r for chunk in run.map(task, cfg.grids["n"]) for r in chunk]
    return rows, EXIT_OK, {}


def _run_moments(run: _Runner):
    cfg = run.cfg
    routes = cfg.routes or list(ROUTES)
    opts = _options(cfg)
    tasks = [(n, x, route) for n in cfg.grids["n"] for x in cfg.grids["x"] for route in routes]

    def task(t):
        n, x, route = t
        vec = raw_moments(build_spec(cfg, n), x, route, opts)
        return [(n, x, r, route, float(v)) for r, v in enumerate(vec.m)]

    rows = [r for chunk in run.map(task, tasks) for r in chunk]
    rows.sort(key=lambda r: (r[0], r[1], r[2], routes.index(r[3])))
    return rows, EXIT_OK, {}


def _run_limits(run: _Runner):
    cfg = run.cfg
    spec = build_spec(cfg, 1.0)
    rel = cfg.tolerance("limit_rel_tol", 1e-4)
    ab = cfg.tolerance("limit_abs_tol", 1e-6)
    tasks = [(order, x) for order in (cfg.orders or [1, 2, 4]) for x in cfg.grids["x"]]

    def task(t):
        order, x = t
        fit = limit_estimate(spec, x, order)
        printed = published_formula(f"lemma24_lim{order}", spec, x)
        verdict = _verdict(fit.estimate, printed, rel, ab)[2]
        return (order, x, fit.estimate, fit.slope, fit.residual, printed, verdict)

    return run.map(task, tasks), EXIT_OK, {}


def _run_verify(run: _Runner):
    cfg = run.cfg
    spec = build_spec(cfg, cfg.grids.get("n", [10.0])[0])
    f = _function(cfg, fallback="square")
    kw = dict(
        rel_tol=cfg.tolerance("rel_tol", 1e-6),
        abs_tol=cfg.tolerance("abs_tol", 1e-12),
        limit_rel_tol=cfg.tolerance("limit_rel_tol", 1e-4),
        limit_abs_tol=cfg.tolerance("limit_abs_tol", 1e-6),
    )
    n_grid = cfg.grids.get("n", [10.0])

    def task(name):
        return discrepancy_report(spec, cfg.grids["x"], n_grid, quantities=[name], test_function=f, **kw)

    reports = [r for chunk in run.map(task, list(PUBLISHED_FORMULAS)) for r in chunk]
    summary = summarize_verdicts(reports)
    extra = {"_summary": (SUMMARY_SCHEMA, [(q, summary[q]) for q in PUBLISHED_FORMULAS if q in summary])}
    return [r.row() for r in reports], EXIT_OK, extra


def _bound_rows(result: rates.BoundCheckResult) -> list:
    out = []
    for r in result.rows:
        holds = r.holds if r.asserted else "na"
        out.append((r.theorem, r.n, r.x, r.lhs, r.rhs, holds, r.margin))
    return out


def _check_tasks(cfg: ExperimentConfig) -> list:
    checks = cfg.checks or [dict(c) for c in _DEFAULT_CHECKS]
    tasks = []
    for idx, chk in enumerate(checks):
        if chk["kind"] in ("lipschitz", "local", "steklov"):
            tasks.extend((idx, chk, [n]) for n in cfg.grids["n"])
        else:
            tasks.append((idx, chk, list(cfg.grids["n"])))
    return tasks


def _run_check(cfg: ExperimentConfig, chk: dict, ns: list) -> rates.BoundCheckResult:
    opts = _options(cfg)
    kind = chk["kind"]
    f = _function(cfg, chk.get("function"), _CHECK_DEFAULT_FUNCTION[kind])
    spec = build_spec(cfg, ns[0])
    xs = [x for x in cfg.grids["x"] if x > 0]
    if kind == "korovkin":
        interval = tuple(chk.get("interval", (0.0, 2.0)))
        return rates.korovkin_check(spec, ns, interval, [f], opts=opts)
    if kind == "lipschitz":
        if "M" in chk or "alpha" in chk:
            base = f.lipschitz or (1.0, 1.0)
            f = replace(f, lipschitz=(chk.get("M", base[0]), chk.get("alpha", base[1])))
        return rates.lipschitz_check(spec, f, xs, ns, opts)
    if kind == "voronovskaja":
        out = rates.BoundCheckResult("thm33")
        for x in xs:
            out.rows.extend(rates.voronovskaja_check(spec, f, x, opts=opts).rows)
        return out
    if kind == "local":
        return rates.local_bound_check(spec, f, chk.get("b", 2.0), cfg.grids["x"], ns, opts=opts)
    if kind == "dt":
        return rates.dt_bound_constant(spec, f, chk.get("tau", 0.5), xs, ns, opts=opts)
    if kind == "steklov":
        return rates.steklov_bound_check(spec, f, chk.get("a", 2.0), cfg.grids["x"], ns, opts)
    if kind == "weighted":
        return rates.weighted_convergence_check(spec, f, chk.get("alpha", 1.0), chk.get("x_max", 10.0), ns, opts=opts)
    raise DomainError(f"unknown check kind {kind!r}")


def _run_rates(run: _Runner):
    cfg = run.cfg
    results = run.map(lambda t: _run_check(cfg, t[1], t[2]), _check_tasks(cfg))
    rows = [r for res in results for r in _bound_rows(res)]
    violated = [r for res in results for r in res.failures()]
    return rows, (EXIT_BOUND if violated else EXIT_OK), {}


def _run_dbv(run: _Runner):
    cfg = run.cfg
    f = _function(cfg, fallback="abs_shift1")
    xs = cfg.grids["x"]
    results = run.map(lambda n: rates.dbv_bound_check(build_spec(cfg, n), f, xs, [n], opts=_options(cfg)), cfg.grids["n"])
    rows = [r for res in results for r in _bound_rows(res)]
    violated = any(res.failures() for res in results)
    return rows, (EXIT_BOUND if violated else EXIT_OK), {}


_DISPATCH = {
    "validate": _run_validate,
    "eval": _run_eval,
    "moments": _run_moments,
    "limits": _run_limits,
    "verify-paper": _run_verify,
    "rates": _run_rates,
    "dbv": _run_dbv,
}


def run(cfg: ExperimentConfig, out_dir: str | os.PathLike = ".", threads: int = 1) -> int:
    """Run one experiment and write its CSV files; returns the exit code."""
    if cfg.experiment != "validate":
        # reject inadmissible operators before any work is dispatched
        build_spec(cfg, cfg.grids.get("n", [1.0])[0])
    rows, code, extra = _DISPATCH[cfg.experiment](_Runner(cfg, threads))
    target = Path(out_dir) / (cfg.output_path or f"{cfg.experiment}.csv")
    write_csv(target, SCHEMAS[cfg.experiment], rows)
    for suffix, (header, extra_rows) in extra.items():
        write_csv(target.with_name(target.stem + suffix + target.suffix), header, extra_rows)
    log.info("wrote %d rows to %s", len(rows), target)
    if code == EXIT_BOUND:
        print("bound check violated; see the rows with holds=false", file=sys.stderr)
    return code


# --------------------------------------------------------------------------
# entry point


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_CONFIG)


def _parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="applab", description="Appell-Szasz operator experiments")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in EXPERIMENTS:
        p = sub.add_parser(name, help=f"run the {name} experiment")
        p.add_argument("--config", required=True, help="path to the JSON config")
        p.add_argument("--threads", type=int, default=os.cpu_count() or 1, help="worker threads")
        p.add_argument("--out", default=".", help="output directory")
    d = sub.add_parser("describe", help="print the CSV schema and config fields of an experiment")
    d.add_argument("name")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    level = logging.getLevelName(os.environ.get("APPLAB_LOG", "WARNING").upper())
    logging.basicConfig(level=level if isinstance(level, int) else logging.WARNING, stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    args = _parser().parse_args(argv)
    try:
        if args.command == "describe":
            sys.stdout.write(describe(args.name))
            return EXIT_OK
        if args.threads < 1:
            raise ConfigError("must be at least 1", "--threads")
        cfg = load_config(args.config, args.command)
        return run(cfg, args.out, args.threads)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ValidationError, PositivityError) as exc:
        print(f"validation failed: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (AccuracyError, TruncationError) as exc:
        print(f"numerical non-convergence: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except DomainError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    raise SystemExit(main())
