"""Command-line surface.

Subcommands: ``decide`` (evaluate every rule on one observation), ``oc``
(operating characteristics at fixed sample sizes), ``samplesize`` (minimum
sample size per rule per weight), ``sweep-w`` and ``sweep-sampling`` (the two
sensitivity sweeps), and ``reproduce`` (one CSV per panel of the built-in
figure-style tables, fig2/fig3/fig4 for the normal study and s1/s2/s3 for the
binomial one).

Result tables share one fixed CSV header regardless of command, so downstream
plotting needs no scenario knowledge. Exit codes: 0 success, 1 computational
error, 2 usage or I/O error.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .decisions import MonotonicityError, decide, decide_batch
from .design import (
    Scenario,
    SweepRow,
    build_rule,
    sweep_samplesize,
    sweep_sampling_prior,
    sweep_weight,
)
from .distributions import Binomial
from .oc import (
    DegenerateScenarioError,
    compute_report,
    type_one_error,
)
from .scenario import BUILTIN_SCENARIOS, ScenarioError, load_scenario

RESULT_COLUMNS = (
    "rule",
    "w",
    "n",
    "sampling_mean",
    "type_one_error",
    "expected_power",
    "integrated_risk",
    "rsl",
    "min_n",
)

FIGURES = ("fig2", "fig3", "fig4", "s1", "s2", "s3")


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if math.isnan(value):
        return ""
    return f"{value:.6g}"


def write_result_table(rows, out_path: str | None) -> None:
    """Write rows in the fixed result-table schema as CSV (stdout if no path)."""

    def _dump(handle) -> None:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(RESULT_COLUMNS)
        for row in rows:
            writer.writerow([_fmt(getattr(row, col)) for col in RESULT_COLUMNS])

    if out_path is None:
        _dump(sys.stdout)
    else:
        with open(out_path, "w", encoding="utf-8", newline="") as handle:
            _dump(handle)


def _apply_w_override(scenario: Scenario, w: float | None) -> Scenario:
    if w is None:
        return scenario
    from dataclasses import replace

    rules = tuple(
        replace(spec, w=w) if spec.kind in ("cd", "rmd", "ti_rbd") else spec
        for spec in scenario.rules
    )
    return replace(scenario, rules=rules)


def _n_values(scenario: Scenario, n_flag: int | None) -> tuple:
    return (n_flag,) if n_flag is not None else scenario.n_values


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_decide(args) -> int:
    scenario = _apply_w_override(load_scenario(args.scenario), args.w)
    n = args.n if args.n is not None else scenario.n_values[0]
    obs = int(args.obs) if isinstance(scenario.model, Binomial) else float(args.obs)
    records = []
    for spec in scenario.rules:
        rule = build_rule(scenario, spec, n)
        d = decide(rule, obs, n)
        records.append(
            {
                "rule": spec.name,
                "reject": bool(d.reject),
                "posterior_prob_null": d.posterior_prob_null,
                "threshold": d.threshold_used,
                "weight": d.weight_used,
            }
        )
    if args.json:
        print(json.dumps({"n": n, "observation": obs, "decisions": records}, indent=2))
        return 0
    print(f"observation = {obs}  n = {n}")
    header = f"{'rule':<12}{'decision':<10}{'p_null':>12}{'threshold':>12}{'weight':>10}"
    print(header)
    print("-" * len(header))
    for rec in records:
        print(
            f"{rec['rule']:<12}{'reject' if rec['reject'] else 'keep':<10}"
            f"{rec['posterior_prob_null']:>12.6g}{rec['threshold']:>12.6g}{rec['weight']:>10.4g}"
        )
    return 0


def _mc_check(scenario: Scenario, n: int, reps: int, seed: int) -> None:
    """Simulated type I error per rule at theta0, printed to stderr."""
    rng = np.random.default_rng(seed)
    theta0 = scenario.hypothesis.theta0
    for spec in scenario.rules:
        rule = build_rule(scenario, spec, n)
        if isinstance(scenario.model, Binomial):
            draws = rng.binomial(n, theta0, size=reps)
        else:
            draws = rng.normal(theta0, scenario.model.sigma / math.sqrt(n), size=reps)
        rate = float(np.mean(decide_batch(rule, draws, n)))
        exact = type_one_error(rule, n)
        stderr = math.sqrt(max(exact * (1 - exact), 1e-12) / reps)
        print(
            f"mc-check {spec.name} n={n}: empirical={rate:.6g} exact={exact:.6g} "
            f"(se={stderr:.2g}, reps={reps})",
            file=sys.stderr,
        )


def cmd_oc(args) -> int:
    scenario = _apply_w_override(load_scenario(args.scenario), args.w)
    rows = []
    for n in _n_values(scenario, args.n):
        for spec in scenario.rules:
            rule = build_rule(scenario, spec, n)
            rep = compute_report(rule, n, scenario.sampling, scenario.informative, scenario.vague, spec.name)
            rows.append(
                SweepRow(
                    rule=spec.name,
                    w=spec.w,
                    n=n,
                    type_one_error=rep.type_one_error,
                    expected_power=rep.expected_power,
                    integrated_risk=rep.integrated_risk,
                    rsl=None if math.isnan(rep.rsl) else rep.rsl,
                )
            )
        if args.mc_check:
            _mc_check(scenario, n, args.mc_check, args.seed)
    write_result_table(rows, args.out)
    return 0


def cmd_samplesize(args) -> int:
    scenario = _apply_w_override(load_scenario(args.scenario), args.w)
    result = sweep_samplesize(scenario)
    for row in result.rows:
        if row.min_n == -1:
            print(
                f"warning: {row.rule} (w={row.w}) misses the expected-power target "
                f"within n_max={scenario.n_max}",
                file=sys.stderr,
            )
    write_result_table(result.rows, args.out)
    return 0


def cmd_sweep_w(args) -> int:
    scenario = load_scenario(args.scenario)
    write_result_table(sweep_weight(scenario).rows, args.out)
    return 0


def cmd_sweep_sampling(args) -> int:
    scenario = load_scenario(args.scenario)
    write_result_table(sweep_sampling_prior(scenario).rows, args.out)
    return 0


_OC_METRICS = ("type_one_error", "expected_power")


def cmd_reproduce(args) -> int:
    figure = args.figure
    scenario = load_scenario("paper-normal" if figure.startswith("fig") else "paper-binomial")
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []

    def emit(panel: str, rows) -> None:
        path = out_dir / f"{figure}_{panel}.csv"
        write_result_table(rows, str(path))
        written.append(path)

    if figure in ("fig2", "s1"):
        rows = sweep_weight(scenario).rows
        for n in scenario.n_values:
            rows_n = [r for r in rows if r.n == n]
            for metric in ("rsl",) + _OC_METRICS:
                emit(f"{metric}_n{n}", rows_n)
    elif figure in ("fig3", "s2"):
        left = sweep_samplesize(scenario).rows
        right = [r for r in sweep_sampling_prior(scenario).rows if r.min_n is not None]
        for metric in ("min_n",) + _OC_METRICS:
            emit(f"{metric}_vs_w", left)
            emit(f"{metric}_vs_mean", right)
    else:  # fig4, s3
        rows = [r for r in sweep_sampling_prior(scenario).rows if r.min_n is None]
        for n in scenario.n_values:
            rows_n = [r for r in rows if r.n == n]
            for metric in ("integrated_risk",) + _OC_METRICS:
                emit(f"{metric}_n{n}", rows_n)
    for path in written:
        print(path)
    return 0


# ---------------------------------------------------------------------------
# parser and entry point
# ---------------------------------------------------------------------------


def _add_common(parser: argparse.ArgumentParser, out: bool = True) -> None:
    parser.add_argument(
        "--scenario",
        required=True,
        help="scenario JSON path, or a built-in name: " + ", ".join(sorted(BUILTIN_SCENARIOS)),
    )
    if out:
        parser.add_argument("--out", default=None, help="output CSV path (default: stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="borrowkit",
        description="Compromise test decisions with historical borrowing, and their exact operating characteristics.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("decide", help="evaluate every rule on one observation")
    _add_common(p, out=False)
    p.add_argument("--obs", required=True, type=float, help="sample mean (normal) or success count (binomial)")
    p.add_argument("--n", type=int, default=None, help="sample size (default: first grid value)")
    p.add_argument("--w", type=float, default=None, help="override the borrowing weight of weighted rules")
    p.add_argument("--json", action="store_true", help="emit JSON instead of a table")
    p.set_defaults(func=cmd_decide)

    p = sub.add_parser("oc", help="operating characteristics at the scenario sample sizes")
    _add_common(p)
    p.add_argument("--n", type=int, default=None, help="evaluate a single sample size")
    p.add_argument("--w", type=float, default=None, help="override the borrowing weight of weighted rules")
    p.add_argument("--mc-check", type=int, default=0, metavar="N",
                   help="cross-check type I error with N simulated datasets (diagnostic only)")
    p.add_argument("--seed", type=int, default=0, help="seed for --mc-check")
    p.set_defaults(func=cmd_oc)

    p = sub.add_parser("samplesize", help="minimum sample size per rule per weight")
    _add_common(p)
    p.add_argument("--w", type=float, default=None, help="override the borrowing weight of weighted rules")
    p.set_defaults(func=cmd_samplesize)

    p = sub.add_parser("sweep-w", help="operating characteristics over the weight grid")
    _add_common(p)
    p.set_defaults(func=cmd_sweep_w)

    p = sub.add_parser("sweep-sampling", help="sampling-prior sensitivity sweep")
    _add_common(p)
    p.set_defaults(func=cmd_sweep_sampling)

    p = sub.add_parser("reproduce", help="emit the CSV tables behind one figure-style panel set")
    p.add_argument("figure", choices=FIGURES)
    p.add_argument("--out-dir", default=".", help="directory for the panel CSVs")
    p.set_defaults(func=cmd_reproduce)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ScenarioError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (DegenerateScenarioError, MonotonicityError, ValueError) as exc:
        print(f"computation failed: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
