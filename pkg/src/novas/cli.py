"""Command-line front end.

Subcommands:

* ``select``    — run a selector on a delimited data file, write a JSONL
                  trace, print a per-stage summary table.
* ``simulate``  — repeated runs on synthetic models, write a JSON report.
* ``benchmark`` — forced-stage timing sweep over covariate counts, with the
                  fitted log-log slope of wall time against p.
* ``summarize`` — re-print the summary table from an existing trace file.

Exit codes: 0 success, 2 malformed input data, 3 invalid configuration.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time

import numpy as np

from .criterion import WeightFn
from .data import load_table, standardize
from .errors import ConfigError, ConstantColumn, TableFormatError
from .selection import SelectorConfig, mpdp_select, novas_select
from .simulation import ModelSpec, generate, run_experiment
from .smoothing import DEFAULT_MULTIPLIERS, BandwidthGrid

EXIT_DATA = 2
EXIT_CONFIG = 3

_DEFAULT_GRID = ",".join(str(m) for m in DEFAULT_MULTIPLIERS)


def _add_selector_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--threshold", type=float, default=0.05, metavar="T",
                   help="minimum relative CV gain to continue (default 0.05)")
    p.add_argument("--budget-q", type=int, default=None, metavar="Q",
                   help="stage budget; floor(sqrt(Q)) subsets survive each "
                        "stage (default: the number of covariates)")
    p.add_argument("--max-stages", type=int, default=10,
                   help="hard cap on merge stages (default 10)")
    p.add_argument("--grid", default=_DEFAULT_GRID,
                   help="comma-separated bandwidth multipliers applied to "
                        f"n^(-1/(d+4)) (default {_DEFAULT_GRID})")
    p.add_argument("--weight", default="unit",
                   help="CV weight: 'unit' or 'box:LO:HI' (indicator box "
                        "applied to every selected coordinate; default unit)")
    p.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
    p.add_argument("--threads", type=int, default=None,
                   help="worker threads for candidate scoring (default: "
                        "NOVAS_THREADS env var, else all cores)")


def _parse_grid(text: str) -> BandwidthGrid:
    try:
        multipliers = tuple(float(tok) for tok in text.split(",") if tok.strip())
        return BandwidthGrid(multipliers)
    except ValueError as exc:
        raise ConfigError(f"bad --grid {text!r}: {exc}")


def _parse_weight(text: str) -> WeightFn | None:
    if text == "unit":
        return None
    if text.startswith("box:"):
        parts = text.split(":")
        if len(parts) != 3:
            raise ConfigError(f"bad --weight {text!r}: expected box:LO:HI")
        try:
            lo, hi = float(parts[1]), float(parts[2])
        except ValueError:
            raise ConfigError(f"bad --weight {text!r}: bounds must be numeric")
        if hi < lo:
            raise ConfigError(f"bad --weight {text!r}: upper bound below lower")
        return WeightFn("box", lower=lo, upper=hi)
    raise ConfigError(f"unknown --weight {text!r} (use 'unit' or 'box:LO:HI')")


def _build_config(args) -> SelectorConfig:
    try:
        return SelectorConfig(
            threshold_t=args.threshold,
            budget_q=args.budget_q,
            max_stages=args.max_stages,
            grid=_parse_grid(args.grid),
            weight=_parse_weight(args.weight),
            seed=args.seed,
        )
    except ValueError as exc:
        raise ConfigError(str(exc))


def _resolve_threads(flag: int | None) -> int:
    if flag is not None:
        if flag < 1:
            raise ConfigError("--threads must be at least 1")
        return flag
    env = os.environ.get("NOVAS_THREADS")
    if env:
        try:
            value = int(env)
        except ValueError:
            raise ConfigError(f"NOVAS_THREADS={env!r} is not an integer")
        if value < 1:
            raise ConfigError("NOVAS_THREADS must be at least 1")
        return value
    return os.cpu_count() or 1


def _write_jsonl(path: str, records: list[dict]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record) + "\n")


def render_summary(records: list[dict]) -> str:
    """Aligned per-stage table (stage, selected variables, CV score)."""
    stages = [r for r in records if r.get("record") == "stage"]
    finals = [r for r in records if r.get("record") == "final"]
    if not finals:
        raise TableFormatError("trace has no final record")
    final = finals[0]

    rows = [("stage", "variables", "cv")]
    for rec in stages:
        best = rec["best"]
        rows.append((str(rec["stage"]),
                     " ".join(str(j) for j in best["indices"]),
                     f"{best['score']:.6g}"))
    rows.append(("final",
                 " ".join(str(j) for j in final["indices"]),
                 f"{final['score']:.6g}"))
    widths = [max(len(row[k]) for row in rows) for k in range(3)]
    return "\n".join(
        f"{row[0]:<{widths[0]}}  {row[1]:<{widths[1]}}  {row[2]:>{widths[2]}}"
        for row in rows)


def cmd_select(args) -> int:
    config = _build_config(args)
    threads = _resolve_threads(args.threads)
    raw, names, response = load_table(args.data, args.response, args.delimiter)
    try:
        dataset = standardize(raw)
    except ConstantColumn as exc:
        raise ConstantColumn(exc.column, names[exc.column - 1])
    select = {"novas": novas_select, "mpdp": mpdp_select}[args.selector]
    trace = select(dataset, config, threads=threads)

    header = {
        "record": "header",
        "selector": args.selector,
        "data": args.data,
        "response": response,
        "covariates": names,
        "n": dataset.n,
        "p": dataset.p,
        "threshold": config.threshold_t,
        "budget_q": config.budget_q if config.budget_q is not None else dataset.p,
        "max_stages": config.max_stages,
        "grid": list(config.grid.multipliers),
        "weight": args.weight,
        "seed": config.seed,
    }
    records = [header] + trace.stage_records() + [trace.final_record()]
    _write_jsonl(args.out, records)
    print(render_summary(records))
    print(f"trace written to {args.out}", file=sys.stderr)
    return 0


def cmd_simulate(args) -> int:
    if args.reps < 1:
        raise ConfigError("--reps must be at least 1")
    config = _build_config(args)
    threads = _resolve_threads(args.threads)
    nsr = args.nsr
    if nsr is None:
        nsr = 0.1 if args.model == "alpha_family" else 0.05
    try:
        spec = ModelSpec(model=args.model, n=args.n, p=args.p, nsr=nsr,
                         alpha=args.alpha, trap=args.trap, seed=args.seed)
    except ValueError as exc:
        raise ConfigError(str(exc))

    report = run_experiment(spec, args.reps, selector=args.selector,
                            config=config, threads=threads)
    with open(args.out, "w", encoding="utf-8") as fh:
        json.dump(report.to_dict(), fh, indent=2)
        fh.write("\n")

    lines = [
        f"selector {args.selector}  model {spec.model}  n {spec.n}  p {spec.p}"
        f"  nsr {spec.nsr:g}  reps {args.reps}  seed {spec.seed}",
        f"correct {{1,2,3}}     {report.correct_count} / {args.reps}",
    ]
    for v in (1, 2, 3):
        lines.append(f"contains variable {v}  {report.variable_counts[v]}")
    lines.append(f"final cv mean       {report.score_mean:.6g}")
    lines.append(f"final cv variance   {report.score_var:.6g}")
    if report.trap_cells is not None:
        for cell, count in report.trap_cells.items():
            lines.append(f"trap {cell:<15} {count}")
    print("\n".join(lines))
    print(f"report written to {args.out}", file=sys.stderr)
    return 0


def cmd_benchmark(args) -> int:
    try:
        p_list = [int(tok) for tok in args.p.split(",") if tok.strip()]
    except ValueError:
        raise ConfigError(f"bad --p {args.p!r}: expected comma-separated integers")
    if len(p_list) < 2:
        raise ConfigError("benchmark needs at least 2 covariate counts in --p")
    if args.stages < 1:
        raise ConfigError("--stages must be at least 1")
    config = _build_config(args)
    threads = _resolve_threads(args.threads)

    records = []
    rows = []
    for p in p_list:
        spec = ModelSpec(model="m1", n=args.n, p=p, seed=args.seed)
        dataset = standardize(generate(spec))
        start = time.perf_counter()
        trace = novas_select(dataset, config, threads=threads,
                             force_stages=args.stages)
        seconds = time.perf_counter() - start
        records.append({"record": "timing", "p": p, "seconds": seconds,
                        "fits_evaluated": trace.fits_evaluated,
                        "threads": threads})
        rows.append((p, seconds, trace.fits_evaluated))

    logs = np.log([r[0] for r in rows]), np.log([r[1] for r in rows])
    slope = float(np.polyfit(logs[0], logs[1], 1)[0])
    records.append({"record": "slope", "slope": slope})
    _write_jsonl(args.out, records)

    print(f"{'p':>8}  {'seconds':>10}  {'fits':>8}  {'threads':>7}")
    for p, seconds, fits in rows:
        print(f"{p:>8}  {seconds:>10.3f}  {fits:>8}  {threads:>7}")
    print(f"log-log slope: {slope:.4f}")
    print(f"timings written to {args.out}", file=sys.stderr)
    return 0


def cmd_summarize(args) -> int:
    try:
        with open(args.trace, encoding="utf-8") as fh:
            records = [json.loads(line) for line in fh if line.strip()]
    except (OSError, json.JSONDecodeError) as exc:
        raise TableFormatError(f"cannot read trace {args.trace!r}: {exc}")
    print(render_summary(records))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="novas",
        description="Nonparametric variable selection by leave-one-out "
                    "cross-validated local linear regression.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_sel = sub.add_parser("select", help="select variables from a data file")
    p_sel.add_argument("--data", required=True, help="delimited input table")
    p_sel.add_argument("--response", required=True,
                       help="response column name or 1-based index")
    p_sel.add_argument("--delimiter", default=None,
                       help="field delimiter (default: auto-detect comma/tab)")
    p_sel.add_argument("--selector", choices=("novas", "mpdp"), default="novas")
    p_sel.add_argument("--out", default="trace.jsonl",
                       help="trace output path (default trace.jsonl)")
    _add_selector_flags(p_sel)
    p_sel.set_defaults(func=cmd_select)

    p_sim = sub.add_parser("simulate", help="run a synthetic-model experiment")
    p_sim.add_argument("--model", required=True,
                       choices=("m1", "m2", "m3", "m4", "m5", "alpha_family"))
    p_sim.add_argument("--n", type=int, required=True, help="sample size")
    p_sim.add_argument("--p", type=int, required=True, help="covariate count")
    p_sim.add_argument("--nsr", type=float, default=None,
                       help="noise-to-signal ratio (default 0.05; "
                            "0.1 for alpha_family)")
    p_sim.add_argument("--alpha", type=float, default=None,
                       help="blend parameter, alpha_family only")
    p_sim.add_argument("--trap", action="store_true",
                       help="replace column p by x1^2*|x2|^(1/3)")
    p_sim.add_argument("--reps", type=int, required=True,
                       help="number of replications")
    p_sim.add_argument("--selector", choices=("novas", "mpdp"), default="novas")
    p_sim.add_argument("--out", default="report.json",
                       help="report output path (default report.json)")
    _add_selector_flags(p_sim)
    p_sim.set_defaults(func=cmd_simulate)

    p_bench = sub.add_parser("benchmark", help="forced-stage timing sweep")
    p_bench.add_argument("--p", required=True,
                         help="comma-separated covariate counts, e.g. 100,500,1000")
    p_bench.add_argument("--n", type=int, default=100, help="sample size (default 100)")
    p_bench.add_argument("--stages", type=int, default=4,
                         help="stages to force, stopping rule bypassed (default 4)")
    p_bench.add_argument("--out", default="benchmark.jsonl",
                         help="timing output path (default benchmark.jsonl)")
    _add_selector_flags(p_bench)
    p_bench.set_defaults(func=cmd_benchmark)

    p_sum = sub.add_parser("summarize", help="re-print the summary of a trace file")
    p_sum.add_argument("--trace", required=True, help="trace JSONL path")
    p_sum.set_defaults(func=cmd_summarize)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (TableFormatError, ConstantColumn, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


def main_entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    main_entry()
