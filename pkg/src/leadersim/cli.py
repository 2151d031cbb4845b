"""Command-line front end.

Three subcommands: `run` executes one scenario and writes a trace plus
metrics, `sweep` averages metrics over seeded repetitions of a varied
scenario, `overhead` prints the closed-form scheme comparison. File outputs
are deterministic for a given input and seed. Set LEADERSIM_LOG=INFO (or
DEBUG) for progress messages; there are no other knobs outside the files.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from dataclasses import replace
from pathlib import Path

from .config import ConfigError, load_scenario, load_sweep
from .metrics import summarize
from .overhead import (
    comm_energy,
    comp_energy,
    display_round,
    exact_decimal,
    storage_overhead,
    tolerance,
    Scheme,
)
from .sim import DisconnectedRoot, run
from .sweeps import METRIC_NAMES, SweepResult, run_sweep

log = logging.getLogger("leadersim")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DISCONNECTED = 3


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)
    log.info("wrote %s", path)


def _cell(value: float | None) -> object:
    return "" if value is None else value


def cmd_run(args: argparse.Namespace) -> int:
    scenario = load_scenario(args.scenario)
    if args.seed is not None:
        scenario = replace(scenario, seed=args.seed)
    result = run(scenario)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "trace.jsonl").write_text(result.trace.to_jsonl())
    log.info("wrote %s", out / "trace.jsonl")
    summary = summarize(result)
    _write_csv(
        out / "metrics.csv",
        ["metric", "value"],
        [[name, _cell(summary[name])] for name in METRIC_NAMES],
    )
    with open(out / "summary.json", "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    if not args.no_figures:
        from . import plots

        figures = out / "figures"
        figures.mkdir(exist_ok=True)
        plots.save_topology(result, figures / "topology.png")
        plots.save_energy(result, figures / "energy.png")
        log.info("wrote figures to %s", figures)
    flagged = sorted(result.detector.malicious)
    print(f"run complete: {scenario.node_count} nodes, seed {scenario.seed}, "
          f"{len(flagged)} flagged {flagged}")
    return EXIT_OK


def trend_check(means: list[float | None]) -> dict[str, object]:
    """Direction of a mean curve with strict-inversion counts both ways."""
    defined = [m for m in means if m is not None]
    up = sum(1 for a, b in zip(defined, defined[1:]) if b < a)
    down = sum(1 for a, b in zip(defined, defined[1:]) if b > a)
    if up == 0 and down == 0:
        direction = "constant"
    elif up == 0:
        direction = "non_decreasing"
    elif down == 0:
        direction = "non_increasing"
    else:
        direction = "mixed"
    return {
        "direction": direction,
        "decreasing_steps": up,
        "increasing_steps": down,
    }


def _sweep_summary(result: SweepResult) -> dict:
    points = list(result.spec.values)
    summary: dict[str, dict] = {}
    for metric in METRIC_NAMES:
        means = result.means(metric)
        summary[metric] = {
            "points": points,
            "means": means,
            "trend": trend_check(means),
        }
    return summary


def cmd_sweep(args: argparse.Namespace) -> int:
    spec = load_sweep(args.sweep)
    result = run_sweep(spec)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for metric in METRIC_NAMES:
        rows = [
            [metric, spec.values[point_idx], run_idx, _cell(value)]
            for point_idx in range(len(spec.values))
            for run_idx, value in enumerate(result.runs[metric][point_idx])
        ]
        _write_csv(out / f"{metric}.csv", ["metric", "point", "run", "value"], rows)
    with open(out / "summary.json", "w") as fh:
        json.dump(_sweep_summary(result), fh, indent=2, sort_keys=True)
        fh.write("\n")
    if not args.no_figures:
        from . import plots

        plots.save_sweep_curves(result, out / "figures")
        log.info("wrote figures to %s", out / "figures")
    print(f"sweep complete: {spec.variable} over {len(spec.values)} points, "
          f"{spec.runs_per_point} runs each")
    return EXIT_OK


def _overhead_rows(n: int, d: int) -> list[list]:
    rows = []
    for scheme in Scheme:
        storage = storage_overhead(n, scheme)
        comm = comm_energy(d, scheme)
        comp = comp_energy(scheme)
        rows.append([
            scheme.value,
            storage.total_bytes,
            exact_decimal(comm.exact),
            str(display_round(comm.published, 2)),
            exact_decimal(comp.exact_nj),
            str(display_round(comp.exact_nj, 0)),
        ])
    return rows


def _render_table(header: list[str], rows: list[list]) -> str:
    cells = [header] + [[str(c) for c in row] for row in rows]
    widths = [max(len(row[i]) for row in cells) for i in range(len(header))]
    lines = []
    for i, row in enumerate(cells):
        lines.append("  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip())
        if i == 0:
            lines.append("  ".join("-" * w for w in widths))
    return "\n".join(lines)


def cmd_overhead(args: argparse.Namespace) -> int:
    n, d = args.n, args.d
    print(f"Storage overhead, {n} non-root nodes (bytes)")
    storage_rows = []
    for scheme in Scheme:
        storage = storage_overhead(n, scheme)
        storage_rows.append([
            scheme.value, storage.sink_bytes, storage.per_node_bytes,
            storage.total_bytes,
        ])
    print(_render_table(["scheme", "sink", "per-node", "total"], storage_rows))

    print("\nPer-DAO computation (CPU cycles)")
    cycle_rows = []
    for scheme in Scheme:
        comp = comp_energy(scheme)
        cycle_rows.append([
            scheme.value, comp.sender_cycles, comp.sink_cycles, comp.total_cycles,
        ])
    print(_render_table(["scheme", "sender", "sink", "total"], cycle_rows))

    print(f"\nCombined comparison, n={n} nodes, d={d} hops")
    combined = _overhead_rows(n, d)
    combined_header = [
        "scheme", "storage(B)", "comm exact(mJ)", "comm(mJ)",
        "comp exact(nJ)", "comp(nJ)",
    ]
    print(_render_table(combined_header, combined))

    tol = None
    if args.m is not None:
        tol = tolerance(args.m, args.depth)
        print(f"\nDetectable attackers, complete {args.m}-ary tree of depth "
              f"{args.depth} ({tol.node_count} nodes)")
        print(_render_table(
            ["rule", "max attackers"],
            [["decreased rank", tol.decreased_max],
             ["increased rank", tol.increased_max]],
        ))

    if args.out is not None:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        _write_csv(out / "overhead.csv", combined_header, combined)
        if tol is not None:
            _write_csv(
                out / "tolerance.csv",
                ["m", "depth", "node_count", "decreased_max", "increased_max"],
                [[args.m, args.depth, tol.node_count,
                  tol.decreased_max, tol.increased_max]],
            )
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="leadersim",
        description="Simulate rank attacks on a sensor-network routing tree "
                    "and the sink-side detector that catches them.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one scenario file")
    p_run.add_argument("--scenario", required=True, help="scenario JSON file")
    p_run.add_argument("--seed", type=int, default=None,
                       help="override the scenario seed")
    p_run.add_argument("--out", default="out", help="output directory")
    p_run.add_argument("--no-figures", action="store_true",
                       help="skip figure rendering")
    p_run.set_defaults(func=cmd_run)

    p_sweep = sub.add_parser("sweep", help="average metrics over a parameter sweep")
    p_sweep.add_argument("--sweep", required=True, help="sweep JSON file")
    p_sweep.add_argument("--out", default="out", help="output directory")
    p_sweep.add_argument("--no-figures", action="store_true",
                         help="skip figure rendering")
    p_sweep.set_defaults(func=cmd_sweep)

    p_over = sub.add_parser("overhead", help="print the closed-form comparison")
    p_over.add_argument("--n", type=int, default=50, help="non-root node count")
    p_over.add_argument("--d", type=int, default=5, help="hop distance to sink")
    p_over.add_argument("--m", type=int, default=None,
                        help="tree fanout for the tolerance table")
    p_over.add_argument("-D", "--depth", type=int, default=None,
                        help="tree depth for the tolerance table")
    p_over.add_argument("--out", default=None,
                        help="also write the tables as CSV here")
    p_over.set_defaults(func=cmd_overhead)
    return parser


def main(argv: list[str] | None = None) -> int:
    level = os.environ.get("LEADERSIM_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "overhead" and (args.m is None) != (args.depth is None):
        parser.error("--m and --depth go together")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DisconnectedRoot as exc:
        print(f"error: no route to sink: {exc}", file=sys.stderr)
        return EXIT_DISCONNECTED


if __name__ == "__main__":
    sys.exit(main())
