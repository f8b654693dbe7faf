"""Command line entry point: ``wbancast <run|sweep|ppvg-trees|etx-table|validate>``."""
from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path

from .channel import (
    DEFAULT_THRESHOLD,
    POSTURES,
    RadioBudget,
    connectivity_graph,
    link_success_probability,
    load_channel_table,
)
from .config import load_config, parse_postures, parse_strategies, resolve_table
from .errors import ConfigError
from .metrics import CSV_COLUMNS
from .ppvg import build_ppvg_tree, export_trees, ppvg_trees_all_postures
from .sweep import SweepSpec, report_row, run_sweep
from .engine import run

EXIT_OK, EXIT_CONFIG, EXIT_FAULT = 0, 2, 3


def _csv_list(kind):
    def parse(text):
        try:
            return tuple(kind(v) for v in text.split(",") if v.strip())
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad list {text!r}") from None
    return parse


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wbancast", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", type=Path, help="scenario INI file")
        p.add_argument("--table", help="channel CSV path or builtin:<name> (overrides the config)")
        p.add_argument("--out", type=Path, help="write CSV here instead of stdout")

    p = sub.add_parser("run", help="run one scenario and print its CSV row")
    common(p)
    p.add_argument("--strategy")
    p.add_argument("--posture", type=int)
    p.add_argument("--rate", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--duration", type=float)
    p.add_argument("--retransmission", choices=("auto", "baseline", "none", "noack", "ack"))

    p = sub.add_parser("sweep", help="run a strategies x postures x rates x seeds sweep")
    common(p)
    p.add_argument("--strategy", help="comma list or 'all'")
    p.add_argument("--posture", help="comma list or 'all'")
    p.add_argument("--rate", type=_csv_list(float), help="comma list of packets/s")
    p.add_argument("--seed", type=_csv_list(int), help="comma list of seeds")
    p.add_argument("--duration", type=float)
    p.add_argument("--retransmission", choices=("auto", "baseline", "none", "noack", "ack"))
    p.add_argument("--summary", type=Path, help="write per-cell means here")
    p.add_argument("--workers", type=int, help="worker processes (0 = one per CPU)")

    p = sub.add_parser("ppvg-trees", help="export the per-posture PPVG trees")
    common(p)

    p = sub.add_parser("etx-table", help="link probability and ETX per posture")
    common(p)
    p.add_argument("--posture", help="comma list or 'all' (default all)")

    p = sub.add_parser("validate", help="check a config and its channel table without running")
    common(p)
    return parser


def _spec(args) -> SweepSpec:
    if args.config is not None:
        spec = load_config(args.config)
    else:
        path = resolve_table(args.table or "builtin:synthetic")
        spec = SweepSpec(table=load_channel_table(path), table_path=path)
        args.table = None
    if args.table:
        path = resolve_table(args.table)
        spec = dataclasses.replace(
            spec, table=load_channel_table(path, spec.topology.node_ids), table_path=path
        )
    return spec


def _radio(spec):
    return spec.params.get("budget", RadioBudget()), spec.params.get("threshold", DEFAULT_THRESHOLD)


def _emit(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text, encoding="utf-8")


def cmd_run(args) -> int:
    spec = _spec(args)
    params = dict(spec.params)
    if args.retransmission:
        params["retransmission"] = args.retransmission
    spec = dataclasses.replace(
        spec,
        params=params,
        duration=args.duration if args.duration is not None else spec.duration,
    )
    strategy = args.strategy or spec.strategies[0]
    posture = args.posture if args.posture is not None else spec.postures[0]
    rate = args.rate if args.rate is not None else spec.rates[0]
    seed = args.seed if args.seed is not None else spec.seeds[0]
    scenario = spec.scenario(strategy, posture, rate, seed)
    row = report_row(scenario, run(scenario))
    _emit(",".join(CSV_COLUMNS) + "\n" + ",".join(row) + "\n", args.out)
    return EXIT_OK


def cmd_sweep(args) -> int:
    spec = _spec(args)
    changes = {}
    if args.strategy:
        changes["strategies"] = parse_strategies(args.strategy)
    if args.posture:
        changes["postures"] = parse_postures(args.posture)
    if args.rate:
        changes["rates"] = args.rate
    if args.seed:
        changes["seeds"] = args.seed
    if args.duration is not None:
        changes["duration"] = args.duration
    if args.retransmission:
        changes["params"] = {**spec.params, "retransmission": args.retransmission}
    if args.workers is not None:
        changes["workers"] = args.workers
    changes["out"] = args.out
    changes["summary"] = args.summary if args.summary else spec.summary
    spec = dataclasses.replace(spec, **changes)
    result = run_sweep(spec)
    if args.out is None:
        sys.stdout.write(result.csv_text())
    else:
        print(f"{len(result.rows)} rows -> {args.out}", file=sys.stderr)
    return EXIT_OK


def cmd_ppvg_trees(args) -> int:
    spec = _spec(args)
    budget, threshold = _radio(spec)
    trees = ppvg_trees_all_postures(
        spec.table, budget, threshold, spec.topology.sink, spec.topology.node_ids,
    )
    _emit(export_trees(trees), args.out)
    return EXIT_OK


def cmd_etx_table(args) -> int:
    spec = _spec(args)
    budget, threshold = _radio(spec)
    postures = parse_postures(args.posture) if args.posture else tuple(POSTURES)
    nodes = spec.topology.node_ids
    lines = ["posture,node_a,node_b,probability,etx,in_graph"]
    for posture in postures:
        graph = connectivity_graph(spec.table, posture, budget, threshold, nodes)
        for i, a in enumerate(nodes):
            for b in nodes[i + 1:]:
                p = link_success_probability(spec.table.lookup(posture, a, b), budget)
                etx = f"{1.0 / p:.6f}" if p > 0 else "inf"
                lines.append(f"{posture},{a},{b},{p:.6f},{etx},{int(graph.has_edge(a, b))}")
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def cmd_validate(args) -> int:
    spec = _spec(args)
    budget, threshold = _radio(spec)
    # every swept posture must let every node reach the sink
    for posture in spec.postures:
        graph = connectivity_graph(spec.table, posture, budget, threshold, spec.topology.node_ids)
        build_ppvg_tree(graph, spec.topology.sink)
    for strategy in spec.strategies:
        spec.scenario(strategy, spec.postures[0], spec.rates[0], spec.seeds[0])
    msg = (f"ok: table {spec.table_path}, {len(spec.topology.nodes)} nodes, "
           f"sink {spec.topology.sink}, {len(spec)} sweep runs\n")
    _emit(msg, args.out)
    return EXIT_OK


COMMANDS = {
    "run": cmd_run,
    "sweep": cmd_sweep,
    "ppvg-trees": cmd_ppvg_trees,
    "etx-table": cmd_etx_table,
    "validate": cmd_validate,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001 - any other failure is a runtime fault
        print(f"runtime fault: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAULT


if __name__ == "__main__":
    sys.exit(main())
