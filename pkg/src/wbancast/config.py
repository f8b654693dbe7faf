"""Scenario files: flat INI text with one section per concern.

    [topology]   sink, nodes (id:label pairs), sources, size
    [channel]    table (path or builtin:<name>), tx_power_dbm,
                 sensitivity_dbm, threshold
    [mac]        data_airtime, control_airtime, queue_capacity,
                 ack_timeout, ack_max_retries
    [strategy]   strategies (names or "all"), retransmission, ttl,
                 request_timeout, beacon_period, ctp_alpha, orw_probe_time,
                 gossip_initial_p
    [sweep]      postures, rates, duration, drain, seeds or base_seed +
                 seed_count, workers, out, summary

Relative paths resolve against the directory of the config file.  Every
key is optional; omitted keys take the library defaults.
"""
from __future__ import annotations

import configparser
import os
from pathlib import Path

from .channel import POSTURES, RadioBudget, builtin_table_path, load_channel_table
from .errors import ConfigError
from .scenario import STRATEGIES, canonical_strategy
from .sweep import DEFAULT_RATES, DEFAULT_SWEEP_DURATION, SweepSpec
from .topology import load_topology

SECTIONS = {
    "topology": {"sink", "nodes", "sources", "size"},
    "channel": {"table", "tx_power_dbm", "sensitivity_dbm", "threshold"},
    "mac": {"data_airtime", "control_airtime", "queue_capacity", "ack_timeout",
            "ack_max_retries"},
    "strategy": {"strategies", "retransmission", "ttl", "request_timeout",
                 "beacon_period", "ctp_alpha", "orw_probe_time", "gossip_initial_p"},
    "sweep": {"postures", "rates", "duration", "drain", "seeds", "base_seed",
              "seed_count", "workers", "out", "summary"},
}

# scenario keyword -> (section, key, parser)
_SCENARIO_KEYS = {
    "threshold": ("channel", "threshold", float),
    "data_airtime": ("mac", "data_airtime", float),
    "control_airtime": ("mac", "control_airtime", float),
    "queue_capacity": ("mac", "queue_capacity", int),
    "ack_timeout": ("mac", "ack_timeout", float),
    "ack_max_retries": ("mac", "ack_max_retries", int),
    "retransmission": ("strategy", "retransmission", str),
    "ttl": ("strategy", "ttl", int),
    "request_timeout": ("strategy", "request_timeout", float),
    "beacon_period": ("strategy", "beacon_period", float),
    "ctp_alpha": ("strategy", "ctp_alpha", float),
    "orw_probe_time": ("strategy", "orw_probe_time", float),
    "gossip_initial_p": ("strategy", "gossip_initial_p", float),
    "drain": ("sweep", "drain", float),
}


def _split(value: str) -> list[str]:
    return [v.strip() for v in value.replace("\n", ",").split(",") if v.strip()]


def _number(text: str, kind, where: str):
    try:
        return kind(text)
    except ValueError:
        raise ConfigError(f"{where}: cannot read {text!r} as {kind.__name__}") from None


def resolve_table(ref: str, base_dir: Path | None = None) -> Path:
    """``builtin:<name>`` or a filesystem path (relative to ``base_dir``)."""
    ref = ref.strip()
    if ref.startswith("builtin:"):
        path = builtin_table_path(ref.split(":", 1)[1].strip())
    else:
        path = Path(ref)
        if not path.is_absolute() and base_dir is not None:
            path = base_dir / path
    if not path.is_file():
        raise ConfigError(f"channel table {ref!r} not found ({path})")
    return path


def parse_topology(section) -> dict:
    cfg = {}
    if "sink" in section:
        cfg["sink"] = _number(section["sink"], int, "[topology] sink")
    if "size" in section:
        cfg["size"] = _number(section["size"], int, "[topology] size")
    if "nodes" in section:
        nodes = {}
        for item in _split(section["nodes"]):
            ident, _, label = item.partition(":")
            n = _number(ident.strip(), int, "[topology] nodes")
            if n in nodes:
                raise ConfigError(f"[topology] nodes: duplicate node id {n}")
            nodes[n] = label.strip() or f"node{n}"
        cfg["nodes"] = nodes
    if "sources" in section:
        cfg["sources"] = [_number(s, int, "[topology] sources") for s in _split(section["sources"])]
    return cfg


def parse_postures(value: str) -> tuple[int, ...]:
    if value.strip().lower() == "all":
        return tuple(POSTURES)
    out = tuple(_number(v, int, "[sweep] postures") for v in _split(value))
    for p in out:
        if p not in POSTURES:
            raise ConfigError(f"[sweep] postures: {p} is not one of 1..7")
    return out


def parse_strategies(value: str) -> tuple[str, ...]:
    if value.strip().lower() == "all":
        return STRATEGIES
    return tuple(canonical_strategy(v) for v in _split(value))


def load_config(path) -> SweepSpec:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file {str(path)!r} not found")
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read(path, encoding="utf-8")
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return spec_from_parser(parser, path.parent)


def load_config_string(text: str, base_dir=None) -> SweepSpec:
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from None
    return spec_from_parser(parser, Path(base_dir) if base_dir else None)


def spec_from_parser(parser: configparser.ConfigParser, base_dir: Path | None) -> SweepSpec:
    for name in parser.sections():
        if name not in SECTIONS:
            raise ConfigError(f"unknown section [{name}]")
        unknown = set(parser[name]) - SECTIONS[name]
        if unknown:
            raise ConfigError(f"[{name}]: unknown keys {', '.join(sorted(unknown))}")

    def section(name):
        return parser[name] if parser.has_section(name) else {}

    topology = load_topology(parse_topology(section("topology")))

    chan = section("channel")
    table_path = resolve_table(chan.get("table", "builtin:synthetic"), base_dir)
    table = load_channel_table(table_path, topology.node_ids)
    budget = RadioBudget(
        _number(chan.get("tx_power_dbm", "-60"), float, "[channel] tx_power_dbm"),
        _number(chan.get("sensitivity_dbm", "-100"), float, "[channel] sensitivity_dbm"),
    )

    params = {"budget": budget}
    for kw, (sec, key, kind) in _SCENARIO_KEYS.items():
        sect = section(sec)
        if key in sect:
            params[kw] = sect[key] if kind is str else _number(sect[key], kind, f"[{sec}] {key}")

    strat = section("strategy")
    strategies = parse_strategies(strat.get("strategies", "all"))

    sw = section("sweep")
    postures = parse_postures(sw.get("postures", "all"))
    if "rates" in sw:
        rates = tuple(_number(v, float, "[sweep] rates") for v in _split(sw["rates"]))
    else:
        rates = DEFAULT_RATES
    duration = _number(sw.get("duration", str(DEFAULT_SWEEP_DURATION)), float, "[sweep] duration")
    if "seeds" in sw:
        seeds = tuple(_number(v, int, "[sweep] seeds") for v in _split(sw["seeds"]))
    else:
        base = _number(sw.get("base_seed", "1"), int, "[sweep] base_seed")
        count = _number(sw.get("seed_count", "10"), int, "[sweep] seed_count")
        if count < 1:
            raise ConfigError("[sweep] seed_count must be >= 1")
        seeds = tuple(range(base, base + count))
    workers = _number(sw.get("workers", "1"), int, "[sweep] workers")

    def out_path(key):
        if key not in sw:
            return None
        p = Path(sw[key])
        return p if p.is_absolute() or base_dir is None else base_dir / p

    return SweepSpec(
        table=table,
        topology=topology,
        strategies=strategies,
        postures=postures,
        rates=rates,
        seeds=seeds,
        duration=duration,
        params=params,
        out=out_path("out"),
        summary=out_path("summary"),
        workers=workers if workers > 0 else (os.cpu_count() or 1),
        table_path=table_path,
    )
