"""Cross-product sweeps over strategies x postures x rates x seeds."""
from __future__ import annotations

import csv
import io
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .channel import POSTURES, ChannelTable
from .engine import run
from .errors import ConfigError
from .metrics import CSV_COLUMNS, MetricsReport
from .scenario import STRATEGIES, ScenarioConfig
from .topology import BodyTopology, load_topology

DEFAULT_RATES = (1, 2, 5, 10, 20, 50, 75, 100, 200, 500)
# generation window of one sweep run (a 1 s drain follows); keeps the full
# 9800-run default sweep desk-sized on a single core
DEFAULT_SWEEP_DURATION = 10.0
KEY_COLUMNS = CSV_COLUMNS[:4]
VALUE_COLUMNS = CSV_COLUMNS[4:]
SUMMARY_COLUMNS = ("strategy", "posture", "rate_pps", "runs") + tuple(
    f"mean_{c}" for c in VALUE_COLUMNS
)


def consecutive_seeds(base: int = 1, count: int = 10) -> tuple[int, ...]:
    return tuple(range(base, base + count))


@dataclass(frozen=True)
class SweepSpec:
    table: ChannelTable
    topology: BodyTopology = field(default_factory=load_topology)
    strategies: tuple = STRATEGIES
    postures: tuple = tuple(POSTURES)
    rates: tuple = DEFAULT_RATES
    seeds: tuple = consecutive_seeds()
    duration: float = DEFAULT_SWEEP_DURATION
    # extra ScenarioConfig keywords shared by every cell
    params: dict = field(default_factory=dict)
    out: Path | None = None
    summary: Path | None = None
    workers: int = 1
    table_path: Path | None = None

    def __post_init__(self):
        for name in ("strategies", "postures", "rates", "seeds"):
            if not getattr(self, name):
                raise ConfigError(f"sweep axis {name} is empty")
        if any(not r > 0 for r in self.rates):
            raise ConfigError(f"rates must be > 0, got {self.rates}")
        if not self.duration > 0:
            raise ConfigError(f"duration must be > 0, got {self.duration}")
        if len(set(self.seeds)) != len(self.seeds):
            raise ConfigError("seeds must be distinct")

    def cells(self):
        """(strategy, posture, rate, seed) in output order."""
        for strategy in self.strategies:
            for posture in self.postures:
                for rate in self.rates:
                    for seed in self.seeds:
                        yield strategy, posture, rate, seed

    def __len__(self):
        return len(self.strategies) * len(self.postures) * len(self.rates) * len(self.seeds)

    def scenario(self, strategy, posture, rate, seed) -> ScenarioConfig:
        try:
            return ScenarioConfig(
                self.table, self.topology, posture=posture, strategy=strategy,
                rate=rate, duration=self.duration, seed=seed, **self.params,
            )
        except ConfigError as exc:
            raise ConfigError(f"{_cell_name(strategy, posture, rate, seed)}: {exc}") from None


@dataclass
class SweepResult:
    rows: list[list[str]]
    summary: list[list[str]]

    def csv_text(self) -> str:
        return _to_csv(CSV_COLUMNS, self.rows)

    def summary_text(self) -> str:
        return _to_csv(SUMMARY_COLUMNS, self.summary)


def _cell_name(strategy, posture, rate, seed) -> str:
    return f"cell strategy={strategy} posture={posture} rate={rate} seed={seed}"


def _to_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def report_row(scenario: ScenarioConfig, report: MetricsReport) -> list[str]:
    return [str(v) for v in report.as_row(scenario.strategy, scenario.posture,
                                           scenario.rate, scenario.seed)]


def run_cell(scenario: ScenarioConfig) -> list[str]:
    try:
        report = run(scenario)
    except ConfigError as exc:
        raise ConfigError(
            f"{_cell_name(scenario.strategy, scenario.posture, scenario.rate, scenario.seed)}: {exc}"
        ) from None
    return report_row(scenario, report)


def summarize(rows) -> list[list[str]]:
    """Per-(strategy, posture, rate) means of every value column.

    Works from the formatted CSV fields, so re-reading a written CSV and
    calling this again reproduces the summary exactly.
    """
    groups: dict[tuple, list] = {}
    for row in rows:
        groups.setdefault(tuple(row[:3]), []).append(row)
    out = []
    for key, members in groups.items():
        means = []
        for i in range(4, len(CSV_COLUMNS)):
            vals = [float(r[i]) for r in members]
            means.append(f"{sum(vals) / len(vals):.6f}")
        out.append([*key, str(len(members)), *means])
    return out


def read_rows(source) -> list[list[str]]:
    """Rows (without header) of a sweep CSV given as a path or as text."""
    if isinstance(source, Path) or (isinstance(source, str) and "\n" not in source):
        text = Path(source).read_text(encoding="utf-8")
    else:
        text = source
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None or tuple(header) != CSV_COLUMNS:
        raise ConfigError("not a sweep CSV: unexpected header")
    return [row for row in reader if row]


def run_sweep(spec: SweepSpec, progress=None) -> SweepResult:
    """Run every cell; rows come back in ``spec.cells()`` order whatever the
    worker count, so the output bytes only depend on the spec."""
    scenarios = [spec.scenario(*cell) for cell in spec.cells()]
    workers = spec.workers if spec.workers and spec.workers > 0 else (os.cpu_count() or 1)
    rows: list[list[str]] = []
    if workers == 1:
        for i, sc in enumerate(scenarios):
            rows.append(run_cell(sc))
            if progress:
                progress(i + 1, len(scenarios))
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunk = max(1, len(scenarios) // (workers * 8))
            for i, row in enumerate(pool.map(run_cell, scenarios, chunksize=chunk)):
                rows.append(row)
                if progress:
                    progress(i + 1, len(scenarios))
    result = SweepResult(rows, summarize(rows))
    if spec.out is not None:
        Path(spec.out).write_text(result.csv_text(), encoding="utf-8")
    if spec.summary is not None:
        Path(spec.summary).write_text(result.summary_text(), encoding="utf-8")
    return result
