"""Budget sweeps comparing the heuristic planner with the two baselines."""

from __future__ import annotations

import csv
import io
import math
import statistics
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable, Sequence

from .baselines import centralised_plan, round_robin_plan
from .model import Budget, Plan, Scenario, plan_metrics
from .planner import find_plan
from .simulator import Perturbation, SimConfig, simulate

HEURISTIC = "heuristic"
CENTRALISED = "centralised"
ROUND_ROBIN = "round_robin"
APPROACHES = (HEURISTIC, CENTRALISED, ROUND_ROBIN)

CSV_HEADER = ("tb_b", "approach", "seed", "makespan_s", "blocks", "feasible")

DEFAULT_TB_VALUES = (4, 6, 8, 10, 12, 14, 16, 18, 20)
# Mild per-path network noise so repetitions differ; reassignment on.
DEFAULT_SWEEP_CONFIG = SimConfig(perturbation=Perturbation("pair", sigma=0.1))


@dataclass(frozen=True)
class SweepRow:
    tb_b: int
    approach: str
    seed: int
    makespan_s: float | None
    blocks: int | None
    feasible: bool


@dataclass(frozen=True)
class CellStats:
    mean: float
    std: float
    median: float
    n: int


def _row_key(row: SweepRow) -> tuple:
    return (row.tb_b, APPROACHES.index(row.approach), row.seed)


@dataclass(frozen=True)
class SweepReport:
    rows: tuple[SweepRow, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "rows", tuple(sorted(self.rows, key=_row_key)))

    @property
    def tb_values(self) -> list[int]:
        return sorted({r.tb_b for r in self.rows})

    def cell(self, tb_b: int, approach: str) -> list[SweepRow]:
        return [r for r in self.rows if r.tb_b == tb_b and r.approach == approach]

    def stats(self, tb_b: int, approach: str) -> CellStats | None:
        spans = [r.makespan_s for r in self.cell(tb_b, approach) if r.makespan_s is not None]
        if not spans:
            return None
        return CellStats(
            mean=statistics.fmean(spans),
            std=statistics.stdev(spans) if len(spans) > 1 else 0.0,
            median=statistics.median(spans),
            n=len(spans),
        )

    def feasible_at(self, tb_b: int, approach: str) -> bool:
        cell = self.cell(tb_b, approach)
        return bool(cell) and all(r.feasible for r in cell)

    def min_feasible_tb(self, approach: str) -> int | None:
        for tb in self.tb_values:
            if self.feasible_at(tb, approach):
                return tb
        return None

    def improvement(self, tb_b: int, baseline: str, stat: str = "mean") -> float | None:
        """Relative makespan reduction of the heuristic against ``baseline``."""
        h = self.stats(tb_b, HEURISTIC)
        b = self.stats(tb_b, baseline)
        if h is None or b is None:
            return None
        hv, bv = getattr(h, stat), getattr(b, stat)
        return (bv - hv) / bv if bv > 0 else None


def _baseline(approach: str, scenario: Scenario, n_vms: int) -> Plan:
    if approach == CENTRALISED:
        return centralised_plan(scenario, n_vms)
    return round_robin_plan(scenario, n_vms)


def run_sweep(
    scenario: Scenario,
    tb_values: Iterable[int],
    approaches: Sequence[str] = APPROACHES,
    sim_config: SimConfig | None = None,
    repetitions: int = 3,
) -> SweepReport:
    """Plan and simulate every (tb_b, approach, seed) cell.

    Seeds are ``sim_config.seed + r`` for ``r < repetitions``. Baselines get as
    many VMs as the heuristic used at that budget, or ``tb_b`` VMs when the
    heuristic is infeasible. A row is feasible when its plan bills at most
    ``tb_b`` blocks; ``blocks`` and ``makespan_s`` are simulated values.
    """
    unknown = set(approaches) - set(APPROACHES)
    if unknown:
        raise ValueError(f"unknown approaches {sorted(unknown)}")
    if repetitions < 1:
        raise ValueError("repetitions must be >= 1")
    sim_config = sim_config or DEFAULT_SWEEP_CONFIG
    seeds = [sim_config.seed + r for r in range(repetitions)]
    rows: list[SweepRow] = []
    for tb in sorted(set(tb_values)):
        outcome = find_plan(scenario, Budget(tb))
        n_vms = len(outcome.plan.vms) if outcome.feasible else tb
        for approach in approaches:
            if approach == HEURISTIC:
                plan = outcome.plan
                feasible = outcome.feasible
            else:
                plan = _baseline(approach, scenario, n_vms)
                feasible = plan_metrics(plan, scenario).total_blocks <= tb
            for seed in seeds:
                if plan is None:
                    rows.append(SweepRow(tb, approach, seed, None, None, False))
                    continue
                result = simulate(plan, scenario, replace(sim_config, seed=seed))
                rows.append(SweepRow(tb, approach, seed, result.makespan, result.total_blocks, feasible))
    return SweepReport(tuple(rows))


def format_csv(report: SweepReport) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for r in report.rows:
        writer.writerow((
            r.tb_b,
            r.approach,
            r.seed,
            "" if r.makespan_s is None else repr(r.makespan_s),
            "" if r.blocks is None else r.blocks,
            "true" if r.feasible else "false",
        ))
    return buf.getvalue()


def parse_csv(text: str) -> SweepReport:
    reader = csv.DictReader(io.StringIO(text))
    if tuple(reader.fieldnames or ()) != CSV_HEADER:
        raise ValueError(f"unexpected CSV header {reader.fieldnames}")
    rows = []
    for rec in reader:
        rows.append(SweepRow(
            tb_b=int(rec["tb_b"]),
            approach=rec["approach"],
            seed=int(rec["seed"]),
            makespan_s=float(rec["makespan_s"]) if rec["makespan_s"] else None,
            blocks=int(rec["blocks"]) if rec["blocks"] else None,
            feasible=rec["feasible"] == "true",
        ))
    return SweepReport(tuple(rows))


def _fmt(x: float | None, spec: str) -> str:
    return "-" if x is None or (isinstance(x, float) and math.isnan(x)) else format(x, spec)


def format_summary(report: SweepReport) -> str:
    approaches = [a for a in APPROACHES if any(r.approach == a for r in report.rows)]
    lines = ["makespan mean +/- std (s) and mean billed blocks per budget", ""]
    header = f"{'tb_b':>5}  " + "  ".join(f"{a:>24}" for a in approaches)
    if HEURISTIC in approaches:
        header += "".join(f"  {'vs ' + b:>16}" for b in approaches if b != HEURISTIC)
    lines.append(header)
    for tb in report.tb_values:
        cells = []
        for a in approaches:
            st = report.stats(tb, a)
            blocks = [r.blocks for r in report.cell(tb, a) if r.blocks is not None]
            mb = statistics.fmean(blocks) if blocks else None
            flag = "" if report.feasible_at(tb, a) else "!"
            text = f"{_fmt(st and st.mean, '.1f')}+/-{_fmt(st and st.std, '.1f')} [{_fmt(mb, '.1f')}]{flag}"
            cells.append(f"{text:>24}")
        line = f"{tb:>5}  " + "  ".join(cells)
        if HEURISTIC in approaches:
            for b in approaches:
                if b != HEURISTIC:
                    imp = report.improvement(tb, b)
                    text = "-" if imp is None else f"{100 * imp:.1f}%"
                    line += f"  {text:>16}"
        lines.append(line)
    lines.append("")
    lines.append("'!' marks budgets the approach did not satisfy")
    for a in approaches:
        lines.append(f"min feasible tb_b [{a}]: {report.min_feasible_tb(a) or 'none'}")
    return "\n".join(lines) + "\n"


def emit_report(report: SweepReport, path: str | Path, fmt: str = "csv") -> Path:
    path = Path(path)
    if fmt == "csv":
        path.write_text(format_csv(report))
    elif fmt == "text":
        path.write_text(format_summary(report))
    else:
        raise ValueError(f"unknown report format {fmt!r}")
    return path
