"""Domain types and closed-form cost equations for bag-of-distributed-tasks planning.

Every duration is a float number of seconds. Task sizes are abstract data units;
transfer and compute costs are rates in seconds per unit.
"""

from __future__ import annotations

import hashlib
import json
import math
from collections import Counter
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Sequence

EPS = 1e-9
"""Comparison tolerance (seconds) for boundary and equality tests."""


class ModelError(ValueError):
    """Raised when a scenario or cost model is malformed or incomplete."""


class InfeasibleBudgetError(ValueError):
    """Raised when a budget cannot buy even a single billing block."""


class PlanValidationError(ValueError):
    def __init__(self, violations: PlanViolations) -> None:
        self.violations = violations
        super().__init__(f"invalid plan: {violations.describe()}")


@dataclass(frozen=True)
class Location:
    id: str
    label: str = ""


@dataclass(frozen=True)
class Task:
    id: str
    size: float
    source: str

    def __post_init__(self) -> None:
        if not self.size > 0:
            raise ModelError(f"task {self.id!r}: size must be > 0, got {self.size!r}")
        object.__setattr__(self, "size", float(self.size))


@dataclass(frozen=True, eq=True)
class CostModel:
    """Per-unit transfer rates (source x location), per-unit compute rate and billing terms."""

    transfer: Mapping[str, Mapping[str, float]]
    comp: float
    startup: float = 0.0
    block_seconds: float = 3600.0
    block_price: float = 1.0

    def __post_init__(self) -> None:
        frozen = {src: {loc: float(rate) for loc, rate in row.items()} for src, row in self.transfer.items()}
        object.__setattr__(self, "transfer", frozen)
        for src, row in frozen.items():
            for loc, rate in row.items():
                if not rate >= 0:
                    raise ModelError(f"transfer[{src!r}][{loc!r}] must be >= 0, got {rate!r}")
        if not self.comp >= 0:
            raise ModelError(f"comp must be >= 0, got {self.comp!r}")
        if not self.startup >= 0:
            raise ModelError(f"startup must be >= 0, got {self.startup!r}")
        if not self.block_seconds > 0:
            raise ModelError(f"block_seconds must be > 0, got {self.block_seconds!r}")
        if not self.block_price > 0:
            raise ModelError(f"block_price must be > 0, got {self.block_price!r}")
        for name in ("comp", "startup", "block_seconds", "block_price"):
            object.__setattr__(self, name, float(getattr(self, name)))

    def trans(self, source: str, location: str) -> float:
        try:
            return self.transfer[source][location]
        except KeyError:
            raise ModelError(f"no transfer rate for source {source!r} -> location {location!r}") from None


@dataclass(frozen=True)
class VmInstance:
    id: str
    location: str


@dataclass(frozen=True)
class Budget:
    tb_b: int

    def __post_init__(self) -> None:
        if isinstance(self.tb_b, bool) or int(self.tb_b) != self.tb_b or self.tb_b < 1:
            raise InfeasibleBudgetError(f"tb_b must be a positive integer, got {self.tb_b!r}")
        object.__setattr__(self, "tb_b", int(self.tb_b))


@dataclass(frozen=True)
class Scenario:
    locations: tuple[Location, ...]
    tasks: tuple[Task, ...]
    cost_model: CostModel
    sources: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "locations", tuple(self.locations))
        object.__setattr__(self, "tasks", tuple(self.tasks))
        if not self.sources:
            object.__setattr__(self, "sources", tuple(sorted({t.source for t in self.tasks})))
        else:
            object.__setattr__(self, "sources", tuple(self.sources))
        self._check()

    def _check(self) -> None:
        if not self.locations:
            raise ModelError("scenario has no locations")
        if not self.tasks:
            raise ModelError("scenario has no tasks")
        _require_unique("location", [loc.id for loc in self.locations])
        _require_unique("task", [t.id for t in self.tasks])
        _require_unique("source", list(self.sources))
        known = set(self.sources)
        for t in self.tasks:
            if t.source not in known:
                raise ModelError(f"task {t.id!r} references unknown source {t.source!r}")
        for src in self.sources:
            row = self.cost_model.transfer.get(src)
            if row is None:
                raise ModelError(f"transfer matrix has no row for source {src!r}")
            for loc in self.locations:
                if loc.id not in row:
                    raise ModelError(f"transfer matrix missing entry [{src!r}][{loc.id!r}]")

    @cached_property
    def location_ids(self) -> tuple[str, ...]:
        return tuple(loc.id for loc in self.locations)

    @cached_property
    def task_by_id(self) -> dict[str, Task]:
        return {t.id: t for t in self.tasks}

    @cached_property
    def exec_table(self) -> dict[str, dict[str, float]]:
        """task id -> location id -> execution seconds (without start-up)."""
        return {
            t.id: {loc: exec_time(t, loc, self.cost_model) for loc in self.location_ids}
            for t in self.tasks
        }

    @cached_property
    def fingerprint(self) -> str:
        payload = json.dumps(scenario_to_dict(self), sort_keys=True).encode()
        return hashlib.sha256(payload).hexdigest()[:16]


def _require_unique(kind: str, ids: Sequence[str]) -> None:
    dupes = sorted(k for k, n in Counter(ids).items() if n > 1)
    if dupes:
        raise ModelError(f"duplicate {kind} ids: {dupes}")


@dataclass(frozen=True)
class Plan:
    """Assignment of ordered task-id lists to VM instances.

    VMs without tasks are never represented. Entries are kept sorted by VM id so
    equal plans compare and serialise identically.
    """

    assignments: Mapping[VmInstance, tuple[str, ...]]
    scenario_ref: str | None = None

    def __post_init__(self) -> None:
        normalised = {}
        for vm in sorted(self.assignments, key=lambda v: v.id):
            tasks = tuple(self.assignments[vm])
            if not tasks:
                raise ModelError(f"VM {vm.id!r} has an empty task list")
            normalised[vm] = tasks
        _require_unique("VM", [vm.id for vm in normalised])
        object.__setattr__(self, "assignments", normalised)

    @property
    def vms(self) -> tuple[VmInstance, ...]:
        return tuple(self.assignments)

    def tasks_of(self, vm_id: str) -> tuple[str, ...]:
        for vm, tasks in self.assignments.items():
            if vm.id == vm_id:
                return tasks
        raise KeyError(vm_id)

    def task_to_vm(self) -> dict[str, str]:
        return {t: vm.id for vm, tasks in self.assignments.items() for t in tasks}

    @classmethod
    def from_ids(
        cls,
        assignments: Mapping[str, Iterable[str]],
        locations: Mapping[str, str],
        scenario_ref: str | None = None,
    ) -> Plan:
        """Build from ``{vm_id: task ids}`` and ``{vm_id: location id}``."""
        return cls(
            {VmInstance(vm_id, locations[vm_id]): tuple(ts) for vm_id, ts in assignments.items()},
            scenario_ref,
        )


@dataclass(frozen=True)
class PlanViolations:
    missing: tuple[str, ...] = ()
    duplicate: tuple[str, ...] = ()
    unknown_tasks: tuple[str, ...] = ()
    unknown_locations: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return not (self.missing or self.duplicate or self.unknown_tasks or self.unknown_locations)

    def describe(self) -> str:
        parts = [
            f"{name}={list(vals)}"
            for name, vals in (
                ("missing", self.missing),
                ("duplicate", self.duplicate),
                ("unknown_tasks", self.unknown_tasks),
                ("unknown_locations", self.unknown_locations),
            )
            if vals
        ]
        return ", ".join(parts) or "ok"


@dataclass(frozen=True)
class VmMetrics:
    vm: VmInstance
    exec_seconds: float
    blocks: int


@dataclass(frozen=True)
class PlanMetrics:
    makespan: float
    total_blocks: int
    per_vm: tuple[VmMetrics, ...] = field(default=())


def _loc_id(location: Location | str) -> str:
    return location.id if isinstance(location, Location) else location


def exec_time(task: Task, location: Location | str, cm: CostModel) -> float:
    """Seconds to fetch and process ``task`` at ``location``."""
    return (cm.trans(task.source, _loc_id(location)) + cm.comp) * task.size


def vm_exec_time(tasks: Sequence[Task], vm: VmInstance, cm: CostModel) -> float:
    """Start-up plus the summed task times; an unused VM costs nothing."""
    if not tasks:
        return 0.0
    return cm.startup + sum(exec_time(t, vm.location, cm) for t in tasks)


def time_blocks(exec_seconds: float, cm: CostModel) -> int:
    """Billed blocks: ceiling of ``exec_seconds / block_seconds`` with an EPS grace."""
    if exec_seconds < -EPS:
        raise ValueError(f"exec_seconds must be >= 0, got {exec_seconds!r}")
    if exec_seconds <= 0:
        return 0
    n = math.ceil(exec_seconds / cm.block_seconds)
    if n > 1 and (n - 1) * cm.block_seconds >= exec_seconds - EPS:
        n -= 1
    return n


def validate_plan(plan: Plan, scenario: Scenario) -> PlanViolations:
    counts = Counter(t for tasks in plan.assignments.values() for t in tasks)
    known = scenario.task_by_id
    locs = set(scenario.location_ids)
    return PlanViolations(
        missing=tuple(t.id for t in scenario.tasks if t.id not in counts),
        duplicate=tuple(sorted(t for t, n in counts.items() if n > 1)),
        unknown_tasks=tuple(sorted(t for t in counts if t not in known)),
        unknown_locations=tuple(sorted({vm.location for vm in plan.vms if vm.location not in locs})),
    )


def plan_metrics(plan: Plan, scenario: Scenario) -> PlanMetrics:
    violations = validate_plan(plan, scenario)
    if not violations.ok:
        raise PlanValidationError(violations)
    cm = scenario.cost_model
    by_id = scenario.task_by_id
    per_vm = []
    for vm, task_ids in plan.assignments.items():
        seconds = vm_exec_time([by_id[t] for t in task_ids], vm, cm)
        per_vm.append(VmMetrics(vm, seconds, time_blocks(seconds, cm)))
    return PlanMetrics(
        makespan=max((m.exec_seconds for m in per_vm), default=0.0),
        total_blocks=sum(m.blocks for m in per_vm),
        per_vm=tuple(per_vm),
    )


def budget_to_blocks(money: float, cm: CostModel) -> Budget:
    if not money > 0:
        raise InfeasibleBudgetError(f"budget must be > 0, got {money!r}")
    blocks = math.floor(money / cm.block_price + EPS)
    if blocks < 1:
        raise InfeasibleBudgetError(
            f"budget {money!r} is below the price of one block ({cm.block_price!r})"
        )
    return Budget(blocks)


# -- JSON -------------------------------------------------------------------

_TOP_KEYS = {"locations", "sources", "tasks", "cost_model"}
_CM_KEYS = {"comp", "startup", "block_seconds", "block_price", "transfer"}


def _reject_unknown(obj: Mapping, allowed: set[str], where: str, required: set[str] | None = None) -> None:
    if not isinstance(obj, Mapping):
        raise ModelError(f"{where}: expected an object, got {type(obj).__name__}")
    extra = sorted(set(obj) - allowed)
    if extra:
        raise ModelError(f"{where}: unknown keys {extra}")
    missing = sorted((required if required is not None else allowed) - set(obj))
    if missing:
        raise ModelError(f"{where}: missing keys {missing}")


def scenario_from_dict(doc: Mapping) -> Scenario:
    _reject_unknown(doc, _TOP_KEYS, "scenario")
    locations = []
    for i, item in enumerate(doc["locations"]):
        _reject_unknown(item, {"id", "label"}, f"locations[{i}]", {"id"})
        locations.append(Location(str(item["id"]), str(item.get("label", ""))))
    tasks = []
    for i, item in enumerate(doc["tasks"]):
        _reject_unknown(item, {"id", "size", "source"}, f"tasks[{i}]")
        tasks.append(Task(str(item["id"]), float(item["size"]), str(item["source"])))
    cm_doc = doc["cost_model"]
    _reject_unknown(cm_doc, _CM_KEYS, "cost_model", {"comp", "transfer"})
    transfer = {
        str(src): {str(loc): float(rate) for loc, rate in row.items()}
        for src, row in cm_doc["transfer"].items()
    }
    cm = CostModel(
        transfer=transfer,
        comp=float(cm_doc["comp"]),
        startup=float(cm_doc.get("startup", 0.0)),
        block_seconds=float(cm_doc.get("block_seconds", 3600.0)),
        block_price=float(cm_doc.get("block_price", 1.0)),
    )
    sources = tuple(str(s) for s in doc["sources"])
    return Scenario(tuple(locations), tuple(tasks), cm, sources)


def scenario_to_dict(scenario: Scenario) -> dict:
    cm = scenario.cost_model
    return {
        "locations": [{"id": loc.id, "label": loc.label} for loc in scenario.locations],
        "sources": list(scenario.sources),
        "tasks": [{"id": t.id, "size": t.size, "source": t.source} for t in scenario.tasks],
        "cost_model": {
            "comp": cm.comp,
            "startup": cm.startup,
            "block_seconds": cm.block_seconds,
            "block_price": cm.block_price,
            "transfer": {src: dict(cm.transfer[src]) for src in scenario.sources},
        },
    }


def dumps_scenario(scenario: Scenario) -> str:
    return json.dumps(scenario_to_dict(scenario), indent=2) + "\n"


def loads_scenario(text: str) -> Scenario:
    return scenario_from_dict(json.loads(text))
