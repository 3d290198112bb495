"""Budget-constrained planner: nearest-location seeding, VM reduction and balancing."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .model import (
    EPS,
    Budget,
    Plan,
    PlanMetrics,
    Scenario,
    Task,
    VmInstance,
    plan_metrics,
    time_blocks,
)


class AssignmentError(RuntimeError):
    """No receiving VM can take ``task_id`` without exceeding one billing block."""

    def __init__(self, task_id: str) -> None:
        self.task_id = task_id
        super().__init__(f"task {task_id!r} does not fit on any receiving VM")


class Infeasibility(str, enum.Enum):
    NEAREST_OVERFLOW = "nearest_overflow"
    REDUCTION_FLOOR = "reduction_floor"


@dataclass(frozen=True)
class PlanOutcome:
    plan: Plan | None = None
    metrics: PlanMetrics | None = None
    reason: Infeasibility | None = None
    detail: str = ""

    @property
    def feasible(self) -> bool:
        return self.plan is not None


@dataclass
class PlannerState:
    plan: Plan
    ignored: frozenset[str] = frozenset()
    history: dict[str, set[str]] = field(default_factory=dict)


class _Layout:
    """Mutable working copy of a plan with cached per-VM execution times."""

    def __init__(self, scenario: Scenario, vms: Iterable[VmInstance] = ()) -> None:
        self.scenario = scenario
        self.cm = scenario.cost_model
        self.exec = scenario.exec_table
        self.vm: dict[str, VmInstance] = {}
        self.tasks: dict[str, list[str]] = {}
        self.load: dict[str, float] = {}
        for v in vms:
            self.register(v)

    def register(self, vm: VmInstance) -> None:
        if vm.id not in self.vm:
            self.vm[vm.id] = vm
            self.tasks[vm.id] = []
            self.load[vm.id] = 0.0

    @classmethod
    def from_plan(cls, plan: Plan, scenario: Scenario) -> _Layout:
        layout = cls(scenario, plan.vms)
        for vm, task_ids in plan.assignments.items():
            layout.tasks[vm.id] = list(task_ids)
            layout._refresh(vm.id)
        return layout

    def copy(self) -> _Layout:
        new = _Layout.__new__(_Layout)
        new.scenario, new.cm, new.exec = self.scenario, self.cm, self.exec
        new.vm = dict(self.vm)
        new.tasks = {k: list(v) for k, v in self.tasks.items()}
        new.load = dict(self.load)
        return new

    def _refresh(self, vm_id: str) -> None:
        ts = self.tasks[vm_id]
        if not ts:
            self.load[vm_id] = 0.0
            return
        row = self.exec
        loc = self.vm[vm_id].location
        self.load[vm_id] = self.cm.startup + sum(row[t][loc] for t in ts)

    def add(self, vm_id: str, task_id: str) -> None:
        self.tasks[vm_id].append(task_id)
        self._refresh(vm_id)

    def remove(self, vm_id: str, task_id: str) -> None:
        self.tasks[vm_id].remove(task_id)
        self._refresh(vm_id)

    def take_all(self, vm_id: str) -> list[str]:
        moved = self.tasks[vm_id]
        self.tasks[vm_id] = []
        self.load[vm_id] = 0.0
        return moved

    def active(self) -> list[str]:
        return sorted(v for v, ts in self.tasks.items() if ts)

    def blocks(self, vm_id: str) -> int:
        return time_blocks(self.load[vm_id], self.cm)

    def total_blocks(self) -> int:
        return sum(time_blocks(self.load[v], self.cm) for v, ts in self.tasks.items() if ts)

    def added_load(self, vm_id: str, task_id: str) -> float:
        base = self.load[vm_id] if self.tasks[vm_id] else self.cm.startup
        return base + self.exec[task_id][self.vm[vm_id].location]

    def to_plan(self) -> Plan:
        return Plan(
            {self.vm[v]: tuple(ts) for v, ts in self.tasks.items() if ts},
            self.scenario.fingerprint,
        )


def nearest_location(task_id: str, scenario: Scenario) -> str:
    row = scenario.exec_table[task_id]
    return min(scenario.location_ids, key=lambda loc: (row[loc], loc))


def nearest_plan(scenario: Scenario) -> dict[str, list[str]]:
    """Map each location id to the tasks whose execution time is minimal there.

    Only locations that receive at least one task appear. Ties go to the
    lexicographically smallest location id.
    """
    out: dict[str, list[str]] = {}
    for t in scenario.tasks:
        out.setdefault(nearest_location(t.id, scenario), []).append(t.id)
    return {loc: out[loc] for loc in sorted(out)}


def initial_vms(scenario: Scenario, budget: Budget) -> list[VmInstance]:
    return [
        VmInstance(f"{loc}-{i}", loc)
        for loc in scenario.location_ids
        for i in range(budget.tb_b)
    ]


def _assign(layout: _Layout, task_ids: Sequence[str], receivers: Sequence[str], capped: bool = True) -> None:
    scenario = layout.scenario
    cm = layout.cm
    limit = cm.block_seconds + EPS
    nearest_exec = {t: min(scenario.exec_table[t].values()) for t in task_ids}
    ordered = sorted(task_ids, key=lambda t: (-nearest_exec[t], t))
    by_id = scenario.task_by_id
    for t in ordered:
        src = by_id[t].source
        best = None
        best_key = None
        for v in receivers:
            if capped and layout.added_load(v, t) > limit:
                continue
            key = (cm.transfer[src][layout.vm[v].location], layout.load[v], v)
            if best_key is None or key < best_key:
                best, best_key = v, key
        if best is None:
            raise AssignmentError(t)
        layout.add(best, t)


def assign(
    tasks: Sequence[Task | str],
    vms: Sequence[VmInstance],
    current: Plan | None,
    scenario: Scenario,
    capped: bool = True,
) -> Plan:
    """Distribute ``tasks`` over ``vms`` on top of ``current``.

    Tasks are taken longest first; each goes to the candidate VM with the
    smallest transfer rate, then the smallest current load, then the smallest
    id. With ``capped`` a VM is a candidate only if it stays within one block.

    Raises
    ------
    AssignmentError
        If some task fits on no VM.
    """
    if not vms:
        raise ValueError("assign needs at least one receiving VM")
    layout = _Layout.from_plan(current, scenario) if current is not None else _Layout(scenario)
    for vm in vms:
        layout.register(vm)
    ids = [t.id if isinstance(t, Task) else t for t in tasks]
    _assign(layout, ids, [vm.id for vm in vms], capped)
    return layout.to_plan()


def _record(history: dict[str, set[str]], layout: _Layout, task_ids: Iterable[str] | None = None) -> None:
    wanted = None if task_ids is None else set(task_ids)
    for v, ts in layout.tasks.items():
        for t in ts:
            if wanted is None or t in wanted:
                history.setdefault(t, set()).add(v)


def _reduce(
    layout: _Layout,
    history: dict[str, set[str]],
    tb_b: int,
    is_local: bool,
    ignored: Iterable[str] = (),
) -> tuple[_Layout, set[str]]:
    # A move is attempted before the stop test, and the stop test is an exact
    # hit on the budget; a plan that starts under budget is therefore
    # consolidated as far as the one-block cap allows.
    ignored = set(ignored)
    blocks = layout.total_blocks()
    while True:
        active = layout.active()
        candidates = [v for v in active if v not in ignored]
        if not candidates:
            break
        victim = min(candidates, key=lambda v: (layout.load[v], v))
        victim_loc = layout.vm[victim].location
        receivers = [
            v for v in active
            if v != victim and (not is_local or layout.vm[v].location == victim_loc)
        ]
        trial = None
        if receivers:
            trial = layout.copy()
            moved = trial.take_all(victim)
            try:
                _assign(trial, moved, receivers)
            except AssignmentError:
                trial = None
        if trial is not None and trial.total_blocks() < blocks:
            layout, blocks = trial, trial.total_blocks()
            _record(history, layout, moved)
        else:
            ignored.add(victim)
        if blocks == tb_b:
            break
    return layout, ignored


def reduce(state: PlannerState, budget: Budget, is_local: bool, scenario: Scenario) -> PlannerState:
    """Empty low-load VMs into their peers.

    The victim is always the non-ignored VM with the smallest execution time;
    receivers are the other VMs at its location (``is_local``) or all other
    VMs. A move is kept only if the block total strictly drops, otherwise the
    victim joins the ignore set. Stops once the block total equals
    ``budget.tb_b`` or every VM is ignored. ``state.history`` is updated in
    place.
    """
    layout = _Layout.from_plan(state.plan, scenario)
    history = state.history
    layout, ignored = _reduce(layout, history, budget.tb_b, is_local, state.ignored)
    return PlannerState(layout.to_plan(), frozenset(ignored), history)


def _balance(layout: _Layout, history: dict[str, set[str]]) -> _Layout:
    cm = layout.cm
    exec_tab = layout.exec
    by_id = layout.scenario.task_by_id
    while True:
        active = layout.active()
        if len(active) < 2:
            return layout
        giver = min(active, key=lambda v: (-layout.load[v], v))
        g_loc = layout.vm[giver].location
        g_load = layout.load[giver]
        g_blocks = layout.blocks(giver)
        others = [v for v in active if v != giver]
        move = None
        for t in sorted(layout.tasks[giver], key=lambda t: (-exec_tab[t][g_loc], t)):
            src = by_id[t].source
            seen = history.get(t, ())
            g_after = g_load - exec_tab[t][g_loc] if len(layout.tasks[giver]) > 1 else 0.0
            for r in sorted(others, key=lambda v: (cm.transfer[src][layout.vm[v].location], v)):
                if r in seen:
                    continue
                r_after = layout.load[r] + exec_tab[t][layout.vm[r].location]
                if r_after >= g_load - EPS:
                    continue
                if time_blocks(r_after, cm) + time_blocks(g_after, cm) > layout.blocks(r) + g_blocks:
                    continue
                move = (t, r)
                break
            if move:
                break
        if move is None:
            return layout
        t, r = move
        layout.remove(giver, t)
        layout.add(r, t)
        history.setdefault(t, set()).add(r)


def balance(plan: Plan, history: Mapping[str, set[str]] | None, scenario: Scenario) -> Plan:
    """Move tasks off the slowest VM while that strictly lowers its finish time.

    A task is only ever sent to a VM it has never been assigned to, so the
    loop terminates. ``history`` (task id -> VM ids) is updated in place when
    it is a dict; pass ``None`` to start from the plan's current assignment.
    """
    layout = _Layout.from_plan(plan, scenario)
    if history is None:
        history = {}
        _record(history, layout)
    return _balance(layout, history).to_plan()


def find_plan(scenario: Scenario, budget: Budget) -> PlanOutcome:
    tb_b = budget.tb_b
    vms = initial_vms(scenario, budget)
    layout = _Layout(scenario, vms)
    for loc, task_ids in nearest_plan(scenario).items():
        local = [vm.id for vm in vms if vm.location == loc]
        try:
            _assign(layout, task_ids, local)
        except AssignmentError as exc:
            return PlanOutcome(
                reason=Infeasibility.NEAREST_OVERFLOW,
                detail=f"task {exc.task_id!r} does not fit at its nearest location {loc!r}",
            )
        loc_blocks = sum(layout.blocks(v) for v in local if layout.tasks[v])
        if loc_blocks > tb_b:
            return PlanOutcome(
                reason=Infeasibility.NEAREST_OVERFLOW,
                detail=f"location {loc!r} needs {loc_blocks} blocks > {tb_b}",
            )

    history: dict[str, set[str]] = {}
    _record(history, layout)

    layout, _ = _reduce(layout, history, tb_b, is_local=True)
    if layout.total_blocks() > tb_b:
        layout, _ = _reduce(layout, history, tb_b, is_local=False)
    blocks = layout.total_blocks()
    if blocks > tb_b:
        return PlanOutcome(
            reason=Infeasibility.REDUCTION_FLOOR,
            detail=f"reduction stalled at {blocks} blocks > {tb_b}",
        )

    plan = _balance(layout, history).to_plan()
    metrics = plan_metrics(plan, scenario)
    assert metrics.total_blocks <= tb_b
    return PlanOutcome(plan=plan, metrics=metrics)
