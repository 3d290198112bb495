"""Deterministic discrete-event execution of a plan, with dynamic reassignment.

One virtual clock drives every VM. Events are ordered by (time, kind priority,
VM id, sequence) so the log is a total order and independent of wall-clock
effects. Reassignment estimates use the static cost model; actual task
durations use the perturbed transfer rates.
"""

from __future__ import annotations

import csv
import heapq
import io
import random
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .model import EPS, ModelError, Plan, PlanValidationError, Scenario, VmInstance, time_blocks, validate_plan

PRIO_FINISH = 0
PRIO_REASSIGN = 1
PRIO_TIMEOUT = 2

BOOTING = "booting"
RUNNING = "running"
FINISHED = "finished"
TERMINATED = "terminated"

EVENT_COLUMNS = ("time_s", "vm_id", "event", "task_id", "detail")


@dataclass(frozen=True)
class Perturbation:
    """How actual transfer rates deviate from the cost model.

    ``kind`` is ``"none"``, ``"pair"`` (one multiplier per source/location pair,
    drawn once per run from ``distribution``) or ``"vm"`` (fixed ``slowdown``
    per VM id). A ``slowdown`` map may also accompany ``"pair"`` noise.
    """

    kind: str = "none"
    distribution: str = "lognormal"
    sigma: float = 0.2
    low: float = 0.8
    high: float = 1.2
    slowdown: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "slowdown", dict(self.slowdown))
        if self.kind not in ("none", "pair", "vm"):
            raise ModelError(f"unknown perturbation kind {self.kind!r}")
        if self.kind == "pair":
            if self.distribution == "lognormal":
                if not self.sigma >= 0:
                    raise ModelError(f"lognormal sigma must be >= 0, got {self.sigma!r}")
            elif self.distribution == "uniform":
                if not 0 < self.low <= self.high:
                    raise ModelError(f"uniform bounds need 0 < low <= high, got {self.low!r}, {self.high!r}")
            else:
                raise ModelError(f"unknown distribution {self.distribution!r}")
        if self.kind == "none" and self.slowdown:
            raise ModelError("slowdown map given with perturbation kind 'none'")
        for vm_id, factor in self.slowdown.items():
            if not factor > 0:
                raise ModelError(f"slowdown for {vm_id!r} must be > 0, got {factor!r}")


@dataclass(frozen=True)
class SimConfig:
    seed: int = 0
    perturbation: Perturbation = field(default_factory=Perturbation)
    thr1: float = 60.0
    thr2: int = 2
    terminate_time: float = 30.0
    reassignment_enabled: bool = True

    def __post_init__(self) -> None:
        for name in ("thr1", "thr2", "terminate_time"):
            if not getattr(self, name) >= 0:
                raise ModelError(f"{name} must be >= 0, got {getattr(self, name)!r}")


def sample_perturbation(source: str, location: str, config: SimConfig, rng: random.Random) -> float:
    """Draw the transfer multiplier for one (source, location) pair."""
    p = config.perturbation
    if p.kind != "pair":
        return 1.0
    if p.distribution == "lognormal":
        return rng.lognormvariate(0.0, p.sigma)
    return rng.uniform(p.low, p.high)


def pair_multipliers(scenario: Scenario, config: SimConfig) -> dict[tuple[str, str], float]:
    rng = random.Random(config.seed)
    return {
        (src, loc): sample_perturbation(src, loc, config, rng)
        for src in sorted(scenario.sources)
        for loc in sorted(scenario.location_ids)
    }


@dataclass
class VmRuntime:
    vm: VmInstance
    started_at: float
    ready_at: float
    queue: list[str]
    status: str = BOOTING
    current: str | None = None
    current_started: float = 0.0
    deadline: float | None = None
    executed: list[str] = field(default_factory=list)
    ended_at: float | None = None
    timed_out: bool = False
    token: int = 0

    @property
    def id(self) -> str:
        return self.vm.id

    @property
    def active(self) -> bool:
        return self.status in (BOOTING, RUNNING)

    def rt(self, now: float) -> float:
        return now - self.started_at

    def estimate(self, now: float, scenario: Scenario) -> float:
        """Remaining seconds according to the static cost model."""
        ex = scenario.exec_table
        loc = self.vm.location
        left = sum(ex[t][loc] for t in self.queue)
        if self.status == BOOTING:
            left += max(0.0, self.ready_at - now)
        elif self.current is not None:
            left += max(0.0, ex[self.current][loc] - (now - self.current_started))
        return left


@dataclass(frozen=True)
class Reassignment:
    receiver: str
    donor: str | None = None
    tasks: tuple[str, ...] = ()
    deadline: float | None = None
    reason: str = ""

    @property
    def moved(self) -> bool:
        return bool(self.tasks)


def reassign(
    finished: VmRuntime,
    fleet: Sequence[VmRuntime],
    config: SimConfig,
    scenario: Scenario,
    now: float,
) -> Reassignment:
    """Hand part of the busiest VM's queue to a VM that has just gone idle.

    On success the donor's and receiver's queues are updated in place and the
    receiver gets a deadline inside its current paid block.
    """
    cm = scenario.cost_model
    rt = finished.rt(now)
    paid_until = max(1, time_blocks(rt, cm)) * cm.block_seconds
    slack = paid_until - rt
    if slack < config.terminate_time:
        return Reassignment(finished.id, reason="insufficient_time")
    el = slack - config.terminate_time

    estimates = {v.id: v.estimate(now, scenario) for v in fleet if v is not finished and v.active}
    eligible = [
        v for v in fleet
        if v.id in estimates and estimates[v.id] >= config.thr1 and len(v.queue) >= config.thr2
    ]
    if not eligible:
        return Reassignment(finished.id, reason="no_donor")
    donor = min(eligible, key=lambda v: (-estimates[v.id], v.id))
    e_donor = estimates[donor.id]

    loc = finished.vm.location
    ex = scenario.exec_table
    by_id = scenario.task_by_id
    ordered = sorted(donor.queue, key=lambda t: (cm.transfer[by_id[t].source][loc], t))
    cap = (e_donor - config.thr1) / 2
    moved: list[str] = []
    acc = 0.0
    for t in ordered:
        nxt = acc + ex[t][loc]
        if nxt >= cap or nxt > el:
            break
        moved.append(t)
        acc = nxt
    if not moved:
        return Reassignment(finished.id, donor=donor.id, reason="nothing_movable")

    taken = set(moved)
    donor.queue = [t for t in donor.queue if t not in taken]
    finished.queue = moved
    finished.deadline = now + el
    finished.status = RUNNING
    return Reassignment(finished.id, donor.id, tuple(moved), finished.deadline, "moved")


def enforce_timeout(
    vm: VmRuntime, fleet: Sequence[VmRuntime], scenario: Scenario, now: float
) -> tuple[list[str], VmRuntime | None]:
    """Terminate ``vm`` at its deadline and hand its leftovers to the least-loaded VM.

    Returns the leftover task ids (in-flight first) and the receiving runtime,
    or ``None`` when no other VM is still running.
    """
    leftover = ([vm.current] if vm.current is not None else []) + list(vm.queue)
    vm.current = None
    vm.queue = []
    vm.status = TERMINATED
    vm.timed_out = True
    vm.ended_at = now
    vm.token += 1
    if not leftover:
        return [], None
    others = [v for v in fleet if v is not vm and v.active]
    if not others:
        return leftover, None
    receiver = min(others, key=lambda v: (v.estimate(now, scenario), v.id))
    receiver.queue.extend(leftover)
    return leftover, receiver


@dataclass(frozen=True)
class SimEvent:
    seq: int
    time_s: float
    vm_id: str
    event: str
    task_id: str = ""
    detail: str = ""


@dataclass(frozen=True)
class VmTimeline:
    vm_id: str
    location: str
    started_at: float
    finished_at: float
    blocks: int
    executed: tuple[str, ...]
    timed_out: bool = False


@dataclass(frozen=True)
class SimResult:
    per_vm: tuple[VmTimeline, ...]
    makespan: float
    total_blocks: int
    events: tuple[SimEvent, ...]

    def vm(self, vm_id: str) -> VmTimeline:
        for tl in self.per_vm:
            if tl.vm_id == vm_id:
                return tl
        raise KeyError(vm_id)

    def events_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(EVENT_COLUMNS)
        for ev in self.events:
            writer.writerow((repr(ev.time_s), ev.vm_id, ev.event, ev.task_id, ev.detail))
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "makespan": self.makespan,
            "total_blocks": self.total_blocks,
            "vms": {
                tl.vm_id: {
                    "location": tl.location,
                    "started_at": tl.started_at,
                    "finished_at": tl.finished_at,
                    "blocks": tl.blocks,
                    "timed_out": tl.timed_out,
                    "executed": list(tl.executed),
                }
                for tl in self.per_vm
            },
        }


class _Simulation:
    def __init__(self, plan: Plan, scenario: Scenario, config: SimConfig) -> None:
        self.scenario = scenario
        self.config = config
        self.cm = scenario.cost_model
        self.pair = pair_multipliers(scenario, config) if config.perturbation.kind == "pair" else {}
        self.heap: list = []
        self.seq = 0
        self.events: list[SimEvent] = []
        self.fleet: list[VmRuntime] = []
        self.by_id: dict[str, VmRuntime] = {}
        self.respawns = 0
        for vm, tasks in plan.assignments.items():
            self._launch(vm, list(tasks), 0.0)

    def _launch(self, vm: VmInstance, tasks: list[str], now: float) -> VmRuntime:
        rt = VmRuntime(vm, started_at=now, ready_at=now + self.cm.startup, queue=tasks)
        self.fleet.append(rt)
        self.by_id[vm.id] = rt
        self._log(now, vm.id, "boot")
        self._push(rt.ready_at, PRIO_FINISH, rt, "ready")
        return rt

    def _push(self, when: float, prio: int, rt: VmRuntime, kind: str) -> None:
        self.seq += 1
        heapq.heappush(self.heap, (when, prio, rt.id, self.seq, kind, rt.token))

    def _log(self, now: float, vm_id: str, event: str, task_id: str = "", detail: str = "") -> None:
        self.events.append(SimEvent(len(self.events), now, vm_id, event, task_id, detail))

    def duration(self, rt: VmRuntime, task_id: str) -> float:
        task = self.scenario.task_by_id[task_id]
        loc = rt.vm.location
        mult = self.pair.get((task.source, loc), 1.0) * self.config.perturbation.slowdown.get(rt.id, 1.0)
        return (self.cm.transfer[task.source][loc] * mult + self.cm.comp) * task.size

    def _start_next(self, rt: VmRuntime, now: float) -> None:
        if rt.queue:
            t = rt.queue.pop(0)
            rt.current = t
            rt.current_started = now
            rt.status = RUNNING
            self._log(now, rt.id, "task_start", t)
            self._push(now + self.duration(rt, t), PRIO_FINISH, rt, "task_end")
            return
        rt.status = FINISHED
        rt.ended_at = now
        self._log(now, rt.id, "finish")
        if self.config.reassignment_enabled:
            self._push(now, PRIO_REASSIGN, rt, "reassign")
        else:
            self._terminate(rt, now, "idle")

    def _terminate(self, rt: VmRuntime, now: float, why: str) -> None:
        rt.status = TERMINATED
        rt.ended_at = now
        self._log(now, rt.id, "terminate", detail=why)

    def _on_reassign(self, rt: VmRuntime, now: float) -> None:
        if rt.status != FINISHED:
            return
        decision = reassign(rt, self.fleet, self.config, self.scenario, now)
        if not decision.moved:
            self._log(now, rt.id, "reassign_noop", detail=decision.reason)
            self._terminate(rt, now, "idle")
            return
        self._log(
            now, rt.id, "reassign",
            detail=f"donor={decision.donor};tasks={' '.join(decision.tasks)};deadline={decision.deadline!r}",
        )
        self._push(decision.deadline, PRIO_TIMEOUT, rt, "timeout")
        self._start_next(rt, now)

    def _on_timeout(self, rt: VmRuntime, now: float) -> None:
        if not rt.active or rt.deadline is None or abs(rt.deadline - now) > EPS:
            return
        leftover, receiver = enforce_timeout(rt, self.fleet, self.scenario, now)
        self._log(now, rt.id, "timeout", detail=f"leftover={len(leftover)}")
        if not leftover:
            return
        if receiver is None:
            self.respawns += 1
            vm = VmInstance(f"{rt.id}~r{self.respawns}", rt.vm.location)
            self._log(now, vm.id, "respawn", detail=f"for={rt.id}")
            receiver = self._launch(vm, list(leftover), now)
        for t in leftover:
            self._log(now, receiver.id, "migrate", t, f"from={rt.id}")

    def run(self) -> SimResult:
        while self.heap:
            now, _prio, vm_id, _seq, kind, token = heapq.heappop(self.heap)
            rt = self.by_id[vm_id]
            if token != rt.token:
                continue
            if kind == "ready":
                self._start_next(rt, now)
            elif kind == "task_end":
                t = rt.current
                rt.executed.append(t)
                rt.current = None
                self._log(now, rt.id, "task_end", t)
                self._start_next(rt, now)
            elif kind == "reassign":
                self._on_reassign(rt, now)
            elif kind == "timeout":
                self._on_timeout(rt, now)
        per_vm = []
        for rt in sorted(self.fleet, key=lambda r: r.id):
            end = rt.ended_at if rt.ended_at is not None else rt.started_at
            per_vm.append(VmTimeline(
                rt.id, rt.vm.location, rt.started_at, end,
                time_blocks(end - rt.started_at, self.cm), tuple(rt.executed), rt.timed_out,
            ))
        return SimResult(
            per_vm=tuple(per_vm),
            makespan=max((tl.finished_at for tl in per_vm), default=0.0),
            total_blocks=sum(tl.blocks for tl in per_vm),
            events=tuple(self.events),
        )


def simulate(plan: Plan, scenario: Scenario, config: SimConfig | None = None) -> SimResult:
    config = config or SimConfig()
    violations = validate_plan(plan, scenario)
    if not violations.ok:
        raise PlanValidationError(violations)
    return _Simulation(plan, scenario, config).run()
