"""Exhaustive optimal planning for tiny instances (test ground truth).

Two independent enumerations are provided: a branch-and-bound search that
places tasks one at a time, and a plain walk over every set partition of the
tasks crossed with every location labelling. Both score candidate plans with
the same canonical arithmetic, so their optima agree bit for bit.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterator, Sequence

from .model import EPS, Budget, Plan, Scenario, VmInstance, time_blocks

MAX_TASKS = 6
MAX_LOCATIONS = 3
MAX_BLOCKS = 3


class InstanceTooLargeError(ValueError):
    pass


@dataclass(frozen=True)
class OracleResult:
    feasible: bool
    makespan: float | None = None
    total_blocks: int | None = None
    groups: tuple[tuple[str, tuple[str, ...]], ...] = ()
    explored: int = 0

    def to_plan(self, scenario: Scenario) -> Plan | None:
        if not self.feasible:
            return None
        counts: dict[str, int] = {}
        assignments = {}
        for loc, tasks in self.groups:
            i = counts.get(loc, 0)
            counts[loc] = i + 1
            assignments[VmInstance(f"{loc}-{i}", loc)] = tasks
        return Plan(assignments, scenario.fingerprint)


def _guard(scenario: Scenario, budget: Budget) -> None:
    if (
        len(scenario.tasks) > MAX_TASKS
        or len(scenario.locations) > MAX_LOCATIONS
        or budget.tb_b > MAX_BLOCKS
    ):
        raise InstanceTooLargeError(
            f"oracle handles at most {MAX_TASKS} tasks, {MAX_LOCATIONS} locations and "
            f"tb_b <= {MAX_BLOCKS}; got {len(scenario.tasks)}, {len(scenario.locations)}, {budget.tb_b}"
        )


def _score(groups: Sequence[tuple[str, Sequence[str]]], scenario: Scenario) -> tuple[float, int]:
    cm = scenario.cost_model
    ex = scenario.exec_table
    makespan = 0.0
    blocks = 0
    for loc, tasks in groups:
        seconds = cm.startup + sum(ex[t][loc] for t in sorted(tasks))
        makespan = max(makespan, seconds)
        blocks += time_blocks(seconds, cm)
    return makespan, blocks


def _canonical(groups: Sequence[tuple[str, Sequence[str]]]) -> tuple[tuple[str, tuple[str, ...]], ...]:
    return tuple(sorted((loc, tuple(sorted(ts))) for loc, ts in groups))


def oracle_optimal(scenario: Scenario, budget: Budget) -> OracleResult:
    """Minimal makespan over all plans with at most ``tb_b`` billed blocks."""
    _guard(scenario, budget)
    tb_b = budget.tb_b
    cm = scenario.cost_model
    ex = scenario.exec_table
    locs = scenario.location_ids
    order = sorted(scenario.task_by_id, key=lambda t: (-max(ex[t].values()), t))

    best = [math.inf, None, 0]
    groups: list[list] = []  # [location, task ids, running seconds]
    explored = 0

    def dfs(i: int, blocks: int) -> None:
        nonlocal explored
        explored += 1
        if i == len(order):
            makespan, total = _score([(g[0], g[1]) for g in groups], scenario)
            if total <= tb_b and makespan < best[0]:
                best[:] = [makespan, _canonical([(g[0], g[1]) for g in groups]), total]
            return
        t = order[i]
        for g in groups:
            before = g[2]
            after = before + ex[t][g[0]]
            nb = blocks - time_blocks(before, cm) + time_blocks(after, cm)
            if nb > tb_b or after > best[0] + EPS:
                continue
            g[1].append(t)
            g[2] = after
            dfs(i + 1, nb)
            g[1].pop()
            g[2] = before
        if len(groups) < tb_b:
            for loc in locs:
                seconds = cm.startup + ex[t][loc]
                nb = blocks + time_blocks(seconds, cm)
                if nb > tb_b or seconds > best[0] + EPS:
                    continue
                groups.append([loc, [t], seconds])
                dfs(i + 1, nb)
                groups.pop()

    dfs(0, 0)
    if best[1] is None:
        return OracleResult(False, explored=explored)
    return OracleResult(True, best[0], best[2], best[1], explored)


def _set_partitions(items: Sequence[str], max_parts: int) -> Iterator[list[list[str]]]:
    """Restricted-growth enumeration of partitions into at most ``max_parts`` parts."""
    n = len(items)

    def rec(i: int, labels: list[int], k: int) -> Iterator[list[list[str]]]:
        if i == n:
            parts = [[] for _ in range(k)]
            for item, lab in zip(items, labels):
                parts[lab].append(item)
            yield parts
            return
        for lab in range(min(k + 1, max_parts)):
            labels.append(lab)
            yield from rec(i + 1, labels, max(k, lab + 1))
            labels.pop()

    yield from rec(0, [], 0)


def oracle_by_partitions(scenario: Scenario, budget: Budget) -> OracleResult:
    """Same optimum as :func:`oracle_optimal`, found without pruning or task ordering."""
    _guard(scenario, budget)
    tb_b = budget.tb_b
    items = sorted(scenario.task_by_id, reverse=True)
    best_span, best_groups, best_blocks = math.inf, None, 0
    explored = 0
    for parts in _set_partitions(items, tb_b):
        for labelling in itertools.product(scenario.location_ids, repeat=len(parts)):
            explored += 1
            groups = list(zip(labelling, parts))
            makespan, blocks = _score(groups, scenario)
            if blocks <= tb_b and makespan < best_span:
                best_span, best_groups, best_blocks = makespan, _canonical(groups), blocks
    if best_groups is None:
        return OracleResult(False, explored=explored)
    return OracleResult(True, best_span, best_blocks, best_groups, explored)
