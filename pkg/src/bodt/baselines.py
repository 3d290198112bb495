"""Centralised and round-robin comparison planners.

Both place VMs by the cost of moving *every* task to a location and then share
the planner's task distribution step. When the one-block cap cannot hold the
work, distribution is rerun without the cap, so baselines may overspend.
"""

from __future__ import annotations

from .model import Plan, Scenario, VmInstance
from .planner import AssignmentError, _assign, _Layout


def location_ranking(scenario: Scenario) -> tuple[str, ...]:
    """Location ids by ascending total transfer cost of all tasks; ties by id."""
    cm = scenario.cost_model
    cost = {
        loc: sum(cm.transfer[t.source][loc] * t.size for t in scenario.tasks)
        for loc in scenario.location_ids
    }
    return tuple(sorted(scenario.location_ids, key=lambda loc: (cost[loc], loc)))


def _distribute(scenario: Scenario, vms: list[VmInstance], relax: bool) -> Plan:
    task_ids = [t.id for t in scenario.tasks]
    layout = _Layout(scenario, vms)
    try:
        _assign(layout, task_ids, [vm.id for vm in vms])
    except AssignmentError:
        if not relax:
            raise
        layout = _Layout(scenario, vms)
        _assign(layout, task_ids, [vm.id for vm in vms], capped=False)
    return layout.to_plan()


def centralised_plan(scenario: Scenario, n_vms: int, relax: bool = True) -> Plan:
    if n_vms < 1:
        raise ValueError(f"n_vms must be >= 1, got {n_vms!r}")
    lc = location_ranking(scenario)[0]
    return _distribute(scenario, [VmInstance(f"{lc}-{i}", lc) for i in range(n_vms)], relax)


def round_robin_plan(scenario: Scenario, n_vms: int, relax: bool = True) -> Plan:
    if n_vms < 1:
        raise ValueError(f"n_vms must be >= 1, got {n_vms!r}")
    ranking = location_ranking(scenario)
    vms = []
    for i in range(n_vms):
        loc = ranking[i % len(ranking)]
        vms.append(VmInstance(f"{loc}-{i // len(ranking)}", loc))
    return _distribute(scenario, vms, relax)
