from __future__ import annotations

import random

from bodt.generate import GenParams, gen_scenario
from bodt.model import Budget, CostModel, Location, Scenario, Task


def make_scenario(locations, tasks, transfer, comp=1.0, startup=10.0, block_seconds=100.0, block_price=1.0):
    """Build a scenario from ``[loc ids]``, ``[(id, size, source)]`` and a nested rate dict."""
    return Scenario(
        tuple(Location(loc, loc) for loc in locations),
        tuple(Task(tid, size, src) for tid, size, src in tasks),
        CostModel(transfer, comp, startup, block_seconds, block_price),
        tuple(transfer),
    )


def canonical_scenario(block_seconds: float = 100.0) -> Scenario:
    """Four tasks, two sources, two locations; s1 is near A, s2 is near B."""
    return make_scenario(
        ["A", "B"],
        [("t1", 10, "s1"), ("t2", 5, "s1"), ("t3", 6, "s2"), ("t4", 8, "s2")],
        {"s1": {"A": 1.0, "B": 3.0}, "s2": {"A": 4.0, "B": 0.5}},
        comp=1.0,
        startup=10.0,
        block_seconds=block_seconds,
    )


def tiny_instance(seed: int) -> tuple[Scenario, Budget]:
    """Random instance inside the oracle guard (<= 6 tasks, <= 3 locations, tb_b <= 3)."""
    rng = random.Random(seed)
    n_loc = rng.randint(1, 3)
    params = GenParams(
        n_locations=n_loc,
        n_sources=rng.randint(1, 3),
        n_tasks=rng.randint(1, 6),
        size_min=1,
        size_max=5,
        n_clusters=rng.randint(1, n_loc),
        intra_rate=(0.5, 3.0),
        inter_rate=(4.0, 10.0),
        comp=1.0,
        startup=rng.choice([0.0, 2.0, 5.0]),
        block_seconds=rng.choice([20.0, 30.0, 45.0, 60.0, 100.0]),
        seed=seed,
    )
    return gen_scenario(params), Budget(rng.randint(1, 3))


def small_params(seed: int) -> GenParams:
    """Random mid-sized generator params used by the property suites."""
    rng = random.Random(10_000 + seed)
    n_loc = rng.randint(1, 5)
    return GenParams(
        n_locations=n_loc,
        n_sources=rng.randint(1, 8),
        n_tasks=rng.randint(1, 30),
        size_min=1,
        size_max=rng.randint(1, 12),
        n_clusters=rng.randint(1, n_loc),
        intra_rate=(0.5, 3.0),
        inter_rate=(5.0, 20.0),
        comp=rng.choice([0.0, 1.0, 2.0]),
        startup=rng.choice([0.0, 5.0, 30.0]),
        block_seconds=rng.choice([120.0, 300.0, 600.0]),
        seed=seed,
    )


def desk_scenario(seed: int) -> Scenario:
    return gen_scenario(GenParams(seed=seed))


def five_task_scenario() -> Scenario:
    """Five tasks, two locations; 30 s blocks force a split beyond one VM."""
    return make_scenario(
        ["A", "B"],
        [("t1", 6, "s1"), ("t2", 5, "s1"), ("t3", 7, "s2"), ("t4", 4, "s2"), ("t5", 3, "s1")],
        {"s1": {"A": 1.0, "B": 4.0}, "s2": {"A": 4.0, "B": 1.0}},
        comp=1.0,
        startup=2.0,
        block_seconds=30.0,
    )
