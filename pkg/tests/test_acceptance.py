"""Acceptance gate: each test checks one criterion at its stated tolerance.

Run with ``pytest tests/test_acceptance.py``; a summary section lists one
PASS/FAIL line per criterion at the end of the session.
"""

import os
import random
import statistics
import subprocess
import sys
import time

import pytest

from bodt.baselines import centralised_plan, round_robin_plan
from bodt.generate import GenParams, gen_scenario
from bodt.model import EPS, Budget, dumps_scenario, plan_metrics, validate_plan
from bodt.oracle import oracle_optimal
from bodt.planner import AssignmentError, PlannerState, assign, balance, find_plan, initial_vms, nearest_plan, reduce
from bodt.simulator import Perturbation, SimConfig, simulate
from bodt.sweep import CENTRALISED, DEFAULT_TB_VALUES, HEURISTIC, ROUND_ROBIN, format_csv, run_sweep

from helpers import desk_scenario, small_params, tiny_instance

pytestmark = pytest.mark.acceptance

N_SCENARIOS = 100


def _quartiles(xs):
    q = statistics.quantiles(xs, n=4)
    return f"min {min(xs):.3f} q1 {q[0]:.3f} median {q[1]:.3f} q3 {q[2]:.3f} max {max(xs):.3f}"


def test_budget_satisfaction(criterion):
    start = time.perf_counter()
    checked = violations = 0
    for seed in range(N_SCENARIOS):
        sc = desk_scenario(seed)
        for tb in DEFAULT_TB_VALUES:
            out = find_plan(sc, Budget(tb))
            if out.feasible:
                checked += 1
                if plan_metrics(out.plan, sc).total_blocks > tb:
                    violations += 1
    elapsed = time.perf_counter() - start
    criterion(
        1, "budget satisfaction",
        violations == 0 and elapsed < 60,
        f"{checked} feasible plans over {N_SCENARIOS} scenarios x {len(DEFAULT_TB_VALUES)} budgets, "
        f"{violations} over budget, {elapsed:.1f}s",
    )


@pytest.fixture(scope="module")
def desk_corpus():
    """Medians per (scenario, tb_b, approach) from the default sweep (pair noise sigma 0.1, 3 seeds)."""
    cells = []
    for seed in range(N_SCENARIOS):
        report = run_sweep(desk_scenario(seed), DEFAULT_TB_VALUES, repetitions=3)
        lowest = report.min_feasible_tb(HEURISTIC)
        if lowest is None:
            continue
        for tb in report.tb_values:
            if tb < lowest:
                continue
            cells.append((seed, tb, {a: report.stats(tb, a).median for a in (HEURISTIC, ROUND_ROBIN, CENTRALISED)}))
    return cells


def test_baseline_ordering(criterion, desk_corpus):
    ordered = sum(1 for _, _, m in desk_corpus if m[HEURISTIC] <= m[ROUND_ROBIN] <= m[CENTRALISED])
    h_best = sum(1 for _, _, m in desk_corpus if m[HEURISTIC] <= min(m[ROUND_ROBIN], m[CENTRALISED]))
    share = ordered / len(desk_corpus)
    criterion(
        2, "baseline ordering",
        share >= 0.90,
        f"{ordered}/{len(desk_corpus)} cells ordered ({100 * share:.1f}%, need >= 90%); "
        f"heuristic fastest in {h_best}",
    )


def test_improvement_magnitude(criterion, desk_corpus):
    vs_c = [(m[CENTRALISED] - m[HEURISTIC]) / m[CENTRALISED] for _, _, m in desk_corpus]
    vs_rr = [(m[ROUND_ROBIN] - m[HEURISTIC]) / m[ROUND_ROBIN] for _, _, m in desk_corpus]
    med_c, med_rr = statistics.median(vs_c), statistics.median(vs_rr)
    criterion(
        3, "improvement magnitude",
        med_c >= 0.20 and med_rr >= 0.10,
        f"vs centralised {_quartiles(vs_c)} (need median >= 0.20); "
        f"vs round_robin {_quartiles(vs_rr)} (need median >= 0.10)",
    )


def test_reassignment_benefit(criterion):
    start = time.perf_counter()
    better = worse = 0
    for seed in range(100):
        sc = gen_scenario(GenParams(seed=seed))
        out = find_plan(sc, Budget(4))
        slow = max(out.metrics.per_vm, key=lambda m: (m.exec_seconds, m.vm.id)).vm.id
        p = Perturbation("vm", slowdown={slow: 2.0})
        on = simulate(out.plan, sc, SimConfig(seed=seed, perturbation=p)).makespan
        off = simulate(out.plan, sc, SimConfig(seed=seed, perturbation=p, reassignment_enabled=False)).makespan
        better += on < off
        worse += on > off + EPS
    elapsed = time.perf_counter() - start
    criterion(
        4, "reassignment benefit",
        better >= 95 and worse == 0 and elapsed < 30,
        f"strictly lower on {better}/100 seeds, higher on {worse}, {elapsed:.1f}s",
    )


def test_oracle_consistency(criterion):
    start = time.perf_counter()
    beaten = contradicted = both = 0
    for seed in range(200):
        sc, budget = tiny_instance(seed)
        h = find_plan(sc, budget)
        o = oracle_optimal(sc, budget)
        if h.feasible and not o.feasible:
            contradicted += 1
        if h.feasible and o.feasible:
            both += 1
            beaten += h.metrics.makespan < o.makespan - EPS
    elapsed = time.perf_counter() - start
    criterion(
        5, "oracle consistency",
        beaten == 0 and contradicted == 0 and elapsed < 120,
        f"{both} instances feasible for both; heuristic below optimum {beaten}, "
        f"feasible-vs-infeasible {contradicted}, {elapsed:.1f}s",
    )


def test_zero_perturbation_fidelity(criterion):
    plans = []
    seed = 0
    while len(plans) < 50:
        sc = gen_scenario(small_params(seed))
        out = find_plan(sc, Budget(1 + seed % 6))
        if out.feasible:
            plans.append((sc, out.plan))
        seed += 1
    worst = 0.0
    for sc, plan in plans:
        res = simulate(plan, sc, SimConfig(reassignment_enabled=False))
        for m in plan_metrics(plan, sc).per_vm:
            worst = max(worst, abs(res.vm(m.vm.id).finished_at - m.exec_seconds))
    criterion(6, "zero-perturbation fidelity", worst <= 1e-6, f"50 plans, worst per-VM gap {worst:.3g}s")


def test_low_budget_exclusivity(criterion):
    report = run_sweep(desk_scenario(0), range(1, 9), repetitions=3)
    lowest = report.min_feasible_tb(HEURISTIC)
    h_rows = report.cell(lowest, HEURISTIC)
    base_rows = report.cell(lowest, CENTRALISED) + report.cell(lowest, ROUND_ROBIN)
    ok = (
        lowest is not None
        and all(r.feasible and r.blocks <= lowest for r in h_rows)
        and all(not r.feasible and r.blocks > lowest for r in base_rows)
    )
    blocks = {a: sorted({r.blocks for r in report.cell(lowest, a)}) for a in (HEURISTIC, CENTRALISED, ROUND_ROBIN)}
    criterion(7, "low-budget exclusivity", ok, f"min feasible tb_b {lowest}, billed blocks there {blocks}")


def test_determinism(criterion, tmp_path):
    scenario = tmp_path / "scenario.json"
    scenario.write_text(dumps_scenario(desk_scenario(1)))
    outputs = []
    for hash_seed in ("0", "12345"):
        out = tmp_path / f"sweep-{hash_seed}.csv"
        env = dict(os.environ, PYTHONHASHSEED=hash_seed)
        proc = subprocess.run(
            [sys.executable, "-m", "bodt", "sweep", str(scenario), "--tb-b", "4", "8", "12", "-o", str(out)],
            env=env, capture_output=True, text=True,
        )
        assert proc.returncode == 0, proc.stderr
        outputs.append(out.read_bytes())
    in_process = format_csv(run_sweep(desk_scenario(1), [4, 8, 12])).encode()
    same = outputs[0] == outputs[1] == in_process
    criterion(8, "determinism", same, f"3 sweeps ({len(outputs[0])} bytes each) identical: {same}")


def test_conservation(criterion):
    cases = failures = 0
    rng = random.Random(2024)
    perturbations = [
        Perturbation(),
        Perturbation("pair", sigma=0.3),
        Perturbation("pair", distribution="uniform", low=0.5, high=2.0),
    ]
    seed = 0
    while cases < 1000:
        sc = gen_scenario(small_params(seed))
        seed += 1
        tb = rng.randint(1, 6)
        budget = Budget(tb)
        stages = []
        vms = initial_vms(sc, budget)
        try:
            layout = None
            for loc, ids in nearest_plan(sc).items():
                layout = assign(ids, [v for v in vms if v.location == loc], layout, sc)
        except AssignmentError:
            layout = None
        if layout is not None:
            stages.append(layout)
            local = reduce(PlannerState(layout), budget, True, sc)
            stages.append(local.plan)
            glob = reduce(PlannerState(local.plan, history=local.history), budget, False, sc)
            stages.append(glob.plan)
            stages.append(balance(glob.plan, glob.history, sc))
        out = find_plan(sc, budget)
        plans = [centralised_plan(sc, tb), round_robin_plan(sc, tb)]
        if out.feasible:
            plans.append(out.plan)
        stages.extend(plans)
        cases += 1
        ok = all(validate_plan(p, sc).ok for p in stages)
        for plan in plans:
            cfg = SimConfig(seed=rng.randrange(2**32), perturbation=rng.choice(perturbations),
                            reassignment_enabled=rng.random() < 0.8)
            res = simulate(plan, sc, cfg)
            executed = [t for tl in res.per_vm for t in tl.executed]
            ok = ok and sorted(executed) == sorted(t.id for t in sc.tasks)
        failures += not ok
    criterion(9, "conservation", failures == 0, f"{cases} random cases, {failures} violations")
