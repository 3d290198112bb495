import pytest

from bodt.model import Budget, plan_metrics, validate_plan
from bodt.oracle import InstanceTooLargeError, oracle_by_partitions, oracle_optimal

from helpers import canonical_scenario, five_task_scenario, make_scenario, tiny_instance


def test_single_task_single_location():
    sc = make_scenario(["A"], [("t", 4, "s")], {"s": {"A": 2.0}}, comp=1.0, startup=5.0, block_seconds=100.0)
    res = oracle_optimal(sc, Budget(1))
    assert res.feasible
    assert res.makespan == 5.0 + 3.0 * 4
    assert res.total_blocks == 1


def test_two_tasks_needing_two_vms_with_one_block():
    sc = make_scenario(["A"], [("x", 30, "s"), ("y", 30, "s")], {"s": {"A": 1.0}}, comp=1.0, startup=0.0,
                       block_seconds=100.0)
    assert not oracle_optimal(sc, Budget(1)).feasible
    assert not oracle_by_partitions(sc, Budget(1)).feasible
    assert oracle_optimal(sc, Budget(2)).makespan == 60.0


@pytest.mark.parametrize(
    "tb, makespan, groups",
    [
        (1, None, ()),
        # A: 2 + 12 + 10 + 6 = 30, B: 2 + 14 + 8 = 24
        (2, 30.0, (("A", ("t1", "t2", "t5")), ("B", ("t3", "t4")))),
        # t5 on its own VM: A: 2 + 12 + 10 = 24, A: 2 + 6 = 8, B: 24
        (3, 24.0, (("A", ("t1", "t2")), ("A", ("t5",)), ("B", ("t3", "t4")))),
    ],
)
def test_five_task_fixture(tb, makespan, groups):
    sc = five_task_scenario()
    res = oracle_optimal(sc, Budget(tb))
    check = oracle_by_partitions(sc, Budget(tb))
    assert res.makespan == makespan == check.makespan
    assert res.groups == groups
    if makespan is not None:
        plan = res.to_plan(sc)
        assert validate_plan(plan, sc).ok
        m = plan_metrics(plan, sc)
        assert m.makespan == makespan
        assert m.total_blocks <= tb


def test_guard():
    big = make_scenario(["A"], [(f"t{i}", 1, "s") for i in range(7)], {"s": {"A": 1.0}})
    with pytest.raises(InstanceTooLargeError):
        oracle_optimal(big, Budget(1))
    with pytest.raises(InstanceTooLargeError):
        oracle_optimal(canonical_scenario(), Budget(4))
    wide = make_scenario(list("ABCD"), [("t", 1, "s")], {"s": dict.fromkeys("ABCD", 1.0)})
    with pytest.raises(InstanceTooLargeError):
        oracle_by_partitions(wide, Budget(1))


@pytest.mark.parametrize("seed", range(150))
def test_enumerations_agree(seed):
    sc, budget = tiny_instance(seed)
    a = oracle_optimal(sc, budget)
    b = oracle_by_partitions(sc, budget)
    assert a.feasible == b.feasible
    assert a.makespan == b.makespan
    if a.feasible:
        assert a.total_blocks <= budget.tb_b and b.total_blocks <= budget.tb_b
        assert plan_metrics(a.to_plan(sc), sc).makespan == pytest.approx(a.makespan, abs=1e-9)
