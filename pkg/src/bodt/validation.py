"""Input coercion helpers shared by the estimators and the CLI."""

from __future__ import annotations

import numbers
from pathlib import Path
from typing import Mapping

from .model import (
    Budget,
    CostModel,
    InfeasibleBudgetError,
    Plan,
    PlanValidationError,
    Scenario,
    budget_to_blocks,
    loads_scenario,
    scenario_from_dict,
    validate_plan,
)


def check_scenario(obj: Scenario | Mapping | str | Path) -> Scenario:
    """Accept a Scenario, its JSON document as a dict, or a path to a JSON file."""
    if isinstance(obj, Scenario):
        return obj
    if isinstance(obj, Mapping):
        return scenario_from_dict(obj)
    if isinstance(obj, (str, Path)):
        return loads_scenario(Path(obj).read_text())
    raise TypeError(f"expected a Scenario, mapping or path, got {type(obj).__name__}")


def check_budget(
    tb_b: Budget | int | None = None,
    money: float | None = None,
    cost_model: CostModel | None = None,
) -> Budget:
    if (tb_b is None) == (money is None):
        raise ValueError("give exactly one of tb_b or money")
    if money is not None:
        if cost_model is None:
            raise ValueError("converting money to blocks needs a cost model")
        return budget_to_blocks(money, cost_model)
    if isinstance(tb_b, Budget):
        return tb_b
    if not isinstance(tb_b, numbers.Integral) or isinstance(tb_b, bool):
        raise InfeasibleBudgetError(f"tb_b must be an integer, got {tb_b!r}")
    return Budget(int(tb_b))


def check_count(value: int, name: str) -> int:
    if not isinstance(value, numbers.Integral) or isinstance(value, bool) or value < 1:
        raise ValueError(f"{name} must be a positive integer, got {value!r}")
    return int(value)


def check_plan(plan: Plan, scenario: Scenario) -> Plan:
    violations = validate_plan(plan, scenario)
    if not violations.ok:
        raise PlanValidationError(violations)
    return plan
