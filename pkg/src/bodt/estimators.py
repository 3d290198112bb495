"""Scikit-learn style wrappers around the planners.

``fit`` takes a scenario (object, JSON mapping or path) and stores the plan in
``plan_``. ``predict`` maps task ids to VM ids. Hyper-parameters live in the
constructor so ``get_params``/``set_params``/``clone`` work as usual.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .baselines import centralised_plan, round_robin_plan
from .model import Plan, plan_metrics
from .planner import find_plan
from .validation import check_budget, check_count, check_scenario


class InfeasiblePlanError(RuntimeError):
    pass


class _PlannerMixin:
    def _finish_fit(self, scenario, plan: Plan | None) -> None:
        self.scenario_ = scenario
        self.plan_ = plan
        self.feasible_ = plan is not None
        self.metrics_ = plan_metrics(plan, scenario) if plan is not None else None
        self.n_vms_ = len(plan.vms) if plan is not None else 0

    def predict(self, X=None) -> np.ndarray:
        """VM id per task, in the order of ``X`` (task ids) or of the fitted scenario."""
        check_is_fitted(self, "plan_")
        if self.plan_ is None:
            outcome = getattr(self, "outcome_", None)
            raise InfeasiblePlanError(outcome.detail if outcome is not None else "no plan")
        lookup = self.plan_.task_to_vm()
        if X is None:
            ids = [t.id for t in self.scenario_.tasks]
        else:
            ids = [getattr(t, "id", t) for t in X]
        return np.array([lookup[t] for t in ids], dtype=object)

    def score(self, X=None, y=None) -> float:
        """Negative static makespan, so larger is better."""
        check_is_fitted(self, "plan_")
        if self.metrics_ is None:
            return float("-inf")
        return -self.metrics_.makespan


class BudgetPlanner(_PlannerMixin, BaseEstimator):
    """Heuristic planner under a block budget (``tb_b``) or a money budget."""

    def __init__(self, tb_b=4, money=None):
        self.tb_b = tb_b
        self.money = money

    def fit(self, X, y=None):
        scenario = check_scenario(X)
        if self.money is not None:
            budget = check_budget(money=self.money, cost_model=scenario.cost_model)
        else:
            budget = check_budget(self.tb_b)
        self.budget_ = budget
        self.outcome_ = find_plan(scenario, budget)
        self._finish_fit(scenario, self.outcome_.plan)
        return self


class CentralisedPlanner(_PlannerMixin, BaseEstimator):
    def __init__(self, n_vms=1, relax=True):
        self.n_vms = n_vms
        self.relax = relax

    def fit(self, X, y=None):
        scenario = check_scenario(X)
        self._finish_fit(scenario, centralised_plan(scenario, check_count(self.n_vms, "n_vms"), self.relax))
        return self


class RoundRobinPlanner(_PlannerMixin, BaseEstimator):
    def __init__(self, n_vms=1, relax=True):
        self.n_vms = n_vms
        self.relax = relax

    def fit(self, X, y=None):
        scenario = check_scenario(X)
        self._finish_fit(scenario, round_robin_plan(scenario, check_count(self.n_vms, "n_vms"), self.relax))
        return self
