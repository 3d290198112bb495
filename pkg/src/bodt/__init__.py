"""Budget-constrained planning and simulation for bags of distributed tasks."""

from .baselines import centralised_plan, location_ranking, round_robin_plan
from .estimators import BudgetPlanner, CentralisedPlanner, InfeasiblePlanError, RoundRobinPlanner
from .generate import GenParams, gen_scenario
from .model import (
    EPS,
    Budget,
    CostModel,
    Location,
    Plan,
    PlanMetrics,
    Scenario,
    Task,
    VmInstance,
    budget_to_blocks,
    exec_time,
    plan_metrics,
    time_blocks,
    validate_plan,
    vm_exec_time,
)
from .oracle import OracleResult, oracle_optimal
from .planner import PlanOutcome, find_plan
from .simulator import Perturbation, SimConfig, SimResult, simulate
from .sweep import SweepReport, run_sweep

__all__ = [
    "EPS",
    "Budget",
    "BudgetPlanner",
    "CentralisedPlanner",
    "CostModel",
    "GenParams",
    "InfeasiblePlanError",
    "Location",
    "OracleResult",
    "Perturbation",
    "Plan",
    "PlanMetrics",
    "PlanOutcome",
    "RoundRobinPlanner",
    "Scenario",
    "SimConfig",
    "SimResult",
    "SweepReport",
    "Task",
    "VmInstance",
    "budget_to_blocks",
    "centralised_plan",
    "exec_time",
    "find_plan",
    "gen_scenario",
    "location_ranking",
    "oracle_optimal",
    "plan_metrics",
    "round_robin_plan",
    "run_sweep",
    "simulate",
    "time_blocks",
    "validate_plan",
    "vm_exec_time",
]
