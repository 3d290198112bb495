"""JSON readers and writers for plans, simulator configs and simulation results."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Mapping

from .model import ModelError, Plan, Scenario, VmInstance, dumps_scenario, loads_scenario, plan_metrics
from .simulator import Perturbation, SimConfig, SimResult

_PERTURBATION_KEYS = {"kind", "distribution", "sigma", "low", "high", "slowdown"}
_SIM_KEYS = {"seed", "perturbation", "thr1", "thr2", "terminate_time", "reassignment_enabled"}


def read_scenario(path: str | Path) -> Scenario:
    return loads_scenario(Path(path).read_text())


def write_scenario(scenario: Scenario, path: str | Path) -> None:
    Path(path).write_text(dumps_scenario(scenario))


def plan_to_dict(
    plan: Plan | None,
    scenario: Scenario,
    reason: str | None = None,
    approach: str | None = None,
) -> dict:
    """``{"vms": {vm_id: {location, tasks, exec_seconds, blocks}}, makespan, total_blocks, feasible}``."""
    doc: dict = {"scenario_ref": scenario.fingerprint}
    if approach:
        doc["approach"] = approach
    if plan is None:
        doc.update(vms={}, makespan=None, total_blocks=None, feasible=False, reason=reason or "infeasible")
        return doc
    metrics = plan_metrics(plan, scenario)
    doc["vms"] = {
        m.vm.id: {
            "location": m.vm.location,
            "tasks": list(plan.assignments[m.vm]),
            "exec_seconds": m.exec_seconds,
            "blocks": m.blocks,
        }
        for m in metrics.per_vm
    }
    doc.update(makespan=metrics.makespan, total_blocks=metrics.total_blocks, feasible=True)
    return doc


def plan_from_dict(doc: Mapping) -> Plan | None:
    if not doc.get("feasible", True):
        return None
    vms = doc.get("vms")
    if not isinstance(vms, Mapping):
        raise ModelError("plan document needs a 'vms' object")
    return Plan(
        {VmInstance(vm_id, entry["location"]): tuple(entry["tasks"]) for vm_id, entry in vms.items()},
        doc.get("scenario_ref"),
    )


def sim_config_from_dict(doc: Mapping) -> SimConfig:
    extra = sorted(set(doc) - _SIM_KEYS)
    if extra:
        raise ModelError(f"unknown sim config keys {extra}")
    kwargs = dict(doc)
    pert = kwargs.pop("perturbation", None)
    if pert is not None:
        extra = sorted(set(pert) - _PERTURBATION_KEYS)
        if extra:
            raise ModelError(f"unknown perturbation keys {extra}")
        kwargs["perturbation"] = Perturbation(**pert)
    return SimConfig(**kwargs)


def sim_config_to_dict(config: SimConfig) -> dict:
    p = config.perturbation
    return {
        "seed": config.seed,
        "perturbation": {
            "kind": p.kind,
            "distribution": p.distribution,
            "sigma": p.sigma,
            "low": p.low,
            "high": p.high,
            "slowdown": dict(p.slowdown),
        },
        "thr1": config.thr1,
        "thr2": config.thr2,
        "terminate_time": config.terminate_time,
        "reassignment_enabled": config.reassignment_enabled,
    }


def write_json(doc: Mapping, path: str | Path) -> None:
    Path(path).write_text(json.dumps(doc, indent=2) + "\n")


def read_json(path: str | Path) -> dict:
    return json.loads(Path(path).read_text())


def write_sim_result(result: SimResult, json_path: str | Path, csv_path: str | Path | None = None) -> None:
    write_json(result.to_dict(), json_path)
    if csv_path is not None:
        Path(csv_path).write_text(result.events_csv())
