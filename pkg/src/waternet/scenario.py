"""Scenario studies: randomized trials, route frequencies, KPIs.

Every sampled value gets its own RNG derived from (seed, trial, spec,
attempt), so results do not depend on evaluation order or on how trials
are spread over worker processes. Reports serialize with sorted keys;
the same seed yields byte-identical text.
"""

from __future__ import annotations

import copy
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .milp import ModelError
from .network import (Network, ParseError, Role, classify, from_obj, to_obj,
                      validate)
from .simplex import NumericalBreakdown
from .solve import (OPTIMAL, BudgetExceeded, SolveLimits, option_groups_of,
                    solve_network)

_SCALAR_FIELDS = {"capacity", "supply", "demand", "outflow_rate", "outflow_fixed",
                  "fixed_cost", "variable_cost", "fixed_energy", "variable_energy"}
_MAP_FIELDS = {"removal_rate", "exit_quality", "quality", "quality_min", "quality_max"}


@dataclass
class ParameterSpec:
    target: str
    field: str
    low: float
    high: float
    pollutant: str | None = None
    distribution: str = "uniform"

    def label(self) -> str:
        if self.pollutant:
            return f"{self.target}.{self.field}.{self.pollutant}"
        return f"{self.target}.{self.field}"

    @staticmethod
    def from_obj(obj: dict) -> "ParameterSpec":
        known = {"target", "field", "pollutant", "low", "high", "distribution"}
        extra = set(obj) - known
        if extra:
            raise ParseError(f"parameter spec has unknown keys {sorted(extra)}")
        try:
            spec = ParameterSpec(
                target=obj["target"], field=obj["field"],
                low=float(obj["low"]), high=float(obj["high"]),
                pollutant=obj.get("pollutant"),
                distribution=obj.get("distribution", "uniform"))
        except KeyError as exc:
            raise ParseError(f"parameter spec is missing {exc}") from exc
        if spec.field not in _SCALAR_FIELDS | _MAP_FIELDS:
            raise ParseError(f"parameter spec field {spec.field!r} is not tunable")
        if spec.field in _MAP_FIELDS and not spec.pollutant:
            raise ParseError(f"field {spec.field!r} needs a pollutant")
        if spec.distribution not in ("uniform", "normal"):
            raise ParseError(f"unknown distribution {spec.distribution!r}")
        return spec

    def to_obj(self) -> dict:
        obj = {"target": self.target, "field": self.field,
               "low": self.low, "high": self.high}
        if self.pollutant:
            obj["pollutant"] = self.pollutant
        if self.distribution != "uniform":
            obj["distribution"] = self.distribution
        return obj


@dataclass
class TrialConfig:
    trials: int = 100
    seed: int = 0
    parts: int = 8
    options_compared: list[str] = field(default_factory=list)
    mode: str = "exclusive"
    parameters: list[ParameterSpec] = field(default_factory=list)
    max_time: float = 90.0
    max_gap: float = 0.01
    budget: int = 1 << 20

    @staticmethod
    def from_obj(obj: dict) -> "TrialConfig":
        known = {"trials", "seed", "parts", "optionsCompared", "mode",
                 "parameters", "limits"}
        extra = set(obj) - known
        if extra:
            raise ParseError(f"trial config has unknown keys {sorted(extra)}")
        cfg = TrialConfig(
            trials=int(obj.get("trials", 100)),
            seed=int(obj.get("seed", 0)),
            parts=int(obj.get("parts", 8)),
            options_compared=list(obj.get("optionsCompared", [])),
            mode=obj.get("mode", "exclusive"),
            parameters=[ParameterSpec.from_obj(p) for p in obj.get("parameters", [])])
        limits = obj.get("limits", {})
        if limits:
            cfg.max_time = float(limits.get("max_time", cfg.max_time))
            cfg.max_gap = float(limits.get("max_gap", cfg.max_gap))
            cfg.budget = int(limits.get("budget", cfg.budget))
        if cfg.trials < 1:
            raise ParseError("trials must be positive")
        if cfg.mode not in ("exclusive", "all"):
            raise ParseError(f"unknown conflict mode {cfg.mode!r}")
        return cfg

    def to_obj(self) -> dict:
        return {
            "trials": self.trials, "seed": self.seed, "parts": self.parts,
            "optionsCompared": list(self.options_compared), "mode": self.mode,
            "parameters": [p.to_obj() for p in self.parameters],
            "limits": {"max_time": self.max_time, "max_gap": self.max_gap,
                       "budget": self.budget},
        }

    def limits(self) -> SolveLimits:
        return SolveLimits(max_time=self.max_time, max_gap=self.max_gap,
                           budget=self.budget)


def _draw(seed: int, trial: int, spec_index: int, attempt: int,
          spec: ParameterSpec) -> float:
    rng = np.random.default_rng(
        np.random.SeedSequence(entropy=seed, spawn_key=(trial, spec_index, attempt)))
    if spec.distribution == "normal":
        mean = 0.5 * (spec.low + spec.high)
        sd = (spec.high - spec.low) / 6.0 or 1.0
        return float(min(max(rng.normal(mean, sd), spec.low), spec.high))
    return float(rng.uniform(spec.low, spec.high))


def apply_parameter(net: Network, spec: ParameterSpec, value: float) -> None:
    comp = net.components.get(spec.target)
    if comp is None:
        raise ParseError(f"parameter targets unknown component {spec.target!r}")
    if spec.field in _SCALAR_FIELDS:
        setattr(comp, spec.field, value)
    else:
        getattr(comp, spec.field)[spec.pollutant] = value


def chosen_option(net: Network, flows: dict[str, float], mu: float = 1e-3) -> str:
    """Name of the option group carrying flow, or ``none``."""
    for name, keys in sorted(option_groups_of(net).items()):
        if any(flows.get(k, 0.0) > mu / 2 for k in keys):
            return name
    return "none"


def compute_kpis(net: Network, flows: dict[str, float]) -> dict[str, float]:
    """Aggregate throughput indicators of one flow assignment.

    ``reused`` counts inflow of application components that arrives from
    a treatment step (directly or further downstream); ``losses`` is the
    inlet/outlet imbalance across all intermediate components.
    """
    tol = 1e-9
    roles = classify(net)
    inflow = {cid: 0.0 for cid in net.components}
    outflow = {cid: 0.0 for cid in net.components}
    for e in net.edges:
        f = flows.get(e.key, 0.0)
        outflow[e.src] += f
        inflow[e.dst] += f

    intake = sum(outflow[cid] for cid, r in roles.items() if r is Role.PROVIDER)
    treated = sum(inflow[cid] for cid, c in net.components.items()
                  if c.tag == "treatment")
    discharged = sum(inflow[cid] for cid, c in net.components.items()
                     if c.tag == "discharge" and roles[cid] is Role.RECEIVER)

    downstream = {cid for cid, c in net.components.items() if c.tag == "treatment"}
    grew = True
    while grew:
        grew = False
        for e in net.edges:
            if e.src in downstream and e.dst not in downstream and flows.get(e.key, 0.0) > tol:
                downstream.add(e.dst)
                grew = True
    reused = 0.0
    for cid, c in net.components.items():
        if c.tag != "application":
            continue
        for e in net.in_edges(cid):
            if e.src in downstream:
                reused += flows.get(e.key, 0.0)

    losses = sum(inflow[cid] - outflow[cid] for cid, r in roles.items()
                 if r is Role.INTERMEDIATE)

    def pct(x: float) -> float:
        return 100.0 * x / intake if intake > tol else 0.0

    return {
        "intake": intake, "treated": treated, "discharged": discharged,
        "reused": reused, "losses": losses,
        "discharged_pct": pct(discharged), "reused_pct": pct(reused),
        "losses_pct": pct(losses),
    }


def run_trial(net: Network, config: TrialConfig, trial: int) -> dict:
    sampled: dict[str, float] = {}
    candidate = None
    for attempt in range(100):
        candidate = copy.deepcopy(net)
        sampled = {}
        for si, spec in enumerate(config.parameters):
            value = _draw(config.seed, trial, si, attempt, spec)
            apply_parameter(candidate, spec, value)
            sampled[spec.label()] = value
        if not validate(candidate):
            break
        candidate = None
    if candidate is None:
        return {"trial": trial, "status": "invalid", "option": None,
                "objective": None, "kpis": None, "samples": sampled}

    record = {"trial": trial, "samples": sampled, "option": None,
              "objective": None, "kpis": None}
    try:
        sol = solve_network(candidate, parts=config.parts, limits=config.limits(),
                            conflict_mode=config.mode)
    except (BudgetExceeded, NumericalBreakdown, ModelError) as exc:
        record["status"] = "error"
        record["detail"] = f"{type(exc).__name__}: {exc}"
        return record
    record["status"] = sol.status
    if sol.status == OPTIMAL:
        record["objective"] = sol.objective
        record["option"] = chosen_option(candidate, sol.flows)
        record["kpis"] = compute_kpis(candidate, sol.flows)
    return record


def _worker(args: tuple) -> dict:
    net_obj, cfg_obj, trial = args
    return run_trial(from_obj(net_obj), TrialConfig.from_obj(cfg_obj), trial)


def run_trials(net: Network, config: TrialConfig, jobs: int = 1) -> dict:
    """Run the study and fold results in trial order."""
    if jobs > 1:
        payload = [(to_obj(net), config.to_obj(), t) for t in range(config.trials)]
        chunk = max(1, config.trials // (jobs * 8))
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_worker, payload, chunksize=chunk))
    else:
        results = [run_trial(net, config, t) for t in range(config.trials)]

    names = config.options_compared or sorted(option_groups_of(net))
    frequencies = {name: 0 for name in names}
    frequencies["none"] = 0
    counts = {"optimal": 0, "infeasible": 0, "timed_out": 0, "unbounded": 0,
              "error": 0, "invalid": 0}
    kpi_sums: dict[str, float] = {}
    obj_sum = 0.0
    per_trial = []
    for rec in results:
        counts[rec["status"]] = counts.get(rec["status"], 0) + 1
        if rec["status"] == OPTIMAL:
            opt = rec["option"] or "none"
            if opt not in frequencies:
                frequencies[opt] = 0
            frequencies[opt] += 1
            obj_sum += rec["objective"]
            for k, v in rec["kpis"].items():
                kpi_sums[k] = kpi_sums.get(k, 0.0) + v
        per_trial.append({"trial": rec["trial"], "status": rec["status"],
                          "option": rec["option"], "objective": rec["objective"]})
    feasible = counts["optimal"]
    report = {
        "trials": config.trials,
        "seed": config.seed,
        "parts": config.parts,
        "optionsCompared": names,
        "counts": counts,
        "frequencies": frequencies,
        "objective_mean": obj_sum / feasible if feasible else None,
        "kpi_means": {k: v / feasible for k, v in sorted(kpi_sums.items())} if feasible else {},
        "per_trial": per_trial,
    }
    return report


def report_text(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


def compare_networks(base: Network, variant: Network, parts: int = 8,
                     limits: SolveLimits | None = None) -> dict:
    """Optimize two layouts and report KPI deltas (variant minus base)."""

    def side(net: Network) -> dict:
        sol = solve_network(net, parts=parts, limits=limits)
        out = {"status": sol.status, "objective": sol.objective, "kpis": None}
        if sol.status == OPTIMAL:
            out["kpis"] = compute_kpis(net, sol.flows)
        return out

    b = side(base)
    v = side(variant)
    delta = None
    if b["kpis"] is not None and v["kpis"] is not None:
        delta = {k: v["kpis"][k] - b["kpis"][k] for k in sorted(b["kpis"])}
    return {"base": b, "variant": v, "delta": delta}
