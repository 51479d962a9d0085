"""Reference semantics: quality propagation, feasibility checking, grid search.

This module is deliberately independent of the linear model. It walks the
network directly: concentrations follow from flow-weighted mixing and the
component attributes, and feasibility is judged against the nonlinear
relations themselves. The solvers are tested against it, never the other
way around.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .milp import MissingQuality
from .network import Network, Role, classify


def topo_order(net: Network) -> list[str]:
    indeg = {cid: 0 for cid in net.components}
    outs: dict[str, list[str]] = {cid: [] for cid in net.components}
    for e in net.edges:
        indeg[e.dst] += 1
        outs[e.src].append(e.dst)
    ready = sorted(cid for cid, d in indeg.items() if d == 0)
    order: list[str] = []
    while ready:
        node = ready.pop(0)
        order.append(node)
        for nxt in sorted(outs[node]):
            indeg[nxt] -= 1
            if indeg[nxt] == 0:
                ready.append(nxt)
        ready.sort()
    if len(order) < len(net.components):
        raise ValueError("network has a cycle")
    return order


def propagate_quality(
    net: Network, flows: dict[str, float], tol: float = 1e-9
) -> tuple[dict[str, float], list[str]]:
    """Concentration at every fed component, walking the DAG once.

    Providers emit their declared levels. A fed component sees the
    flow-weighted mean of its inlet concentrations and leaves it scaled by
    its removal rate, or replaced by its fixed exit quality. Components
    without inflow have no defined concentration and are omitted. An inlet
    whose upstream concentration is undefined contributes 0 and is
    reported as a warning (that only happens on inconsistent flows).
    """
    conc: dict[str, float] = {}
    warnings: list[str] = []
    roles = classify(net)
    pids = net.pollutant_ids()
    for cid in topo_order(net):
        comp = net.components[cid]
        if roles[cid] is Role.PROVIDER:
            for pid in pids:
                if pid not in comp.quality:
                    raise MissingQuality(f"{cid!r} originates flow but declares no {pid!r} level")
                conc[f"{cid}:{pid}"] = comp.quality[pid]
            continue
        ins = net.in_edges(cid)
        if not ins:
            continue
        total = sum(flows.get(e.key, 0.0) for e in ins)
        if total <= tol:
            continue
        for pid in pids:
            weighted = 0.0
            for e in ins:
                f = flows.get(e.key, 0.0)
                if f <= tol:
                    continue
                up = conc.get(f"{e.src}:{pid}")
                if up is None:
                    warnings.append(
                        f"{e.key}: upstream {pid} level undefined, counted as 0")
                    up = 0.0
                weighted += f * up
            entry = weighted / total
            rf = comp.exit_quality.get(pid)
            if rf is not None:
                conc[f"{cid}:{pid}"] = rf
            else:
                conc[f"{cid}:{pid}"] = comp.removal_rate.get(pid, 1.0) * entry
    return conc, warnings


def entry_levels(
    net: Network, flows: dict[str, float], conc: dict[str, float], tol: float = 1e-9
) -> dict[str, float]:
    """Flow-weighted inlet concentration per fed (component, pollutant)."""
    out: dict[str, float] = {}
    for cid in net.components:
        ins = net.in_edges(cid)
        total = sum(flows.get(e.key, 0.0) for e in ins)
        if not ins or total <= tol:
            continue
        for pid in net.pollutant_ids():
            weighted = sum(
                flows.get(e.key, 0.0) * conc.get(f"{e.src}:{pid}", 0.0)
                for e in ins if flows.get(e.key, 0.0) > tol
            )
            out[f"{cid}:{pid}"] = weighted / total
    return out


@dataclass
class FeasibilityReport:
    feasible: bool
    violations: list[dict] = field(default_factory=list)
    concentrations: dict[str, float] = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)

    def as_obj(self) -> dict:
        return {
            "feasible": self.feasible,
            "violations": self.violations,
            "concentrations": dict(sorted(self.concentrations.items())),
            "warnings": list(self.warnings),
        }


def check_feasibility(
    net: Network,
    flows: dict[str, float],
    mu: float = 1e-3,
    tol: float = 1e-6,
) -> FeasibilityReport:
    """Judge a flow assignment against the network's own relations.

    Tolerances scale with the magnitude of each requirement. Quality
    relations are only judged at components that actually receive flow;
    an idle component has no concentration to constrain.
    """
    violations: list[dict] = []

    def bad(code: str, element: str, residual: float) -> None:
        violations.append({"constraint": code, "element": element, "residual": residual})

    emap = net.edge_map()
    for key in flows:
        if key not in emap:
            bad("unknown_edge", key, 0.0)
    if any(v["constraint"] == "unknown_edge" for v in violations):
        return FeasibilityReport(False, violations)

    def flow(e) -> float:
        return flows.get(e.key, 0.0)

    for e in net.edges:
        f = flow(e)
        if f < -tol:
            bad("nonnegative", e.key, -f)
        if e.capacity is not None and f > e.capacity + tol * (1 + e.capacity):
            bad("edge_capacity", e.key, f - e.capacity)
        if tol < f < mu - tol:
            bad("min_flow", e.key, mu - f)

    roles = classify(net)
    for cid, comp in net.components.items():
        ins, outs = net.in_edges(cid), net.out_edges(cid)
        fin = sum(flow(e) for e in ins)
        fout = sum(flow(e) for e in outs)
        if roles[cid] is Role.PROVIDER and comp.supply is not None:
            if abs(fout - comp.supply) > tol * (1 + comp.supply):
                bad("supply", cid, fout - comp.supply)
        if roles[cid] is Role.RECEIVER and comp.demand is not None:
            if fin < comp.demand - tol * (1 + comp.demand):
                bad("demand", cid, comp.demand - fin)
        if comp.capacity is not None:
            if ins and fin > comp.capacity + tol * (1 + comp.capacity):
                bad("cap_inlet", cid, fin - comp.capacity)
            if outs and fout > comp.capacity + tol * (1 + comp.capacity):
                bad("cap_outlet", cid, fout - comp.capacity)
        if roles[cid] is Role.INTERMEDIATE:
            if comp.outflow_fixed is not None:
                if fin > tol:
                    if abs(fout - comp.outflow_fixed) > tol * (1 + comp.outflow_fixed):
                        bad("fixed_outlet", cid, fout - comp.outflow_fixed)
                elif fout > tol:
                    bad("fixed_outlet", cid, fout)
            else:
                sr = comp.outflow_rate if comp.outflow_rate is not None else 1.0
                if abs(sr * fin - fout) > tol * (1 + fin + fout):
                    bad("conserve", cid, sr * fin - fout)

    try:
        conc, warnings = propagate_quality(net, flows)
    except MissingQuality as exc:
        bad("missing_quality", str(exc), 0.0)
        return FeasibilityReport(False, violations)
    entries = entry_levels(net, flows, conc)
    for cid, comp in net.components.items():
        ins = net.in_edges(cid)
        fin = sum(flow(e) for e in ins)
        if not ins or fin <= tol:
            continue
        for pid in net.pollutant_ids():
            lo = comp.quality_min.get(pid)
            hi = comp.quality_max.get(pid)
            entry = entries.get(f"{cid}:{pid}", 0.0)
            if lo is not None and entry < lo - tol * (1 + lo):
                bad("entry_limit", f"{cid}:{pid}", lo - entry)
            if hi is not None and entry > hi + tol * (1 + hi):
                bad("entry_limit", f"{cid}:{pid}", entry - hi)
            if pid not in comp.exit_quality and (lo is not None or hi is not None):
                rr = comp.removal_rate.get(pid, 1.0)
                cout = conc.get(f"{cid}:{pid}", 0.0)
                if lo is not None and cout < lo * rr - tol * (1 + lo * rr):
                    bad("exit_limit", f"{cid}:{pid}", lo * rr - cout)
                if hi is not None and cout > hi * rr + tol * (1 + hi * rr):
                    bad("exit_limit", f"{cid}:{pid}", cout - hi * rr)
    return FeasibilityReport(not violations, violations, conc, warnings)


def evaluate_objective(
    net: Network, objective, flows: dict[str, float], mu: float = 1e-3
) -> float:
    """Objective value of a flow assignment, any backend's or a grid point's."""
    roles = classify(net)
    emap = net.edge_map()
    if objective.kind == "total_flow":
        total = 0.0
        for ref in objective.scope:
            if ref in emap:
                total += flows.get(ref, 0.0)
            elif roles.get(ref) is Role.PROVIDER:
                total += sum(flows.get(e.key, 0.0) for e in net.out_edges(ref))
            else:
                total += sum(flows.get(e.key, 0.0) for e in net.in_edges(ref))
        return total
    var_attr = "variable_cost" if objective.kind == "cost" else "variable_energy"
    fix_attr = "fixed_cost" if objective.kind == "cost" else "fixed_energy"
    total = 0.0
    half = mu / 2
    for ref in objective.scope:
        comp = net.components.get(ref)
        if comp is None:
            continue
        vc = getattr(comp, var_attr) or 0.0
        fc = getattr(comp, fix_attr) or 0.0
        for e in net.in_edges(ref):
            f = flows.get(e.key, 0.0)
            total += vc * f
            if f >= half:
                total += fc
    return total


def brute_force(
    net: Network,
    objective=None,
    grid: float = 0.01,
    mu: float = 1e-3,
    budget: int = 2_000_000,
    option_groups: dict[str, list[str]] | None = None,
    exclusive: bool = False,
):
    """Globally search flows on a grid; the slow, trusted answer.

    One outlet per component absorbs the exact remainder of that
    component's outflow so conservation holds without rounding; the other
    outlets range over multiples of ``grid``. Returns ``(objective,
    flows)`` for the best feasible point or ``None`` when the grid holds
    no feasible point. Raises RuntimeError when the grid would exceed
    ``budget`` evaluations.
    """
    objective = objective if objective is not None else net.objective
    if objective is None:
        raise ValueError("an objective is required")
    order = topo_order(net)
    roles = classify(net)
    want_max = objective.sense == "max"

    best: list = [None, None]
    evals = [0]

    def try_point(flows: dict[str, float]) -> None:
        evals[0] += 1
        if evals[0] > budget:
            raise RuntimeError(f"grid search exceeded {budget} evaluations")
        if exclusive and option_groups:
            used = {
                name for name, keys in option_groups.items()
                if any(flows.get(k, 0.0) >= mu / 2 for k in keys)
            }
            if len(used) > 1:
                return
        report = check_feasibility(net, flows, mu=mu)
        if not report.feasible:
            return
        val = evaluate_objective(net, objective, flows, mu=mu)
        if best[0] is None or (val > best[0] if want_max else val < best[0]):
            best[0] = val
            best[1] = dict(flows)

    def split(node_idx: int, flows: dict[str, float]) -> None:
        if node_idx == len(order):
            try_point(flows)
            return
        cid = order[node_idx]
        comp = net.components[cid]
        outs = net.out_edges(cid)
        if not outs:
            split(node_idx + 1, flows)
            return
        fin = sum(flows.get(e.key, 0.0) for e in net.in_edges(cid))
        if roles[cid] is Role.PROVIDER:
            if comp.supply is not None:
                totals = [comp.supply]
            else:
                cap = comp.capacity
                if cap is None:
                    caps = [e.capacity for e in outs]
                    if any(c is None for c in caps):
                        raise RuntimeError(f"provider {cid!r} has no finite flow bound")
                    cap = sum(caps)
                totals = [i * grid for i in range(int(cap / grid + 1e-9) + 1)]
        elif comp.outflow_fixed is not None:
            totals = [comp.outflow_fixed if fin > 1e-9 else 0.0]
        else:
            sr = comp.outflow_rate if comp.outflow_rate is not None else 1.0
            totals = [sr * fin]

        def assign(edge_idx: int, remaining: float, total: float) -> None:
            e = outs[edge_idx]
            cap = e.capacity if e.capacity is not None else float("inf")
            if edge_idx == len(outs) - 1:
                if remaining < -1e-9 or remaining > cap + 1e-9:
                    return
                flows[e.key] = max(remaining, 0.0)
                split(node_idx + 1, flows)
                return
            top = min(cap, remaining)
            steps = int(top / grid + 1e-9)
            for i in range(steps + 1):
                flows[e.key] = i * grid
                assign(edge_idx + 1, remaining - i * grid, total)

        for total in totals:
            assign(0, total, total)
        return

    split(0, {})
    if best[0] is None:
        return None
    return best[0], best[1]
