"""Mixed-integer linear model of a canonical process network.

Continuous variables: one flow per edge, one outlet concentration per
(component, pollutant). Binary variables: one activation per edge, and
for every two-inlet component a ladder of part-count choices per inlet
edge splitting the mix into ``parts`` equal parts. Choosing rung k on an
inlet pins its share of the mixed flow to k/parts, which linearizes the
flow-weighted mixing mean at the cost of discretizing the ratio.

Constraint rows carry a ``tag`` naming the behavior they enforce and the
element they belong to; exports order rows by (tag, element) so the same
model always serializes to the same bytes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .network import Network, Role, classify, edge_key, validate


class ModelError(ValueError):
    pass


class MissingQuality(ModelError):
    """A component that originates flow lacks a declared concentration."""


class UnboundedBigM(ModelError):
    """No finite bound on achievable flow; caller must supply one."""


class EmptyObjective(ModelError):
    """Cost or energy objective over components that carry no charges."""


class NotCanonical(ModelError):
    """Builder input must have at most two inlets per component."""


@dataclass
class BigMPolicy:
    """Relaxation constants: valid upper bounds on flows and concentrations.

    ``flow`` bounds any single flow expression, ``quality[p]`` any
    concentration of pollutant p, ``mu`` is the smallest flow an active
    edge may carry (keeps activation binaries honest).
    """

    flow: float
    quality: dict[str, float]
    mu: float = 1e-3


def derive_big_m(net: Network, mu: float = 1e-3) -> BigMPolicy:
    """Bound flows by total injectable volume and quality by declared levels.

    Every provider must be bounded by its supply, its capacity, or finite
    capacities on all of its outlets; otherwise no finite flow bound
    exists and we refuse to guess. Amplifying components (outflow_rate or
    removal rates above 1) scale the bounds up so they stay valid.
    """
    roles = classify(net)
    total = 0.0
    for cid, role in roles.items():
        comp = net.components[cid]
        if role is Role.PROVIDER:
            if comp.supply is not None:
                total += comp.supply
            elif comp.capacity is not None:
                total += comp.capacity
            else:
                caps = [e.capacity for e in net.out_edges(cid)]
                if any(c is None for c in caps):
                    raise UnboundedBigM(
                        f"provider {cid!r} has no supply, capacity, or capped outlets")
                total += sum(caps)
        elif role is Role.INTERMEDIATE:
            if comp.outflow_fixed is not None:
                total += comp.outflow_fixed
            if comp.capacity is not None:
                total += comp.capacity
    amp = 1.0
    for comp in net.components.values():
        if comp.outflow_rate is not None and comp.outflow_rate > 1.0:
            amp *= comp.outflow_rate
    flow = max(total * amp, 1.0)

    quality: dict[str, float] = {}
    for pid in net.pollutant_ids():
        base = 0.0
        gain = 1.0
        for comp in net.components.values():
            for table in (comp.quality, comp.exit_quality, comp.quality_min, comp.quality_max):
                if pid in table:
                    base = max(base, table[pid])
            rr = comp.removal_rate.get(pid)
            if rr is not None and rr > 1.0:
                gain *= rr
        quality[pid] = max(2.0 * base * gain, 1.0)
    return BigMPolicy(flow=flow, quality=quality, mu=mu)


@dataclass(slots=True)
class Var:
    name: str
    kind: str                  # flow | quality | active | part | option
    ref: tuple
    lb: float = 0.0
    ub: float = float("inf")
    binary: bool = False


@dataclass(slots=True)
class Row:
    tag: str
    element: str
    coeffs: dict[int, float]
    sense: str                 # "<=" | ">=" | "="
    rhs: float


@dataclass
class BlendPoint:
    """A two-inlet component and the variables that discretize its mix."""

    node: str
    first: str                 # inlet with the lexicographically smaller source
    second: str
    y_first: int
    y_second: int
    z_first: list[int]
    z_second: list[int]


@dataclass
class MilpModel:
    net: Network
    parts: int
    policy: BigMPolicy
    variables: list[Var]
    rows: list[Row]
    objective: dict[int, float]
    sense: str
    blends: list[BlendPoint]
    option_vars: dict[str, int] = field(default_factory=dict)
    option_members: dict[str, list[str]] = field(default_factory=dict)
    entry_limits: bool = True
    exit_limits: bool = True

    def var_index(self, ref: tuple) -> int:
        return self._by_ref[ref]

    def finalize(self) -> None:
        self._by_ref = {v.ref: i for i, v in enumerate(self.variables)}
        order = sorted(range(len(self.rows)),
                       key=lambda i: (self.rows[i].tag, self.rows[i].element, i))
        self.rows = [self.rows[i] for i in order]


def count_profile(model: MilpModel) -> dict[str, int]:
    """Size of the model as the variable registry actually holds it."""
    n_cont = sum(1 for v in model.variables if not v.binary)
    n_bin = sum(1 for v in model.variables if v.binary)
    return {
        "n_continuous": n_cont,
        "n_binary": n_bin,
        "n_constraints": len(model.rows),
    }


def _check_canonical(net: Network) -> dict[str, list]:
    inflow: dict[str, list] = {cid: [] for cid in net.components}
    for e in net.edges:
        inflow[e.dst].append(e)
    for cid, es in inflow.items():
        if len(es) > 2:
            raise NotCanonical(f"component {cid!r} has {len(es)} inlets; rewrite first")
    return inflow


def build_model(
    net: Network,
    parts: int = 200,
    policy: BigMPolicy | None = None,
    option_groups: dict[str, list[str]] | None = None,
    conflict_mode: str = "exclusive",
    objective=None,
    emit_entry_limits: bool = True,
    emit_exit_limits: bool = True,
) -> MilpModel:
    """Assemble the model for a canonical (at most two inlets) network.

    ``option_groups`` maps a group name to member edge keys; in
    ``exclusive`` mode at most one group may carry flow, in ``all`` mode
    groups add nothing to the model and only matter for reporting.
    Entry limits bound the mixed inlet concentration, exit limits bound
    the outlet concentration scaled by the removal rate; either family
    can be switched off.
    """
    if parts < 2:
        raise ModelError("parts must be at least 2")
    problems = [v for v in validate(net) if v.code != "isolated"]
    if problems:
        raise ModelError(f"network is not well-formed: {problems[0].code} at {problems[0].element}")
    inflow = _check_canonical(net)
    if policy is None:
        policy = derive_big_m(net)
    roles = classify(net)
    pids = net.pollutant_ids()
    objective = objective if objective is not None else net.objective

    variables: list[Var] = []
    by_ref: dict[tuple, int] = {}

    def add_var(v: Var) -> int:
        by_ref[v.ref] = len(variables)
        variables.append(v)
        return by_ref[v.ref]

    edges_sorted = sorted(net.edges, key=lambda e: e.key)
    emap = {e.key: e for e in net.edges}
    for i, e in enumerate(edges_sorted):
        ub = e.capacity if e.capacity is not None else policy.flow
        add_var(Var(f"x{i}", "flow", ("x", e.key), ub=min(ub, policy.flow)))
    ci = 0
    for cid in sorted(net.components):
        for pid in pids:
            add_var(Var(f"c{ci}", "quality", ("c", cid, pid), ub=policy.quality[pid]))
            ci += 1
    for i, e in enumerate(edges_sorted):
        add_var(Var(f"y{i}", "active", ("y", e.key), ub=1.0, binary=True))

    blends: list[BlendPoint] = []
    zi = 0
    for cid in sorted(net.components):
        ins = inflow[cid]
        if len(ins) != 2:
            continue
        ins = sorted(ins, key=lambda e: e.src)
        first, second = ins[0], ins[1]
        z1 = [add_var(Var(f"z{zi}_{k}", "part", ("z", first.key, k), ub=1.0, binary=True))
              for k in range(parts + 1)]
        z2 = [add_var(Var(f"z{zi + 1}_{k}", "part", ("z", second.key, k), ub=1.0, binary=True))
              for k in range(parts + 1)]
        zi += 2
        blends.append(BlendPoint(
            node=cid, first=first.key, second=second.key,
            y_first=by_ref[("y", first.key)], y_second=by_ref[("y", second.key)],
            z_first=z1, z_second=z2,
        ))

    option_vars: dict[str, int] = {}
    option_members = {name: list(keys) for name, keys in (option_groups or {}).items()}
    if option_groups and conflict_mode == "exclusive":
        ekeys = {e.key for e in net.edges}
        for wi, name in enumerate(sorted(option_groups)):
            for k in option_groups[name]:
                if k not in ekeys:
                    raise ModelError(f"option group {name!r} names unknown edge {k!r}")
            option_vars[name] = add_var(Var(f"w{wi}", "option", ("w", name), ub=1.0, binary=True))

    rows: list[Row] = []
    _append = rows.append

    def add(tag: str, element: str, coeffs: dict[int, float], sense: str, rhs: float) -> None:
        _append(Row(tag, element, coeffs, sense, rhs))

    def x(e) -> int:
        return by_ref[("x", e.key)]

    def y(e) -> int:
        return by_ref[("y", e.key)]

    def c(cid: str, pid: str) -> int:
        return by_ref[("c", cid, pid)]

    M = policy.flow
    mu = policy.mu

    # flow structure
    for cid in sorted(net.components):
        comp = net.components[cid]
        role = roles[cid]
        ins, outs = inflow[cid], net.out_edges(cid)
        if role is Role.PROVIDER and comp.supply is not None:
            add("supply", cid, {x(e): 1.0 for e in outs}, "=", comp.supply)
        if role is Role.RECEIVER and comp.demand is not None:
            add("demand", cid, {x(e): 1.0 for e in ins}, ">=", comp.demand)
        if comp.capacity is not None:
            if ins:
                add("cap_inlet", cid, {x(e): 1.0 for e in ins}, "<=", comp.capacity)
            if outs:
                add("cap_outlet", cid, {x(e): 1.0 for e in outs}, "<=", comp.capacity)
        if role is Role.INTERMEDIATE:
            if comp.outflow_fixed is not None:
                sf = comp.outflow_fixed
                for e in ins:
                    co = {x(f): 1.0 for f in outs}
                    co[y(e)] = M
                    add("fixed_outlet_ub", f"{cid}|{e.key}", co, "<=", sf + M)
                    co2 = {x(f): 1.0 for f in outs}
                    co2[y(e)] = -M
                    add("fixed_outlet_lb", f"{cid}|{e.key}", co2, ">=", sf - M)
                gate = {x(f): 1.0 for f in outs}
                for e in ins:
                    gate[y(e)] = -sf
                add("fixed_outlet_gate", cid, gate, "<=", 0.0)
            else:
                sr = comp.outflow_rate if comp.outflow_rate is not None else 1.0
                co = {x(e): sr for e in ins}
                for f in outs:
                    co[x(f)] = co.get(x(f), 0.0) - 1.0
                add("conserve", cid, co, "=", 0.0)

    for e in edges_sorted:
        cap = e.capacity if e.capacity is not None else policy.flow
        add("gate_upper", e.key, {x(e): 1.0, y(e): -min(cap, policy.flow)}, "<=", 0.0)
        add("gate_lower", e.key, {x(e): 1.0, y(e): -mu}, ">=", 0.0)

    # mixing ladders
    K = parts
    ratio_M = K * policy.flow
    for bp in blends:
        e1 = emap[bp.first]
        e2 = emap[bp.second]
        add("mix_choice", bp.first, {zv: 1.0 for zv in bp.z_first}, "=", 1.0)
        add("mix_choice", bp.second, {zv: 1.0 for zv in bp.z_second}, "=", 1.0)
        for k in range(1, K):
            add("mix_pair", bp.node,
                {bp.z_first[k]: 1.0, bp.z_second[K - k]: -1.0}, "=", 0.0)
        add("mix_gate_zero", bp.first, {bp.z_first[0]: 1.0, bp.y_first: 1.0}, "=", 1.0)
        add("mix_gate_zero", bp.second, {bp.z_second[0]: 1.0, bp.y_second: 1.0}, "=", 1.0)
        add("mix_gate_full", bp.first, {bp.z_first[K]: 1.0, bp.y_second: 1.0}, "<=", 1.0)
        add("mix_gate_full", bp.second, {bp.z_second[K]: 1.0, bp.y_first: 1.0}, "<=", 1.0)
        x1, x2 = x(e1), x(e2)
        z1 = bp.z_first
        for k in range(1, K):
            add("mix_ratio", bp.first,
                {x1: float(K - k), x2: float(-k), z1[k]: ratio_M}, "<=", ratio_M)
            add("mix_ratio", bp.first,
                {x1: float(-(K - k)), x2: float(k), z1[k]: ratio_M}, "<=", ratio_M)

    # quality
    blend_of = {b.node: b for b in blends}
    for cid in sorted(net.components):
        comp = net.components[cid]
        ins = inflow[cid]
        if roles[cid] is Role.PROVIDER:
            for pid in pids:
                if pid not in comp.quality:
                    raise MissingQuality(f"{cid!r} originates flow but declares no {pid!r} level")
                add("source_quality", f"{cid}:{pid}", {c(cid, pid): 1.0}, "=", comp.quality[pid])
            continue
        if not ins:
            continue
        bp = blend_of.get(cid)
        for pid in pids:
            Mq = policy.quality[pid]
            rf = comp.exit_quality.get(pid)
            rr = comp.removal_rate.get(pid, 1.0)
            Mg = Mq * max(1.0, rr)   # covers |outlet - rr * inlet| at the bounds
            elem = f"{cid}:{pid}"
            if rf is not None:
                for e in ins:
                    add("exit_fixed", f"{elem}|{e.key}",
                        {c(cid, pid): 1.0, y(e): Mq}, "<=", rf + Mq)
                    add("exit_fixed", f"{elem}|{e.key}",
                        {c(cid, pid): 1.0, y(e): -Mq}, ">=", rf - Mq)
            elif bp is None:
                e = ins[0]
                add("exit_rate", elem,
                    {c(cid, pid): 1.0, c(e.src, pid): -rr, y(e): Mg}, "<=", Mg)
                add("exit_rate", elem,
                    {c(cid, pid): 1.0, c(e.src, pid): -rr, y(e): -Mg}, ">=", -Mg)
            else:
                i_src = emap[bp.first].src
                r_src = emap[bp.second].src
                ci, cr, co_out = c(i_src, pid), c(r_src, pid), c(cid, pid)
                z1 = bp.z_first
                for k in range(1, K):
                    a, b = rr * k / K, rr * (K - k) / K
                    add("mix_quality", elem,
                        {ci: a, cr: b, co_out: -1.0, z1[k]: Mg}, "<=", Mg)
                    add("mix_quality", elem,
                        {ci: -a, cr: -b, co_out: 1.0, z1[k]: Mg}, "<=", Mg)
                # sole active inlet: outlet tracks that inlet directly
                for gates, src in (
                    ((bp.z_first[0], bp.y_second), r_src),
                    ((bp.z_first[K],), i_src),
                ):
                    slack = Mg * len(gates)
                    co = {c(cid, pid): 1.0, c(src, pid): -rr}
                    for g in gates:
                        co[g] = co.get(g, 0.0) + Mg
                    add("exit_rate", f"{elem}|{src}", co, "<=", slack)
                    co2 = {c(cid, pid): 1.0, c(src, pid): -rr}
                    for g in gates:
                        co2[g] = co2.get(g, 0.0) - Mg
                    add("exit_rate", f"{elem}|{src}", co2, ">=", -slack)

            lo = comp.quality_min.get(pid)
            hi = comp.quality_max.get(pid)
            if emit_entry_limits and (lo is not None or hi is not None):
                if bp is None:
                    e = ins[0]
                    if lo is not None:
                        add("entry_limit", elem,
                            {c(e.src, pid): 1.0, y(e): -Mq}, ">=", lo - Mq)
                    if hi is not None:
                        add("entry_limit", elem,
                            {c(e.src, pid): 1.0, y(e): Mq}, "<=", hi + Mq)
                else:
                    i_src = emap[bp.first].src
                    r_src = emap[bp.second].src
                    ci, cr = c(i_src, pid), c(r_src, pid)
                    z1 = bp.z_first
                    for k in range(1, K):
                        a, b = k / K, (K - k) / K
                        if lo is not None:
                            add("entry_limit", elem,
                                {ci: a, cr: b, z1[k]: -Mq}, ">=", lo - Mq)
                        if hi is not None:
                            add("entry_limit", elem,
                                {ci: a, cr: b, z1[k]: Mq}, "<=", hi + Mq)
                    for gates, src in (
                        ((bp.z_first[0], bp.y_second), r_src),
                        ((bp.z_first[K],), i_src),
                    ):
                        slack = Mq * len(gates)
                        if lo is not None:
                            co = {c(src, pid): 1.0}
                            for g in gates:
                                co[g] = co.get(g, 0.0) - Mq
                            add("entry_limit", f"{elem}|{src}", co, ">=", lo - slack)
                        if hi is not None:
                            co = {c(src, pid): 1.0}
                            for g in gates:
                                co[g] = co.get(g, 0.0) + Mq
                            add("entry_limit", f"{elem}|{src}", co, "<=", hi + slack)
            if emit_exit_limits and rf is None and (lo is not None or hi is not None):
                for e in ins:
                    if lo is not None:
                        add("exit_limit", f"{elem}|{e.key}",
                            {c(cid, pid): 1.0, y(e): -Mg}, ">=", lo * rr - Mg)
                    if hi is not None:
                        add("exit_limit", f"{elem}|{e.key}",
                            {c(cid, pid): 1.0, y(e): Mg}, "<=", hi * rr + Mg)

    # option exclusivity
    if option_vars:
        for name in sorted(option_vars):
            for k in sorted(option_members[name]):
                add("option_member", f"{name}|{k}",
                    {by_ref[("y", k)]: 1.0, option_vars[name]: -1.0}, "<=", 0.0)
        add("option_exclusive", "options",
            {wi: 1.0 for wi in option_vars.values()}, "<=", 1.0)

    # objective
    obj: dict[int, float] = {}
    sense = "min"
    if objective is not None:
        sense = objective.sense
        ekeys = {e.key: e for e in net.edges}
        if objective.kind == "total_flow":
            for ref in objective.scope:
                if ref in ekeys:
                    i = by_ref[("x", ref)]
                    obj[i] = obj.get(i, 0.0) + 1.0
                else:
                    pick = net.out_edges(ref) if roles.get(ref) is Role.PROVIDER else net.in_edges(ref)
                    for e in pick:
                        i = x(e)
                        obj[i] = obj.get(i, 0.0) + 1.0
        else:
            var_attr = "variable_cost" if objective.kind == "cost" else "variable_energy"
            fix_attr = "fixed_cost" if objective.kind == "cost" else "fixed_energy"
            charged = False
            for ref in objective.scope:
                if ref not in net.components:
                    continue
                comp = net.components[ref]
                vc = getattr(comp, var_attr)
                fc = getattr(comp, fix_attr)
                if vc is None and fc is None:
                    continue
                charged = True
                for e in net.in_edges(ref):
                    if vc is not None:
                        obj[x(e)] = obj.get(x(e), 0.0) + vc
                    if fc is not None:
                        obj[y(e)] = obj.get(y(e), 0.0) + fc
            if not charged:
                raise EmptyObjective(f"no {objective.kind} coefficients inside the scope")
        if not obj:
            raise EmptyObjective("objective scope contributes no terms")

    model = MilpModel(
        net=net, parts=parts, policy=policy, variables=variables, rows=rows,
        objective=obj, sense=sense, blends=blends,
        option_vars=option_vars, option_members=option_members,
        entry_limits=emit_entry_limits, exit_limits=emit_exit_limits,
    )
    model.finalize()
    return model
