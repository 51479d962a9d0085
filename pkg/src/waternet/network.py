"""Process-network data model: components, edges, pollutants, objectives.

A network is a directed acyclic graph. Components expose throughput and
quality attributes; edges carry flow between them. Roles (provider,
intermediate, receiver) are derived from edge incidence, never from tags.
Tags describe what a component is for and drive reporting only.

The JSON form produced by :func:`to_canonical_text` is canonical: field
order, key order and number formatting are stable, so serializing the
parse of a canonical document reproduces it byte for byte.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum

TAGS = (
    "fresh_water_source",
    "wastewater_source",
    "treatment",
    "tank",
    "application",
    "discharge",
    "dummy",
)

SOURCE_TAGS = ("fresh_water_source", "wastewater_source")
SINK_TAGS = ("application", "discharge")

OBJECTIVE_KINDS = ("total_flow", "cost", "energy")


class Role(str, Enum):
    PROVIDER = "provider"
    INTERMEDIATE = "intermediate"
    RECEIVER = "receiver"
    UNCLASSIFIED = "unclassified"


class ParseError(ValueError):
    """Raised when a document does not match the network schema."""


def edge_key(src: str, dst: str) -> str:
    return f"{src}->{dst}"


@dataclass
class Pollutant:
    id: str
    name: str = ""
    unit: str = ""


@dataclass
class Component:
    """A node of the process network.

    Flow attributes: at most one of ``outflow_rate`` (outlet flow as a
    fraction of total inlet flow) and ``outflow_fixed`` (constant outlet
    flow whenever the component is fed). Quality attributes per pollutant:
    at most one of ``removal_rate`` (outlet concentration as a fraction of
    the flow-weighted inlet concentration) and ``exit_quality`` (constant
    outlet concentration whenever fed). ``quality`` gives the known
    concentrations of components that originate flow. ``quality_min`` and
    ``quality_max`` bound the acceptable inlet quality.
    """

    tag: str = "treatment"
    capacity: float | None = None
    supply: float | None = None
    demand: float | None = None
    outflow_rate: float | None = None
    outflow_fixed: float | None = None
    removal_rate: dict[str, float] = field(default_factory=dict)
    exit_quality: dict[str, float] = field(default_factory=dict)
    quality: dict[str, float] = field(default_factory=dict)
    quality_min: dict[str, float] = field(default_factory=dict)
    quality_max: dict[str, float] = field(default_factory=dict)
    fixed_cost: float | None = None
    variable_cost: float | None = None
    fixed_energy: float | None = None
    variable_energy: float | None = None


@dataclass
class Edge:
    src: str
    dst: str
    capacity: float | None = None
    option: str | None = None

    @property
    def key(self) -> str:
        return edge_key(self.src, self.dst)


@dataclass
class Objective:
    """What to optimize. ``scope`` lists component ids or edge keys.

    ``total_flow`` sums flow through the scoped elements: inbound flow of
    scoped components that have inlets, outbound flow of pure providers,
    and the flow of scoped edges. ``cost`` and ``energy`` sum the variable
    and fixed charges of the scoped components' inbound edges and only
    support minimization.
    """

    kind: str = "total_flow"
    sense: str = "min"
    scope: list[str] = field(default_factory=list)


@dataclass
class Network:
    pollutants: list[Pollutant] = field(default_factory=list)
    components: dict[str, Component] = field(default_factory=dict)
    edges: list[Edge] = field(default_factory=list)
    objective: Objective | None = None

    def __post_init__(self) -> None:
        self.pollutants = sorted(self.pollutants, key=lambda p: p.id)
        self.components = dict(sorted(self.components.items()))

    def in_edges(self, node: str) -> list[Edge]:
        return [e for e in self.edges if e.dst == node]

    def out_edges(self, node: str) -> list[Edge]:
        return [e for e in self.edges if e.src == node]

    def pollutant_ids(self) -> list[str]:
        return [p.id for p in self.pollutants]

    def edge_map(self) -> dict[str, Edge]:
        return {e.key: e for e in self.edges}


@dataclass
class Violation:
    code: str
    element: str
    message: str

    def as_obj(self) -> dict:
        return {"code": self.code, "element": self.element, "message": self.message}


def classify(net: Network) -> dict[str, Role]:
    """Derive each component's role from edge incidence.

    No inlets and at least one outlet makes a provider, the converse a
    receiver, both populated an intermediate. Isolated components are
    unclassified; they take part in nothing and are reported so callers
    can surface the anomaly.
    """
    has_in: set[str] = set()
    has_out: set[str] = set()
    for e in net.edges:
        has_out.add(e.src)
        has_in.add(e.dst)
    roles: dict[str, Role] = {}
    for cid in net.components:
        inn, out = cid in has_in, cid in has_out
        if inn and out:
            roles[cid] = Role.INTERMEDIATE
        elif out:
            roles[cid] = Role.PROVIDER
        elif inn:
            roles[cid] = Role.RECEIVER
        else:
            roles[cid] = Role.UNCLASSIFIED
    return roles


def _is_num(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v)


def _find_cycle(net: Network) -> list[str]:
    # Kahn peeling; whatever survives sits on a cycle.
    indeg = {cid: 0 for cid in net.components}
    outs: dict[str, list[str]] = {cid: [] for cid in net.components}
    for e in net.edges:
        if e.src in indeg and e.dst in indeg:
            indeg[e.dst] += 1
            outs[e.src].append(e.dst)
    queue = [cid for cid, d in indeg.items() if d == 0]
    seen = 0
    while queue:
        node = queue.pop()
        seen += 1
        for nxt in outs[node]:
            indeg[nxt] -= 1
            if indeg[nxt] == 0:
                queue.append(nxt)
    return sorted(cid for cid, d in indeg.items() if d > 0) if seen < len(net.components) else []


def validate(net: Network) -> list[Violation]:
    """Check well-formedness. Returns an empty list iff the network is sound.

    Never raises: every defect is reported as a :class:`Violation` with a
    stable code so callers (CLI, service, UI) can present all of them at
    once.
    """
    out: list[Violation] = []
    add = out.append

    for pid in {p.id for p in net.pollutants}:
        if sum(1 for p in net.pollutants if p.id == pid) > 1:
            add(Violation("duplicate-pollutant", pid, "pollutant id declared twice"))
    pids = set(p.id for p in net.pollutants)

    seen_edges: set[str] = set()
    for e in net.edges:
        if e.src not in net.components or e.dst not in net.components:
            add(Violation("dangling-edge", e.key, "edge endpoint is not a component"))
        if e.src == e.dst:
            add(Violation("self-loop", e.key, "edge may not loop on one component"))
        if e.key in seen_edges:
            add(Violation("duplicate-edge", e.key, "edge declared twice"))
        seen_edges.add(e.key)
        if e.capacity is not None and (not _is_num(e.capacity) or e.capacity < 0):
            add(Violation("bad-value", e.key, "edge capacity must be a finite number >= 0"))

    for cid in _find_cycle(net):
        add(Violation("cycle", cid, "component sits on a directed cycle"))

    for cid, comp in net.components.items():
        if comp.tag not in TAGS:
            add(Violation("unknown-tag", cid, f"unknown tag {comp.tag!r}"))
        for name in ("capacity", "supply", "demand", "outflow_rate", "outflow_fixed",
                     "fixed_cost", "variable_cost", "fixed_energy", "variable_energy"):
            v = getattr(comp, name)
            if v is not None and (not _is_num(v) or v < 0):
                add(Violation("bad-value", cid, f"{name} must be a finite number >= 0"))
        if comp.outflow_rate is not None and comp.outflow_fixed is not None:
            add(Violation("flow-mode-conflict", cid,
                          "outflow_rate and outflow_fixed are mutually exclusive"))
        for name in ("removal_rate", "exit_quality", "quality", "quality_min", "quality_max"):
            table = getattr(comp, name)
            for pid, v in table.items():
                if pid not in pids:
                    add(Violation("unknown-pollutant", cid, f"{name} names unknown pollutant {pid!r}"))
                if not _is_num(v) or v < 0:
                    add(Violation("bad-value", cid, f"{name}[{pid}] must be a finite number >= 0"))
        for pid in set(comp.removal_rate) & set(comp.exit_quality):
            add(Violation("quality-mode-conflict", cid,
                          f"removal_rate and exit_quality both set for {pid!r}"))
        for pid in set(comp.quality_min) & set(comp.quality_max):
            if _is_num(comp.quality_min[pid]) and _is_num(comp.quality_max[pid]) \
                    and comp.quality_min[pid] > comp.quality_max[pid]:
                add(Violation("bound-order", cid, f"quality_min > quality_max for {pid!r}"))

    roles = classify(net)
    for cid, comp in net.components.items():
        if comp.tag in SOURCE_TAGS and net.in_edges(cid):
            add(Violation("source-has-inlet", cid, "water sources may not receive flow"))
        if comp.tag == "discharge" and net.out_edges(cid):
            add(Violation("sink-has-outlet", cid, "discharges may not send flow"))
        if roles[cid] is Role.UNCLASSIFIED:
            add(Violation("isolated", cid, "component has no edges"))

    obj = net.objective
    if obj is not None:
        if obj.kind not in OBJECTIVE_KINDS:
            add(Violation("bad-objective", "objective", f"unknown kind {obj.kind!r}"))
        if obj.sense not in ("min", "max"):
            add(Violation("bad-objective", "objective", f"unknown sense {obj.sense!r}"))
        if obj.kind in ("cost", "energy") and obj.sense != "min":
            add(Violation("bad-objective", "objective", f"{obj.kind} objectives only minimize"))
        if not obj.scope:
            add(Violation("bad-objective", "objective", "scope must name at least one element"))
        ekeys = {e.key for e in net.edges}
        for ref in obj.scope:
            if ref not in net.components and ref not in ekeys:
                add(Violation("bad-objective", "objective", f"scope names unknown element {ref!r}"))
    return out


# --- canonical JSON ---------------------------------------------------------

_COMPONENT_FIELDS = (
    "tag", "capacity", "supply", "demand", "outflow_rate", "outflow_fixed",
    "removal_rate", "exit_quality", "quality", "quality_min", "quality_max",
    "fixed_cost", "variable_cost", "fixed_energy", "variable_energy",
)
_MAP_FIELDS = ("removal_rate", "exit_quality", "quality", "quality_min", "quality_max")


def _component_obj(comp: Component) -> dict:
    out: dict = {"tag": comp.tag}
    for name in _COMPONENT_FIELDS[1:]:
        v = getattr(comp, name)
        if name in _MAP_FIELDS:
            if v:
                out[name] = dict(sorted(v.items()))
        elif v is not None:
            out[name] = v
    return out


def to_obj(net: Network) -> dict:
    """Plain-data form of the network with canonical ordering."""
    obj: dict = {
        "pollutants": [
            {"id": p.id, **({"name": p.name} if p.name else {}), **({"unit": p.unit} if p.unit else {})}
            for p in sorted(net.pollutants, key=lambda p: p.id)
        ],
        "components": {cid: _component_obj(c) for cid, c in sorted(net.components.items())},
        "edges": [
            {"from": e.src, "to": e.dst,
             **({"capacity": e.capacity} if e.capacity is not None else {}),
             **({"option": e.option} if e.option is not None else {})}
            for e in net.edges
        ],
    }
    if net.objective is not None:
        o = net.objective
        obj["objective"] = {"kind": o.kind, "sense": o.sense, "scope": list(o.scope)}
    return obj


def to_canonical_text(net: Network) -> str:
    return json.dumps(to_obj(net), indent=2, ensure_ascii=False) + "\n"


def _take_num(obj: dict, key: str, where: str) -> float | None:
    v = obj.pop(key, None)
    if v is None:
        return None
    if not isinstance(v, (int, float)) or isinstance(v, bool):
        raise ParseError(f"{where}: {key} must be a number")
    return v


def _take_map(obj: dict, key: str, where: str) -> dict[str, float]:
    v = obj.pop(key, None)
    if v is None:
        return {}
    if not isinstance(v, dict):
        raise ParseError(f"{where}: {key} must be an object")
    out = {}
    for pid, val in v.items():
        if not isinstance(val, (int, float)) or isinstance(val, bool):
            raise ParseError(f"{where}: {key}[{pid}] must be a number")
        out[str(pid)] = val
    return out


def from_obj(doc: dict) -> Network:
    """Build a Network from plain data, rejecting anything off-schema."""
    if not isinstance(doc, dict):
        raise ParseError("document root must be an object")
    doc = dict(doc)
    pollutants = []
    for i, p in enumerate(doc.pop("pollutants", [])):
        if not isinstance(p, dict) or "id" not in p:
            raise ParseError(f"pollutants[{i}] must be an object with an id")
        extra = set(p) - {"id", "name", "unit"}
        if extra:
            raise ParseError(f"pollutants[{i}]: unknown keys {sorted(extra)}")
        pollutants.append(Pollutant(str(p["id"]), str(p.get("name", "")), str(p.get("unit", ""))))

    comps_doc = doc.pop("components", {})
    if not isinstance(comps_doc, dict):
        raise ParseError("components must be an object keyed by id")
    components: dict[str, Component] = {}
    for cid, cdoc in comps_doc.items():
        if not isinstance(cdoc, dict):
            raise ParseError(f"component {cid}: must be an object")
        cdoc = dict(cdoc)
        tag = cdoc.pop("tag", "treatment")
        comp = Component(
            tag=str(tag),
            capacity=_take_num(cdoc, "capacity", cid),
            supply=_take_num(cdoc, "supply", cid),
            demand=_take_num(cdoc, "demand", cid),
            outflow_rate=_take_num(cdoc, "outflow_rate", cid),
            outflow_fixed=_take_num(cdoc, "outflow_fixed", cid),
            removal_rate=_take_map(cdoc, "removal_rate", cid),
            exit_quality=_take_map(cdoc, "exit_quality", cid),
            quality=_take_map(cdoc, "quality", cid),
            quality_min=_take_map(cdoc, "quality_min", cid),
            quality_max=_take_map(cdoc, "quality_max", cid),
            fixed_cost=_take_num(cdoc, "fixed_cost", cid),
            variable_cost=_take_num(cdoc, "variable_cost", cid),
            fixed_energy=_take_num(cdoc, "fixed_energy", cid),
            variable_energy=_take_num(cdoc, "variable_energy", cid),
        )
        if cdoc:
            raise ParseError(f"component {cid}: unknown keys {sorted(cdoc)}")
        components[str(cid)] = comp

    edges = []
    edges_doc = doc.pop("edges", [])
    if not isinstance(edges_doc, list):
        raise ParseError("edges must be a list")
    for i, edoc in enumerate(edges_doc):
        if not isinstance(edoc, dict) or "from" not in edoc or "to" not in edoc:
            raise ParseError(f"edges[{i}] must be an object with from/to")
        edoc = dict(edoc)
        src, dst = str(edoc.pop("from")), str(edoc.pop("to"))
        cap = _take_num(edoc, "capacity", f"edges[{i}]")
        option = edoc.pop("option", None)
        if option is not None:
            option = str(option)
        if edoc:
            raise ParseError(f"edges[{i}]: unknown keys {sorted(edoc)}")
        edges.append(Edge(src, dst, cap, option))

    objective = None
    odoc = doc.pop("objective", None)
    if odoc is not None:
        if not isinstance(odoc, dict):
            raise ParseError("objective must be an object")
        odoc = dict(odoc)
        objective = Objective(
            kind=str(odoc.pop("kind", "total_flow")),
            sense=str(odoc.pop("sense", "min")),
            scope=[str(s) for s in odoc.pop("scope", [])],
        )
        if odoc:
            raise ParseError(f"objective: unknown keys {sorted(odoc)}")

    if doc:
        raise ParseError(f"unknown top-level keys {sorted(doc)}")
    return Network(pollutants, components, edges, objective)


def parse_network(text: str) -> Network:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"not valid JSON: {exc}") from exc
    return from_obj(doc)
