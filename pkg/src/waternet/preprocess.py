"""Rewrite networks so every component has at most two inlets.

Mixing is modeled pairwise, so a component fed by n > 2 edges is rebuilt
as a left fold over its inlets in declaration order: the first two merge
in a pass-through dummy, each further inlet merges with the running
partial mix in another dummy, and the final pair feeds the original
component. Dummies keep all flow and all quality (no losses, no costs,
no bounds), so the rewrite changes the model's shape but not its
solutions.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .network import Component, Edge, Network


@dataclass
class CanonicalNetwork:
    """A rewritten network plus the mapping back to the original.

    ``origin_map`` is total over inserted elements: every dummy component
    and every edge that did not appear verbatim in the original network
    maps to the original element it stands for (the replaced edge key, or
    the fed component for the new chain edges).
    """

    net: Network
    origin_map: dict[str, str] = field(default_factory=dict)


def _dummy_id(base: str, index: int, taken: set[str]) -> str:
    cid = f"dummy_{base}_{index}"
    while cid in taken:
        cid = "_" + cid
    return cid


def canonicalize(net: Network) -> CanonicalNetwork:
    """Return an equivalent network whose components have at most 2 inlets."""
    inflow: dict[str, list[Edge]] = {cid: [] for cid in net.components}
    for e in net.edges:
        inflow.setdefault(e.dst, []).append(e)
    wide = {cid for cid, es in inflow.items() if len(es) > 2}

    components = {cid: comp for cid, comp in net.components.items()}
    origin_map: dict[str, str] = {}
    new_edges: list[Edge] = [e for e in net.edges if e.dst not in wide]
    taken = set(components)

    for node in sorted(wide):
        inlets = inflow[node]
        carried: str | None = None   # id of the node holding the partial mix
        carried_cap: float | None = None
        for i in range(len(inlets) - 1):
            last = i == len(inlets) - 2
            target = node if last else _dummy_id(node, i, taken)
            if not last:
                taken.add(target)
                components[target] = Component(tag="dummy")
                origin_map[target] = node
            if carried is None:
                first = inlets[0]
                new_edges.append(Edge(first.src, target, first.capacity, first.option))
                origin_map[f"{first.src}->{target}"] = first.key
                carried_cap = first.capacity
            else:
                chain = Edge(carried, target, carried_cap)
                new_edges.append(chain)
                origin_map[chain.key] = node
            nxt = inlets[i + 1]
            new_edges.append(Edge(nxt.src, target, nxt.capacity, nxt.option))
            if target != node:
                origin_map[f"{nxt.src}->{target}"] = nxt.key
            if carried_cap is not None and nxt.capacity is not None:
                carried_cap = carried_cap + nxt.capacity
            else:
                carried_cap = None
            carried = target

    canon = Network(
        pollutants=list(net.pollutants),
        components=components,
        edges=new_edges,
        objective=net.objective,
    )
    return CanonicalNetwork(canon, origin_map)


def uncanonicalize(
    canonical: CanonicalNetwork,
    flows: dict[str, float],
    concentrations: dict[str, float] | None = None,
) -> tuple[dict[str, float], dict[str, float]]:
    """Map a solution on the rewritten network back onto the original.

    Flows on replaced inlet edges transfer exactly to the edges they stand
    for; chain edges and dummy concentrations are dropped. Returns
    ``(flows, concentrations)`` keyed by original element.
    """
    dummy_ids = {cid for cid, comp in canonical.net.components.items()
                 if cid in canonical.origin_map and comp.tag == "dummy"}
    flows_out: dict[str, float] = {}
    for key, value in flows.items():
        origin = canonical.origin_map.get(key)
        if origin is None:
            flows_out[key] = value
        elif "->" in origin:
            flows_out[origin] = value
        # chain edges map to a component id: partial mixes, dropped
    conc_out: dict[str, float] = {}
    for key, value in (concentrations or {}).items():
        node = key.split(":", 1)[0]
        if node not in dummy_ids:
            conc_out[key] = value
    return flows_out, conc_out
