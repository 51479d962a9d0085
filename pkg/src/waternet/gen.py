"""Instance generators.

Named shapes give realistic water networks with randomized parameters;
the remaining factories build structured instances for testing: tiny
grid-aligned layouts whose discretized optimum coincides with the
continuous one, wide-inlet layouts that exercise inlet folding, and a
dense chain whose state space is large but within budget.
"""

from __future__ import annotations

import numpy as np

from .network import Component, Edge, Network, Objective, Pollutant

REFINERY_POLLUTANTS = ["ammonia", "bod", "cod", "oil", "phenol", "tss"]
CHEM_POLLUTANTS = ["chloride", "cod", "tds", "toc", "tss"]


def _u(rng, lo: float, hi: float, digits: int = 3) -> float:
    return round(float(rng.uniform(lo, hi)), digits)


def _qmap(rng, ranges: dict[str, tuple[float, float]]) -> dict[str, float]:
    return {pid: _u(rng, lo, hi) for pid, (lo, hi) in sorted(ranges.items())}


def _flat(rng, pids: list[str], lo: float, hi: float) -> dict[str, float]:
    return {pid: _u(rng, lo, hi) for pid in pids}


def refinery(seed: int = 0) -> Network:
    """Retrofit layout: two tanks and a fixed side stream feed two primary
    trains that fan out into polishing units, two applications and an
    outfall. The side stream picks one of two routes (exclusive options)."""
    rng = np.random.default_rng(seed)
    pids = REFINERY_POLLUTANTS
    tank_q = {
        "cod": (300, 500), "bod": (150, 300), "tss": (80, 200),
        "oil": (20, 60), "phenol": (5, 20), "ammonia": (10, 40),
    }
    comps = {
        "T_1": Component(tag="wastewater_source", capacity=_u(rng, 250, 350),
                         quality=_qmap(rng, tank_q)),
        "T_2": Component(tag="wastewater_source", capacity=_u(rng, 180, 280),
                         quality={p: round(v * 0.8, 3) for p, v in _qmap(rng, tank_q).items()}),
        "WWS_3": Component(tag="wastewater_source", supply=_u(rng, 40, 80),
                           quality=_qmap(rng, {
                               "cod": (200, 400), "bod": (100, 200), "tss": (60, 140),
                               "oil": (10, 30), "phenol": (2, 10), "ammonia": (5, 20)})),
        "Tr_1": Component(tag="treatment", capacity=_u(rng, 260, 400),
                          outflow_rate=_u(rng, 0.95, 0.99),
                          removal_rate=_flat(rng, pids, 0.35, 0.6)),
        "Tr_2": Component(tag="treatment", capacity=_u(rng, 260, 400),
                          outflow_rate=_u(rng, 0.95, 0.99),
                          removal_rate=_flat(rng, pids, 0.35, 0.6)),
        "Tr_3": Component(tag="treatment", capacity=_u(rng, 150, 260),
                          outflow_rate=_u(rng, 0.95, 0.99),
                          removal_rate=_flat(rng, pids, 0.15, 0.4)),
        "Tr_4": Component(tag="treatment", capacity=_u(rng, 150, 260),
                          outflow_rate=_u(rng, 0.95, 0.99),
                          removal_rate={p: _u(rng, 0.15, 0.4) for p in pids if p != "oil"},
                          exit_quality={"oil": _u(rng, 1, 3)}),
        "Tr_5": Component(tag="treatment", capacity=_u(rng, 120, 220),
                          outflow_rate=_u(rng, 0.95, 0.99),
                          removal_rate=_flat(rng, pids, 0.3, 0.7)),
        "App_1": Component(tag="application", demand=_u(rng, 30, 80),
                           quality_max={"cod": _u(rng, 160, 260), "tss": _u(rng, 60, 110),
                                        "oil": _u(rng, 10, 25)}),
        "App_2": Component(tag="application", demand=_u(rng, 15, 50),
                           quality_max={"cod": _u(rng, 180, 300), "phenol": _u(rng, 3, 9)}),
        "D_1": Component(tag="discharge",
                         quality_max={"cod": _u(rng, 200, 350), "bod": _u(rng, 80, 180),
                                      "tss": _u(rng, 60, 150), "ammonia": _u(rng, 12, 40)}),
    }
    edges = [
        Edge("T_1", "Tr_1"), Edge("T_2", "Tr_1"),
        Edge("T_1", "Tr_2"), Edge("T_2", "Tr_2"),
        Edge("WWS_3", "Tr_3", option="route_a"),
        Edge("WWS_3", "Tr_4", option="route_b"),
        Edge("Tr_1", "Tr_3"), Edge("Tr_1", "Tr_4"),
        Edge("Tr_2", "Tr_5"),
        Edge("Tr_3", "App_1"), Edge("Tr_4", "App_1"),
        Edge("Tr_3", "D_1"), Edge("Tr_5", "D_1"),
        Edge("Tr_4", "App_2"),
    ]
    obj = Objective(kind="total_flow", sense="max",
                    scope=["Tr_1", "Tr_2", "Tr_3", "Tr_4", "Tr_5"])
    return Network(pollutants=[Pollutant(p) for p in pids],
                   components=comps, edges=edges, objective=obj)


def refinery_current(seed: int = 0) -> Network:
    """The plant before the retrofit: both tanks into one lossy train and
    straight to the outfall. No applications, so nothing is reused."""
    rng = np.random.default_rng(seed)
    pids = REFINERY_POLLUTANTS
    tank_q = {
        "cod": (300, 500), "bod": (150, 300), "tss": (80, 200),
        "oil": (20, 60), "phenol": (5, 20), "ammonia": (10, 40),
    }
    comps = {
        "T_1": Component(tag="wastewater_source", capacity=_u(rng, 250, 350),
                         quality=_qmap(rng, tank_q)),
        "T_2": Component(tag="wastewater_source", capacity=_u(rng, 180, 280),
                         quality={p: round(v * 0.8, 3) for p, v in _qmap(rng, tank_q).items()}),
        "Tr_1": Component(tag="treatment", capacity=_u(rng, 350, 500),
                          outflow_rate=_u(rng, 0.78, 0.84),
                          removal_rate=_flat(rng, pids, 0.35, 0.55)),
        "D_1": Component(tag="discharge",
                         quality_max={"cod": _u(rng, 220, 380), "bod": _u(rng, 100, 200),
                                      "tss": _u(rng, 70, 160), "ammonia": _u(rng, 15, 45)}),
    }
    edges = [Edge("T_1", "Tr_1"), Edge("T_2", "Tr_1"), Edge("Tr_1", "D_1")]
    obj = Objective(kind="total_flow", sense="max", scope=["Tr_1"])
    return Network(pollutants=[Pollutant(p) for p in pids],
                   components=comps, edges=edges, objective=obj)


def chem_a(seed: int = 0) -> Network:
    """Chemical site: two fresh make-up lines and a process effluent feed
    a treatment train with a recycle loop through a usage block."""
    rng = np.random.default_rng(seed)
    pids = CHEM_POLLUTANTS
    fresh_q = {"cod": (0, 5), "tss": (0, 5), "tds": (50, 150), "toc": (0, 5),
               "chloride": (10, 40)}
    comps = {
        "FW_1": Component(tag="fresh_water_source", capacity=_u(rng, 150, 250),
                          quality=_qmap(rng, fresh_q)),
        "FW_2": Component(tag="fresh_water_source", capacity=_u(rng, 150, 250),
                          quality=_qmap(rng, fresh_q)),
        "WWS_1": Component(tag="wastewater_source", capacity=_u(rng, 80, 160),
                           quality=_qmap(rng, {
                               "cod": (400, 800), "tss": (150, 350), "tds": (800, 1500),
                               "toc": (100, 250), "chloride": (200, 500)})),
        "Tr_1": Component(tag="treatment", capacity=_u(rng, 200, 320),
                          outflow_rate=_u(rng, 0.9, 0.98),
                          removal_rate={"cod": _u(rng, 0.4, 0.75), "tss": _u(rng, 0.4, 0.75),
                                        "toc": _u(rng, 0.4, 0.75), "tds": _u(rng, 0.05, 0.2),
                                        "chloride": _u(rng, 0.05, 0.2)}),
        "Tr_2": Component(tag="treatment", capacity=_u(rng, 200, 320),
                          outflow_rate=_u(rng, 0.9, 0.98),
                          removal_rate={"cod": _u(rng, 0.4, 0.75), "tss": _u(rng, 0.4, 0.75),
                                        "toc": _u(rng, 0.4, 0.75), "tds": _u(rng, 0.05, 0.2),
                                        "chloride": _u(rng, 0.05, 0.2)}),
        "Tr_3": Component(tag="treatment", capacity=_u(rng, 160, 280),
                          outflow_rate=_u(rng, 0.88, 0.96),
                          removal_rate=_flat(rng, pids, 0.5, 0.85)),
        "Tr_4": Component(tag="treatment", capacity=_u(rng, 120, 220),
                          outflow_rate=_u(rng, 0.75, 0.9),
                          removal_rate={p: _u(rng, 0.6, 0.9) for p in pids if p != "tds"},
                          exit_quality={"tds": _u(rng, 100, 200)}),
        "Tr_5": Component(tag="treatment", capacity=_u(rng, 120, 220),
                          outflow_rate=_u(rng, 0.93, 0.99),
                          removal_rate=_flat(rng, pids, 0.3, 0.6)),
        "Tr_7": Component(tag="treatment", capacity=_u(rng, 100, 200),
                          outflow_rate=_u(rng, 0.95, 1.0),
                          removal_rate=_flat(rng, pids, 0.2, 0.5)),
        "Use_1": Component(tag="application", capacity=_u(rng, 80, 160),
                           outflow_rate=_u(rng, 0.85, 0.95),
                           quality_max={"cod": _u(rng, 100, 180), "tds": _u(rng, 500, 900)}),
        "App_2": Component(tag="application", demand=_u(rng, 30, 70),
                           quality_max={"cod": _u(rng, 80, 150), "tds": _u(rng, 400, 800)}),
        "D_1": Component(tag="discharge",
                         quality_max={"cod": _u(rng, 120, 240), "toc": _u(rng, 50, 120)}),
    }
    edges = [
        Edge("FW_1", "Tr_1"), Edge("WWS_1", "Tr_1"),
        Edge("FW_1", "Tr_2"), Edge("WWS_1", "Tr_2"),
        Edge("Tr_1", "Tr_3"), Edge("Tr_2", "Tr_3"),
        Edge("Tr_1", "Tr_4"), Edge("Tr_7", "Tr_4"),
        Edge("Tr_2", "Tr_5"), Edge("FW_2", "Tr_5"),
        Edge("Tr_3", "Tr_7"),
        Edge("Tr_4", "Use_1"), Edge("FW_2", "Use_1"),
        Edge("Tr_5", "App_2"), Edge("Use_1", "App_2"),
        Edge("Use_1", "D_1"),
    ]
    obj = Objective(kind="total_flow", sense="min", scope=["FW_1", "FW_2"])
    return Network(pollutants=[Pollutant(p) for p in pids],
                   components=comps, edges=edges, objective=obj)


def chem_b(seed: int = 0) -> Network:
    """Chem-a plus an alternative polishing unit; the two polishing routes
    are exclusive options, and the usage block takes a third inlet."""
    net = chem_a(seed)
    rng = np.random.default_rng(seed + 1000)
    comps = dict(net.components)
    comps["Tr_6"] = Component(tag="treatment", capacity=_u(rng, 100, 200),
                              outflow_rate=_u(rng, 0.9, 0.98),
                              removal_rate=_flat(rng, CHEM_POLLUTANTS, 0.4, 0.8))
    edges = []
    for e in net.edges:
        if e.src == "Tr_3" and e.dst == "Tr_7":
            edges.append(Edge("Tr_3", "Tr_7", option="polish_a"))
        else:
            edges.append(Edge(e.src, e.dst, capacity=e.capacity, option=e.option))
    edges.append(Edge("Tr_3", "Tr_6", option="polish_b"))
    edges.append(Edge("Tr_6", "Use_1"))
    return Network(pollutants=list(net.pollutants), components=comps,
                   edges=edges, objective=net.objective)


def hard_chain(n_blends: int = 6) -> Network:
    """A ladder of two-inlet treatments with throttleable feeds and no
    quality limits: nearly every mixing state is feasible, so an exact
    walk has to visit close to the full state space."""
    pids = ["cod"]
    comps: dict[str, Component] = {}
    edges: list[Edge] = []
    for i in range(1, n_blends + 2):
        comps[f"P_{i}"] = Component(tag="wastewater_source", capacity=10.0 + i,
                                    quality={"cod": 100.0 + 10.0 * i})
    prev = "P_1"
    for i in range(1, n_blends):
        node = f"B_{i}"
        comps[node] = Component(tag="treatment", capacity=500.0, outflow_rate=0.97,
                                removal_rate={"cod": 0.3})
        edges.append(Edge(prev, node))
        edges.append(Edge(f"P_{i + 1}", node))
        prev = node
    comps["R"] = Component(tag="discharge")
    edges.append(Edge(prev, "R"))
    edges.append(Edge(f"P_{n_blends + 1}", "R"))
    obj = Objective(kind="total_flow", sense="max", scope=["R"])
    return Network(pollutants=[Pollutant(p) for p in pids],
                   components=comps, edges=edges, objective=obj)


def oracle_instance(rng, parts: int) -> Network:
    """Tiny layout whose continuous optimum sits on the mixing grid.

    The two fixed supplies are chosen as k and parts-k shares of a common
    step, so the blend ratio the optimum needs is exactly representable;
    the optional side branch tops up at a capacity on the search grid.
    """
    s = float(rng.choice([0.1, 0.2, 0.5]))
    k = int(rng.integers(1, parts))
    q1 = round(k * s, 6)
    q2 = round((parts - k) * s, 6)
    rr = _u(rng, 0.2, 0.8)
    sr = _u(rng, 0.85, 1.0, 2)
    comps = {
        "P_1": Component(tag="wastewater_source", supply=q1, quality={"cod": _u(rng, 50, 150)}),
        "P_2": Component(tag="wastewater_source", supply=q2, quality={"cod": _u(rng, 50, 150)}),
        "M": Component(tag="treatment", outflow_rate=sr, removal_rate={"cod": rr}),
        "R_1": Component(tag="discharge"),
    }
    edges = [Edge("P_1", "M"), Edge("P_2", "M"), Edge("M", "R_1")]
    scope = ["M"]
    if rng.random() < 0.5:
        cap = round(float(rng.integers(1, 9)) * 0.25, 6)
        comps["P_3"] = Component(tag="wastewater_source", capacity=cap,
                                 quality={"cod": _u(rng, 50, 150)})
        comps["S"] = Component(tag="treatment", outflow_rate=_u(rng, 0.85, 1.0, 2),
                               removal_rate={"cod": _u(rng, 0.2, 0.8)})
        comps["R_2"] = Component(tag="discharge")
        edges += [Edge("P_3", "S"), Edge("S", "R_2")]
        scope = ["M", "S"]
    if rng.random() < 0.4:
        worst = max(comps[p].quality["cod"] for p in ("P_1", "P_2"))
        comps["M"].quality_max = {"cod": round(worst * 2, 3)}
    obj = Objective(kind="total_flow", sense="max", scope=scope)
    return Network(pollutants=[Pollutant("cod")], components=comps,
                   edges=edges, objective=obj)


def wide_instance(rng, inlets: int = 3) -> Network:
    """One node fed by several equal-capacity sources. Folding the wide
    inlet makes every stage a small-integer blend, so a grid with enough
    parts represents the all-at-capacity optimum exactly."""
    u = float(rng.choice([0.4, 0.8, 1.2]))
    comps: dict[str, Component] = {}
    edges: list[Edge] = []
    for i in range(1, inlets + 1):
        pid = f"P_{i}"
        comps[pid] = Component(tag="wastewater_source", capacity=u,
                               quality={"cod": _u(rng, 40, 160)})
        edges.append(Edge(pid, "W"))
    comps["W"] = Component(tag="treatment", outflow_rate=_u(rng, 0.9, 1.0, 2),
                           removal_rate={"cod": _u(rng, 0.2, 0.7)})
    comps["R"] = Component(tag="discharge")
    edges.append(Edge("W", "R"))
    obj = Objective(kind="total_flow", sense="max", scope=["W"])
    return Network(pollutants=[Pollutant("cod")], components=comps,
                   edges=edges, objective=obj)


def random_small(rng, max_components: int = 10, max_blends: int = 2,
                 n_pollutants: int = 2) -> Network:
    """Random small DAG with mixed provider styles, treatment modes and
    bounds. Instances may be infeasible; structure is always valid."""
    pids = [f"p{i}" for i in range(1, n_pollutants + 1)]
    for _ in range(60):
        n_prov = int(rng.integers(1, 4))
        n_mid = int(rng.integers(1, 5))
        n_rec = int(rng.integers(1, 3))
        if n_prov + n_mid + n_rec > max_components:
            continue
        provs = [f"P_{i}" for i in range(1, n_prov + 1)]
        mids = [f"M_{i}" for i in range(1, n_mid + 1)]
        recs = [f"R_{i}" for i in range(1, n_rec + 1)]
        comps: dict[str, Component] = {}
        edges: list[Edge] = []
        blends = 0

        for pid_ in provs:
            if rng.random() < 0.5:
                comps[pid_] = Component(tag="wastewater_source",
                                        supply=round(float(rng.integers(4, 40)) * 0.5, 6),
                                        quality=_flat(rng, pids, 10, 100))
            else:
                comps[pid_] = Component(tag="wastewater_source",
                                        capacity=round(float(rng.integers(4, 40)) * 0.5, 6),
                                        quality=_flat(rng, pids, 10, 100))
        upstream = list(provs)
        for i, mid in enumerate(mids):
            want = 2 if (blends < max_blends and rng.random() < 0.5 and len(upstream) >= 2) else 1
            srcs = list(rng.choice(len(upstream), size=want, replace=False))
            for si in srcs:
                edges.append(Edge(upstream[si], mid))
            if want == 2:
                blends += 1
            if rng.random() < 0.25:
                comps[mid] = Component(tag="treatment",
                                       outflow_rate=_u(rng, 0.8, 1.0, 2),
                                       exit_quality=_flat(rng, pids, 5, 25))
            else:
                comps[mid] = Component(tag="treatment",
                                       outflow_rate=_u(rng, 0.8, 1.0, 2),
                                       removal_rate=_flat(rng, pids, 0.2, 0.9))
            if rng.random() < 0.3:
                comps[mid].capacity = round(float(rng.integers(10, 60)), 6)
            if rng.random() < 0.2:
                comps[mid].quality_max = _flat(rng, pids, 60, 200)
            upstream.append(mid)
        pool = mids if mids else provs
        for rec in recs:
            want = 2 if (blends < max_blends and rng.random() < 0.3 and len(pool) >= 2) else 1
            srcs = list(rng.choice(len(pool), size=want, replace=False))
            for si in srcs:
                edges.append(Edge(pool[si], rec))
            if want == 2:
                blends += 1
            tag = "application" if rng.random() < 0.5 else "discharge"
            comps[rec] = Component(tag=tag)
            if rng.random() < 0.5:
                comps[rec].demand = round(float(rng.integers(2, 12)), 6)
            if rng.random() < 0.5:
                comps[rec].quality_max = _flat(rng, pids, 40, 160)

        seen = set()
        dedup = []
        for e in edges:
            if (e.src, e.dst) not in seen:
                seen.add((e.src, e.dst))
                dedup.append(e)
        edges = dedup
        connected = {e.src for e in edges} | {e.dst for e in edges}
        if any(cid not in connected for cid in comps):
            continue

        if rng.random() < 0.3:
            for mid in mids:
                comps[mid].variable_cost = _u(rng, 0.5, 3)
                if rng.random() < 0.5:
                    comps[mid].fixed_cost = _u(rng, 1, 10)
            obj = Objective(kind="cost", sense="min", scope=list(mids))
        elif rng.random() < 0.5:
            obj = Objective(kind="total_flow", sense="max", scope=list(mids))
        else:
            obj = Objective(kind="total_flow", sense="min", scope=list(provs))
        net = Network(pollutants=[Pollutant(p) for p in pids],
                      components=comps, edges=edges, objective=obj)
        from .network import validate
        if not validate(net):
            return net
    raise RuntimeError("could not draw a valid instance")


SHAPES = {
    "refinery": refinery,
    "refinery-current": refinery_current,
    "chem-a": chem_a,
    "chem-b": chem_b,
}


def generate(shape: str, seed: int = 0) -> Network:
    if shape not in SHAPES:
        raise ValueError(f"unknown shape {shape!r}; pick one of {sorted(SHAPES)}")
    return SHAPES[shape](seed)
