import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from waternet import gen
from waternet.network import (Component, Edge, Network, Objective, ParseError,
                              Pollutant, Role, classify, from_obj, parse_network,
                              to_canonical_text, to_obj, validate)


def tiny() -> Network:
    return Network(
        pollutants=[Pollutant("cod"), Pollutant("bod")],
        components={
            "P": Component(tag="wastewater_source", supply=4.0,
                           quality={"cod": 100.0, "bod": 50.0}),
            "M": Component(tag="treatment", outflow_rate=0.9,
                           removal_rate={"cod": 0.5, "bod": 0.4}),
            "R": Component(tag="discharge"),
        },
        edges=[Edge("P", "M"), Edge("M", "R")],
        objective=Objective(kind="total_flow", sense="max", scope=["M"]),
    )


def test_roles_from_incidence():
    roles = classify(tiny())
    assert roles["P"] is Role.PROVIDER
    assert roles["M"] is Role.INTERMEDIATE
    assert roles["R"] is Role.RECEIVER


def test_valid_network_has_no_violations():
    assert validate(tiny()) == []


def test_canonical_text_round_trip_is_byte_stable():
    text = to_canonical_text(tiny())
    again = to_canonical_text(parse_network(text))
    assert text == again


def test_component_and_pollutant_order_is_normalized():
    net = tiny()
    shuffled = Network(
        pollutants=list(reversed(net.pollutants)),
        components=dict(reversed(list(net.components.items()))),
        edges=net.edges, objective=net.objective)
    assert to_canonical_text(shuffled) == to_canonical_text(net)


def test_edge_order_is_preserved():
    net = tiny()
    obj = to_obj(net)
    assert [e["from"] for e in obj["edges"]] == ["P", "M"]


@pytest.mark.parametrize("mutate,code", [
    (lambda n: n.edges.append(Edge("M", "Ghost")), "dangling-edge"),
    (lambda n: n.edges.append(Edge("M", "M")), "self-loop"),
    (lambda n: n.edges.append(Edge("P", "M")), "duplicate-edge"),
    (lambda n: n.edges.append(Edge("R", "P")), "source-has-inlet"),
    (lambda n: setattr(n.components["M"], "outflow_fixed", 3.0), "flow-mode-conflict"),
    (lambda n: n.components["M"].exit_quality.update({"cod": 5.0}), "quality-mode-conflict"),
    (lambda n: setattr(n.components["M"], "capacity", -1.0), "bad-value"),
    (lambda n: setattr(n.components["M"], "tag", "warp_drive"), "unknown-tag"),
    (lambda n: n.components.update({"X": Component(tag="tank")}), "isolated"),
    (lambda n: setattr(n.objective, "kind", "entropy"), "bad-objective"),
    (lambda n: setattr(n.objective, "scope", ["Ghost"]), "bad-objective"),
    (lambda n: setattr(n.objective, "scope", []), "bad-objective"),
])
def test_violation_codes(mutate, code):
    net = tiny()
    mutate(net)
    assert code in {v.code for v in validate(net)}


def test_cycle_detection():
    net = tiny()
    net.components["B"] = Component(tag="tank")
    net.edges = [Edge("P", "M"), Edge("M", "B"), Edge("B", "M"), Edge("M", "R")]
    codes = {v.code for v in validate(net)}
    assert "cycle" in codes


def test_bound_order_violation():
    net = tiny()
    net.components["M"].quality_min = {"cod": 10.0}
    net.components["M"].quality_max = {"cod": 5.0}
    assert "bound-order" in {v.code for v in validate(net)}


def test_unknown_pollutant_reference():
    net = tiny()
    net.components["M"].removal_rate["mercury"] = 0.5
    assert "unknown-pollutant" in {v.code for v in validate(net)}


def test_parse_rejects_unknown_keys():
    doc = to_obj(tiny())
    doc["comment"] = "hello"
    with pytest.raises(ParseError):
        from_obj(doc)


def test_parse_rejects_unknown_component_keys():
    doc = to_obj(tiny())
    doc["components"]["P"]["color"] = "blue"
    with pytest.raises(ParseError):
        from_obj(doc)


def test_parse_rejects_bool_as_number():
    doc = to_obj(tiny())
    doc["components"]["P"]["supply"] = True
    with pytest.raises(ParseError):
        from_obj(doc)


def test_parse_rejects_bad_text():
    with pytest.raises(ParseError):
        parse_network("{not json")
    with pytest.raises(ParseError):
        parse_network(json.dumps([1, 2, 3]))


def test_objective_is_optional():
    doc = to_obj(tiny())
    del doc["objective"]
    net = from_obj(doc)
    assert net.objective is None


@settings(max_examples=30, deadline=None)
@given(st.integers(min_value=0, max_value=10_000))
def test_random_networks_round_trip(seed):
    rng = np.random.default_rng(seed)
    net = gen.random_small(rng)
    text = to_canonical_text(net)
    assert to_canonical_text(parse_network(text)) == text
