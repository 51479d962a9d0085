"""HTTP service: document store, run queue, and failure modes."""

import json
import os
import time

import pytest
from fastapi.testclient import TestClient

from waternet import gen, scenario
from waternet.network import (Component, Edge, Network, Objective, Pollutant,
                              to_canonical_text)
from waternet.service import create_app
from waternet.solve import SolveLimits, solve_network


def mixer() -> Network:
    return Network(
        pollutants=[Pollutant("cod")],
        components={
            "A": Component(tag="fresh_water_source", capacity=1.0, quality={"cod": 0.0}),
            "B": Component(tag="wastewater_source", supply=0.5, quality={"cod": 100.0}),
            "W": Component(tag="treatment", quality_max={"cod": 40.0}),
            "R": Component(tag="discharge"),
        },
        edges=[Edge("A", "W"), Edge("B", "W"), Edge("W", "R")],
        objective=Objective(kind="total_flow", sense="max", scope=["W"]),
    )


@pytest.fixture()
def client(tmp_path):
    app = create_app(str(tmp_path / "store"))
    with TestClient(app) as c:
        yield c


def put_mixer(client, nid="plant"):
    r = client.put(f"/networks/{nid}", content=to_canonical_text(mixer()))
    assert r.status_code == 200, r.text
    return nid


def wait_run(client, rid, timeout=60.0):
    deadline = time.monotonic() + timeout
    while time.monotonic() < deadline:
        rec = client.get(f"/runs/{rid}").json()
        if rec["status"] in ("done", "failed"):
            return rec
        time.sleep(0.02)
    raise AssertionError(f"run {rid} did not finish: {rec}")


def test_network_round_trip(client):
    put_mixer(client)
    got = client.get("/networks/plant")
    assert got.status_code == 200
    assert got.content.decode() == to_canonical_text(mixer())
    assert client.get("/networks").json() == {"networks": ["plant"]}


def test_cross_origin_browser_clients_are_allowed(client):
    r = client.get("/networks", headers={"origin": "http://localhost:5173"})
    assert r.headers.get("access-control-allow-origin") == "*"
    pre = client.options("/runs", headers={
        "origin": "http://localhost:5173",
        "access-control-request-method": "POST",
    })
    assert pre.status_code == 200
    assert "POST" in pre.headers.get("access-control-allow-methods", "")


def test_network_store_is_canonical(client):
    # accepted bytes are re-serialized, not stored verbatim
    doc = json.loads(to_canonical_text(mixer()))
    scrambled = json.dumps(doc, indent=7)
    assert client.put("/networks/plant", content=scrambled).status_code == 200
    assert client.get("/networks/plant").content.decode() == to_canonical_text(mixer())


@pytest.mark.parametrize("nid", ["", "a b", ".hidden", "x" * 65, "sl/ash"])
def test_put_invalid_id(client, nid):
    r = client.put(f"/networks/{nid}", content="{}")
    # empty and slashed ids never even match the route
    assert r.status_code in (404, 405, 422)


def test_put_rejects_bad_documents(client):
    assert client.put("/networks/p", content="{not json").status_code == 422
    net = mixer()
    net.edges.append(Edge("W", "W"))
    r = client.put("/networks/p", content=to_canonical_text(net))
    assert r.status_code == 422
    assert r.json()["violations"]


def test_get_missing_network(client):
    assert client.get("/networks/nope").status_code == 404


def test_delete_network(client):
    put_mixer(client)
    assert client.delete("/networks/plant").status_code == 200
    assert client.get("/networks/plant").status_code == 404
    assert client.delete("/networks/plant").status_code == 404


def test_run_lifecycle_and_solution_bytes(client):
    put_mixer(client)
    r = client.post("/runs", json={"network": "plant", "parts": 3})
    assert r.status_code == 201
    rid = r.json()["id"]
    assert rid == "r000001"
    assert r.json()["status"] == "queued"
    rec = wait_run(client, rid)
    assert rec["status"] == "done"
    assert rec["result_status"] == "optimal"
    sol = client.get(f"/runs/{rid}/solution")
    assert sol.status_code == 200
    expected = solve_network(mixer(), parts=3).to_text()
    assert sol.content.decode() == expected


def test_run_rejections(client):
    put_mixer(client)
    post = lambda body: client.post("/runs", json=body)
    assert post({"network": "ghost"}).status_code == 404
    assert post({"network": "plant", "oops": 1}).status_code == 422
    assert post({"network": "plant", "backend": "magic"}).status_code == 422
    assert post({"network": "plant", "mode": "sometimes"}).status_code == 422
    assert post({"network": "plant", "parts": 1}).status_code == 422
    assert post({"network": "plant", "limits": {"speed": 1}}).status_code == 422
    assert post({"network": "plant", "parts": "soft"}).status_code == 422
    assert client.post("/runs", content=b"}{").status_code == 422


def test_failed_run_has_no_solution(client):
    put_mixer(client)
    r = client.post("/runs", json={"network": "plant", "parts": 3,
                                   "limits": {"budget": 2}})
    rid = r.json()["id"]
    rec = wait_run(client, rid)
    assert rec["status"] == "failed"
    assert "BudgetExceeded" in rec["detail"]
    sol = client.get(f"/runs/{rid}/solution")
    assert sol.status_code == 409
    assert client.get("/runs/missing/solution").status_code == 404
    assert client.get("/runs/missing").status_code == 404


def test_delete_blocked_while_run_active(client, tmp_path):
    put_mixer(client, "busy")
    slow = gen.hard_chain(5)
    r1 = client.put("/networks/slow", content=to_canonical_text(slow))
    assert r1.status_code == 200, r1.text
    first = client.post("/runs", json={
        "network": "slow", "parts": 2,
        "limits": {"max_time": 2.0, "budget": 1 << 40}}).json()["id"]
    second = client.post("/runs", json={"network": "busy", "parts": 3}).json()["id"]
    blocked = client.delete("/networks/busy")
    if blocked.status_code == 409:
        assert second in blocked.json()["runs"]
    wait_run(client, first)
    wait_run(client, second)
    assert client.delete("/networks/busy").status_code == 200


def test_restart_marks_stranded_runs_failed(tmp_path):
    store = tmp_path / "store"
    runs_dir = store / "runs"
    os.makedirs(runs_dir)
    stranded = {"id": "r000007", "network": "plant", "status": "running",
                "params": {"parts": 3, "backend": "exact", "mode": "exclusive",
                           "limits": {"max_time": 90.0, "max_gap": 0.01,
                                      "budget": 1 << 20}}}
    (runs_dir / "r000007.json").write_text(json.dumps(stranded) + "\n")
    app = create_app(str(store))
    with TestClient(app) as client:
        rec = client.get("/runs/r000007").json()
        assert rec["status"] == "failed"
        assert rec["detail"] == "interrupted by restart"
        # the id counter resumes past everything on disk
        put_mixer(client)
        fresh = client.post("/runs", json={"network": "plant", "parts": 3})
        assert fresh.json()["id"] == "r000008"
        wait_run(client, "r000008")


def test_run_listing_sorted(client):
    put_mixer(client)
    ids = [client.post("/runs", json={"network": "plant", "parts": 3}).json()["id"]
           for _ in range(3)]
    listed = [r["id"] for r in client.get("/runs").json()["runs"]]
    assert listed == sorted(ids)
    for rid in ids:
        wait_run(client, rid)


def test_trials_run_kind(client):
    net = gen.refinery(seed=4)
    assert client.put("/networks/ref", content=to_canonical_text(net)).status_code == 200
    config = {"trials": 6, "seed": 5, "parts": 2, "limits": {"max_time": 60.0},
              "parameters": [{"target": "WWS_3", "field": "supply",
                              "low": 40.0, "high": 80.0}]}
    r = client.post("/runs", json={"kind": "trials", "network": "ref",
                                   "config": config, "jobs": 1})
    assert r.status_code == 201, r.text
    assert r.json()["kind"] == "trials"
    rec = wait_run(client, r.json()["id"])
    assert rec["status"] == "done", rec
    body = client.get(f"/runs/{rec['id']}/solution")
    report = json.loads(body.content)
    assert sum(report["counts"].values()) == 6
    # exclusive mode: every optimal trial lands in exactly one frequency bucket
    assert sum(report["frequencies"].values()) == report["counts"]["optimal"]
    expected = scenario.report_text(
        scenario.run_trials(net, scenario.TrialConfig.from_obj(config), jobs=1))
    assert body.content.decode() == expected


def test_compare_run_kind(client):
    base = gen.refinery_current(seed=1)
    variant = gen.refinery(seed=1)
    assert client.put("/networks/cur", content=to_canonical_text(base)).status_code == 200
    assert client.put("/networks/new", content=to_canonical_text(variant)).status_code == 200
    r = client.post("/runs", json={"kind": "compare", "network": "cur",
                                   "config": {"variant": "new"}, "parts": 2})
    assert r.status_code == 201, r.text
    rec = wait_run(client, r.json()["id"])
    assert rec["status"] == "done", rec
    report = json.loads(client.get(f"/runs/{rec['id']}/solution").content)
    assert report["base"]["kpis"]["reused_pct"] == 0.0
    assert report["variant"]["kpis"]["reused_pct"] > 0.0
    expected = scenario.compare_networks(base, variant, parts=2,
                                         limits=SolveLimits())
    assert report == json.loads(json.dumps(expected))


def test_run_kind_rejections(client):
    put_mixer(client)
    post = lambda body: client.post("/runs", json=body).status_code
    assert post({"kind": "bake", "network": "plant"}) == 422
    assert post({"kind": "trials", "network": "plant"}) == 422
    assert post({"kind": "trials", "network": "plant",
                 "config": {"trials": 0}}) == 422
    assert post({"kind": "trials", "network": "plant", "config": {"trials": 1},
                 "jobs": 0}) == 422
    assert post({"kind": "trials", "network": "plant", "config": {"trials": 1},
                 "parts": 2}) == 422
    assert post({"kind": "compare", "network": "plant"}) == 422
    assert post({"kind": "compare", "network": "plant",
                 "config": {"variant": "ghost"}}) == 404
    assert post({"kind": "compare", "network": "plant",
                 "config": {"variant": "plant", "extra": 1}}) == 422


def test_run_snapshots_network_at_submission(client):
    # occupy the worker so the next run stays queued while we overwrite
    slow = gen.hard_chain(5)
    assert client.put("/networks/slow", content=to_canonical_text(slow)).status_code == 200
    put_mixer(client)
    blocker = client.post("/runs", json={"network": "slow", "parts": 2,
                                         "limits": {"max_time": 2.0}}).json()["id"]
    queued = client.post("/runs", json={"network": "plant", "parts": 3}).json()["id"]
    # overwrite the stored document with an infeasible variant
    broken = mixer()
    broken.components["R"].demand = 50.0
    assert client.put("/networks/plant", content=to_canonical_text(broken)).status_code == 200
    wait_run(client, blocker)
    rec = wait_run(client, queued)
    # the queued run solved the document as submitted, not the overwrite
    assert rec["status"] == "done" and rec["result_status"] == "optimal"
