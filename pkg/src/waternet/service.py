"""HTTP service: store networks, queue runs, serve results.

Documents persist as canonical JSON files under the store directory
(written to a temp name, then renamed, so readers never see a partial
file). A single worker thread drains the run queue; the result bytes it
stores are exactly what the command line writes for the same input.
Runs snapshot the referenced networks at submission, so a later PUT
never changes what an already queued run computes.
"""

from __future__ import annotations

import itertools
import json
import os
import queue
import re
import threading
from contextlib import asynccontextmanager

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, Response

from . import scenario
from .milp import ModelError
from .network import ParseError, parse_network, to_canonical_text, validate
from .simplex import NumericalBreakdown
from .solve import BudgetExceeded, MissingSolver, SolveLimits, SolverCrash, solve_network

_ID_RE = re.compile(r"^[A-Za-z0-9][A-Za-z0-9._-]{0,63}$")
_KIND_KEYS = {
    "optimize": {"kind", "network", "parts", "backend", "mode", "limits"},
    "trials": {"kind", "network", "config", "jobs"},
    "compare": {"kind", "network", "config", "parts", "limits"},
}
_LIMIT_KEYS = {"max_time", "max_gap", "budget"}


def _atomic_write(path: str, text: str) -> None:
    tmp = f"{path}.tmp.{os.getpid()}"
    with open(tmp, "w") as fh:
        fh.write(text)
    os.replace(tmp, path)


def create_app(store_dir: str, queue_size: int = 64) -> FastAPI:
    @asynccontextmanager
    async def lifespan(_app: FastAPI):
        yield
        work.put(None)
        thread.join(timeout=5)

    app = FastAPI(title="waternet service", lifespan=lifespan)
    # the browser UI may be served from another origin; the API carries no
    # credentials, so a permissive policy exposes nothing new
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )
    nets_dir = os.path.join(store_dir, "networks")
    runs_dir = os.path.join(store_dir, "runs")
    os.makedirs(nets_dir, exist_ok=True)
    os.makedirs(runs_dir, exist_ok=True)

    lock = threading.Lock()
    runs: dict[str, dict] = {}
    work: queue.Queue = queue.Queue(maxsize=queue_size)

    highest = 0
    for fname in sorted(os.listdir(runs_dir)):
        if not fname.endswith(".json") or fname.endswith((".sol.json", ".net.json")):
            continue
        with open(os.path.join(runs_dir, fname)) as fh:
            record = json.load(fh)
        if record.get("status") in ("queued", "running"):
            record["status"] = "failed"
            record["detail"] = "interrupted by restart"
            _atomic_write(os.path.join(runs_dir, fname), json.dumps(record, indent=2) + "\n")
        runs[record["id"]] = record
        num = record["id"].lstrip("r")
        if num.isdigit():
            highest = max(highest, int(num))
    counter = itertools.count(highest + 1)

    def net_path(nid: str) -> str:
        return os.path.join(nets_dir, f"{nid}.json")

    def run_path(rid: str) -> str:
        return os.path.join(runs_dir, f"{rid}.json")

    def sol_path(rid: str) -> str:
        return os.path.join(runs_dir, f"{rid}.sol.json")

    def snap_path(rid: str, which: str = "base") -> str:
        return os.path.join(runs_dir, f"{rid}.{which}.net.json")

    def save_run(record: dict) -> None:
        _atomic_write(run_path(record["id"]), json.dumps(record, indent=2) + "\n")

    def _execute(record: dict) -> tuple[str, str | None]:
        params = record["params"]
        with open(snap_path(record["id"])) as fh:
            net = parse_network(fh.read())
        if record["kind"] == "trials":
            config = scenario.TrialConfig.from_obj(params["config"])
            report = scenario.run_trials(net, config, jobs=params["jobs"])
            return scenario.report_text(report), None
        if record["kind"] == "compare":
            with open(snap_path(record["id"], "variant")) as fh:
                variant = parse_network(fh.read())
            report = scenario.compare_networks(
                net, variant, parts=params["parts"],
                limits=SolveLimits(**params["limits"]))
            return json.dumps(report, indent=2, sort_keys=True) + "\n", None
        sol = solve_network(net, parts=params["parts"],
                            limits=SolveLimits(**params["limits"]),
                            backend=params["backend"],
                            conflict_mode=params["mode"])
        return sol.to_text(), sol.status

    def worker() -> None:
        while True:
            rid = work.get()
            if rid is None:
                return
            with lock:
                record = runs[rid]
                record["status"] = "running"
                save_run(record)
            try:
                text, result_status = _execute(record)
                with lock:
                    _atomic_write(sol_path(rid), text)
                    record["status"] = "done"
                    if result_status is not None:
                        record["result_status"] = result_status
                    save_run(record)
            except (BudgetExceeded, NumericalBreakdown, ModelError, MissingSolver,
                    SolverCrash, ParseError, ValueError, RuntimeError, OSError) as exc:
                with lock:
                    record["status"] = "failed"
                    record["detail"] = f"{type(exc).__name__}: {exc}"
                    save_run(record)

    thread = threading.Thread(target=worker, name="waternet-runs", daemon=True)
    thread.start()

    @app.put("/networks/{nid}")
    async def put_network(nid: str, request: Request):
        if not _ID_RE.match(nid):
            return JSONResponse({"error": "invalid network id"}, status_code=422)
        try:
            net = parse_network((await request.body()).decode("utf-8"))
        except (ParseError, UnicodeDecodeError) as exc:
            return JSONResponse({"error": str(exc)}, status_code=422)
        problems = validate(net)
        if problems:
            return JSONResponse(
                {"error": "network is not well-formed",
                 "violations": [v.as_obj() for v in problems]},
                status_code=422)
        with lock:
            _atomic_write(net_path(nid), to_canonical_text(net))
        return {"id": nid}

    @app.get("/networks/{nid}")
    def get_network(nid: str):
        if not _ID_RE.match(nid) or not os.path.exists(net_path(nid)):
            return JSONResponse({"error": "no such network"}, status_code=404)
        with open(net_path(nid), "rb") as fh:
            return Response(content=fh.read(), media_type="application/json")

    @app.get("/networks")
    def list_networks():
        ids = sorted(f[:-5] for f in os.listdir(nets_dir) if f.endswith(".json"))
        return {"networks": ids}

    @app.delete("/networks/{nid}")
    def delete_network(nid: str):
        if not _ID_RE.match(nid):
            return JSONResponse({"error": "invalid network id"}, status_code=422)
        with lock:
            if not os.path.exists(net_path(nid)):
                return JSONResponse({"error": "no such network"}, status_code=404)
            busy = [r["id"] for r in runs.values()
                    if r["status"] in ("queued", "running")
                    and (r["network"] == nid
                         or r["params"].get("config", {}).get("variant") == nid)]
            if busy:
                return JSONResponse(
                    {"error": "network is referenced by active runs", "runs": sorted(busy)},
                    status_code=409)
            os.remove(net_path(nid))
        return {"deleted": nid}

    def _parse_limits(limits_obj) -> dict | None:
        if not isinstance(limits_obj, dict) or set(limits_obj) - _LIMIT_KEYS:
            return None
        try:
            return {"max_time": float(limits_obj.get("max_time", 90.0)),
                    "max_gap": float(limits_obj.get("max_gap", 0.01)),
                    "budget": int(limits_obj.get("budget", 1 << 20))}
        except (TypeError, ValueError):
            return None

    @app.post("/runs")
    async def create_run(request: Request):
        try:
            body = await request.json()
        except json.JSONDecodeError:
            return JSONResponse({"error": "body is not JSON"}, status_code=422)
        if not isinstance(body, dict) or "network" not in body:
            return JSONResponse({"error": "body must name a network"}, status_code=422)
        kind = body.get("kind", "optimize")
        if kind not in _KIND_KEYS:
            return JSONResponse({"error": f"unknown run kind {kind!r}"}, status_code=422)
        extra = set(body) - _KIND_KEYS[kind]
        if extra:
            return JSONResponse({"error": f"unknown keys {sorted(extra)}"}, status_code=422)
        nid = body["network"]
        variant_id = None
        if kind == "trials":
            if not isinstance(body.get("config"), dict):
                return JSONResponse({"error": "trials need a config object"}, status_code=422)
            try:
                config = scenario.TrialConfig.from_obj(body["config"])
                jobs = int(body.get("jobs", 1))
            except (ParseError, TypeError, ValueError) as exc:
                return JSONResponse({"error": str(exc)}, status_code=422)
            if not 1 <= jobs <= 16:
                return JSONResponse({"error": "jobs must be between 1 and 16"}, status_code=422)
            params = {"config": config.to_obj(), "jobs": jobs}
        else:
            limits = _parse_limits(body.get("limits", {}))
            if limits is None:
                return JSONResponse({"error": "bad limits"}, status_code=422)
            try:
                parts = int(body.get("parts", 8))
            except (TypeError, ValueError):
                return JSONResponse({"error": "bad run parameters"}, status_code=422)
            if parts < 2:
                return JSONResponse({"error": "parts must be at least 2"}, status_code=422)
            if kind == "compare":
                config_obj = body.get("config")
                if not isinstance(config_obj, dict) or set(config_obj) != {"variant"} \
                        or not isinstance(config_obj["variant"], str):
                    return JSONResponse(
                        {"error": "compare needs config {\"variant\": network id}"},
                        status_code=422)
                variant_id = config_obj["variant"]
                params = {"config": {"variant": variant_id}, "parts": parts,
                          "limits": limits}
            else:
                backend = body.get("backend", "exact")
                if backend not in ("exact", "external"):
                    return JSONResponse({"error": f"unknown backend {backend!r}"},
                                        status_code=422)
                mode = body.get("mode", "exclusive")
                if mode not in ("exclusive", "all"):
                    return JSONResponse({"error": f"unknown mode {mode!r}"}, status_code=422)
                params = {"parts": parts, "backend": backend, "mode": mode,
                          "limits": limits}
        with lock:
            for ref in (nid,) if variant_id is None else (nid, variant_id):
                if not _ID_RE.match(ref) or not os.path.exists(net_path(ref)):
                    return JSONResponse({"error": f"no such network {ref!r}"},
                                        status_code=404)
            record = {
                "id": f"r{next(counter):06d}",
                "kind": kind,
                "network": nid,
                "status": "queued",
                "params": params,
            }
            try:
                work.put_nowait(record["id"])
            except queue.Full:
                return JSONResponse({"error": "run queue is full"}, status_code=429)
            with open(net_path(nid)) as fh:
                _atomic_write(snap_path(record["id"]), fh.read())
            if variant_id is not None:
                with open(net_path(variant_id)) as fh:
                    _atomic_write(snap_path(record["id"], "variant"), fh.read())
            runs[record["id"]] = record
            save_run(record)
        return JSONResponse(record, status_code=201)

    @app.get("/runs")
    def list_runs():
        with lock:
            return {"runs": [runs[k] for k in sorted(runs)]}

    @app.get("/runs/{rid}")
    def get_run(rid: str):
        with lock:
            record = runs.get(rid)
            if record is None:
                return JSONResponse({"error": "no such run"}, status_code=404)
            return dict(record)

    @app.get("/runs/{rid}/solution")
    def get_solution(rid: str):
        with lock:
            record = runs.get(rid)
        if record is None:
            return JSONResponse({"error": "no such run"}, status_code=404)
        if record["status"] != "done":
            return JSONResponse(
                {"error": "run has not produced a solution", "status": record["status"]},
                status_code=409)
        with open(sol_path(rid), "rb") as fh:
            return Response(content=fh.read(), media_type="application/json")

    return app
