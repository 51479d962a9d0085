"""Command line behavior, end to end in a temp directory."""

import json

import pytest

from waternet.cli import main
from waternet.network import (Component, Edge, Network, Objective, Pollutant,
                              to_canonical_text)
from waternet.solve import solve_network


def mixer(demand: float | None = None) -> Network:
    net = Network(
        pollutants=[Pollutant("cod")],
        components={
            "A": Component(tag="fresh_water_source", capacity=1.0, quality={"cod": 0.0}),
            "B": Component(tag="wastewater_source", supply=0.5, quality={"cod": 100.0}),
            "W": Component(tag="treatment", quality_max={"cod": 40.0}),
            "R": Component(tag="discharge", demand=demand),
        },
        edges=[Edge("A", "W"), Edge("B", "W"), Edge("W", "R")],
        objective=Objective(kind="total_flow", sense="max", scope=["W"]),
    )
    return net


@pytest.fixture()
def net_file(tmp_path):
    path = tmp_path / "net.json"
    path.write_text(to_canonical_text(mixer()))
    return str(path)


def test_validate_ok(net_file, capsys):
    assert main(["validate", net_file]) == 0
    assert capsys.readouterr().out.strip() == "ok"


def test_validate_reports_violations(tmp_path, capsys):
    net = mixer()
    net.edges.append(Edge("W", "W"))
    path = tmp_path / "bad.json"
    path.write_text(to_canonical_text(net))
    assert main(["validate", str(path)]) == 1
    assert "self-loop" in capsys.readouterr().out


def test_optimize_writes_exact_solution_bytes(net_file, tmp_path):
    out = tmp_path / "sol.json"
    assert main(["optimize", net_file, "--parts", "3", "-o", str(out)]) == 0
    assert out.read_text() == solve_network(mixer(), parts=3).to_text()
    doc = json.loads(out.read_text())
    assert doc["status"] == "optimal"
    assert doc["objective"] == pytest.approx(1.5, abs=1e-6)


def test_optimize_infeasible_exit_code(tmp_path):
    path = tmp_path / "net.json"
    path.write_text(to_canonical_text(mixer(demand=9.0)))
    out = tmp_path / "sol.json"
    assert main(["optimize", str(path), "--parts", "3", "-o", str(out)]) == 1
    assert json.loads(out.read_text())["status"] == "infeasible"


def test_optimize_quality_flags_relax(net_file, tmp_path):
    out = tmp_path / "sol.json"
    assert main(["optimize", net_file, "--parts", "2", "-o", str(out)]) == 1
    assert main(["optimize", net_file, "--parts", "2", "-o", str(out),
                 "--no-entry-limits", "--no-exit-limits"]) == 0


def test_optimize_budget_refusal(net_file, capsys):
    assert main(["optimize", net_file, "--parts", "3", "--budget", "2"]) == 1
    assert "error:" in capsys.readouterr().err


def test_check_round_trip(net_file, tmp_path):
    sol = tmp_path / "sol.json"
    main(["optimize", net_file, "--parts", "3", "-o", str(sol)])
    flows_file = tmp_path / "flows.json"
    flows_file.write_text(json.dumps(json.loads(sol.read_text())["flows"]))
    report = tmp_path / "report.json"
    assert main(["check", net_file, str(flows_file), "-o", str(report)]) == 0
    doc = json.loads(report.read_text())
    assert doc["feasible"] is True
    bad = tmp_path / "bad_flows.json"
    bad.write_text(json.dumps({"A->W": 0.1, "B->W": 0.5, "W->R": 0.6}))
    assert main(["check", net_file, str(bad), "-o", str(report)]) == 1
    assert json.loads(report.read_text())["violations"]


def test_check_accepts_solution_document(net_file, tmp_path):
    # a solution file is the natural input: no manual flow extraction
    sol = tmp_path / "sol.json"
    main(["optimize", net_file, "--parts", "3", "-o", str(sol)])
    report = tmp_path / "report.json"
    assert main(["check", net_file, str(sol), "-o", str(report)]) == 0
    assert json.loads(report.read_text())["feasible"] is True


def test_check_rejects_non_numeric_flows(net_file, tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"A->W": {"nested": 1.0}}))
    assert main(["check", net_file, str(bad)]) == 1
    assert "error:" in capsys.readouterr().err


def test_export_lp(net_file, tmp_path, capsys):
    out = tmp_path / "model.lp"
    assert main(["export-lp", net_file, "--parts", "3", "-o", str(out)]) == 0
    text = out.read_text()
    assert text.startswith("\\ waternet model export")
    assert "Binary" in text and text.rstrip().endswith("End")


def test_profile_counts(tmp_path):
    plant = tmp_path / "plant.json"
    assert main(["gen", "--shape", "refinery", "--seed", "1",
                 "-o", str(plant)]) == 0
    prof = tmp_path / "prof.json"
    assert main(["profile", str(plant), "--parts", "100", "-o", str(prof)]) == 0
    doc = json.loads(prof.read_text())
    # option edges add their two selector binaries on top of the ladder
    assert doc["n_binary"] == 1228
    assert doc["n_continuous"] == 80


@pytest.mark.parametrize("shape", ["refinery", "refinery-current", "chem-a", "chem-b"])
def test_gen_shapes_validate(tmp_path, shape):
    path = tmp_path / "g.json"
    assert main(["gen", "--shape", shape, "--seed", "4", "-o", str(path)]) == 0
    assert main(["validate", str(path)]) == 0


def test_gen_deterministic_per_seed(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    main(["gen", "--shape", "chem-a", "--seed", "7", "-o", str(a)])
    main(["gen", "--shape", "chem-a", "--seed", "7", "-o", str(b)])
    assert a.read_text() == b.read_text()


def test_trials_jobs_parity(net_file, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({
        "trials": 4, "seed": 2, "parts": 8,
        "parameters": [
            {"target": "B", "field": "supply", "low": 0.3, "high": 0.6}],
    }))
    serial = tmp_path / "serial.json"
    parallel = tmp_path / "parallel.json"
    assert main(["trials", net_file, str(cfg), "-o", str(serial)]) == 0
    assert main(["trials", net_file, str(cfg), "--jobs", "2",
                 "-o", str(parallel)]) == 0
    assert serial.read_text() == parallel.read_text()
    report = json.loads(serial.read_text())
    assert sum(report["counts"].values()) == 4


def test_trials_rejects_bad_config(net_file, tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"trials": 0}))
    assert main(["trials", net_file, str(cfg)]) == 1
    assert "error:" in capsys.readouterr().err


def test_compare(net_file, tmp_path):
    variant = tmp_path / "variant.json"
    net = mixer()
    net.components["B"].supply = 0.25
    variant.write_text(to_canonical_text(net))
    out = tmp_path / "cmp.json"
    assert main(["compare", net_file, str(variant), "--parts", "8",
                 "-o", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["delta"]["intake"] == pytest.approx(-1.0 / 3.0, abs=1e-6)
    infeasible = tmp_path / "inf.json"
    infeasible.write_text(to_canonical_text(mixer(demand=9.0)))
    assert main(["compare", net_file, str(infeasible), "--parts", "8",
                 "-o", str(out)]) == 1


def test_lp_solve_subcommand(tmp_path, capsys):
    model = tmp_path / "m.lp"
    model.write_text(
        "Maximize\n obj: x\nSubject To\n r1: x <= 2\nBounds\n x <= 5\nEnd\n")
    solution = tmp_path / "m.sol"
    assert main(["lp-solve", str(model), str(solution)]) == 0
    assert "optimal" in capsys.readouterr().out
    assert "status optimal" in solution.read_text()


def test_missing_file_is_usage_error(capsys):
    assert main(["validate", "/nonexistent/net.json"]) == 2
    assert "error:" in capsys.readouterr().err


def test_missing_argument_exits_two():
    with pytest.raises(SystemExit) as exc:
        main(["optimize"])
    assert exc.value.code == 2
