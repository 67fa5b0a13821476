import csv
import json
from pathlib import Path

import pytest

from corridorlimits.cli import main

GOLDEN = Path(__file__).parent / "golden"


def run(tmp_path, *argv):
    return main(["--out-dir", str(tmp_path), *map(str, argv)])


@pytest.fixture(scope="module")
def pipeline(tmp_path_factory):
    out = tmp_path_factory.mktemp("pipe")
    assert main(["--out-dir", str(out), "fixtures", "--scenarios", "300"]) == 0
    assert main(["--out-dir", str(out), "label", "--case", str(out / "case.json"),
                 "--scenarios", str(out / "scenarios.csv")]) == 0
    return out


def test_label_three_bus(tmp_path, capsys):
    assert run(tmp_path, "fixtures", "--case", "three-bus", "--scenarios", 4) == 0
    assert run(tmp_path, "label", "--case", tmp_path / "case.json", "--scenarios", tmp_path / "scenarios.csv") == 0
    rows = (tmp_path / "labels.csv").read_text().splitlines()
    assert rows[0] == "scenario_id,label_n0,label_l1,aggregate"
    assert len(rows) == 5
    manifest = json.loads((tmp_path / "manifest_label.json").read_text())
    assert str(tmp_path / "labels.csv") in manifest["artifacts"]
    assert "4 scenarios" in capsys.readouterr().out


def test_external_label_column_passes_through(tmp_path, capsys):
    assert run(tmp_path, "fixtures", "--case", "three-bus", "--scenarios", 4) == 0
    path = tmp_path / "scenarios.csv"
    lines = path.read_text().splitlines()
    lines[0] += ",label_transient"
    lines[1:] = [l + ("," + str(i % 2)) for i, l in enumerate(lines[1:])]
    path.write_text("\n".join(lines) + "\n")
    assert run(tmp_path, "label", "--case", tmp_path / "case.json", "--scenarios", path) == 0
    out = capsys.readouterr().out
    assert "transient" in out and "external column passed through" in out
    with open(tmp_path / "labels.csv") as fh:
        recs = list(csv.DictReader(fh))
    assert [r["label_transient"] for r in recs] == ["0", "1", "0", "1"]
    assert all(r["aggregate"] == "0" for r in recs[::2])


def test_missing_input_names_path(tmp_path, capsys):
    missing = tmp_path / "nope.json"
    assert run(tmp_path, "label", "--case", missing, "--scenarios", missing) == 2
    assert str(missing) in capsys.readouterr().err
    assert not list(tmp_path.iterdir())


def test_bad_config_rejected(tmp_path, capsys):
    cfg = tmp_path / "c.toml"
    cfg.write_text("[clustering]\nants = 5\nbogus = 1\n")
    assert main(["--config", str(cfg), "--out-dir", str(tmp_path), "fixtures"]) == 2
    assert "bogus" in capsys.readouterr().err


def test_rules_default_k_and_sweep(pipeline, tmp_path):
    common = ["--case", pipeline / "case.json", "--scenarios", pipeline / "scenarios.csv",
              "--labels", pipeline / "labels.csv"]
    assert run(tmp_path, "rules", *common) == 0
    manifest = json.loads((tmp_path / "manifest_rules.json").read_text())
    assert manifest["params"]["k"] == 20
    assert (tmp_path / "rules_k20.json").exists()
    sweep = tmp_path / "sweep"
    assert run(sweep, "rules", *common, "--sweep", "2,5,10") == 0
    assert sorted(p.name for p in sweep.glob("rules_k*.json")) == ["rules_k10.json", "rules_k2.json", "rules_k5.json"]
    rows = (sweep / "banding.csv").read_text().splitlines()
    assert rows[0] == "method,max_upper_A,max_upper_B"
    assert [r.split(",")[0] for r in rows[1:]] == ["conservative", "k=2", "k=5", "k=10"]


def test_optimize_coupled_and_report(pipeline, tmp_path, capsys):
    common = ["--case", pipeline / "case.json", "--scenarios", pipeline / "scenarios.csv",
              "--labels", pipeline / "labels.csv"]
    assert run(tmp_path, "rules", *common, "--k", 3) == 0
    case = pipeline / "case.json"
    assert run(tmp_path, "optimize", "--case", case, "--regime", "coupled",
               "--rules", tmp_path / "rules_k3.json", "--clusters", tmp_path / "clusters_k3.json") == 0
    doc = json.loads((tmp_path / "solution_coupled.json").read_text())
    assert all(p["active_cluster"] in (0, 1, 2) for p in doc["periods"])
    assert run(tmp_path, "optimize", "--case", case, "--regime", "conservative",
               "--limits", tmp_path / "conservative.json") == 0

    single = tmp_path / "one"
    assert run(single, "report", tmp_path / "solution_coupled.json") == 0
    rows = (single / "comparison.csv").read_text().splitlines()
    assert len(rows) == 2 and "cost_vs_first_pct" not in rows[0]
    assert run(tmp_path, "optimize", "--case", case, "--regime", "none") == 0
    assert run(tmp_path, "optimize", "--case", case, "--regime", "independent",
               "--rules", tmp_path / "rules_k3.json", "--clusters", tmp_path / "clusters_k3.json") == 0
    sols = [tmp_path / f"solution_{r}.json" for r in ("none", "conservative", "independent", "coupled")]
    assert run(tmp_path, "report", *sols) == 0
    rows = (tmp_path / "comparison.csv").read_text().splitlines()
    assert len(rows) == 5 and rows[0].endswith("cost_vs_first_pct")

    # clusters from another k do not match the rule set
    assert run(tmp_path, "rules", *common, "--k", 2) == 0
    capsys.readouterr()
    assert run(tmp_path, "optimize", "--case", case, "--regime", "coupled",
               "--rules", tmp_path / "rules_k3.json", "--clusters", tmp_path / "clusters_k2.json") == 2
    assert "different cluster model" in capsys.readouterr().err


def test_report_refuses_mixed_cases(tmp_path, capsys):
    a, b = tmp_path / "a", tmp_path / "b"
    assert run(a, "fixtures", "--case", "three-bus", "--scenarios", 1) == 0
    assert run(b, "fixtures", "--scenarios", 1) == 0
    assert run(a, "optimize", "--case", a / "case.json", "--regime", "none") == 0
    assert run(b, "optimize", "--case", b / "case.json", "--regime", "none") == 0
    capsys.readouterr()
    assert run(tmp_path, "report", a / "solution_none.json", b / "solution_none.json") == 2
    assert "different cases" in capsys.readouterr().err
    assert not (tmp_path / "comparison.csv").exists()


def test_traces_match_golden(tmp_path):
    assert run(tmp_path, "fixtures", "--scenarios", 10) == 0
    case = tmp_path / "case.json"
    assert run(tmp_path, "optimize", "--case", case, "--regime", "none") == 0
    assert run(tmp_path, "optimize", "--case", case, "--regime", "conservative", "--bound", 120) == 0
    assert run(tmp_path, "report", tmp_path / "solution_none.json", tmp_path / "solution_conservative.json") == 0
    with open(tmp_path / "traces.csv") as fh:
        got = list(csv.DictReader(fh))
    with open(GOLDEN / "traces_two_corridor.csv") as fh:
        want = list(csv.DictReader(fh))
    assert len(got) == len(want)
    for g, w in zip(got, want):
        assert (g["method"], g["t"], g["corridor"], g["cluster"]) == (w["method"], w["t"], w["corridor"], w["cluster"])
        for key in ("flow", "limit_lo", "limit_hi"):
            assert float(g[key]) == pytest.approx(float(w[key]), abs=1e-4)


def test_infeasible_exit_code(tmp_path, capsys):
    assert run(tmp_path, "fixtures", "--scenarios", 1) == 0
    doc = json.loads((tmp_path / "case.json").read_text())
    for d in doc["loads"]:
        d["demand"] = [v * 3 for v in d["demand"]]
    (tmp_path / "case.json").write_text(json.dumps(doc))
    assert run(tmp_path, "optimize", "--case", tmp_path / "case.json", "--regime", "none") == 3
    assert "infeasible" in capsys.readouterr().err
