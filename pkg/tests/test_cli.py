import csv
import json
from pathlib import Path

import numpy as np
import pytest

from acxlab.cli import build_chart, catalog_listing, main, run_scenario
from acxlab.core.chart import AlmostComplexChart
from acxlab.suites import random_polynomial_chart

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"


def write(tmp_path, doc, name="scenario.json"):
    p = tmp_path / name
    p.write_text(json.dumps(doc))
    return p


def rows(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


def test_validate_standard(tmp_path):
    doc = {"name": "v", "chart": {"builtin": "jst", "n": 2}, "operation": "validate", "seed": 0}
    assert run_scenario(write(tmp_path, doc), tmp_path / "out") == 0
    summary = json.loads((tmp_path / "out" / "summary.json").read_text())
    assert summary["operation"] == "validate"
    assert all(float(r["norm"]) == 0.0 for r in rows(tmp_path / "out" / "validate.csv"))


def test_model_transform_suite_includes_flattening(tmp_path):
    out = tmp_path / "out"
    assert run_scenario(SCENARIOS / "model_transform.json", out) == 0
    checks = {r["check"]: r for r in rows(out / "checks.csv")}
    assert "flatten_to_zero" in checks
    assert all(r["passed"] == "true" for r in checks.values())


@pytest.mark.parametrize("patch", [
    {"params": {"tolerance": -1}},
    {"bogus": 1},
    {"operation": "unknown"},
    {"chart": {"builtin": "nowhere"}},
])
def test_malformed_scenarios_exit_1(tmp_path, patch, capsys):
    doc = {"name": "bad", "chart": {"builtin": "siegel"}, "operation": "limit-experiment",
           "params": {"fields": [{"builtin": "const"}]}, "seed": 0}
    doc.update(patch)
    assert run_scenario(write(tmp_path, doc), tmp_path / "out") == 1
    assert "error" in capsys.readouterr().err


def test_sampling_operation_requires_seed(tmp_path):
    doc = {"name": "noseed", "chart": {"builtin": "jst", "n": 2}, "operation": "validate"}
    assert run_scenario(write(tmp_path, doc), tmp_path / "out") == 1


def test_invariant_failure_exit_2(tmp_path):
    doc = {"name": "line", "chart": {"builtin": "jst", "n": 2}, "operation": "foliate",
           "params": {"surface": "complex-line"}, "seed": 0}
    out = tmp_path / "out"
    assert run_scenario(write(tmp_path, doc), out) == 2
    report = json.loads((out / "failure.json").read_text())
    assert report["scenario"] == "line"


def test_unreadable_scenario_exit_1(tmp_path):
    p = tmp_path / "broken.json"
    p.write_text("{not json")
    assert run_scenario(p, tmp_path / "out") == 1


def test_chart_json_roundtrip_through_builder():
    chart = random_polynomial_chart(2, np.random.default_rng(1))
    doc = json.loads(json.dumps(chart.to_json()))
    back = build_chart(doc)
    assert isinstance(back, AlmostComplexChart)
    assert back.entries() == chart.entries()


def test_determinism_across_threads(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    doc = json.loads((SCENARIOS / "siegel_fatou.json").read_text())
    doc["params"]["grid"].update(nx=4, ny=4)
    path = write(tmp_path, doc)
    assert run_scenario(path, a, threads=1) == 0
    assert run_scenario(path, b, threads=4) == 0
    assert (a / "fatou.csv").read_bytes() == (b / "fatou.csv").read_bytes()


def test_catalog_listing(capsys):
    listing = catalog_listing()
    assert {"jst", "siegel", "model(n,mu)"} <= set(listing["charts"])
    assert listing["fields"]["exp_inv"]["bound"] == 1.0
    assert sorted(listing["suites"]) == [f"A{i:02d}" for i in range(1, 12)]
    assert main(["catalog"]) == 0
    assert json.loads(capsys.readouterr().out)["version"] == listing["version"]


def test_main_run(tmp_path):
    assert main(["run", "--scenario", str(SCENARIOS / "jst_validate.json"), "--out", str(tmp_path)]) == 0
