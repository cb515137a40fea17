import json

import pytest

from smanifold.cli import Report, RunConfig, emit_json, main, run
from smanifold.records import Check


def test_passing_run_exits_zero(tmp_path, capsys):
    out = tmp_path / "r.json"
    assert main(["flat", "--m", "1", "--t", "1", "--points", "3", "--json", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["schema_version"] == "1"
    assert doc["overall_pass"] is True
    assert doc["config"]["label"] == "flat:1,1"
    names = [(c["name"], c["connection"]) for c in doc["checks"]]
    assert names == sorted(names)
    assert {"name", "connection", "anchor", "max_residual", "comparison", "tol", "pass"} <= set(doc["checks"][0])
    assert "overall: PASS" in capsys.readouterr().out


def test_impossible_tolerance_exits_one():
    assert main(["flat", "--m", "1", "--t", "1", "--points", "2", "--tol", "1e-30", "-q"]) == 1


@pytest.mark.parametrize(
    "argv",
    [
        ["flat", "--points", "0"],
        ["flat", "--tol", "0"],
        ["flat", "--tol", "-1e-3"],
        ["flat", "--m", "0"],
        ["sphere", "--s", "1"],
        ["flat", "--n", "2"],
        ["torus"],
        ["flat", "--connection", "levi"],
    ],
)
def test_usage_errors_exit_two(argv, capsys):
    assert main(argv) == 2


def test_connection_selection():
    r = run(RunConfig("flat", (1, 2), connection="ssm", points=2))
    assert {c.connection for c in r.checks} == {"none", "ssm"}


def test_json_is_deterministic_up_to_wall_time(tmp_path):
    cfg = dict(example="sphere", params=(1, 2), points=4, seed=11)
    a = json.loads(emit_json(run(RunConfig(**cfg))))
    b = json.loads(emit_json(run(RunConfig(**cfg))))
    a.pop("wall_time_s"), b.pop("wall_time_s")
    assert a == b
    c = json.loads(emit_json(run(RunConfig(**{**cfg, "seed": 12}))))
    c.pop("wall_time_s")
    assert c != a


def test_numbers_use_17_significant_digits_and_nonfinite_is_null():
    rep = Report({"label": "x"}, [Check("a", 0.1, 1.0), Check("b", float("nan"), 1.0)])
    text = emit_json(rep).decode()
    assert "0.10000000000000001" in text
    doc = json.loads(text)
    assert doc["checks"][1]["max_residual"] is None
    assert doc["checks"][1]["pass"] is False
    assert doc["overall_pass"] is False


def test_empty_report_is_an_error():
    with pytest.raises(ValueError):
        emit_json(Report({}, []))
