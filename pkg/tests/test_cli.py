import os
import subprocess
import sys

import numpy as np
import pytest
import yaml

from conftest import SCENARIOS
from plankit.cli import main
from plankit.problem import read_path, validate_path
from plankit.scenario import ScenarioError, load_scenario, load_suite


def scen(name):
    return os.path.join(SCENARIOS, name)


def _kv(text):
    out = {}
    for line in text.splitlines():
        k, _, v = line.partition(": ")
        out[k] = v
    return out


def _write(path, doc):
    path.write_text(yaml.safe_dump(doc))
    return str(path)


@pytest.fixture(autouse=True)
def _in_tmp(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    monkeypatch.delenv("PLAN_LOG_LEVEL", raising=False)


# ---- plan ----

def test_plan_empty_scenario_solves(tmp_path, capsys):
    assert main(["plan", scen("empty.yaml"), "-o", "out.path"]) == 0
    out = _kv(capsys.readouterr().out)
    assert out["status"] == "Solved" and out["path_file"] == "out.path"
    for key in ("scenario", "planner", "cost", "time", "iterations", "states_created", "validity_checks",
                "motion_checks", "seed", "waypoints", "log_file"):
        assert key in out
    scenario = load_scenario(scen("empty.yaml"))
    sig, states = read_path(tmp_path / "out.path", scenario.problem.space)
    assert validate_path(scenario.problem, states)
    assert len(states) == int(out["waypoints"])
    assert (tmp_path / "out.path.log").exists()


def test_plan_default_output_name(tmp_path, capsys):
    assert main(["plan", scen("empty.yaml"), "--quiet"]) == 0
    assert capsys.readouterr().out == ""
    assert (tmp_path / "empty.path").exists()


def test_plan_wall_exits_2(tmp_path, capsys):
    assert main(["plan", scen("wall.yaml")]) == 2
    out = _kv(capsys.readouterr().out)
    assert out["status"] == "Failed" and out["cost"] == "none" and out["path_file"] == "none"
    assert not (tmp_path / "wall.path").exists()


def test_plan_zero_budget_is_timeout(capsys):
    assert main(["plan", scen("empty.yaml"), "termination.iterations=0"]) == 2
    assert _kv(capsys.readouterr().out)["status"] == "Timeout"


def test_override_echoed(capsys):
    assert main(["plan", scen("empty.yaml"), "planner.params.goal_bias=0.2"]) == 0
    assert _kv(capsys.readouterr().out)["param.goal_bias"] == "0.2"


def test_plan_is_reproducible(tmp_path):
    assert main(["plan", scen("box.yaml"), "-o", "a.path", "-q", "--seed", "5"]) == 0
    assert main(["plan", scen("box.yaml"), "-o", "b.path", "-q", "--seed", "5"]) == 0
    assert (tmp_path / "a.path").read_bytes() == (tmp_path / "b.path").read_bytes()
    assert main(["plan", scen("box.yaml"), "-o", "c.path", "-q", "--seed", "6"]) == 0
    assert (tmp_path / "a.path").read_bytes() != (tmp_path / "c.path").read_bytes()


def test_seed_precedence(capsys):
    main(["plan", scen("empty.yaml")])
    assert _kv(capsys.readouterr().out)["seed"] == "1"
    main(["plan", scen("empty.yaml"), "planner.params.seed=9"])
    assert _kv(capsys.readouterr().out)["seed"] == "9"
    main(["plan", scen("empty.yaml"), "planner.params.seed=9", "--seed", "4"])
    assert _kv(capsys.readouterr().out)["seed"] == "4"


@pytest.mark.parametrize("override, key_path", [
    ("planner.bogus=1", "planner.bogus"),
    ("planner.params.goal_bias=1.5", "planner.params.goal_bias"),
    ("planner.name=rrtstar", "planner.name"),
    ("space.bounds=[[0,1]]", "start"),
    ("robot.kind=tank", "robot.kind"),
    ("robot.radius=-1", "robot"),
    ("scene.circles=[{center: [0.5, 0.5], radius: -1}]", "scene.circles.0.radius"),
    ("goal.threshold=-0.1", "goal.threshold"),
    ("termination.iterations=-1", "termination.iterations"),
    ("seed=abc", "seed"),
])
def test_bad_scenario_names_key_path(override, key_path, capsys):
    assert main(["plan", scen("empty.yaml"), override]) == 1
    err = capsys.readouterr().err
    assert key_path in err, err


def test_scenario_errors_carry_key_path():
    with pytest.raises(ScenarioError) as info:
        load_scenario(scen("sphere.yaml"), ["space.constraint.foo=1"])
    assert info.value.key_path == "space.constraint.foo"


def test_start_in_collision_exits_1(capsys):
    assert main(["plan", scen("box.yaml"), "start=[0.5,0.5]"]) == 1
    assert "start" in capsys.readouterr().err


def test_usage_errors_exit_1(capsys, monkeypatch):
    assert main([]) == 1
    assert main(["fly"]) == 1
    assert main(["plan"]) == 1
    assert main(["plan", "missing.yaml"]) == 1
    assert "missing.yaml" in capsys.readouterr().err
    assert main(["plan", scen("empty.yaml"), "novalue"]) == 1
    monkeypatch.setenv("PLAN_LOG_LEVEL", "loud")
    assert main(["plan", scen("empty.yaml")]) == 1
    assert "PLAN_LOG_LEVEL" in capsys.readouterr().err
    monkeypatch.setenv("PLAN_LOG_LEVEL", "debug")
    assert main(["plan", scen("empty.yaml"), "-q"]) == 0
    assert "planning empty" in capsys.readouterr().err


def test_malformed_yaml_exits_1(tmp_path, capsys):
    (tmp_path / "bad.yaml").write_text("space: [unclosed\n")
    assert main(["plan", "bad.yaml"]) == 1
    assert "bad.yaml" in capsys.readouterr().err


def test_all_bundled_scenarios_load():
    for name in ("empty", "wall", "box", "sphere", "dubins"):
        s = load_scenario(scen(f"{name}.yaml"))
        assert s.name == name


def test_console_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "plankit.cli", "plan", scen("wall.yaml"), "-q"],
                          capture_output=True, text=True, cwd=tmp_path)
    assert proc.returncode == 2
    proc = subprocess.run([sys.executable, "-m", "plankit.cli", "plan", scen("empty.yaml"), "bogus=1"],
                          capture_output=True, text=True, cwd=tmp_path)
    assert proc.returncode == 1 and "bogus" in proc.stderr


# ---- benchmark and report ----

def test_benchmark_then_report_identical_csv(tmp_path, capsys):
    assert main(["benchmark", scen("suite.yaml"), "-o", "bench", "-j", "1", "runs=2"]) == 0
    out = _kv(capsys.readouterr().out)
    assert out["runs"] == str(2 * 4 * 2)
    csv1 = (tmp_path / "bench" / "summary.csv").read_bytes()
    assert main(["report", "bench/benchmark.log", "-o", "again"]) == 0
    assert (tmp_path / "again" / "summary.csv").read_bytes() == csv1
    for svg in ("empty_time.svg", "box_cost.svg"):
        assert (tmp_path / "bench" / svg).read_bytes() == (tmp_path / "again" / svg).read_bytes()
    assert main(["report", "bench/benchmark.log", "-q"]) == 0
    assert (tmp_path / "bench" / "summary.csv").read_bytes() == csv1


def test_benchmark_parallel_matches_serial(tmp_path):
    assert main(["benchmark", scen("suite.yaml"), "-o", "s", "-j", "1", "runs=2", "-q"]) == 0
    assert main(["benchmark", scen("suite.yaml"), "-o", "p", "-j", "2", "runs=2", "-q"]) == 0
    from plankit.bench import parse_log
    a = parse_log(tmp_path / "s" / "benchmark.log")
    b = parse_log(tmp_path / "p" / "benchmark.log")
    assert [r.deterministic_view() for r in a] == [r.deterministic_view() for r in b]


def test_one_by_two_by_three(tmp_path):
    _write(tmp_path / "s.yaml", {
        "scenarios": {"empty": scen("empty.yaml")},
        "planners": [{"name": "rrt"}, {"name": "prm"}],
        "runs": 3, "termination": {"iterations": 200}, "master_seed": 1})
    assert main(["benchmark", "s.yaml", "-o", "out", "-q", "-j", "1"]) == 0
    rows = (tmp_path / "out" / "summary.csv").read_text().splitlines()
    assert len(rows) == 3
    assert all(r.split(",")[2] == "3" for r in rows[1:])


def test_suite_missing_scenario_file(tmp_path, capsys):
    _write(tmp_path / "s.yaml", {"scenarios": {"gone": "nowhere.yaml"}, "planners": [{"name": "rrt"}],
                                 "runs": 1, "termination": {"iterations": 10}, "master_seed": 1})
    assert main(["benchmark", "s.yaml"]) == 1
    err = capsys.readouterr().err
    assert "scenarios.gone" in err and "nowhere.yaml" in err


def test_suite_errors_name_key_path(tmp_path):
    base = {"scenarios": {"e": scen("empty.yaml")}, "planners": [{"name": "rrt"}], "runs": 1,
            "termination": {"iterations": 10}, "master_seed": 1}
    with pytest.raises(ScenarioError) as info:
        load_suite(_write(tmp_path / "a.yaml", dict(base, runs=0)))
    assert info.value.key_path == "runs"
    with pytest.raises(ScenarioError) as info:
        load_suite(_write(tmp_path / "b.yaml", dict(base, planners=[{"name": "rrt", "params": {"k": 1}}])))
    assert "planners.0" in info.value.key_path
    with pytest.raises(ScenarioError):
        load_suite(_write(tmp_path / "c.yaml", dict(base, planners=[{"name": "rrt"}, {"name": "rrt"}])))


def test_report_version_error(tmp_path, capsys):
    assert main(["benchmark", scen("suite.yaml"), "-o", "b", "-q", "runs=1", "-j", "1"]) == 0
    log = tmp_path / "b" / "benchmark.log"
    log.write_text(log.read_text().replace("format_version: 1", "format_version: 2"))
    assert main(["report", str(log)]) == 1
    assert "version" in capsys.readouterr().err


def test_report_missing_log(capsys):
    assert main(["report", "none.log"]) == 1


def test_benchmark_seed_override(tmp_path):
    from plankit.bench import read_log
    assert main(["benchmark", scen("suite.yaml"), "-o", "a", "-q", "runs=1", "-j", "1", "--seed", "7"]) == 0
    meta, recs = read_log(tmp_path / "a" / "benchmark.log")
    assert meta["master_seed"] == "7" and meta["deterministic"] == "true"
    assert np.all([r.run_index == 0 for r in recs])
