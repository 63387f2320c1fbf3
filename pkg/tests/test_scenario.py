"""
场景加载、执行、对比报告与命令行测试
"""

import json
from pathlib import Path

import numpy as np
import pytest

from src.errors import ReportError, ScenarioError
from src.main import main
from src.records import MetricsStore
from src.scenario import (
    EXIT_NOT_CONVERGED,
    EXIT_OK,
    compare_report,
    load_scenario,
    parse_scenario,
    plan_scenario,
    run_scenario,
    simulate_scenario,
)

SCENARIO_DIR = Path(__file__).resolve().parent.parent / "scenarios"

QUICK = """\
name: quick
start_quad:
  - [0, 0, 0]
  - [0, 5, 0]
  - [0, 5, 5]
  - [0, 0, 5]
target:
  position: [12, 2.5, 2.5]
planner: fg
"""

ARTIFACTS = ("path.csv", "trajectory.csv", "sim.csv", "metrics.json")


def write_scenario(directory: Path, text: str, name: str = "scenario.yaml") -> str:
    path = directory / name
    path.write_text(text, encoding="utf-8")
    return str(path)


def base_data():
    return {
        "start_quad": [[0, 0, 0], [0, 5, 0], [0, 5, 5], [0, 0, 5]],
        "target": {"position": [12, 2.5, 2.5]},
    }


class TestLoadScenario:
    @pytest.mark.parametrize("path", sorted(SCENARIO_DIR.glob("*.yaml")), ids=lambda p: p.stem)
    def test_shipped_scenarios_load(self, path):
        scenario = load_scenario(str(path))
        assert scenario.name == path.stem
        assert scenario.start_quad.points.shape == (4, 3)

    def test_defaults(self, tmp_path):
        scenario = load_scenario(write_scenario(tmp_path, QUICK))
        assert scenario.planner == "fg"
        assert scenario.uses_fg() and not scenario.uses_ls()
        assert scenario.target.kind == "position"
        assert scenario.betas == [0.0]
        assert scenario.simulate

    def test_name_defaults_to_file_stem(self, tmp_path):
        text = QUICK.replace("name: quick\n", "")
        assert load_scenario(write_scenario(tmp_path, text, "front.yaml")).name == "front"

    def test_betas(self):
        data = base_data()
        data.update(planner="both", ls={"alpha": 1000, "betas": [0, 400]})
        scenario = parse_scenario(data)
        assert [cfg.beta for cfg in scenario.ls_configs()] == [0.0, 400.0]
        assert all(cfg.alpha == 1000.0 for cfg in scenario.ls_configs())

    def test_ls_normalization_switch(self):
        data = base_data()
        data.update(planner="ls", ls={"normalize_flux": False})
        assert not parse_scenario(data).ls_configs()[0].normalize_flux

    def test_distribution_target_is_seeded(self):
        data = base_data()
        data["target"] = {"distribution": {"mean": 200, "sigma": 100, "count": 10, "seed": 7}}
        first = parse_scenario(data).target.build()
        second = parse_scenario(data).target.build()
        np.testing.assert_array_equal(first.members, second.members)
        assert parse_scenario(data).seed == 7

    def test_yaml_syntax_error_has_line(self, tmp_path):
        text = QUICK.replace("  position: [12, 2.5, 2.5]", "  position: [12, 2.5, 2.5")
        with pytest.raises(ScenarioError) as info:
            load_scenario(write_scenario(tmp_path, text))
        assert info.value.line is not None
        assert "行" in str(info.value)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ScenarioError):
            load_scenario(str(tmp_path / "missing.yaml"))

    @pytest.mark.parametrize("mutate, field", [
        (lambda d: d.pop("target"), "target"),
        (lambda d: d.pop("start_quad"), "start_quad"),
        (lambda d: d.update(start_quad=[[0, 0, 0], [1, 0, 0], [1, 1, 0]]), "start_quad"),
        (lambda d: d.update(colour="red"), "<root>"),
        (lambda d: d["target"].update(members=[[1, 2, 3]]), "target"),
        (lambda d: d.update(target={"distribution": {"mean": 0, "sigma": 1, "count": 3}}),
         "target.distribution.seed"),
        (lambda d: d.update(planner="rrt"), "planner"),
        (lambda d: d.update(fg={"side_length": "five"}), "fg.side_length"),
        (lambda d: d.update(fg={"hessian": "newton"}), "fg"),
        (lambda d: d.update(ls={"beta": 1, "betas": [1]}), "ls"),
        (lambda d: d.update(ls={"normalize_flux": "no"}), "ls.normalize_flux"),
        (lambda d: d.update(fg={"coc_tolerance": 1.5}), "fg"),
        (lambda d: d.update(limits={"v_max": -1}), "limits"),
        (lambda d: d.update(trajectory={"dt": 0}), "trajectory.dt"),
        (lambda d: d.update(simulate="yes"), "simulate"),
    ])
    def test_field_errors(self, mutate, field):
        data = base_data()
        mutate(data)
        with pytest.raises(ScenarioError) as info:
            parse_scenario(data)
        assert info.value.field == field

    def test_empty_file(self, tmp_path):
        with pytest.raises(ScenarioError):
            load_scenario(write_scenario(tmp_path, ""))


class TestRunScenario:
    def test_end_to_end(self, tmp_path):
        scenario = load_scenario(write_scenario(tmp_path, QUICK))
        out = tmp_path / "out"
        assert run_scenario(scenario, str(out)) == EXIT_OK
        for name in ARTIFACTS:
            assert (out / name).exists()
        metrics = MetricsStore(str(out)).read_validated()
        assert metrics["primary_method"] == "fg"
        assert metrics["converged"] is True
        assert metrics["max_speed_mps"] <= 10.0 + 1e-6
        assert metrics["max_accel_mps2"] <= 5.0 + 1e-6
        assert metrics["max_tracking_error_m"] < 1.0
        assert "wall_time_s" not in metrics
        np.testing.assert_allclose(metrics["per_method"]["fg"]["final_side_lengths_m"], 5.0, rtol=1e-2)

    def test_deterministic_outputs(self, tmp_path):
        scenario = load_scenario(write_scenario(tmp_path, QUICK))
        run_scenario(scenario, str(tmp_path / "a"))
        run_scenario(scenario, str(tmp_path / "b"))
        for name in ARTIFACTS:
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_both_planners_use_subdirectories(self, tmp_path):
        data = base_data()
        data.update(planner="both", ls={"betas": [0, 400], "max_iters": 1000}, simulate=False)
        out = tmp_path / "out"
        status = run_scenario(parse_scenario(data), str(out))
        assert status in (EXIT_OK, EXIT_NOT_CONVERGED)
        metrics = MetricsStore(str(out)).read_validated()
        assert set(metrics["per_method"]) == {"ls_beta0", "ls_beta400", "fg"}
        for method in metrics["per_method"]:
            assert (out / method / "path.csv").exists()
            assert not (out / method / "trajectory.csv").exists()

    def test_not_converged_writes_partial_outputs(self, tmp_path):
        data = base_data()
        data.update(target={"position": [200, 200, 200]}, fg={"max_outer_iters": 2})
        out = tmp_path / "out"
        assert run_scenario(parse_scenario(data), str(out)) == EXIT_NOT_CONVERGED
        metrics = MetricsStore(str(out)).read_validated()
        assert metrics["converged"] is False
        assert metrics["iterations"] == 2
        assert (out / "path.csv").exists()
        assert not (out / "trajectory.csv").exists()

    def test_plan_then_simulate(self, tmp_path):
        scenario = load_scenario(write_scenario(tmp_path, QUICK))
        out = tmp_path / "out"
        assert plan_scenario(scenario, str(out)) == EXIT_OK
        assert not (out / "trajectory.csv").exists()
        assert simulate_scenario(scenario, str(out)) == EXIT_OK
        assert (out / "sim.csv").exists()
        assert "max_tracking_error_m" in MetricsStore(str(out)).read_validated()["per_method"]["fg"]

    def test_followers_written(self, tmp_path):
        data = base_data()
        data.update(emit_followers=True, simulate=False)
        out = tmp_path / "out"
        run_scenario(parse_scenario(data), str(out))
        assert (out / "followers.csv").exists()

    def test_wall_time_recorded_on_request(self, tmp_path):
        data = base_data()
        data.update(record_wall_time=True, simulate=False)
        out = tmp_path / "out"
        run_scenario(parse_scenario(data), str(out))
        assert MetricsStore(str(out)).read_validated()["wall_time_s"] >= 0.0


def write_metrics(path: Path, target, per_method):
    per_method = {m: {"combined_length_m": v, "iterations": 1, "converged": True} for m, v in per_method.items()}
    first = next(iter(per_method.values()))
    MetricsStore(str(path)).write({"target": target, "combined_length_m": first["combined_length_m"],
                                   "per_method": per_method})
    return str(path)


class TestCompareReport:
    def test_two_targets(self, tmp_path):
        front = write_metrics(tmp_path / "front.json", [40, 40, 40],
                              {"ls_beta0": 455.0, "ls_beta400": 346.0, "fg": 345.0})
        rear = write_metrics(tmp_path / "rear.json", [-40, 40, 40],
                             {"ls_beta0": 500.0, "ls_beta400": 543.0, "fg": 354.0})
        table = compare_report([front, rear])
        assert table.rows == ["(40, 40, 40)", "(-40, 40, 40)"]
        assert table.methods == ["ls_beta0", "ls_beta400", "fg"]
        assert table.value("(-40, 40, 40)", "fg") == 354.0
        text = table.to_text()
        assert "543.0" in text

    def test_single_file(self, tmp_path):
        table = compare_report([write_metrics(tmp_path / "m.json", [1, 2, 3], {"fg": 10.0})])
        assert len(table.rows) == 1

    def test_csv_output(self, tmp_path):
        table = compare_report([write_metrics(tmp_path / "m.json", [1, 2, 3], {"fg": 10.5, "ls_beta0": 12.0})])
        table.write_csv(str(tmp_path / "comparison.csv"))
        lines = (tmp_path / "comparison.csv").read_text(encoding="utf-8").splitlines()
        assert lines == ["target,fg,ls_beta0", "\"(1, 2, 3)\",10.5,12"]

    def test_bad_file_is_named(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text(json.dumps({"per_method": {}}), encoding="utf-8")
        with pytest.raises(ReportError, match="broken.json"):
            compare_report([str(path)])

    def test_no_files(self):
        with pytest.raises(ReportError):
            compare_report([])


class TestCli:
    def test_run(self, tmp_path):
        scenario = write_scenario(tmp_path, QUICK)
        assert main(["--quiet", "run", "--scenario", scenario, "--out", str(tmp_path / "out")]) == 0
        assert (tmp_path / "out" / "metrics.json").exists()

    def test_bad_scenario_exit_code(self, tmp_path, capsys):
        scenario = write_scenario(tmp_path, "start_quad: [1, 2\n")
        assert main(["run", "--scenario", scenario]) == 1
        assert "错误" in capsys.readouterr().err

    def test_not_converged_exit_code(self, tmp_path):
        text = QUICK.replace("[12, 2.5, 2.5]", "[200, 200, 200]") + "fg:\n  max_outer_iters: 2\n"
        scenario = write_scenario(tmp_path, text)
        assert main(["plan", "--scenario", scenario, "--out", str(tmp_path / "out")]) == 2

    def test_report(self, tmp_path, capsys):
        metrics = write_metrics(tmp_path / "m.json", [40, 40, 40], {"fg": 345.0})
        assert main(["report", metrics, "--out", str(tmp_path)]) == 0
        assert (tmp_path / "comparison.csv").exists()
        assert "345.0" in capsys.readouterr().out
