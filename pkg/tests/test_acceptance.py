"""
实验复现检查（耗时较长，使用 pytest -m acceptance 运行）
"""

import math
from pathlib import Path

import numpy as np
import pytest

from src.flux import flux_quad_boundary
from src.formation import LeaderQuad, derive_followers
from src.planners import FgConfig, FgPlanner, facing_square, plan_fg
from src.records import CsvRecordStore, MetricsStore
from src.scenario import EXIT_OK, load_scenario, run_scenario
from src.targets import exact_multi_flux, single_target

pytestmark = pytest.mark.acceptance

SCENARIO_DIR = Path(__file__).resolve().parent.parent / "scenarios"

TABLE = {
    "path_length_front": {"ls_beta0": 455.0, "ls_beta400": 346.0, "fg": 345.0},
    "path_length_rear": {"ls_beta0": 500.0, "ls_beta400": 543.0, "fg": 354.0},
}

# LS 的路径几何由步进方程唯一确定，这两项的路径长度落在参考值 15% 之外（见 DESIGN.md）
LS_LENGTH_DEVIATIONS = {("path_length_front", "ls_beta400"), ("path_length_rear", "ls_beta0")}


def run(name: str, out: Path):
    scenario = load_scenario(str(SCENARIO_DIR / f"{name}.yaml"))
    status = run_scenario(scenario, str(out))
    return scenario, status, MetricsStore(str(out)).read_validated()


def length_cases():
    for name in sorted(TABLE):
        for method in TABLE[name]:
            marks = []
            if (name, method) in LS_LENGTH_DEVIATIONS:
                marks = [pytest.mark.xfail(reason="LS 步进方程给出的路径长度偏离参考值", strict=False)]
            yield pytest.param(name, method, marks=marks, id=f"{name}-{method}")


@pytest.fixture(scope="module")
def length_metrics(tmp_path_factory):
    return {name: run(name, tmp_path_factory.mktemp(name))[2] for name in TABLE}


@pytest.mark.parametrize("name, method", length_cases())
def test_combined_lengths(length_metrics, name, method):
    per_method = length_metrics[name]["per_method"]
    assert per_method[method]["combined_length_m"] == pytest.approx(TABLE[name][method], rel=0.15)


def test_rear_target_ratios(length_metrics):
    per_method = length_metrics["path_length_rear"]["per_method"]
    fg = per_method["fg"]["combined_length_m"]
    assert fg <= per_method["ls_beta0"]["combined_length_m"] / 1.3
    assert fg <= per_method["ls_beta400"]["combined_length_m"] / 1.4


def test_fg_shorter_than_ls(length_metrics):
    for name in TABLE:
        per_method = length_metrics[name]["per_method"]
        fg = per_method["fg"]["combined_length_m"]
        assert fg < min(per_method["ls_beta0"]["combined_length_m"], per_method["ls_beta400"]["combined_length_m"])


@pytest.mark.xfail(reason="刚性 LS 绕到后方目标时法向约转过 50°", strict=False)
def test_rear_ls_arc_keeps_orientation(tmp_path):
    run("path_length_rear", tmp_path)
    path = CsvRecordStore(str(tmp_path / "ls_beta400")).read_path()
    quads = path.quads()
    normals = [np.cross(q.p3 - q.p1, q.p4 - q.p2) for q in (quads[0], quads[-1])]
    cosine = np.dot(*normals) / (np.linalg.norm(normals[0]) * np.linalg.norm(normals[1]))
    assert math.degrees(math.acos(np.clip(cosine, -1.0, 1.0))) < 30.0


def test_fg_shape_invariance(tmp_path):
    run("path_length_front", tmp_path)
    path = CsvRecordStore(str(tmp_path / "fg")).read_path()
    for quad in path.quads():
        np.testing.assert_allclose(np.linalg.norm(quad.edges(), axis=1), 5.0, rtol=1e-2)
        distances = np.linalg.norm(quad.points[:, None] - quad.points[None], axis=-1)
        assert distances[np.triu_indices(4, k=1)].min() >= 2.5


@pytest.mark.parametrize("name", ["tracking_front", "tracking_rear", "tracking_far_rear"])
def test_tracking_quality(tmp_path, name):
    _, status, metrics = run(name, tmp_path)
    assert status == EXIT_OK
    fg = metrics["per_method"]["fg"]
    assert fg["max_tracking_error_m"] < 1.0
    assert fg["max_speed_mps"] <= 10.0 + 0.5
    assert fg["sim_max_speed_mps"] <= 10.0 + 0.5
    assert fg["max_accel_mps2"] <= 5.0 + 1e-6
    assert fg["max_control_mps2"] <= 5.0 + 1e-6
    low, high = fg["sim_side_length_range_m"]
    assert low >= 0.95 * 5.0 and high <= 1.05 * 5.0


def test_cluster(tmp_path):
    scenario, status, _ = run("cluster", tmp_path)
    assert status == EXIT_OK
    target = scenario.target.build()
    path = CsvRecordStore(str(tmp_path)).read_path()
    start, final = path.quads()[0], path.quads()[-1]
    stop_radius = FgPlanner(target, FgConfig(side_length=5.0)).stop_radius_for(start)
    assert np.linalg.norm(final.centroid() - target.center) <= stop_radius * (1.0 + 1e-6)
    l_req = math.sqrt(2.0) * target.effective_radius
    np.testing.assert_allclose(np.linalg.norm(final.edges(), axis=1), l_req, rtol=1e-2)
    exact = exact_multi_flux(target.members, final)
    coc = flux_quad_boundary(target.as_charge(), final)
    assert exact == pytest.approx(coc, rel=0.05)


@pytest.mark.parametrize("name", ["hemisphere_front", "hemisphere_rear"])
def test_hemisphere(tmp_path, name):
    _, status, metrics = run(name, tmp_path)
    assert status == EXIT_OK
    path = CsvRecordStore(str(tmp_path)).read_path()
    for quad in path.quads():
        formation = derive_followers(quad)
        offsets = formation.followers - formation.center
        np.testing.assert_allclose(np.linalg.norm(offsets, axis=1), formation.radius, atol=1e-6)
        np.testing.assert_allclose(offsets[:4] @ formation.normal, -formation.radius / 2.0, atol=1e-6)
    assert (tmp_path / "followers.csv").exists()
    trajectory = CsvRecordStore(str(tmp_path)).load("trajectory")
    assert set(trajectory["uav_id"].astype(int)) == set(range(9))
    speeds = np.linalg.norm(np.column_stack([trajectory["vx"], trajectory["vy"], trajectory["vz"]]), axis=1)
    accels = np.linalg.norm(np.column_stack([trajectory["ax"], trajectory["ay"], trajectory["az"]]), axis=1)
    assert speeds.max() <= 10.0 + 1e-6
    assert accels.max() <= 5.0 + 1e-6
    assert metrics["per_method"]["fg"]["max_tracking_error_m"] < 1.0


def test_determinism(tmp_path):
    for sub in ("a", "b"):
        run("cluster", tmp_path / sub)
    for name in ("path.csv", "metrics.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_rhombus_becomes_square():
    height = 5.0 * math.sin(math.radians(60.0))
    start = LeaderQuad.from_points((0, 0, 0), (0, 5, 0), (0, 7.5, height), (0, 2.5, height))
    target = single_target(start.centroid() + np.array([30.0, 0.0, 0.0]))
    final = plan_fg(start, target, FgConfig()).quads()[-1]
    d1 = np.linalg.norm(final.p3 - final.p1)
    d2 = np.linalg.norm(final.p4 - final.p2)
    assert d1 == pytest.approx(d2, rel=0.05)


@pytest.mark.parametrize("center", [(40.0, 40.0, 40.0), (-40.0, 40.0, 40.0)])
def test_fg_final_flux_near_ideal(start_square, center):
    target = single_target(center)
    final = plan_fg(start_square, target, FgConfig()).quads()[-1]
    ideal = facing_square(target.center, target.center - start_square.centroid(),
                          start_square.circumradius(), 5.0)
    charge = target.as_charge()
    assert flux_quad_boundary(charge, final) == pytest.approx(flux_quad_boundary(charge, ideal), rel=0.02)
