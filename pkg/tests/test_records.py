"""
CSV 与 metrics.json 产物测试
"""

import json
import os

import numpy as np
import pytest

from src.errors import ReportError
from src.planners import PlannedPath
from src.records import CsvRecordStore, MetricsStore, validate_metrics
from src.records.base import format_float
from src.trajectory import with_followers
from .conftest import translation_path


def valid_metrics(length: float = 100.0):
    return {
        "combined_length_m": length,
        "per_method": {"fg": {"combined_length_m": length, "iterations": 10, "converged": True}},
    }


class TestCsvRecordStore:
    def test_path_layout(self, tmp_path, start_square):
        store = CsvRecordStore(str(tmp_path))
        store.write_path(translation_path(start_square, (1.0, 0.0, 0.0), n_snapshots=3))
        lines = (tmp_path / "path.csv").read_text(encoding="utf-8").splitlines()
        assert lines[0] == "iteration,uav_id,x,y,z"
        assert len(lines) == 1 + 3 * 4
        assert lines[5] == "1,0,0.5,0,0"

    def test_read_path(self, tmp_path, start_square):
        store = CsvRecordStore(str(tmp_path))
        path = translation_path(start_square, (3.0, 1.0, 0.0), n_snapshots=4)
        store.write_path(path)
        restored = store.read_path(method="fg")
        np.testing.assert_allclose(restored.positions, path.positions)
        np.testing.assert_array_equal(restored.iterations, path.iterations)
        assert restored.method == "fg"

    def test_followers_ids(self, tmp_path, start_square):
        store = CsvRecordStore(str(tmp_path))
        store.write_followers(with_followers(translation_path(start_square, (1.0, 0.0, 0.0))))
        table = store.load("followers")
        assert sorted(set(table["uav_id"].astype(int))) == [4, 5, 6, 7, 8]

    def test_nine_significant_digits(self):
        assert format_float(1.0 / 3.0) == "0.333333333"
        assert format_float(123456.789012) == "123456.789"

    def test_size_and_clear(self, tmp_path, start_square):
        store = CsvRecordStore(str(tmp_path))
        assert store.get_size() == 0
        store.write_path(translation_path(start_square, (1.0, 0.0, 0.0)))
        assert store.get_size() == 1
        store.clear()
        assert store.get_size() == 0

    def test_no_temporary_files_left(self, tmp_path, start_square):
        CsvRecordStore(str(tmp_path)).write_path(translation_path(start_square, (1.0, 0.0, 0.0)))
        assert os.listdir(tmp_path) == ["path.csv"]

    def test_unknown_key(self, tmp_path):
        with pytest.raises(ValueError):
            CsvRecordStore(str(tmp_path)).file_for("plot")

    def test_inconsistent_path_file(self, tmp_path):
        (tmp_path / "path.csv").write_text("iteration,uav_id,x,y,z\n0,0,0,0,0\n0,1,1,0,0\n1,0,0,0,1\n",
                                           encoding="utf-8")
        with pytest.raises(ValueError):
            CsvRecordStore(str(tmp_path)).read_path()

    def test_path_requires_matching_iterations(self):
        with pytest.raises(ValueError):
            PlannedPath(np.zeros((3, 4, 3)), np.arange(2))


class TestMetricsStore:
    def test_write_and_read(self, tmp_path):
        store = MetricsStore(str(tmp_path / "metrics.json"))
        store.write(valid_metrics())
        assert store.read_validated()["combined_length_m"] == 100.0
        assert json.loads((tmp_path / "metrics.json").read_text(encoding="utf-8"))["per_method"]["fg"]["iterations"] == 10

    def test_directory_argument(self, tmp_path):
        store = MetricsStore(str(tmp_path))
        assert store.path == str(tmp_path / "metrics.json")

    def test_save_single_key(self, tmp_path):
        store = MetricsStore(str(tmp_path / "metrics.json"))
        store.save("seed", 7)
        assert MetricsStore(str(tmp_path / "metrics.json")).load("seed") == 7
        assert store.get_size() == 1

    def test_missing_combined_length_names_file(self, tmp_path):
        data = valid_metrics()
        data["combined_length_m"] = None
        with pytest.raises(ReportError, match="broken.json"):
            validate_metrics(data, "broken.json")

    @pytest.mark.parametrize("mutate", [
        lambda d: d.pop("per_method"),
        lambda d: d["per_method"].clear(),
        lambda d: d["per_method"]["fg"].pop("iterations"),
        lambda d: d["per_method"]["fg"].update(combined_length_m="long"),
    ])
    def test_schema_errors(self, mutate):
        data = valid_metrics()
        mutate(data)
        with pytest.raises(ReportError):
            validate_metrics(data, "m.json")

    def test_invalid_json(self, tmp_path):
        path = tmp_path / "metrics.json"
        path.write_text("{not json", encoding="utf-8")
        with pytest.raises(ReportError, match="JSON"):
            MetricsStore(str(path)).read()

    def test_missing_file(self, tmp_path):
        with pytest.raises(ReportError):
            MetricsStore(str(tmp_path / "nope.json")).read()
