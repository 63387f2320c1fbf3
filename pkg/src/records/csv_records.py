"""
CSV 产物
路径快照、轨迹、仿真与跟随者位置的读写
"""

import csv
import logging
import os
from typing import Dict, List, Tuple

import numpy as np

from src.planners.base import PlannedPath
from src.sim.tracking import SimResult
from src.trajectory.topp import Trajectory
from .base import RecordStore, atomic_write, format_float

logger = logging.getLogger(__name__)

PATH_COLUMNS = ["iteration", "uav_id", "x", "y", "z"]
TRAJECTORY_COLUMNS = ["t", "uav_id", "px", "py", "pz", "vx", "vy", "vz", "ax", "ay", "az"]
SIM_COLUMNS = TRAJECTORY_COLUMNS + ["err_x", "err_y", "err_z", "ux", "uy", "uz"]

FILES = {
    "path": "path.csv",
    "trajectory": "trajectory.csv",
    "sim": "sim.csv",
    "followers": "followers.csv",
}

Table = Tuple[List[str], List[List[str]]]


def _cell(value) -> str:
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format_float(float(value))


class CsvRecordStore(RecordStore):
    """
    输出目录下的 CSV 表格，键为 path / trajectory / sim / followers
    """

    def __init__(self, directory: str):
        """
        Args:
            directory: 输出目录
        """
        self.directory = directory

    def file_for(self, key: str) -> str:
        if key not in FILES:
            raise ValueError(f"未知记录类型: {key}，可选 {list(FILES)}")
        return os.path.join(self.directory, FILES[key])

    def save(self, key: str, value: Table) -> None:
        """
        原子写入一张表

        Args:
            key: 记录类型
            value: (表头, 行列表)；数值按 9 位有效数字格式化
        """
        header, rows = value
        path = self.file_for(key)

        def write(f):
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(header)
            for row in rows:
                writer.writerow([_cell(v) for v in row])

        atomic_write(path, write)
        logger.debug("已写入 %s (%d 行)", path, len(rows))

    def load(self, key: str) -> Dict[str, np.ndarray]:
        """
        读取一张表

        Returns:
            列名到数值数组的映射

        Raises:
            FileNotFoundError: 文件不存在
            ValueError: 表头或数值格式错误
        """
        path = self.file_for(key)
        with open(path, "r", encoding="utf-8", newline="") as f:
            reader = csv.reader(f)
            header = next(reader, None)
            if not header:
                raise ValueError(f"{path} 为空")
            rows = [row for row in reader if row]
        try:
            data = np.array(rows, dtype=float).reshape(len(rows), len(header))
        except ValueError as e:
            raise ValueError(f"{path} 中存在非数值数据: {e}") from e
        return {name: data[:, i] for i, name in enumerate(header)}

    def clear(self) -> None:
        for name in FILES.values():
            path = os.path.join(self.directory, name)
            if os.path.exists(path):
                os.remove(path)

    def get_size(self) -> int:
        return sum(os.path.exists(os.path.join(self.directory, name)) for name in FILES.values())

    def write_path(self, path: PlannedPath, uav_offset: int = 0, key: str = "path") -> None:
        """每个快照每架无人机一行"""
        rows = [
            [int(iteration), uav_offset + uav, *position]
            for iteration, snapshot in zip(path.iterations, path.positions)
            for uav, position in enumerate(snapshot)
        ]
        self.save(key, (PATH_COLUMNS, rows))

    def write_followers(self, path: PlannedPath) -> None:
        """9 机路径中的跟随者部分，uav_id 取 4..8"""
        follower_path = PlannedPath(path.positions[:, 4:], path.iterations)
        self.write_path(follower_path, uav_offset=4, key="followers")

    def read_path(self, method: str = "") -> PlannedPath:
        """
        由 path.csv 重建领航者路径

        Raises:
            ValueError: 快照中的无人机数量不一致
        """
        table = self.load("path")
        iterations = table["iteration"].astype(int)
        uav_ids = table["uav_id"].astype(int)
        points = np.column_stack([table["x"], table["y"], table["z"]])
        unique = np.unique(iterations)
        n_uavs = len(np.unique(uav_ids))
        if len(points) != len(unique) * n_uavs:
            raise ValueError(f"{self.file_for('path')} 中各快照的无人机数量不一致")
        order = np.lexsort((uav_ids, iterations))
        positions = points[order].reshape(len(unique), n_uavs, 3)
        return PlannedPath(positions, unique, converged=True, method=method)

    def _trajectory_rows(self, traj: Trajectory) -> List[List]:
        return [
            [traj.t[n], uav, *traj.positions[n, uav], *traj.velocities[n, uav], *traj.accelerations[n, uav]]
            for n in range(len(traj))
            for uav in range(traj.n_uavs)
        ]

    def write_trajectory(self, traj: Trajectory) -> None:
        self.save("trajectory", (TRAJECTORY_COLUMNS, self._trajectory_rows(traj)))

    def write_sim(self, sim: SimResult) -> None:
        """仿真结果；加速度列即控制量（双积分器 a = u）"""
        rows = [
            [sim.t[n], uav, *sim.positions[n, uav], *sim.velocities[n, uav], *sim.controls[n, uav],
             *sim.errors[n, uav], *sim.controls[n, uav]]
            for n in range(len(sim.t))
            for uav in range(sim.positions.shape[1])
        ]
        self.save("sim", (SIM_COLUMNS, rows))
