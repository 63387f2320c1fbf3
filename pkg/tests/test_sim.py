"""
质点动力学与 PID 跟踪测试
"""

import numpy as np
import pytest

from src.errors import Divergence
from src.sim import ParticleState, PidGains, pid_control, run_tracking, step_dynamics
from src.trajectory import KinematicLimits, Trajectory, parameterize
from .conftest import translation_path

LIMITS = KinematicLimits(v_max=10.0, a_max=5.0)


def constant_trajectory(points: np.ndarray, n: int = 100, dt: float = 0.02) -> Trajectory:
    t = np.arange(n) * dt
    positions = np.repeat(points[None], n, axis=0)
    zeros = np.zeros_like(positions)
    return Trajectory(t=t, positions=positions, velocities=zeros, accelerations=zeros.copy(), dt=dt)


class TestStepDynamics:
    def test_coasting(self):
        state = step_dynamics(ParticleState((0, 0, 0), (1, 0, 0)), np.zeros(3), 0.1)
        np.testing.assert_allclose(state.pos, [0.1, 0.0, 0.0])
        np.testing.assert_allclose(state.vel, [1.0, 0.0, 0.0])

    def test_from_rest(self):
        state = step_dynamics(ParticleState((0, 0, 0), (0, 0, 0)), np.array([0.0, 0.0, 2.0]), 1.0)
        np.testing.assert_allclose(state.pos, [0.0, 0.0, 1.0])
        np.testing.assert_allclose(state.vel, [0.0, 0.0, 2.0])

    def test_matches_closed_form(self):
        x0 = np.array([1.0, -2.0, 0.5])
        v0 = np.array([0.3, 0.0, -1.0])
        u = np.array([0.5, 1.5, -0.25])
        dt, n = 0.02, 250
        state = ParticleState(x0, v0)
        for _ in range(n):
            state = step_dynamics(state, u, dt)
        t = n * dt
        np.testing.assert_allclose(state.pos, x0 + v0 * t + 0.5 * u * t ** 2, rtol=1e-12, atol=1e-12)
        np.testing.assert_allclose(state.vel, v0 + u * t, rtol=1e-12, atol=1e-12)

    def test_invalid_dt(self):
        with pytest.raises(ValueError):
            step_dynamics(ParticleState((0, 0, 0), (0, 0, 0)), np.zeros(3), 0.0)


class TestPidControl:
    def test_zero_error(self):
        u = pid_control(np.zeros(3), np.zeros(3), np.zeros(3), PidGains(), 5.0)
        np.testing.assert_array_equal(u, np.zeros(3))

    def test_boundary_is_not_scaled(self):
        gains = PidGains(kp=1.0, ki=0.0, kd=0.0)
        u = pid_control(np.array([3.0, 4.0, 0.0]), np.zeros(3), np.zeros(3), gains, 5.0)
        np.testing.assert_allclose(u, [3.0, 4.0, 0.0])

    def test_saturation_preserves_direction(self):
        gains = PidGains(kp=1.0, ki=0.0, kd=0.0)
        u = pid_control(np.array([30.0, 40.0, 0.0]), np.zeros(3), np.zeros(3), gains, 5.0)
        np.testing.assert_allclose(u, [3.0, 4.0, 0.0])

    def test_integral_clamp(self):
        gains = PidGains(kp=0.0, ki=1.0, kd=0.0, integral_clamp=2.0)
        u = pid_control(np.zeros(3), np.array([10.0, -10.0, 1.0]), np.zeros(3), gains, 100.0)
        np.testing.assert_allclose(u, [2.0, -2.0, 1.0])

    def test_batched(self):
        gains = PidGains(kp=1.0, ki=0.0, kd=0.0)
        errors = np.array([[3.0, 4.0, 0.0], [30.0, 40.0, 0.0]])
        u = pid_control(errors, np.zeros_like(errors), np.zeros_like(errors), gains, 5.0)
        np.testing.assert_allclose(u, [[3.0, 4.0, 0.0], [3.0, 4.0, 0.0]])

    @pytest.mark.parametrize("kwargs", [{"kp": -1.0}, {"kp": 0.0, "ki": 0.0, "kd": 0.0}, {"integral_clamp": -1.0}])
    def test_gain_validation(self, kwargs):
        with pytest.raises(ValueError):
            PidGains(**kwargs)


class TestRunTracking:
    def test_stationary_reference(self, start_square):
        result = run_tracking(constant_trajectory(start_square.points), PidGains(), LIMITS)
        assert result.max_error == 0.0
        assert result.max_control == 0.0

    def test_constant_acceleration_tracked_exactly(self):
        dt, n = 0.02, 200
        a = np.array([1.0, 0.5, -0.5])
        t = np.arange(n) * dt
        positions = (0.5 * a * t[:, None] ** 2)[:, None]
        velocities = (a * t[:, None])[:, None]
        accelerations = np.broadcast_to(a, (n, 1, 3)).copy()
        traj = Trajectory(t=t, positions=positions, velocities=velocities, accelerations=accelerations, dt=dt)
        result = run_tracking(traj, PidGains(), LIMITS)
        assert result.max_error < 1e-9

    def test_histories_match_samples(self, start_square):
        traj = parameterize(translation_path(start_square, (20.0, 0.0, 0.0)), LIMITS, 0.02)
        result = run_tracking(traj, PidGains(), LIMITS)
        assert result.positions.shape == traj.positions.shape
        assert len(result.t) == len(traj)
        assert result.side_lengths().shape == (len(traj), 4)

    def test_tracks_parameterized_path(self, start_square):
        traj = parameterize(translation_path(start_square, (40.0, 40.0, 0.0), n_snapshots=5), LIMITS, 0.02)
        result = run_tracking(traj, PidGains(), LIMITS)
        assert result.max_error < 0.5
        assert result.max_speed <= LIMITS.v_max + 0.5
        assert result.max_control <= LIMITS.a_max + 1e-6
        np.testing.assert_allclose(result.side_lengths(), 5.0, rtol=0.05)
        metrics = result.metrics()
        assert set(metrics) == {"max_tracking_error_m", "mean_tracking_error_m", "sim_max_speed_mps", "max_control_mps2"}

    def test_control_saturates(self):
        start = np.zeros((1, 3))
        traj = constant_trajectory(np.array([[3.0, 0.0, 0.0]]), n=200)
        traj.positions[0] = start
        result = run_tracking(traj, PidGains(), LIMITS)
        assert result.max_control == pytest.approx(LIMITS.a_max)
        assert np.all(np.linalg.norm(result.controls, axis=2) <= LIMITS.a_max + 1e-9)

    def test_divergence(self):
        traj = constant_trajectory(np.array([[20.0, 0.0, 0.0]]), n=50)
        traj.positions[0] = 0.0
        with pytest.raises(Divergence):
            run_tracking(traj, PidGains(), LIMITS, divergence_threshold=10.0)

    def test_deterministic(self, start_square):
        traj = parameterize(translation_path(start_square, (10.0, 0.0, 5.0)), LIMITS, 0.02)
        first = run_tracking(traj, PidGains(), LIMITS)
        second = run_tracking(traj, PidGains(), LIMITS)
        np.testing.assert_array_equal(first.positions, second.positions)
        np.testing.assert_array_equal(first.controls, second.controls)
