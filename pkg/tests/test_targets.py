"""
目标建模测试
"""

import numpy as np
import pytest

from src.errors import EmptyTargetSet
from src.flux import PointCharge, flux_quad_boundary
from src.targets import CLUSTER, SINGLE, coc_reduce, exact_multi_flux, sample_cluster, single_target


def test_single_target():
    target = single_target((40, 40, 40))
    assert target.kind == SINGLE
    assert target.effective_radius == 0.0
    assert target.as_charge().charge == 1.0
    assert len(target.member_charges()) == 1


def test_coc_reduce_pair():
    target = coc_reduce([(0, 0, 0), (2, 0, 0)])
    assert target.kind == CLUSTER
    np.testing.assert_allclose(target.center, [1.0, 0.0, 0.0])
    assert target.effective_radius == pytest.approx(1.0)
    assert sum(c.charge for c in target.member_charges()) == pytest.approx(1.0)


def test_coc_reduce_single_member_has_zero_radius():
    target = coc_reduce([(3, 4, 5)])
    np.testing.assert_allclose(target.center, [3, 4, 5])
    assert target.effective_radius == 0.0


def test_coc_reduce_empty():
    with pytest.raises(EmptyTargetSet):
        coc_reduce([])


def test_seeded_cluster_center():
    members = sample_cluster((200, 200, 200), 100.0, 10, seed=7)
    assert members.shape == (10, 3)
    target = coc_reduce(members)
    bound = 3.0 * 100.0 / np.sqrt(10)
    assert np.all(np.abs(target.center - 200.0) <= bound)


def test_sample_cluster_is_deterministic():
    np.testing.assert_array_equal(sample_cluster((0, 0, 0), 1.0, 5, seed=3),
                                  sample_cluster((0, 0, 0), 1.0, 5, seed=3))


def test_sample_cluster_rejects_empty():
    with pytest.raises(EmptyTargetSet):
        sample_cluster((0, 0, 0), 1.0, 0, seed=1)


def test_exact_flux_symmetric_members_cancel(start_square):
    members = [(3.0, 2.0, 2.0), (-3.0, 2.0, 2.0)]
    assert exact_multi_flux(members, start_square) == pytest.approx(0.0, abs=1e-12)


def test_exact_flux_matches_coc_far_away(start_square, rng):
    members = np.array([1000.0, 2.5, 2.5]) + rng.normal(scale=1.0, size=(10, 3))
    coc = coc_reduce(members)
    exact = exact_multi_flux(members, start_square)
    assert exact == pytest.approx(flux_quad_boundary(coc.as_charge(), start_square), rel=1e-2)


def test_exact_flux_empty(start_square):
    with pytest.raises(EmptyTargetSet):
        exact_multi_flux([], start_square)


def test_member_charge_split():
    target = coc_reduce([(0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1)])
    charges = target.member_charges()
    assert all(isinstance(c, PointCharge) for c in charges)
    assert [c.charge for c in charges] == [0.25] * 4
