import numpy as np
import pytest

from pettykit import convexity
from pettykit.convexity import LinearParameterSystem, midpoint_violation, random_system, relative_violation, t_grid


def test_midpoint_violation_detects_concavity():
    t = t_grid()
    assert midpoint_violation(t**2) <= 1e-15
    assert midpoint_violation(-(t**2)) > 0.1
    assert midpoint_violation(np.abs(t)) <= 1e-15
    assert relative_violation(np.minimum(t, 0)) > 0


def test_linear_system_evaluates():
    pts = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    lps = LinearParameterSystem(pts, np.array([0.0, 0.0, 1.0]), np.array([1.0, 0.0]))
    # the apex slides horizontally, so the area stays 1/2
    np.testing.assert_allclose([lps.at(t).volume for t in (-1, 0, 1)], 0.5)
    assert lps.at(1.0).support(np.array([0.0, 1.0])) == 1.0
    sys = random_system(3, 0)
    assert sys.at(1.0).dim == 3


@pytest.mark.parametrize("dim", [2, 3])
def test_lp_mixed_volume_convex_along_shadow_systems(dim):
    for r in convexity.lp_mixed_volume_scan(dim, n_instances=8, seed=1):
        assert r.passed, r.to_dict()


@pytest.mark.parametrize("dim", [2, 3])
def test_mixed_and_plain_volume_scans(dim):
    assert all(r.passed for r in convexity.mixed_volume_scan(dim, n_instances=5, seed=2))
    assert all(r.passed for r in convexity.volume_scan(dim, n_instances=8, seed=2))


def test_p_sum_scan_planar():
    res = convexity.p_sum_volume_scan(2, n_instances=5, seed=3)
    assert all(r.passed for r in res)
    assert all(r.details.get("grid_bias", 0) >= 0 for r in res)


@pytest.mark.parametrize("dim", [2, 3])
def test_surface_area_scans(dim):
    assert all(r.passed for r in convexity.lp_surface_area_scan(dim, n_instances=8, seed=4))
    assert all(r.passed for r in convexity.steiner_surface_area_check(dim, n_instances=20, seed=4))


def test_scan_result_bookkeeping():
    r = convexity.ScanResult("x", 1e-9)
    r.add(0, -1.0)
    r.add(1, 2e-10)
    r.add(2, 1e-10)
    assert r.n_instances == 3 and r.worst_instance == 1 and r.passed
    r.add(3, 1.0)
    assert not r.passed and r.to_dict()["worst_instance"] == 3
