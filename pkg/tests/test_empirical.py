import math

import numpy as np
import pytest

from oracles import cube_corners, hull_area
from pettykit import DimensionMismatch, RadialMeasure, StarBodySpec, star_body_measure
from pettykit.bodies import cube, make_standard, random_polygon
from pettykit.empirical import (
    EmpiricalConfig,
    GridSampler,
    UniformBall,
    UniformBox,
    expected_measure,
    fiber_profile,
    joint_convexity_scan,
    matrix_body,
    paired_comparison,
    random_fiber_offset,
)
from pettykit.errors import DegenerateInput, DegenerateSample
from pettykit.measures import random_rotation
from pettykit.rearrange import GridDensity

q_unit = make_standard("q_unit")
simplex3 = np.vstack([np.zeros(3), np.eye(3)])


def test_matrix_body_unit_square():
    B = matrix_body(np.eye(2), cube_corners(2))
    assert B.volume == pytest.approx(1.0)


def test_matrix_body_triangle():
    B = matrix_body(np.eye(2), np.array([[0, 0], [1, 0], [0, 1.0]]))
    assert B.volume == pytest.approx(0.5)


def test_matrix_body_zonotope():
    xs = np.array([[1.0, 0], [0, 1], [1, 1]])
    B = matrix_body(xs, cube_corners(3))
    assert B.volume == pytest.approx(3.0)
    assert B.volume == pytest.approx(hull_area(cube_corners(3) @ xs), rel=1e-12)


def test_matrix_body_degenerate():
    with pytest.raises(DegenerateSample):
        matrix_body(np.array([[1.0, 1.0], [2.0, 2.0]]), cube_corners(2))
    with pytest.raises(DimensionMismatch):
        matrix_body(np.eye(2), cube_corners(3))


def test_ball_sampler_uniform():
    B = UniformBall((1.0, -1.0), 2.0)
    U = np.random.default_rng(0).uniform(size=(20000, 2))
    pts = B.transform(U)
    r = np.linalg.norm(pts - [1, -1], axis=1)
    assert r.max() <= 2.0
    # radius^2 / R^2 is uniform on [0, 1]
    assert np.mean((r / 2) ** 2) == pytest.approx(0.5, abs=0.01)
    assert UniformBall.with_volume(2, math.pi * 4).radius == pytest.approx(2.0)


def test_box_rearranged_has_same_volume():
    box = UniformBox((0.5, 0.0), (1.5, 2.0))
    ball = box.rearranged()
    assert math.pi * ball.radius**2 == pytest.approx(2.0)
    assert ball.centre == (0.0, 0.0)


def test_grid_sampler_stays_in_support():
    vals = np.zeros((8, 8))
    vals[2:4, 5:7] = 1.0
    g = GridSampler(GridDensity([0, 0], [1, 1], vals))
    pts = g.transform(np.random.default_rng(1).uniform(size=(2000, 3)))
    assert np.all((pts[:, 0] >= 0.25) & (pts[:, 0] <= 0.5) & (pts[:, 1] >= 0.625) & (pts[:, 1] <= 0.875))


def _cfg(densities, C=None, measure=None, outer=60, inner=512, seed=0):
    return EmpiricalConfig(2, cube_corners(3) if C is None else C, q_unit, densities,
                           measure or RadialMeasure("gaussian", 2), outer, inner, seed)


def test_config_rejects_too_few_points():
    with pytest.raises(DegenerateInput):
        EmpiricalConfig(2, np.array([[0.0], [1.0]]), q_unit, (UniformBox((0, 0), (1, 1)),), RadialMeasure("gaussian", 2))


def test_config_rejects_mismatches():
    box = UniformBox((0, 0), (1, 1))
    with pytest.raises(DimensionMismatch):
        _cfg((box, box))
    with pytest.raises(DimensionMismatch):
        _cfg((box,) * 3, measure=RadialMeasure("gaussian", 3))
    with pytest.raises(DimensionMismatch):
        _cfg((box,) * 9, C=np.vstack([np.zeros(9), np.eye(9)]))


def test_point_masses_reduce_to_single_body():
    eps = 1e-6
    dens = (UniformBox((1, 0), (1 + eps, eps)), UniformBox((0, 1), (eps, 1 + eps)))
    M = RadialMeasure("gaussian", 2)
    cfg = EmpiricalConfig(2, cube_corners(2), q_unit, dens, M, outer=8, inner=4096)
    est = expected_measure(cfg, "raw")
    single = star_body_measure(StarBodySpec(cube(2, 0.5), q_unit, 1.0), M, 2**16, 5)
    assert abs(est.value - single.value) <= 3 * math.hypot(est.stderr, single.stderr) + 1e-5


def test_unit_square_densities_inequality():
    box = UniformBox((0, 0), (1, 1))
    rep = paired_comparison(_cfg((box,) * 3))
    assert rep.passed
    assert rep.difference > 0


@pytest.mark.parametrize("C", [cube_corners(3), simplex3], ids=["cube", "simplex"])
def test_offset_squares_inequality(C):
    rng = np.random.default_rng(4)
    dens = tuple(UniformBox(tuple(o), tuple(o + 1)) for o in rng.uniform(-1, 1, (3, 2)))
    for M in (RadialMeasure("gaussian", 2), RadialMeasure("lebesgue", 2)):
        rep = paired_comparison(_cfg(dens, C=C, measure=M))
        assert rep.difference >= -3 * rep.paired_stderr


def test_rotation_leaves_arms_invariant():
    box = UniformBox((0.2, -0.3), (1.2, 0.7))
    cfg = _cfg((box,) * 3, outer=80)
    R = random_rotation(2, 3)
    for which in ("raw", "rearranged"):
        a, b = expected_measure(cfg, which), expected_measure(cfg, which, rotation=R)
        assert abs(a.value - b.value) <= 3 * math.hypot(a.stderr, b.stderr)


def test_rearranged_densities_give_zero_difference():
    ball = UniformBall((0.0, 0.0), 0.7)
    rep = paired_comparison(_cfg((ball,) * 3))
    assert rep.difference == 0.0 and rep.passed


def test_paired_comparison_reproducible():
    box = UniformBox((0, 0), (1, 1))
    a, b = paired_comparison(_cfg((box,) * 3, outer=10)), paired_comparison(_cfg((box,) * 3, outer=10))
    assert a.to_dict() == b.to_dict()


def test_fiber_profile_symmetric_body_is_even():
    M = RadialMeasure("gaussian", 2)
    prof = fiber_profile(cube(2), q_unit, 1.0, [1, 0], np.zeros((2, 1)), M, n_samples=2**13, seed=0)
    np.testing.assert_allclose(prof.values, prof.values[::-1], atol=3 * prof.stderr.max())


@pytest.mark.parametrize("seed", range(6))
def test_fiber_profile_peaks_at_zero(seed):
    rng = np.random.default_rng(seed)
    K = random_polygon([seed, 30])
    Q = make_standard(["q_unit", "q_sym", "q_square", "neg_simplex"][seed % 4])
    u = rng.standard_normal(2)
    w = random_fiber_offset(2, Q.dim, u, seed)
    prof = fiber_profile(K, Q, 1.0 + seed % 2, u, w, RadialMeasure("gaussian", 2 * Q.dim), n_samples=2**13, seed=seed)
    assert prof.peak_excess() <= 3.0
    assert prof.endpoint_asymmetry() <= 3.0


def test_fiber_offset_orthogonal():
    u = np.array([0.6, 0.8])
    w = random_fiber_offset(2, 2, u, 3)
    np.testing.assert_allclose(u @ w, 0.0, atol=1e-15)
    with pytest.raises(ValueError):
        fiber_profile(cube(2), q_unit, 1.0, u, u[:, None], RadialMeasure("gaussian", 2))


def test_joint_convexity():
    assert joint_convexity_scan(n_instances=5, seed=0) <= 1e-9
    assert joint_convexity_scan(n_instances=3, seed=1, C=simplex3, Q=make_standard("q_sym")) <= 1e-9
