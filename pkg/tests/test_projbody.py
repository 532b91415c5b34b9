import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import image_support_bruteforce, projection_length
from pettykit import DimensionMismatch, InvalidP, Polytope, StarBodySpec, classical_proj_body, polar_proj_radial, polar_projection_body
from pettykit.bodies import cube, make_standard, random_polygon, regular_polygon
from pettykit.projbody import (
    as_flat,
    as_matrix,
    ball_polar_projection_volume,
    gauge,
    matrix_image_support,
    petty_product,
    projection_support,
)

q_unit, q_sym, q_square = make_standard("q_unit"), make_standard("q_sym"), make_standard("q_square")


def test_matrix_flattening_roundtrip():
    x = np.arange(6.0).reshape(3, 2)
    np.testing.assert_array_equal(as_matrix(as_flat(x), 3, 2), x)
    np.testing.assert_array_equal(as_flat(x), [0, 2, 4, 1, 3, 5])


@given(st.integers(0, 10_000))
def test_image_support_m1(seed):
    rng = np.random.default_rng(seed)
    v, u = rng.standard_normal(2), rng.standard_normal(2)
    x = v[:, None]
    assert matrix_image_support(x, q_unit, u) == pytest.approx(max(0.0, v @ u), abs=1e-15)
    assert matrix_image_support(x, q_sym, u) == pytest.approx(abs(v @ u), abs=1e-15)


@pytest.mark.parametrize("seed", range(20))
def test_image_support_square(seed):
    rng = np.random.default_rng(seed)
    x, u = rng.standard_normal((2, 2)), rng.standard_normal(2)
    expected = image_support_bruteforce(x, q_square.vertices, u)
    assert matrix_image_support(x, q_square, u) == pytest.approx(expected, rel=1e-12)


def test_radial_of_square():
    spec = StarBodySpec(cube(2), q_unit, 1.0)
    assert polar_proj_radial(spec, np.array([1.0, 0.0])) == pytest.approx(0.5)


def test_radial_of_disk_approximation():
    spec = StarBodySpec(regular_polygon(64), q_unit, 1.0)
    ang = np.linspace(0, 2 * np.pi, 50)
    rho = polar_proj_radial(spec, np.column_stack([np.cos(ang), np.sin(ang)]))
    np.testing.assert_allclose(rho, 0.5, rtol=2e-3)


@pytest.mark.parametrize("seed", range(5))
def test_radial_symmetric_q(seed):
    rng = np.random.default_rng(seed)
    spec = StarBodySpec(random_polygon(seed), q_sym, 1.5)
    th = rng.standard_normal((30, 2))
    th /= np.linalg.norm(th, axis=1, keepdims=True)
    np.testing.assert_array_equal(polar_proj_radial(spec, th), polar_proj_radial(spec, -th))


@pytest.mark.parametrize("seed", range(5))
def test_classical_radial_is_inverse_projection(seed):
    K = random_polygon(seed)
    spec = StarBodySpec(K, q_unit, 1.0)
    for a in np.linspace(0, np.pi, 7):
        th = np.array([math.cos(a), math.sin(a)])
        assert polar_proj_radial(spec, th) == pytest.approx(1 / projection_length(K.vertices, th), rel=1e-12)


def test_gauge_is_homogeneous():
    spec = StarBodySpec(random_polygon(2), q_square, 2.0)
    x = np.random.default_rng(0).standard_normal(4)
    assert gauge(spec, 3 * x) == pytest.approx(3 * gauge(spec, x), rel=1e-12)


def test_projection_body_of_square():
    P = classical_proj_body(cube(2))
    assert P.volume == pytest.approx(16.0)
    np.testing.assert_allclose(np.abs(P.vertices), 2.0)


def test_polar_projection_body_of_square():
    P = polar_projection_body(cube(2))
    assert P.volume == pytest.approx(0.5)
    assert petty_product(cube(2)) == pytest.approx(2.0)
    assert 2.0 <= math.pi**2 / 4


@pytest.mark.parametrize("seed", range(10))
def test_zonotope_support_is_cauchy_formula(seed):
    K = random_polygon(seed)
    P = classical_proj_body(K)
    u = np.random.default_rng(seed).standard_normal((10, 2))
    np.testing.assert_allclose(P.support(u), projection_support(K, u), rtol=1e-10)


def test_ball_polar_projection_volume():
    assert ball_polar_projection_volume(2, 4.0) == pytest.approx(math.pi**2 / 16)
    assert ball_polar_projection_volume(2, math.pi) * math.pi == pytest.approx(math.pi**2 / 4)


def test_spec_validation():
    with pytest.raises(InvalidP):
        StarBodySpec(cube(2), q_unit, 0.5)
    with pytest.raises(DimensionMismatch):
        StarBodySpec(cube(3), make_standard("cube", dim=3), 1.0)
    spec = StarBodySpec(cube(2), q_unit, 1.0)
    with pytest.raises(DimensionMismatch):
        polar_proj_radial(spec, np.ones(3))


def test_segment_accepted_only_as_q():
    spec = StarBodySpec(cube(2), Polytope([[0.0], [1.0]]), 1.0)
    assert spec.d == 2
