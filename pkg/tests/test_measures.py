import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from pettykit import ConcavityViolation, DimensionMismatch, RadialMeasure, StarBodySpec, radial_mass, star_body_measure, validate_concavity
from pettykit.bodies import cube, make_standard, random_polygon
from pettykit.measures import (
    pair_means,
    paired_difference,
    radial_mass_quadrature,
    random_rotation,
    sphere_area,
)


def test_gaussian_is_log_concave():
    rep = validate_concavity(RadialMeasure("gaussian", 2))
    assert rep.gamma == 0.0 and rep.passed


@pytest.mark.parametrize("d", [1, 2, 3, 4, 6])
def test_cauchy_above_threshold_passes(d):
    assert validate_concavity(RadialMeasure("generalized_cauchy", d, d + 1.0)).passed
    assert validate_concavity(RadialMeasure("generalized_cauchy", d, d / 2)).passed


@pytest.mark.parametrize("d", [2, 3, 4, 6])
def test_cauchy_below_threshold_fails_with_witness(d):
    M = RadialMeasure("generalized_cauchy", d, d / 2 - 0.25)
    with pytest.raises(ConcavityViolation) as info:
        validate_concavity(M)
    x, y, lam = info.value.witness
    # the witness breaks (-1/d)-concavity of the density
    g = -1.0 / d
    lhs = M.density_at((1 - lam) * np.asarray(x) + lam * np.asarray(y))
    rhs = ((1 - lam) * M.density_at(np.asarray(x)) ** g + lam * M.density_at(np.asarray(y)) ** g) ** (1 / g)
    assert lhs < rhs * (1 - 1e-9)


def test_lebesgue_passes():
    assert validate_concavity(RadialMeasure("lebesgue", 3)).passed


def test_gaussian_mass_closed_form():
    M = RadialMeasure("gaussian", 2)
    assert radial_mass(M, 1.0) == pytest.approx(1 - math.exp(-0.5), rel=1e-12)
    assert radial_mass(M, 1.0) == pytest.approx(0.393469, abs=1e-6)


@given(st.floats(0, 10))
def test_lebesgue_mass_planar(r):
    assert radial_mass(RadialMeasure("lebesgue", 2), r) == pytest.approx(math.pi * r * r, rel=1e-12, abs=1e-300)


@pytest.mark.parametrize("kind,beta", [("lebesgue", None), ("gaussian", None), ("generalized_cauchy", 3.0)])
def test_mass_at_zero(kind, beta):
    assert radial_mass(RadialMeasure(kind, 2, beta), 0.0) == 0.0


@pytest.mark.parametrize("d", [1, 2, 3, 4, 6])
@pytest.mark.parametrize("beta_shift", [-0.4, 0.3, 1.0, 2.5])
def test_cauchy_closed_form_matches_quadrature(d, beta_shift):
    M = RadialMeasure("generalized_cauchy", d, d / 2 + beta_shift)
    for R in (0.1, 1.0, 3.7):
        assert radial_mass(M, R) == pytest.approx(radial_mass_quadrature(M, R), rel=1e-9)


@pytest.mark.parametrize("d", [1, 2, 3, 4, 5, 6])
def test_gaussian_mass_matches_quadrature(d):
    M = RadialMeasure("gaussian", d)
    for R in (0.3, 1.0, 2.5):
        val, _ = integrate.quad(lambda r: (2 * math.pi) ** (-d / 2) * math.exp(-r * r / 2) * r ** (d - 1), 0, R)
        assert radial_mass(M, R) == pytest.approx(sphere_area(d) * val, rel=1e-9)


@given(st.lists(st.floats(0, 20), min_size=2, max_size=20))
def test_mass_monotone(rs):
    rs = np.sort(rs)
    for M in (RadialMeasure("gaussian", 3), RadialMeasure("generalized_cauchy", 4, 5.0)):
        vals = radial_mass(M, rs)
        assert np.all(np.diff(vals) >= -1e-15)


def test_measure_validation():
    with pytest.raises(ValueError):
        RadialMeasure("uniform", 2)
    with pytest.raises(ValueError):
        RadialMeasure("generalized_cauchy", 2)
    with pytest.raises(ValueError):
        RadialMeasure("gaussian", 2, 3.0)


def test_polar_projection_square_area():
    spec = StarBodySpec(cube(2), make_standard("q_unit"), 1.0)
    est = star_body_measure(spec, RadialMeasure("lebesgue", 2), 2**16, seed=0)
    assert abs(est.value - 0.5) <= 3 * est.stderr
    assert est.stderr < 0.01


@pytest.mark.parametrize("d", [2, 4])
def test_gaussian_unit_ball(d):
    M = RadialMeasure("gaussian", d)
    est = star_body_measure(lambda th: np.ones(len(th)), M, 1024, seed=1)
    assert est.value == pytest.approx(radial_mass(M, 1.0), rel=1e-12)


def test_gaussian_of_ellipse_against_closed_form():
    # radial function of the ellipse x^2/a^2 + y^2/b^2 <= 1
    a, b = 2.0, 0.5
    M = RadialMeasure("gaussian", 2)

    def rho(th):
        return 1.0 / np.sqrt(th[:, 0] ** 2 / a**2 + th[:, 1] ** 2 / b**2)

    est = star_body_measure(rho, M, 2**15, seed=2)
    exact, _ = integrate.dblquad(lambda y, x: math.exp(-(x * x + y * y) / 2) / (2 * math.pi), -a, a,
                                 lambda x: -b * math.sqrt(max(0.0, 1 - x * x / a**2)), lambda x: b * math.sqrt(max(0.0, 1 - x * x / a**2)))
    assert abs(est.value - exact) <= 3 * est.stderr


def test_stderr_scaling():
    spec = StarBodySpec(random_polygon(0), make_standard("q_sym"), 2.0)
    M = RadialMeasure("gaussian", 2)
    a = star_body_measure(spec, M, 2**14, seed=3).stderr
    b = star_body_measure(spec, M, 2**16, seed=3).stderr
    assert a / b == pytest.approx(2.0, rel=0.2)


def test_estimates_reproducible():
    spec = StarBodySpec(random_polygon(0), make_standard("q_square"), 1.0)
    M = RadialMeasure("generalized_cauchy", 4, 5.0)
    assert star_body_measure(spec, M, 5000, 7) == star_body_measure(spec, M, 5000, 7)


def test_rotation_agnostic():
    spec = StarBodySpec(random_polygon(5), make_standard("q_unit"), 1.0)
    M = RadialMeasure("gaussian", 2)
    a = star_body_measure(spec, M, 2**15, 0)
    b = star_body_measure(spec, M, 2**15, 0, rotation=random_rotation(2, 9))
    assert abs(a.value - b.value) <= 3 * math.hypot(a.stderr, b.stderr)


def test_nested_bodies_monotone_coupling():
    K = random_polygon(1)
    q = make_standard("q_unit")
    M = RadialMeasure("gaussian", 2)
    # a larger K has larger projections, hence a smaller polar projection body
    small = pair_means(StarBodySpec(K.scale(1.5), q), M, 4096, 0)
    big = pair_means(StarBodySpec(K, q), M, 4096, 0)
    assert np.all(small <= big)
    diff, se = paired_difference(small, big)
    assert diff > 0 and se > 0


def test_dimension_mismatch():
    spec = StarBodySpec(cube(2), make_standard("q_square"), 1.0)
    with pytest.raises(DimensionMismatch):
        star_body_measure(spec, RadialMeasure("gaussian", 2), 100, 0)
