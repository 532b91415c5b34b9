"""Projection bodies and the (L_p, Q) polar projection body.

A point of R^{nm} is an n x m matrix ``x = (x_1, ..., x_m)`` with columns
``x_i`` in R^n; flat vectors list the columns one after the other. The
(L_p, Q) polar projection body of ``K`` is the star body with gauge

    ||x||^p = n V_p(K, x.Q^t),      x.Q^t = {x q^t : q in Q},

and it is only ever evaluated through its radial function.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bodies import contains_origin, polar, require_origin_interior
from .errors import DegenerateDirection, DegenerateInput, DimensionMismatch, InvalidP, OriginNotInterior
from .geometry import Polytope

MAX_AMBIENT = 6


def as_matrix(x, n, m):
    """Flat vectors (..., n*m) to matrices (..., n, m), columns first."""
    x = np.asarray(x, dtype=float)
    return np.swapaxes(x.reshape(x.shape[:-1] + (m, n)), -1, -2)


def as_flat(x):
    x = np.asarray(x, dtype=float)
    n, m = x.shape[-2:]
    return np.swapaxes(x, -1, -2).reshape(x.shape[:-2] + (n * m,))


def matrix_image_support(x, Q, u):
    """Support of the image body ``x.Q^t`` in direction ``u``.

    max_{q in Q} <x q^t, u> = max_{q in Q} <q, x^t u> = h_Q(x^t u). ``x`` and
    ``u`` broadcast: ``x`` (..., n, m), ``u`` (..., n).
    """
    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=float)
    w = np.einsum("...nm,...n->...m", x, u)
    return np.max(w @ Q.vertices.T, axis=-1)


@dataclass(frozen=True)
class StarBodySpec:
    """Parameters of the (L_p, Q) polar projection body of ``K``."""

    K: Polytope
    Q: Polytope
    p: float = 1.0

    def __post_init__(self):
        if not self.p >= 1:
            raise InvalidP(f"p must be >= 1, got {self.p}")
        require_origin_interior(self.K, "K")
        if not contains_origin(self.Q):
            raise OriginNotInterior("Q must contain the origin")
        if self.d > MAX_AMBIENT or (self.n == 3 and self.m == 3):
            raise DimensionMismatch(f"n*m = {self.d} exceeds the supported ambient dimension")

    @property
    def n(self):
        return self.K.dim

    @property
    def m(self):
        return self.Q.dim

    @property
    def d(self):
        return self.n * self.m

    def with_body(self, K):
        return StarBodySpec(K, self.Q, self.p)


def lpq_gauge_p(K, Q, p, x):
    """n V_p(K, x.Q^t) for a batch of matrices ``x`` of shape (..., n, m)."""
    f = K.facets
    x = np.asarray(x, dtype=float)
    hq = matrix_image_support(x[..., None, :, :], Q, f.normals)
    if p == 1:
        return hq @ f.areas
    weights = f.offsets ** (1.0 - p) * f.areas
    return np.maximum(hq, 0.0) ** p @ weights


def gauge(spec, x):
    """Minkowski functional of the (L_p, Q) polar projection body at flat ``x``."""
    mats = as_matrix(x, spec.n, spec.m)
    return lpq_gauge_p(spec.K, spec.Q, spec.p, mats) ** (1.0 / spec.p)


def polar_proj_radial(spec, theta):
    """Radial function rho(theta) = (n V_p(K, theta.Q^t))^(-1/p).

    ``theta`` is a unit flat vector or a batch of them (shape (..., n*m)).
    """
    theta = np.asarray(theta, dtype=float)
    if theta.shape[-1] != spec.d:
        raise DimensionMismatch(f"direction has length {theta.shape[-1]}, expected {spec.d}")
    val = lpq_gauge_p(spec.K, spec.Q, spec.p, as_matrix(theta, spec.n, spec.m))
    if np.min(val) < 1e-14:
        raise DegenerateDirection("gauge vanishes; the origin is not interior to K")
    return val ** (-1.0 / spec.p)


def projection_support(K, u):
    """Cauchy's formula h_{Pi K}(u) = (1/2) sum_F |<u, n_F>| area_F."""
    f = K.facets
    return 0.5 * np.abs(np.asarray(u, dtype=float) @ f.normals.T) @ f.areas


def classical_proj_body(K):
    """Projection body of a polytope: the zonotope sum_F (area_F/2) [-n_F, n_F]."""
    f = K.facets
    gens = 0.5 * f.areas[:, None] * f.normals
    pts = np.vstack([gens[0], -gens[0]])
    for g in gens[1:]:
        pts = np.vstack([pts + g, pts - g])
        if len(pts) > 4 * K.dim:
            try:
                pts = Polytope(pts).vertices
            except DegenerateInput:  # still flat after the first generators
                pass
    return Polytope(pts)


def polar_projection_body(K):
    return polar(classical_proj_body(K))


def petty_product(K):
    """|K| |Pi° K| (at most pi^2/4 in the plane, attained by ellipses)."""
    return K.volume * polar_projection_body(K).volume



def _unit_ball_volume(k):
    return math.pi ** (k / 2) / math.gamma(k / 2 + 1)


def ball_polar_projection_volume(dim, volume):
    """|Pi° B| for the centred Euclidean ball B of the given volume.

    Pi B is the ball of radius omega_{n-1} r^{n-1}, so Pi° B has radius
    1 / (omega_{n-1} r^{n-1}).
    """
    r = (volume / _unit_ball_volume(dim)) ** (1.0 / dim)
    return _unit_ball_volume(dim) / (_unit_ball_volume(dim - 1) * r ** (dim - 1)) ** dim
