"""Steiner symmetrization, shadow systems and symmetrization flows.

The shadow system of ``K`` along ``u`` keeps every chord of ``K`` parallel to
``u`` on its line and moves its endpoints linearly in ``t``::

    lower_t(y) = (1+t)/2 a(y) - (1-t)/2 b(y)
    upper_t(y) = (1+t)/2 b(y) - (1-t)/2 a(y)

where ``[a(y), b(y)]`` is the chord of ``K`` over ``y`` in u-perp. Both
endpoint functions are piecewise linear over the arrangement of projected
edges of ``K``, so evaluating them at the vertices of that arrangement and
hulling is exact. In the plane those vertices are just the projected vertices
of ``K``; in space the crossings of projected edges must be added.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .bodies import ball_like
from .errors import OutOfRange
from .geometry import Polytope, as_direction, hausdorff_distance, orthonormal_complement

logger = logging.getLogger(__name__)

_SLOPE_TOL = 1e-12


def _edge_crossings(K, u):
    """Points of u-perp where two projected edges of a 3-polytope cross."""
    basis = orthonormal_complement(u)
    seg = K.edges @ basis.T
    p, r = seg[:, 0, :], seg[:, 1, :] - seg[:, 0, :]
    i, j = np.triu_indices(len(seg), k=1)
    denom = r[i, 0] * r[j, 1] - r[i, 1] * r[j, 0]
    qp = p[j] - p[i]
    scale = np.linalg.norm(r[i], axis=1) * np.linalg.norm(r[j], axis=1)
    ok = np.abs(denom) > 1e-12 * np.maximum(scale, np.finfo(float).tiny)
    i, j, denom, qp = i[ok], j[ok], denom[ok], qp[ok]
    s = (qp[:, 0] * r[j, 1] - qp[:, 1] * r[j, 0]) / denom
    v = (qp[:, 0] * r[i, 1] - qp[:, 1] * r[i, 0]) / denom
    inside = (s > 0) & (s < 1) & (v > 0) & (v < 1)
    pts2 = p[i[inside]] + s[inside, None] * r[i[inside]]
    return pts2 @ basis


def fiber_endpoints(K, u, y):
    """Chord ``[a, b]`` of ``K`` on each line ``y + R u``.

    Solved from the facet inequalities ``<n_F, y + s u> <= h_F``; facets
    parallel to ``u`` only constrain ``y`` and are skipped.
    """
    f = K.facets
    nu = f.normals @ u
    slack = f.offsets[None, :] - y @ f.normals.T
    up = nu > _SLOPE_TOL
    down = nu < -_SLOPE_TOL
    b = np.min(slack[:, up] / nu[up], axis=1)
    a = np.max(slack[:, down] / nu[down], axis=1)
    bad = a > b
    if bad.any():
        mid = 0.5 * (a[bad] + b[bad])
        a[bad] = mid
        b[bad] = mid
    return a, b


@dataclass(frozen=True)
class ShadowSystem:
    """Shadow system ``t -> K_u(t)`` on ``[-1, 1]``.

    ``y`` holds the breakpoints in u-perp (ambient coordinates) and ``a``/``b``
    the chord endpoints of ``K`` above them.
    """

    K: Polytope
    u: np.ndarray
    y: np.ndarray
    a: np.ndarray
    b: np.ndarray

    def at(self, t):
        if not -1.0 <= t <= 1.0:
            raise OutOfRange(f"shadow-system parameter must lie in [-1, 1], got {t}")
        lo = 0.5 * (1 + t) * self.a - 0.5 * (1 - t) * self.b
        hi = 0.5 * (1 + t) * self.b - 0.5 * (1 - t) * self.a
        pts = np.vstack([self.y + lo[:, None] * self.u, self.y + hi[:, None] * self.u])
        return Polytope(pts)

    @property
    def chord_lengths(self):
        return self.b - self.a


def shadow_system(K, u):
    u = as_direction(u, K.dim)
    v = K.vertices
    y = v - np.outer(v @ u, u)
    if K.dim == 3:
        y = np.vstack([y, _edge_crossings(K, u)])
    a, b = fiber_endpoints(K, u, y)
    # a vertex lies on its own chord
    k = len(v)
    s = v @ u
    a[:k], b[:k] = np.minimum(a[:k], s), np.maximum(b[:k], s)
    return ShadowSystem(K, u, y, a, b)


def shadow_system_at(S, t):
    return S.at(t)


def steiner(K, u):
    """Steiner symmetral of ``K`` about u-perp."""
    return shadow_system(K, u).at(0.0)


@dataclass(frozen=True)
class FlowStep:
    body: Polytope
    distance: float
    direction: np.ndarray
    volume_change: float
    simplified: bool


def _simplify2(P, cap):
    v = P.vertices
    while len(v) > cap:
        prev = np.roll(v, 1, axis=0)
        nxt = np.roll(v, -1, axis=0)
        cut = np.abs((v[:, 0] - prev[:, 0]) * (nxt[:, 1] - prev[:, 1]) - (v[:, 1] - prev[:, 1]) * (nxt[:, 0] - prev[:, 0]))
        v = np.delete(v, int(np.argmin(cut)), axis=0)
    return Polytope(v)


def _simplify3(P, cap):
    v = P.vertices
    keep = [int(np.argmax(np.linalg.norm(v, axis=1)))]
    dist = np.linalg.norm(v - v[keep[0]], axis=1)
    while len(keep) < cap:
        k = int(np.argmax(dist))
        keep.append(k)
        dist = np.minimum(dist, np.linalg.norm(v - v[k], axis=1))
    return Polytope(v[keep])


def simplify(P, cap):
    """Reduce ``P`` to at most ``cap`` vertices and restore its volume.

    Planar bodies lose their flattest corners one by one; spatial bodies keep
    a farthest-point subset. The result is rescaled about the origin so that
    its volume matches ``P``.
    """
    Q = _simplify2(P, cap) if P.dim == 2 else _simplify3(P, cap)
    return Q.scale((P.volume / Q.volume) ** (1.0 / P.dim))


def symmetrization_flow(K, n_steps, seed, max_vertices=512, ball_resolution=None, target=None):
    """Iterate Steiner symmetrizations in seeded uniformly random directions.

    Returns one :class:`FlowStep` per iteration with the Hausdorff distance to
    the origin-centred polytopal ball of volume ``|K|``. Iterates whose vertex
    count exceeds ``max_vertices`` are simplified (volume-preserving rescale);
    ``volume_change`` is measured on the symmetrization itself, before any
    simplification. With ``target`` set, the flow stops at the first step
    whose distance is at most ``target``.
    """
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")
    rng = np.random.default_rng(seed)
    ball = ball_like(K.dim, K.volume, ball_resolution)
    steps = []
    body = K
    for _ in range(n_steps):
        u = rng.standard_normal(K.dim)
        u /= np.linalg.norm(u)
        nxt = steiner(body, u)
        change = (nxt.volume - body.volume) / body.volume
        simplified = len(nxt.vertices) > max_vertices
        if simplified:
            nxt = simplify(nxt, max_vertices)
        body = nxt
        steps.append(FlowStep(body, hausdorff_distance(body, ball), u, change, simplified))
        if target is not None and steps[-1].distance <= target:
            break
    logger.debug("flow finished after %d steps, final distance %.3g", len(steps), steps[-1].distance)
    return steps
