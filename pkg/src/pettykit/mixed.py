"""Mixed volumes, L_p mixed volumes and L_p surface area of polytopes.

All exact paths go through the surface area measure of ``K``: a polytope's
measure is a finite sum of atoms ``area_F * delta_{n_F}``. The Firey p-sum
limit is kept as an independent finite-difference oracle.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import ConvexHull

from .bodies import contains_origin, direction_grid, require_origin_interior, support, wulff_volume
from .errors import InvalidEps, InvalidP, OriginNotInterior
from .geometry import REL_TOL, Polytope


@dataclass(frozen=True)
class SurfaceAreaMeasure:
    normals: np.ndarray
    weights: np.ndarray

    @property
    def total(self):
        return float(self.weights.sum())

    def resultant(self):
        """sum of weight * normal; zero for a closed surface."""
        return self.weights @ self.normals


def surface_area_measure(K):
    f = K.facets
    return SurfaceAreaMeasure(f.normals, f.areas)


def mixed_volume_first(K, L):
    """V(K[n-1], L) = (1/n) sum_F h_L(n_F) area_F.

    ``L`` is a polytope or a point array (e.g. the segment ``[0, u]``).
    """
    f = K.facets
    return float(np.sum(support(L, f.normals) * f.areas) / K.dim)


def _check_p(p):
    if not p >= 1:
        raise InvalidP(f"p must be >= 1, got {p}")


def lp_mixed_volume(K, L, p):
    """Lutwak's L_p mixed volume via its facet representation.

    V_p(K, L) = (1/n) sum_F h_L(n_F)^p h_K(n_F)^(1-p) area_F
    """
    _check_p(p)
    f = K.facets
    if f.offsets.min() <= REL_TOL * K.diameter_bound:
        raise OriginNotInterior("K must contain the origin in its interior")
    hl = support(L, f.normals)
    if p == 1:
        return float(np.sum(hl * f.areas) / K.dim)
    if hl.min() < -REL_TOL * K.diameter_bound:
        raise OriginNotInterior("L must contain the origin")
    hl = np.maximum(hl, 0.0)
    return float(np.sum(hl**p * f.offsets ** (1.0 - p) * f.areas) / K.dim)


def lp_surface_area(K, p):
    """S_p(K) = V_p(K, B): the unit ball has h = 1 on every facet normal."""
    _check_p(p)
    f = K.facets
    if f.offsets.min() <= REL_TOL * K.diameter_bound:
        raise OriginNotInterior("K must contain the origin in its interior")
    return float(np.sum(f.offsets ** (1.0 - p) * f.areas) / K.dim)


def _wulff_volume(K, L, p, weight, dirs):
    """Volume of {x : <x, u> <= (h_K(u)^p + weight h_L(u)^p)^(1/p), u in dirs}."""
    hk = K.support(dirs)
    hl = np.maximum(L.support(dirs), 0.0)
    hp = hk + weight * hl if p == 1 else hk**p + weight * hl**p
    if hp.min() <= 0:
        return None
    return wulff_volume(dirs, hp if p == 1 else hp ** (1.0 / p))


def lp_mixed_volume_fd_oracle(K, L, p, eps=1e-4, n_dirs=2048, scheme="central"):
    """Finite-difference value of (p/n) d/d eps |K +_p eps.L| at eps = 0.

    ``eps.L`` scales h_L**p by eps. Volumes are those of Wulff shapes on a
    fixed direction grid, augmented by the facet normals of ``K`` so that the
    unperturbed shape is ``K`` itself. ``scheme="forward"`` is the one-sided
    quotient (|K +_p eps.L| - |K|) / eps with O(eps) bias; the default
    ``"central"`` differences the shapes at +eps and -eps, which cancels that
    term (the Wulff-shape volume is differentiable in eps).
    """
    _check_p(p)
    if not 1e-6 <= eps <= 1e-2:
        raise InvalidEps(f"eps must lie in [1e-6, 1e-2], got {eps}")
    if scheme not in ("central", "forward"):
        raise ValueError(f"scheme must be 'central' or 'forward', got {scheme!r}")
    require_origin_interior(K)
    if not contains_origin(L):
        raise OriginNotInterior("L must contain the origin")
    dirs = direction_grid(K.dim, n_dirs)
    dirs = np.vstack([dirs, K.facets.normals])
    grown = _wulff_volume(K, L, p, eps, dirs)
    if scheme == "central":
        shrunk = _wulff_volume(K, L, p, -eps, dirs)
        if shrunk is not None:
            return p / K.dim * (grown - shrunk) / (2 * eps)
    base = _wulff_volume(K, L, p, 0.0, dirs)
    return p / K.dim * (grown - base) / eps


def _sum_points(bodies):
    pts = bodies[0].vertices
    for B in bodies[1:]:
        pts = (pts[:, None, :] + B.vertices[None, :, :]).reshape(-1, pts.shape[1])
        if pts.shape[1] > 1:
            pts = pts[ConvexHull(pts).vertices]
    return pts


def minkowski_sum(*bodies):
    """Minkowski sum of polytopes: hull of all vertex sums."""
    return Polytope(_sum_points(bodies))


def minkowski_sum_volume(*bodies):
    pts = _sum_points(bodies)
    if pts.shape[1] == 1:
        return float(np.ptp(pts))
    return float(ConvexHull(pts).volume)


def mixed_volume(*bodies):
    """V(K_1, ..., K_n) by polarization of Minkowski-sum volumes.

    (1/n!) sum over non-empty subsets S of (-1)^(n-|S|) |sum_{i in S} K_i|
    """
    n = bodies[0].dim
    if len(bodies) != n:
        raise ValueError(f"need exactly {n} bodies in dimension {n}")
    total = 0.0
    for r in range(1, n + 1):
        for subset in itertools.combinations(bodies, r):
            vol = subset[0].volume if r == 1 else minkowski_sum_volume(*subset)
            total += (-1) ** (n - r) * vol
    return total / math.factorial(n)
