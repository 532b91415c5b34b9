"""Support functions, gauges, polars, p-sums and a catalog of test bodies."""
from __future__ import annotations

import math

import numpy as np
from scipy.spatial import ConvexHull

from .errors import DegenerateInput, InvalidP, OriginNotInterior, UnknownName
from .geometry import REL_TOL, Polytope

GOLDEN_ANGLE = math.pi * (3.0 - math.sqrt(5.0))


def support(K, x):
    """Support function h_K(x) = max_{y in K} <x, y>.

    ``K`` may be a :class:`Polytope` or any finite point array (segments such
    as ``[0, u]`` are passed as ``np.array([0 * u, u])``). ``x`` may be a
    single vector or a batch of row vectors.
    """
    if isinstance(K, Polytope):
        return K.support(x)
    pts = np.asarray(K, dtype=float)
    if pts.ndim == 1:
        pts = pts.reshape(-1, 1)
    return np.max(np.asarray(x, dtype=float) @ pts.T, axis=-1)


def origin_margin(K):
    """Smallest facet offset divided by the diameter; positive iff 0 is interior."""
    return float(K.planes()[1].min() / K.diameter_bound)


def require_origin_interior(K, name="K"):
    """Return ``K`` unchanged, or raise if the origin is not an interior point."""
    if origin_margin(K) < REL_TOL:
        raise OriginNotInterior(f"{name} does not contain the origin in its interior")
    return K


def contains_origin(K):
    return origin_margin(K) >= -REL_TOL


def minkowski_functional(K, x):
    """Gauge ||x||_K = max_F <x, n_F> / h_F, clamped at zero."""
    require_origin_interior(K)
    f = K.facets
    vals = np.asarray(x, dtype=float) @ (f.normals / f.offsets[:, None]).T
    return np.maximum(np.max(vals, axis=-1), 0.0)


def polar(K):
    """Polar body: vertices are n_F / h_F over the facets of K."""
    require_origin_interior(K)
    normals, offsets = K.planes()
    return Polytope(normals / offsets[:, None])


def direction_grid(dim, n_dirs):
    """Deterministic unit directions.

    Uniform angles ``2 pi k / n`` in the plane, a Fibonacci spiral on the
    2-sphere, and ``+-1`` on the line.
    """
    if dim == 1:
        return np.array([[-1.0], [1.0]])
    if dim == 2:
        ang = 2.0 * np.pi * np.arange(n_dirs) / n_dirs
        return np.column_stack([np.cos(ang), np.sin(ang)])
    if dim == 3:
        k = np.arange(n_dirs) + 0.5
        z = 1.0 - 2.0 * k / n_dirs
        r = np.sqrt(1.0 - z * z)
        phi = GOLDEN_ANGLE * k
        return np.column_stack([r * np.cos(phi), r * np.sin(phi), z])
    raise ValueError(f"no direction grid in dimension {dim}")


def p_sum_approx(K, L, p, n_dirs, weight=1.0, extra_dirs=None):
    """Outer polytopal approximation of the Firey p-sum ``K +_p weight.L``.

    The result is the intersection of halfspaces ``<x, u> <= (h_K(u)^p +
    weight * h_L(u)^p)^(1/p)`` over :func:`direction_grid` (plus
    ``extra_dirs`` if given). It is computed as the polar of the hull of ``u / h(u)``, which
    drops redundant halfspaces automatically.
    """
    if not p >= 1:
        raise InvalidP(f"p must be >= 1, got {p}")
    require_origin_interior(K)
    if not contains_origin(L):
        raise OriginNotInterior("L must contain the origin")
    dirs = direction_grid(K.dim, n_dirs)
    if extra_dirs is not None:
        extra = np.asarray(extra_dirs, dtype=float)
        dirs = np.vstack([dirs, extra / np.linalg.norm(extra, axis=1, keepdims=True)])
    hk = K.support(dirs)
    hl = np.maximum(L.support(dirs), 0.0)
    if p == 1:
        h = hk + weight * hl
    else:
        h = (hk**p + weight * hl**p) ** (1.0 / p)
    return polar(Polytope(dirs / h[:, None]))


def wulff_volume(dirs, h):
    """Volume of {x : <x, u_i> <= h_i} for unit ``dirs`` and positive ``h``.

    Same body as ``polar(Polytope(dirs / h))`` but computed with a single qhull
    call and no facet bookkeeping.
    """
    pts = np.asarray(dirs) / np.asarray(h)[:, None]
    if pts.shape[1] == 2:
        return _wulff_area(pts)
    return _wulff_volume3(pts, np.asarray(dirs), np.asarray(h))


def _wulff_volume3(pts, dirs, h):
    # Facet i of the Wulff shape is dual to hull vertex i: its corners are the
    # duals w_T = n_T / off_T of the triangles around i. Cone volumes
    # h_i area_i / 3 come from the fan sum of (w_T x w_N) . u_i over
    # consecutive triangles T, N around i, with one orientation throughout.
    hull = ConvexHull(pts)
    simp, eq, nb = hull.simplices.copy(), hull.equations, hull.neighbors.copy()
    a, b, c = pts[simp[:, 0]], pts[simp[:, 1]], pts[simp[:, 2]]
    flip = np.einsum("ij,ij->i", np.cross(b - a, c - a), eq[:, :3]) < 0
    simp[flip] = simp[flip][:, [0, 2, 1]]
    nb[flip] = nb[flip][:, [0, 2, 1]]
    w = eq[:, :3] / -eq[:, 3:]
    total = 0.0
    for k in range(3):
        v = simp[:, k]
        nxt = nb[:, (k + 1) % 3]
        total += np.sum(h[v] * np.einsum("ij,ij->i", np.cross(w, w[nxt]), dirs[v]))
    return abs(float(total)) / 6.0


def _wulff_area(pts):
    # qhull returns planar hull vertices counter-clockwise and copes with the
    # repeated directions that appear when facet normals are added to a grid
    pts = pts[ConvexHull(pts).vertices]
    nxt = np.roll(pts, -1, axis=0)
    edge = nxt - pts
    normal = np.column_stack([edge[:, 1], -edge[:, 0]])
    dual = normal / np.einsum("ij,ij->i", normal, pts)[:, None]
    return float(0.5 * np.sum(dual[:, 0] * np.roll(dual[:, 1], -1) - dual[:, 1] * np.roll(dual[:, 0], -1)))


def p_sum_volume(K, L, p, n_dirs, weight=1.0, extra_dirs=None):
    """Volume of :func:`p_sum_approx` without building the polytope."""
    if not p >= 1:
        raise InvalidP(f"p must be >= 1, got {p}")
    dirs = direction_grid(K.dim, n_dirs)
    if extra_dirs is not None:
        extra = np.asarray(extra_dirs, dtype=float)
        dirs = np.vstack([dirs, extra / np.linalg.norm(extra, axis=1, keepdims=True)])
    hk = K.support(dirs)
    hl = np.maximum(L.support(dirs), 0.0)
    h = hk + weight * hl if p == 1 else (hk**p + weight * hl**p) ** (1.0 / p)
    return wulff_volume(dirs, h)


# ---------------------------------------------------------------------- catalog
def regular_polygon(k, circumradius=1.0, phase=0.0):
    ang = phase + 2.0 * np.pi * np.arange(k) / k
    return Polytope(circumradius * np.column_stack([np.cos(ang), np.sin(ang)]))


def fibonacci_ball(n_points=256, radius=1.0):
    return Polytope(radius * direction_grid(3, n_points))


def ball_like(dim, volume, resolution=None):
    """Origin-centred polytopal ball of the given volume (a ``B_K`` stand-in).

    A regular ``resolution``-gon in the plane, a Fibonacci polytope in space,
    rescaled so that its volume equals ``volume`` exactly.
    """
    if dim == 1:
        half = volume / 2.0
        return Polytope([[-half], [half]])
    if dim == 2:
        base = regular_polygon(resolution or 64)
    elif dim == 3:
        base = fibonacci_ball(resolution or 256)
    else:
        raise ValueError(f"no ball approximation in dimension {dim}")
    return base.scale((volume / base.volume) ** (1.0 / dim))


def cube(dim=3, half_width=1.0):
    grids = np.meshgrid(*[[-half_width, half_width]] * dim, indexing="ij")
    return Polytope(np.stack([g.ravel() for g in grids], axis=1))


def standard_simplex(dim):
    """conv{0, e_1, ..., e_dim}."""
    return Polytope(np.vstack([np.zeros(dim), np.eye(dim)]))


def random_polygon(seed, n_points=7, radius_range=(0.5, 1.5)):
    """Seeded random polygon containing the origin well inside.

    Points are drawn at random angles and radii around the origin, then hulled.
    Draws are repeated until the origin has a margin of at least 5% of the
    diameter, which keeps every shadow-system member an origin body.
    """
    rng = np.random.default_rng(seed)
    while True:
        ang = np.sort(rng.uniform(0.0, 2.0 * np.pi, n_points))
        rad = rng.uniform(*radius_range, n_points)
        pts = np.column_stack([rad * np.cos(ang), rad * np.sin(ang)])
        try:
            P = Polytope(pts)
        except DegenerateInput:
            continue
        if origin_margin(P) >= 0.05:
            return P


def random_polytope3(seed, n_points=10, radius_range=(0.5, 1.5)):
    rng = np.random.default_rng(seed)
    while True:
        d = rng.standard_normal((n_points, 3))
        d /= np.linalg.norm(d, axis=1, keepdims=True)
        pts = d * rng.uniform(*radius_range, n_points)[:, None]
        try:
            P = Polytope(pts)
        except DegenerateInput:
            continue
        if origin_margin(P) >= 0.05:
            return P


def random_body(dim, seed, n_points=None):
    if dim == 2:
        return random_polygon(seed, n_points or 7)
    if dim == 3:
        return random_polytope3(seed, n_points or 10)
    raise ValueError(f"no random bodies in dimension {dim}")


CATALOG = {
    "square": lambda half_width=1.0: cube(2, half_width),
    "cube": lambda half_width=1.0, dim=3: cube(dim, half_width),
    "simplex": lambda dim=2: standard_simplex(dim),
    "triangle": lambda: Polytope([[-1.0, -0.5], [1.5, -0.5], [-0.2, 1.2]]),
    "regular_polygon": regular_polygon,
    "random_polygon": lambda seed=0, n_points=7: random_polygon(seed, n_points),
    "random_polytope3": lambda seed=0, n_points=10: random_polytope3(seed, n_points),
    "ball": lambda dim=2, volume=math.pi, resolution=None: ball_like(dim, volume, resolution),
    "segment": lambda lo=0.0, hi=1.0: Polytope([[lo], [hi]]),
    # Q bodies: [0,1] gives the classical operator, [-1,1] the symmetric L_p one
    "q_unit": lambda: Polytope([[0.0], [1.0]]),
    "q_sym": lambda: Polytope([[-1.0], [1.0]]),
    "q_square": lambda: cube(2, 1.0),
    "neg_simplex": lambda m=2: Polytope(-np.vstack([np.zeros(m), np.eye(m)])),
    "box": lambda lo=(0.0, 0.0), hi=(1.0, 1.0): Polytope(
        np.stack([g.ravel() for g in np.meshgrid(*zip(lo, hi), indexing="ij")], axis=1)
    ),
}


def make_standard(name, **params):
    """Build a catalog body by name; see ``CATALOG`` for names and parameters."""
    try:
        factory = CATALOG[name]
    except KeyError:
        raise UnknownName(f"unknown body {name!r}; known: {sorted(CATALOG)}") from None
    return factory(**params)
