"""Convex polytopes in dimension 1, 2 and 3.

A :class:`Polytope` is built from an arbitrary point cloud and keeps only the
extreme points. Facets (unit outward normal, (d-1)-measure, support offset)
are derived on demand. Dimension 1 is supported as plain intervals so that
projections of planar bodies and one-dimensional ``Q`` bodies share the same
type.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
import math
from functools import cached_property

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import ConvexHull, QhullError

from .errors import DegenerateInput

REL_TOL = 1e-9
# collinear / coplanar vertex pruning, relative to diam**2
_FLAT_TOL = 1e-12


@dataclass(frozen=True)
class Facets:
    """Facet decomposition of a polytope.

    ``cycles`` is only filled in dimension 3: for each facet the indices (into
    ``Polytope.vertices``) of its vertices in counter-clockwise order seen from
    outside.
    """

    normals: np.ndarray
    areas: np.ndarray
    offsets: np.ndarray
    cycle_source: object = field(default=None, repr=False, compare=False)

    @property
    def cycles(self):
        return () if self.cycle_source is None else self.cycle_source()

    def __len__(self):
        return len(self.areas)


def _cross2(a, b):
    return a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]


def _prune_flat(cycle, tol):
    """Drop vertices of a counter-clockwise cycle that are not strict corners."""
    cycle = np.asarray(cycle)
    while len(cycle) >= 3:
        prev = np.roll(cycle, 1, axis=0)
        nxt = np.roll(cycle, -1, axis=0)
        turn = _cross2(cycle - prev, nxt - cycle)
        keep = turn > tol
        if keep.all():
            break
        if not keep.any():
            return cycle[:0]
        # drop one at a time from the flattest so chains of flat points resolve
        cycle = np.delete(cycle, int(np.argmin(turn)), axis=0)
    return cycle


def _prune_flat_indices(coords, idx, tol):
    idx = np.asarray(idx)
    while len(idx) >= 3:
        pts = coords[idx]
        turn = _cross2(pts - np.roll(pts, 1, axis=0), np.roll(pts, -1, axis=0) - pts)
        if (turn > tol).all():
            break
        idx = np.delete(idx, int(np.argmin(turn)))
    return idx


def _plane_basis(normal):
    """Orthonormal (e1, e2) with e1 x e2 = normal."""
    x, y, z = normal
    ax, ay, az = abs(x), abs(y), abs(z)
    # helper axis with the smallest normal component, crossed with the normal
    if ax <= ay and ax <= az:
        e1 = np.array([0.0, -z, y])
    elif ay <= az:
        e1 = np.array([z, 0.0, -x])
    else:
        e1 = np.array([-y, x, 0.0])
    e1 /= math.sqrt(e1 @ e1)
    e2 = np.array([y * e1[2] - z * e1[1], z * e1[0] - x * e1[2], x * e1[1] - y * e1[0]])
    return e1, e2


class Polytope:
    """Convex hull of a finite point set, full-dimensional in R^dim.

    Parameters
    ----------
    points : array_like, shape (k, dim)
        Any finite point set whose affine hull is all of R^dim, dim in {1,2,3}.
        A one-dimensional array is read as points on the line.

    Raises
    ------
    DegenerateInput
        If the points are affinely dependent within the relative tolerance.
    """

    def __init__(self, points):
        pts = np.asarray(points, dtype=float)
        if pts.ndim == 1:
            pts = pts.reshape(-1, 1)
        if pts.ndim != 2 or pts.shape[1] not in (1, 2, 3):
            raise ValueError(f"points must have shape (k, d) with d in 1..3, got {pts.shape}")
        if not np.all(np.isfinite(pts)):
            raise DegenerateInput("non-finite coordinates")
        dim = pts.shape[1]
        if len(pts) < dim + 1:
            raise DegenerateInput(f"need at least {dim + 1} points in dimension {dim}")
        self.dim = dim
        span = pts.max(axis=0) - pts.min(axis=0)
        self._diam = float(np.linalg.norm(span))
        if self._diam == 0.0:
            raise DegenerateInput("all points coincide")
        self._tri = None
        if dim == 1:
            self._points = np.array([[pts.min()], [pts.max()]])
        elif dim == 2:
            self._points = self._hull2(pts)
        else:
            self._points = self._hull3(pts)
        if self.volume <= REL_TOL * self._diam**dim:
            raise DegenerateInput("points are (nearly) affinely dependent")

    def _qhull(self, pts):
        try:
            return ConvexHull(pts)
        except (QhullError, ValueError) as exc:
            raise DegenerateInput(f"qhull rejected the point set: {exc}".splitlines()[0]) from None

    def _hull2(self, pts):
        hull = self._qhull(pts)
        cycle = _prune_flat(pts[hull.vertices], _FLAT_TOL * self._diam**2)
        if len(cycle) < 3:
            raise DegenerateInput("points are collinear")
        return cycle

    def _hull3(self, pts):
        hull = self._qhull(pts)
        used = np.unique(hull.simplices)
        remap = np.full(len(pts), -1)
        remap[used] = np.arange(len(used))
        self._tri = (remap[hull.simplices], hull.equations, hull.neighbors)
        return pts[used]

    # ------------------------------------------------------------------ basics
    @property
    def diameter_bound(self):
        """Diagonal of the bounding box; a cheap upper bound of the diameter."""
        return self._diam

    @cached_property
    def vertices(self):
        """Extreme points, shape (k, dim). Counter-clockwise in dimension 2."""
        if self.dim == 3:
            return self._cycles3[0]
        return self._points

    def __len__(self):
        return len(self.vertices)

    def __repr__(self):
        return f"Polytope(dim={self.dim}, n_vertices={len(self.vertices)}, volume={self.volume:.6g})"

    @cached_property
    def centroid_hint(self):
        """Mean of the extreme points; an interior point."""
        return self._points.mean(axis=0)

    def support(self, x):
        """h_P(x) = max over vertices of <x, v>; accepts a single vector or a batch."""
        x = np.asarray(x, dtype=float)
        return np.max(x @ self._points.T, axis=-1)

    # ------------------------------------------------------------------ facets
    @cached_property
    def facets(self):
        if self.dim == 1:
            lo, hi = self._points[:, 0]
            return Facets(np.array([[-1.0], [1.0]]), np.ones(2), np.array([-lo, hi]))
        if self.dim == 2:
            v = self._points
            edge = np.roll(v, -1, axis=0) - v
            length = np.linalg.norm(edge, axis=1)
            normals = np.column_stack([edge[:, 1], -edge[:, 0]]) / length[:, None]
            offsets = 0.5 * (np.einsum("ij,ij->i", normals, v) + np.einsum("ij,ij->i", normals, v + edge))
            return Facets(normals, length, offsets)
        return self._facets3()

    @cached_property
    def _groups3(self):
        """Merge coplanar neighbouring triangles into facets.

        Returns (member lists, unit normals, areas) for the facets of positive
        area; normals are area-weighted means of the triangle normals.
        """
        simp, eq, nb = self._tri
        pts = self._points
        normals = eq[:, :3]
        offs = -eq[:, 3]
        t = len(simp)
        rows = np.repeat(np.arange(t), 3)
        cols = nb.ravel()
        ok = cols >= 0
        rows, cols = rows[ok], cols[ok]
        same = (np.linalg.norm(normals[rows] - normals[cols], axis=1) <= REL_TOL) & (
            np.abs(offs[rows] - offs[cols]) <= REL_TOL * self._diam
        )
        graph = coo_matrix((np.ones(same.sum()), (rows[same], cols[same])), shape=(t, t))
        n_comp, label = connected_components(graph, directed=False)
        a, b, c = pts[simp[:, 0]], pts[simp[:, 1]], pts[simp[:, 2]]
        tri_area = 0.5 * np.linalg.norm(np.cross(b - a, c - a), axis=1)
        order = np.argsort(label, kind="stable")
        starts = np.searchsorted(label[order], np.arange(n_comp))
        area = np.add.reduceat(tri_area[order], starts)
        normal = np.add.reduceat(normals[order] * tri_area[order, None], starts)
        keep = area > _FLAT_TOL * self._diam**2
        normal = normal[keep] / np.linalg.norm(normal[keep], axis=1, keepdims=True)
        members = [m for m, k in zip(np.split(order, starts[1:]), keep) if k]
        return members, normal, area[keep]

    def _facets3(self):
        _, normals, areas = self._groups3
        offsets = np.max(self._points @ normals.T, axis=0)
        return Facets(normals, areas, offsets, cycle_source=lambda: self._cycles3[1])

    @cached_property
    def _cycles3(self):
        """(vertex array, per-facet vertex cycles counter-clockwise from outside)."""
        simp = self._tri[0]
        pts = self._points
        members, normals, _ = self._groups3
        tol = _FLAT_TOL * self._diam**2
        cycles = []
        for mem, normal in zip(members, normals):
            if len(mem) == 1:
                cyc = simp[mem[0]]
                a, b, c = pts[cyc]
                if np.cross(b - a, c - a) @ normal < 0:
                    cyc = cyc[[0, 2, 1]]
                cycles.append(cyc)
                continue
            idx = np.unique(simp[mem])
            e1, e2 = _plane_basis(normal)
            q = pts[idx]
            uv = np.column_stack([q @ e1, q @ e2])
            srt = np.argsort(np.arctan2(*(uv - uv.mean(axis=0)).T[::-1]))
            idx, uv = idx[srt], uv[srt]
            local = _prune_flat_indices(uv, np.arange(len(idx)), tol)
            cycles.append(idx[local] if len(local) >= 3 else idx)
        used = np.unique(np.concatenate(cycles))
        remap = np.full(len(pts), -1)
        remap[used] = np.arange(len(used))
        return pts[used], tuple(remap[c] for c in cycles)

    def planes(self):
        """(normals, offsets) of supporting hyperplanes, possibly with repeats.

        Cheaper than :attr:`facets` in dimension 3 because triangles sharing
        a facet are not merged.
        """
        if self.dim == 3:
            _, eq, _ = self._tri
            return eq[:, :3], -eq[:, 3]
        f = self.facets
        return f.normals, f.offsets

    @cached_property
    def edges(self):
        """Array (E, 2, dim) of edge segments."""
        v = self.vertices
        if self.dim == 1:
            return v.reshape(1, 2, 1)
        if self.dim == 2:
            return np.stack([v, np.roll(v, -1, axis=0)], axis=1)
        pairs = set()
        for cyc in self.facets.cycles:
            for i, j in zip(cyc, np.roll(cyc, -1)):
                pairs.add((min(i, j), max(i, j)))
        pairs = np.array(sorted(pairs))
        return np.stack([v[pairs[:, 0]], v[pairs[:, 1]]], axis=1)

    # ------------------------------------------------------------------ measures
    @cached_property
    def volume(self):
        """Cone decomposition sum_F (h_F - <c, n_F>) |F| / dim about an interior point."""
        if self.dim == 3:
            simp, eq, _ = self._tri
            pts = self._points
            a, b, c = pts[simp[:, 0]], pts[simp[:, 1]], pts[simp[:, 2]]
            area = 0.5 * np.linalg.norm(np.cross(b - a, c - a), axis=1)
            centre = pts.mean(axis=0)
            height = -eq[:, 3] - eq[:, :3] @ centre
            return float(np.sum(height * area) / 3.0)
        f = self.facets
        centre = self._points.mean(axis=0)
        return float(np.sum((f.offsets - f.normals @ centre) * f.areas) / self.dim)

    @property
    def surface_area(self):
        return float(self.facets.areas.sum())

    @cached_property
    def diameter(self):
        v = self.vertices
        d = v[:, None, :] - v[None, :, :]
        return float(np.sqrt(np.max(np.einsum("ijk,ijk->ij", d, d))))

    # ------------------------------------------------------------------ transforms
    def translate(self, shift):
        return Polytope(self.vertices + np.asarray(shift, dtype=float))

    def scale(self, factor):
        return Polytope(self.vertices * float(factor))

    def linear_map(self, matrix):
        matrix = np.asarray(matrix, dtype=float)
        return Polytope(self.vertices @ matrix.T)

    def contains(self, x, tol=REL_TOL):
        """Facet-inequality membership test, vectorized over rows of ``x``."""
        f = self.facets
        x = np.asarray(x, dtype=float)
        return np.max(x @ f.normals.T - f.offsets, axis=-1) <= tol * self._diam

    def distance(self, x):
        """Euclidean distance from each row of ``x`` to the polytope."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        f = self.facets
        outside = np.max(x @ f.normals.T - f.offsets, axis=1) > 0
        dist = np.zeros(len(x))
        if not outside.any():
            return dist
        xo = x[outside]
        seg = self.edges
        a, b = seg[:, 0, :], seg[:, 1, :]
        ab = b - a
        denom = np.maximum(np.einsum("ij,ij->i", ab, ab), np.finfo(float).tiny)
        rel = xo[:, None, :] - a[None, :, :]
        t = np.clip(np.einsum("kij,ij->ki", rel, ab) / denom, 0.0, 1.0)
        closest = a[None] + t[..., None] * ab[None]
        best = np.min(np.linalg.norm(xo[:, None, :] - closest, axis=2), axis=1)
        if self.dim == 3:
            v = self.vertices
            for normal, h, cyc in zip(f.normals, f.offsets, f.cycles):
                height = xo @ normal - h
                foot = xo - height[:, None] * normal
                poly = v[cyc]
                side = np.cross(np.roll(poly, -1, axis=0) - poly, foot[:, None, :] - poly[None]) @ normal
                inside = np.all(side >= -REL_TOL * self._diam**2, axis=1) & (height > 0)
                best = np.where(inside, np.minimum(best, height), best)
        dist[outside] = best
        return dist

    # ------------------------------------------------------------------ io
    def to_dict(self):
        return {"dim": self.dim, "vertices": self.vertices.tolist()}


def convex_hull(points, dim=None):
    """Convex hull of ``points`` as an irredundant :class:`Polytope`."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts.reshape(-1, 1)
    if dim is not None and pts.shape[1] != dim:
        raise DegenerateInput(f"expected points in dimension {dim}, got {pts.shape[1]}")
    return Polytope(pts)


def volume(P):
    return P.volume


def facets(P):
    return P.facets


def as_direction(u, dim=None):
    """Return ``u`` normalized to unit length."""
    u = np.asarray(u, dtype=float).ravel()
    if dim is not None and u.shape[0] != dim:
        raise ValueError(f"direction has dimension {u.shape[0]}, expected {dim}")
    norm = np.linalg.norm(u)
    if not np.isfinite(norm) or norm == 0.0:
        raise ValueError("direction must be a non-zero finite vector")
    return u / norm


def orthonormal_complement(u):
    """Rows form an orthonormal basis of u-perp.

    Gram-Schmidt over the standard basis, smallest axis index first, so that
    projected coordinates are reproducible.
    """
    u = as_direction(u)
    basis = [u]
    for k in range(len(u)):
        e = np.zeros(len(u))
        e[k] = 1.0
        for b in basis:
            e -= (e @ b) * b
        norm = np.linalg.norm(e)
        if norm > 1e-6:
            basis.append(e / norm)
        if len(basis) == len(u):
            break
    return np.array(basis[1:])


def project(P, u):
    """Orthogonal projection onto u-perp, in the coordinates of :func:`orthonormal_complement`."""
    u = as_direction(u, P.dim)
    if P.dim == 1:
        raise DegenerateInput("cannot project a one-dimensional body")
    basis = orthonormal_complement(u)
    return Polytope(P.vertices @ basis.T)


def reflect(P, u):
    """Householder reflection about the hyperplane u-perp."""
    u = as_direction(u, P.dim)
    v = P.vertices
    return Polytope(v - 2.0 * np.outer(v @ u, u))


def hausdorff_distance(P, Q):
    """Exact Hausdorff distance between two polytopes of the same dimension."""
    if P.dim != Q.dim:
        raise ValueError("bodies live in different dimensions")
    return float(max(Q.distance(P.vertices).max(), P.distance(Q.vertices).max()))


def dumps_body(P):
    """Body JSON with 17 significant digits per coordinate."""
    rows = ", ".join("[" + ", ".join(f"{x:.17g}" for x in row) + "]" for row in P.vertices)
    return f'{{"dim": {P.dim}, "vertices": [{rows}]}}'


def loads_body(text):
    """Parse body JSON; rejects malformed or non-full-dimensional input."""
    try:
        data = json.loads(text)
        dim = int(data["dim"])
        pts = np.asarray(data["vertices"], dtype=float)
    except (ValueError, KeyError, TypeError) as exc:
        raise DegenerateInput(f"malformed body JSON: {exc}") from None
    if pts.ndim != 2 or pts.shape[1] != dim:
        raise DegenerateInput("vertex rows do not match the declared dimension")
    return Polytope(pts)
