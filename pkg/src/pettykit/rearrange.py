"""Cell-wise constant densities on box grids and their rearrangements.

Rearrangements permute cell values, so equimeasurability and conservation of
mass hold by construction. Ties are broken by the C-order (lexicographic)
cell index.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInput


@dataclass(frozen=True, eq=False)
class GridDensity:
    lo: np.ndarray
    hi: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        lo = np.asarray(self.lo, dtype=float)
        hi = np.asarray(self.hi, dtype=float)
        vals = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        object.__setattr__(self, "values", vals)
        if vals.ndim not in (2, 3) or lo.shape != (vals.ndim,) or hi.shape != (vals.ndim,):
            raise DegenerateInput("grid densities live in dimension 2 or 3 with matching bounds")
        if not np.all(hi > lo):
            raise DegenerateInput("box bounds must satisfy lo < hi")
        if not np.all(np.isfinite(vals)) or vals.min() < 0:
            raise DegenerateInput("cell values must be finite and nonnegative")
        if not vals.sum() > 0:
            raise DegenerateInput("density has zero mass")

    @property
    def dim(self):
        return self.values.ndim

    @property
    def resolution(self):
        return self.values.shape

    @property
    def widths(self):
        return (self.hi - self.lo) / np.array(self.resolution)

    @property
    def cell_volume(self):
        return float(np.prod(self.widths))

    @property
    def mass(self):
        return float(self.values.sum() * self.cell_volume)

    def axis_centers(self, axis):
        w = self.widths[axis]
        return self.lo[axis] + w * (np.arange(self.resolution[axis]) + 0.5)

    def cell_centers(self):
        """Array of shape resolution + (dim,)."""
        grids = np.meshgrid(*[self.axis_centers(k) for k in range(self.dim)], indexing="ij")
        return np.stack(grids, axis=-1)

    def with_values(self, values):
        return GridDensity(self.lo, self.hi, values)

    def superlevel_volume(self, t):
        return float(np.count_nonzero(self.values > t) * self.cell_volume)

    def l1_distance(self, other):
        return float(np.abs(self.values - other.values).sum() * self.cell_volume)


def _decreasing_into(values, keys):
    """Put the largest values into the cells with the smallest keys (stable)."""
    cells = np.argsort(keys, kind="stable")
    vals = np.sort(values)[::-1]
    out = np.empty_like(values)
    out[cells] = vals
    return out


def symmetric_decreasing_rearrangement(f):
    """Radially nonincreasing rearrangement about the box centre."""
    centre = 0.5 * (f.lo + f.hi)
    dist = np.linalg.norm(f.cell_centers() - centre, axis=-1).ravel()
    out = _decreasing_into(f.values.ravel(), dist)
    return f.with_values(out.reshape(f.resolution))


def _lattice_fibers(f, step):
    """Fibers of a square planar grid along the primitive lattice vector ``step``.

    Returns the fiber label and the signed position along ``step`` of every
    cell, measured from the box centre.
    """
    if f.dim != 2 or f.resolution[0] != f.resolution[1] or not np.isclose(f.widths[0], f.widths[1]):
        raise ValueError("lattice-direction rearrangement needs a square 2-D grid with square cells")
    a, b = (int(s) for s in step)
    if math.gcd(a, b) != 1:
        raise ValueError(f"lattice direction must be primitive, got {step}")
    n = f.resolution[0]
    i, j = np.indices((n, n))
    ci, cj = i - 0.5 * (n - 1), j - 0.5 * (n - 1)
    return (b * i - a * j).ravel(), (a * ci + b * cj).ravel()


_NAMED_STEPS = {"diag": (1, 1), "anti": (1, -1)}


def steiner_rearrangement(f, axis):
    """Rearrange every fiber of cells along ``axis`` symmetrically and decreasingly.

    ``axis`` is a coordinate index, or on a square planar grid a primitive
    lattice direction ``(a, b)`` (``"diag"``/``"anti"`` name ``(1, 1)`` and
    ``(1, -1)``). Fibers are centred on the box centre.
    """
    if isinstance(axis, str) or isinstance(axis, (tuple, list)):
        step = _NAMED_STEPS.get(axis, axis) if isinstance(axis, str) else axis
        if isinstance(step, str):
            raise ValueError(f"unknown axis {axis!r}")
        line, pos = _lattice_fibers(f, step)
        vals = f.values.ravel()
        out = np.empty_like(vals)
        order = np.argsort(line, kind="stable")
        bounds = np.flatnonzero(np.diff(line[order])) + 1
        for idx in np.split(order, bounds):
            out[idx] = _decreasing_into(vals[idx], np.abs(pos[idx]))
        return f.with_values(out.reshape(f.resolution))
    if not isinstance(axis, (int, np.integer)) or not 0 <= axis < f.dim:
        raise ValueError(f"axis must be in [0, {f.dim}) or a lattice direction, got {axis!r}")
    n = f.resolution[axis]
    dist = np.abs(np.arange(n) - 0.5 * (n - 1))
    order = np.argsort(dist, kind="stable")
    moved = np.moveaxis(f.values, axis, -1)
    sorted_vals = -np.sort(-moved, axis=-1)
    out = np.empty_like(moved)
    out[..., order] = sorted_vals
    return f.with_values(np.moveaxis(out, -1, axis))


def marginal_profile(f, axis=None):
    """Integrate ``f`` over every axis except ``axis`` (default: the last).

    Returns ``(centres, profile)`` along the kept axis.
    """
    axis = f.dim - 1 if axis is None else axis
    others = tuple(k for k in range(f.dim) if k != axis)
    prof = f.values.sum(axis=others) * np.prod(f.widths[list(others)])
    return f.axis_centers(axis), prof


def concavity_gap(profile, support_only=True):
    """Largest vertical gap between a sampled profile and its concave majorant.

    With ``support_only`` the check is restricted to the support, minus its two
    end cells: those straddle the support boundary, so their averages mix in
    the zero extension, which is not concave.
    """
    y = np.asarray(profile, dtype=float)
    if support_only:
        nz = np.flatnonzero(y > 0)
        if len(nz) < 3:
            return 0.0
        y = y[nz[0] + 1 : nz[-1]]
    x = np.arange(len(y), dtype=float)
    hull = [0]
    for k in range(1, len(y)):
        while len(hull) >= 2:
            a, b = hull[-2], hull[-1]
            if (y[b] - y[a]) * (x[k] - x[a]) <= (y[k] - y[a]) * (x[b] - x[a]):
                hull.pop()
            else:
                break
        hull.append(k)
    upper = np.interp(x, x[hull], y[hull])
    return float(np.max(upper - y))


def sample(f, n, seed):
    """``n`` i.i.d. points with density proportional to ``f``."""
    rng = np.random.default_rng(seed)
    p = f.values.ravel() / f.values.sum()
    cells = rng.choice(p.size, size=n, p=p)
    idx = np.column_stack(np.unravel_index(cells, f.resolution))
    return f.lo + f.widths * (idx + rng.uniform(size=(n, f.dim)))


# ------------------------------------------------------------------- builders
def from_function(fn, lo, hi, resolution):
    """Grid density with cell values ``fn(centres)``."""
    shell = GridDensity(lo, hi, np.ones(tuple(resolution)))
    return shell.with_values(np.asarray(fn(shell.cell_centers()), dtype=float))


def indicator(P, lo, hi, resolution, supersample=4):
    """Cell-coverage density of a polytope: fraction of sub-cell centres inside ``P``."""
    shell = GridDensity(lo, hi, np.ones(tuple(resolution)))
    s = supersample
    offs = (np.arange(s) + 0.5) / s - 0.5
    sub = np.stack(np.meshgrid(*[offs] * shell.dim, indexing="ij"), axis=-1).reshape(-1, shell.dim)
    normals, offsets = P.planes()
    tol = 1e-12 * P.diameter_bound
    centres = shell.cell_centers()
    cover = np.zeros(shell.resolution)
    for o in sub:
        pts = centres + o * shell.widths
        cover += np.all(pts @ normals.T <= offsets + tol, axis=-1)
    return shell.with_values(cover / len(sub))


def density_to_dict(f):
    return {
        "dim": f.dim,
        "box": [f.lo.tolist(), f.hi.tolist()],
        "resolution": list(f.resolution),
        "values": f.values.ravel().tolist(),
    }


def density_from_dict(data):
    try:
        res = tuple(int(r) for r in data["resolution"])
        vals = np.asarray(data["values"], dtype=float)
        if len(res) != int(data["dim"]) or vals.size != math.prod(res):
            raise DegenerateInput("resolution does not match the number of values")
        lo, hi = data["box"]
        return GridDensity(lo, hi, vals.reshape(res))
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, DegenerateInput):
            raise
        raise DegenerateInput(f"malformed density: {exc}") from exc


def dumps_density(f):
    return json.dumps(density_to_dict(f))


def loads_density(text):
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DegenerateInput(f"malformed density JSON: {exc}") from exc
    return density_from_dict(data)


def write_points_csv(path, points):
    points = np.asarray(points, dtype=float)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([f"x{k}" for k in range(points.shape[1])])
        w.writerows(points.tolist())
