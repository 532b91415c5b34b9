"""Midpoint-convexity scans of geometric functionals along linear parameter systems.

Each scan evaluates a functional on a uniform t-grid for many seeded
instances and reports the worst midpoint-convexity violation relative to the
size of the values.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .bodies import p_sum_volume, random_body
from .errors import DegenerateInput
from .geometry import Polytope, as_direction
from .mixed import lp_mixed_volume, lp_surface_area, mixed_volume, mixed_volume_first
from .symmetrize import shadow_system, steiner

EXACT_TOL = 1e-9
GRID_BIAS_FACTOR = 10.0


def t_grid(n_points=41, lo=-1.0, hi=1.0):
    return np.linspace(lo, hi, n_points)


def midpoint_violation(values):
    """max over i, k of f(t_i) - (f(t_{i-k}) + f(t_{i+k})) / 2 on a uniform grid.

    Zero or negative means midpoint-convex at every resolvable scale.
    """
    f = np.asarray(values, dtype=float)
    worst = -np.inf
    for k in range(1, (len(f) - 1) // 2 + 1):
        worst = max(worst, float(np.max(f[k:-k] - 0.5 * (f[: -2 * k] + f[2 * k :]))))
    return worst


def relative_violation(values):
    f = np.asarray(values, dtype=float)
    return max(midpoint_violation(f), 0.0) / max(float(np.max(np.abs(f))), np.finfo(float).tiny)


@dataclass(frozen=True)
class LinearParameterSystem:
    """t -> conv{x_j + speed_j * t * u}."""

    points: np.ndarray
    speeds: np.ndarray
    u: np.ndarray

    def at(self, t):
        return Polytope(self.points + t * self.speeds[:, None] * self.u)


def random_system(dim, seed, n_points=None):
    """Seeded linear parameter system that stays full-dimensional on [-1, 1]."""
    rng = np.random.default_rng(seed)
    n_points = n_points or (7 if dim == 2 else 8)
    while True:
        pts = rng.standard_normal((n_points, dim))
        speeds = rng.uniform(-1.0, 1.0, n_points)
        u = as_direction(rng.standard_normal(dim))
        lps = LinearParameterSystem(pts, speeds, u)
        try:
            for t in (-1.0, -0.5, 0.0, 0.5, 1.0):
                lps.at(t)
        except DegenerateInput:
            continue
        return lps


@dataclass
class ScanResult:
    name: str
    tolerance: float
    n_instances: int = 0
    max_violation: float = 0.0
    worst_instance: int | None = None
    details: dict = field(default_factory=dict)

    def add(self, index, violation):
        self.n_instances += 1
        if violation > self.max_violation or self.worst_instance is None:
            if violation >= self.max_violation:
                self.max_violation = float(violation)
                self.worst_instance = index

    @property
    def passed(self):
        return self.max_violation <= self.tolerance

    def to_dict(self):
        return {
            "name": self.name,
            "n_instances": self.n_instances,
            "max_violation": self.max_violation,
            "tolerance": self.tolerance,
            "worst_instance": self.worst_instance,
            "passed": self.passed,
            **self.details,
        }


def _instance_pair(dim, seed, k):
    """Two origin bodies and a direction for instance ``k``."""
    rng = np.random.default_rng([seed, k])
    K = random_body(dim, int(rng.integers(2**31)))
    L = random_body(dim, int(rng.integers(2**31)))
    u = as_direction(rng.standard_normal(dim))
    return K, L, u


def lp_mixed_volume_scan(dim, n_instances=50, seed=0, p_values=(1.0, 1.5, 2.0), n_points=41):
    """t -> V_p(K_u(t), L_u(t)) for shadow systems of two origin bodies."""
    ts = t_grid(n_points)
    results = {p: ScanResult(f"lp_mixed_volume[n={dim},p={p:g}]", EXACT_TOL) for p in p_values}
    for k in range(n_instances):
        K, L, u = _instance_pair(dim, seed, k)
        SK, SL = shadow_system(K, u), shadow_system(L, u)
        bodies = [(SK.at(t), SL.at(t)) for t in ts]
        for p in p_values:
            vals = [lp_mixed_volume(A, B, p) for A, B in bodies]
            results[p].add(k, relative_violation(vals))
    return list(results.values())


def mixed_volume_scan(dim, n_instances=50, seed=0, n_points=41):
    """t -> V(K_1(t), ..., K_n(t)) for independent systems sharing a direction."""
    ts = t_grid(n_points)
    res = ScanResult(f"mixed_volume[n={dim}]", EXACT_TOL)
    for k in range(n_instances):
        base = random_system(dim, [seed, k, 0])
        systems = [base] + [
            LinearParameterSystem(s.points, s.speeds, base.u)
            for s in (random_system(dim, [seed, k, j], n_points=6) for j in range(1, dim))
        ]
        if dim == 2:
            vals = [mixed_volume_first(systems[0].at(t), systems[1].at(t)) for t in ts]
        else:
            vals = [mixed_volume(*(s.at(t) for s in systems)) for t in ts]
        res.add(k, relative_violation(vals))
    return [res]


def volume_scan(dim, n_instances=50, seed=0, n_points=41):
    """t -> |K(t)| along random linear parameter systems."""
    ts = t_grid(n_points)
    res = ScanResult(f"volume[n={dim}]", EXACT_TOL)
    for k in range(n_instances):
        lps = random_system(dim, [seed, k])
        res.add(k, relative_violation([lps.at(t).volume for t in ts]))
    return [res]


def p_sum_volume_scan(dim, n_instances=50, seed=0, p_values=(1.5, 2.0), n_points=41, n_dirs=None):
    """t -> |K_u(t) +_p L_u(t)| on a fixed direction grid.

    The tolerance per instance is ``GRID_BIAS_FACTOR`` times the grid bias,
    estimated as the largest change of the volume at t in {-1, 0, 1} when the
    direction grid is doubled.
    """
    n_dirs = n_dirs or (512 if dim == 2 else 256)
    ts = t_grid(n_points)
    results = {p: ScanResult(f"p_sum_volume[n={dim},p={p:g}]", 1.0) for p in p_values}
    for k in range(n_instances):
        K, L, u = _instance_pair(dim, seed, k)
        SK, SL = shadow_system(K, u), shadow_system(L, u)
        bodies = [(SK.at(t), SL.at(t)) for t in ts]
        for p in p_values:
            vals = np.array([p_sum_volume(A, B, p, n_dirs) for A, B in bodies])
            bias = 0.0
            for i in (0, n_points // 2, n_points - 1):
                fine = p_sum_volume(*bodies[i], p, 2 * n_dirs)
                bias = max(bias, abs(vals[i] - fine))
            allowed = GRID_BIAS_FACTOR * bias
            # reported as a fraction of the allowance, so the pass threshold is 1
            viol = max(midpoint_violation(vals), 0.0)
            results[p].add(k, viol / allowed if allowed > 0 else (0.0 if viol == 0 else np.inf))
    return list(results.values())


def lp_surface_area_scan(dim, n_instances=50, seed=0, p_values=(1.0, 1.5, 2.0), n_points=41):
    """t -> S_p(K_u(t)) along shadow systems."""
    ts = t_grid(n_points)
    results = {p: ScanResult(f"lp_surface_area[n={dim},p={p:g}]", EXACT_TOL) for p in p_values}
    for k in range(n_instances):
        K, _, u = _instance_pair(dim, seed, k)
        S = shadow_system(K, u)
        bodies = [S.at(t) for t in ts]
        for p in p_values:
            results[p].add(k, relative_violation([lp_surface_area(B, p) for B in bodies]))
    return list(results.values())


def steiner_surface_area_check(dim, n_instances=100, seed=0, p_values=(1.0, 1.5, 2.0)):
    """Relative increase of S_p under one Steiner symmetrization (should be <= 0)."""
    results = {p: ScanResult(f"steiner_surface_area[n={dim},p={p:g}]", EXACT_TOL) for p in p_values}
    for k in range(n_instances):
        K, _, u = _instance_pair(dim, seed, k)
        SK = steiner(K, u)
        for p in p_values:
            before, after = lp_surface_area(K, p), lp_surface_area(SK, p)
            results[p].add(k, max((after - before) / before, 0.0))
    return list(results.values())
