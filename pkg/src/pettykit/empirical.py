"""Random matrix bodies [X_1 ... X_N]C and Monte-Carlo checks built on them.

Every sampler turns a block of uniforms into points, so the raw and the
rearranged arm of a comparison can share the same uniforms (common random
numbers).
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from ._parallel import pmap
from .bodies import contains_origin
from .convexity import midpoint_violation, t_grid
from .errors import DegenerateInput, DegenerateSample, DimensionMismatch, InvalidP
from .geometry import Polytope, as_direction, orthonormal_complement
from .measures import Estimate, RadialMeasure, estimate_from_pairs, pair_means, substream
from .mixed import mixed_volume_first
from .projbody import MAX_AMBIENT, StarBodySpec, lpq_gauge_p
from .rearrange import GridDensity, symmetric_decreasing_rearrangement
from .symmetrize import shadow_system

logger = logging.getLogger(__name__)

MAX_N = 8
MAX_RETRIES = 100


def matrix_body(xs, C):
    """Hull of ``{[x_1 ... x_N] c : c vertex of C}``.

    ``xs`` has shape (N, n), one point per row; ``C`` is a vertex array of
    shape (V, N) or a :class:`Polytope`.
    """
    xs = np.asarray(xs, dtype=float)
    cv = C.vertices if isinstance(C, Polytope) else np.asarray(C, dtype=float)
    if cv.shape[1] != xs.shape[0]:
        raise DimensionMismatch(f"C lives in R^{cv.shape[1]} but {xs.shape[0]} points were given")
    try:
        return Polytope(cv @ xs)
    except DegenerateInput as exc:
        raise DegenerateSample(str(exc)) from exc


# ------------------------------------------------------------------- samplers
@dataclass(frozen=True)
class UniformBox:
    """Uniform law on an axis-parallel box."""

    lo: tuple
    hi: tuple

    @property
    def dim(self):
        return len(self.lo)

    @property
    def volume(self):
        return float(np.prod(np.subtract(self.hi, self.lo)))

    def transform(self, U):
        return np.asarray(self.lo) + U * (np.asarray(self.hi) - np.asarray(self.lo))

    def rearranged(self):
        return UniformBall.with_volume(self.dim, self.volume)


@dataclass(frozen=True)
class UniformBall:
    """Uniform law on a Euclidean disk (dim 2) or ball (dim 3)."""

    centre: tuple
    radius: float

    @classmethod
    def with_volume(cls, dim, volume):
        unit = math.pi ** (dim / 2) / math.gamma(dim / 2 + 1)
        return cls(tuple([0.0] * dim), (volume / unit) ** (1.0 / dim))

    @property
    def dim(self):
        return len(self.centre)

    def transform(self, U):
        d = self.dim
        r = self.radius * U[:, 0] ** (1.0 / d)
        if d == 2:
            ang = 2.0 * np.pi * U[:, 1]
            dirs = np.column_stack([np.cos(ang), np.sin(ang)])
        elif d == 3:
            z = 2.0 * U[:, 1] - 1.0
            ang = 2.0 * np.pi * U[:, 2]
            s = np.sqrt(1.0 - z * z)
            dirs = np.column_stack([s * np.cos(ang), s * np.sin(ang), z])
        else:
            raise DimensionMismatch(f"no ball sampler in dimension {d}")
        return np.asarray(self.centre) + r[:, None] * dirs

    def rearranged(self):
        return UniformBall(tuple([0.0] * self.dim), self.radius)


@dataclass(frozen=True, eq=False)
class GridSampler:
    """Draws from a :class:`GridDensity` by inverse-CDF over cells plus a uniform offset."""

    density: GridDensity

    @property
    def dim(self):
        return self.density.dim

    def transform(self, U):
        f = self.density
        cdf = np.cumsum(f.values.ravel())
        cdf /= cdf[-1]
        cells = np.minimum(np.searchsorted(cdf, U[:, 0], side="right"), cdf.size - 1)
        idx = np.column_stack(np.unravel_index(cells, f.resolution))
        return f.lo + f.widths * (idx + U[:, 1 : 1 + f.dim])

    def rearranged(self):
        return GridSampler(symmetric_decreasing_rearrangement(self.density))


def _uniform_width(sampler):
    return sampler.dim + 1 if isinstance(sampler, GridSampler) else sampler.dim


# --------------------------------------------------------------------- config
@dataclass(frozen=True)
class EmpiricalConfig:
    """Inputs of an empirical comparison with p = 1.

    ``C`` is a vertex array in R^N (the hull is never needed). ``outer`` is the
    number of sampled matrix bodies and ``inner`` the number of sphere
    directions per body.
    """

    n: int
    C: np.ndarray
    Q: Polytope
    densities: tuple
    measure: RadialMeasure
    outer: int = 200
    inner: int = 4096
    seed: int = 0

    def __post_init__(self):
        C = np.asarray(self.C, dtype=float)
        object.__setattr__(self, "C", C)
        object.__setattr__(self, "densities", tuple(self.densities))
        N = C.shape[1]
        if N > MAX_N:
            raise DimensionMismatch(f"N = {N} exceeds {MAX_N}")
        if len(self.densities) != N:
            raise DimensionMismatch(f"{len(self.densities)} densities for N = {N}")
        if N < self.n:
            raise DegenerateInput(f"[X_1..X_N]C is at most {N}-dimensional, below n = {self.n}")
        if np.linalg.matrix_rank(C[1:] - C[0]) < N:
            raise DegenerateInput("C is not full-dimensional")
        if self.n * self.m > MAX_AMBIENT:
            raise DimensionMismatch(f"n*m = {self.n * self.m} exceeds {MAX_AMBIENT}")
        if self.measure.dim != self.n * self.m:
            raise DimensionMismatch(f"measure lives in R^{self.measure.dim}, expected R^{self.n * self.m}")
        if any(f.dim != self.n for f in self.densities):
            raise DimensionMismatch("every density must live in R^n")
        if not contains_origin(self.Q):
            raise DegenerateInput("Q must contain the origin")
        if self.outer < 2 or self.inner < 4:
            raise ValueError("need outer >= 2 and inner >= 4")

    @property
    def N(self):
        return self.C.shape[1]

    @property
    def m(self):
        return self.Q.dim


def _draw_points(samplers, seed, k, rotation):
    """One point per sampler for outer sample ``k`` (retry index folded into the stream)."""
    for retry in range(MAX_RETRIES):
        rng = substream(seed, 1, k, retry)
        U = [rng.uniform(size=(1, _uniform_width(s))) for s in samplers]
        yield retry, np.vstack([s.transform(u) for s, u in zip(samplers, U)]) @ (
            np.eye(samplers[0].dim) if rotation is None else np.asarray(rotation).T
        )


def _centred(body):
    # V_1 only sees the surface area measure, so translating to an interior point is free
    return body.translate(-body.centroid_hint)


def _outer_pair_means(cfg, samplers, k, rotation):
    for retry, xs in _draw_points(samplers, cfg.seed, k, rotation):
        try:
            body = matrix_body(xs, cfg.C)
        except DegenerateSample:
            logger.info("degenerate sample (outer %d, retry %d); redrawing", k, retry)
            continue
        spec = StarBodySpec(_centred(body), cfg.Q, 1.0)
        return pair_means(spec, cfg.measure, cfg.inner, (cfg.seed, 2, k))
    raise DegenerateSample(f"outer sample {k} stayed degenerate after {MAX_RETRIES} redraws")


def _arm_samplers(cfg, which):
    if which == "raw":
        return cfg.densities
    if which == "rearranged":
        return tuple(f.rearranged() for f in cfg.densities)
    raise ValueError(f"which must be 'raw' or 'rearranged', got {which!r}")


@dataclass(frozen=True)
class ArmResult:
    """Per-outer-sample inner means and the combined estimate."""

    estimate: Estimate
    inner_means: np.ndarray
    mean_inner_stderr: float


def _arm(cfg, which, rotation=None):
    samplers = _arm_samplers(cfg, which)
    pms = pmap(lambda k: _outer_pair_means(cfg, samplers, k, rotation), range(cfg.outer))
    inner_means = np.array([pm.mean() for pm in pms])
    inner_se = np.array([pm.std(ddof=1) / math.sqrt(len(pm)) for pm in pms])
    # the spread of inner means already carries both stages (law of total variance)
    est = Estimate(float(inner_means.mean()), float(inner_means.std(ddof=1) / math.sqrt(cfg.outer)), cfg.outer * 2 * len(pms[0]), cfg.seed)
    return ArmResult(est, inner_means, float(np.sqrt(np.mean(inner_se**2))))


def expected_measure(cfg, which="raw", rotation=None):
    """E[nu(Pi°_Q([X_1..X_N]C))] for the raw or the rearranged densities."""
    return _arm(cfg, which, rotation).estimate


@dataclass(frozen=True)
class PairedReport:
    raw: Estimate
    rearranged: Estimate
    difference: float
    paired_stderr: float
    k_sigma: float = 3.0

    @property
    def passed(self):
        return self.difference >= -self.k_sigma * self.paired_stderr

    def to_dict(self):
        return {
            "raw": self.raw.to_dict(),
            "rearranged": self.rearranged.to_dict(),
            "difference": self.difference,
            "paired_stderr": self.paired_stderr,
            "k_sigma": self.k_sigma,
            "passed": self.passed,
        }


def paired_comparison(cfg, k_sigma=3.0, rotation=None):
    """Rearranged minus raw arm, with common uniforms and common sphere directions."""
    raw = _arm(cfg, "raw", rotation)
    rea = _arm(cfg, "rearranged", rotation)
    diff = rea.inner_means - raw.inner_means
    return PairedReport(
        raw.estimate,
        rea.estimate,
        float(diff.mean()),
        float(diff.std(ddof=1) / math.sqrt(cfg.outer)),
        k_sigma,
    )


# -------------------------------------------------------------- fiber profile
@dataclass(frozen=True)
class FiberProfile:
    """F_w(t) on a t-grid; ``pair_values[i]`` are the antithetic pair means at ``t[i]``."""

    t: np.ndarray
    estimates: tuple
    pair_values: np.ndarray

    @property
    def values(self):
        return np.array([e.value for e in self.estimates])

    @property
    def stderr(self):
        return np.array([e.stderr for e in self.estimates])

    def _paired_se(self, i, j):
        d = self.pair_values[i] - self.pair_values[j]
        return float(d.std(ddof=1) / math.sqrt(len(d)))

    def peak_excess(self):
        """max over t of (F(t) - F(0)) in units of the paired stderr (<= 3 passes)."""
        i0 = int(np.argmin(np.abs(self.t)))
        worst = -np.inf
        for i in range(len(self.t)):
            if i == i0:
                continue
            gap = self.values[i] - self.values[i0]
            se = self._paired_se(i, i0)
            worst = max(worst, gap / se if se > 0 else (0.0 if gap <= 1e-15 * abs(self.values[i0]) else np.inf))
        return worst

    def endpoint_asymmetry(self):
        """|F(1) - F(-1)| in units of the combined stderr."""
        gap = abs(self.values[-1] - self.values[0])
        se = math.hypot(self.stderr[-1], self.stderr[0])
        return gap / se if se > 0 else (0.0 if gap <= 1e-15 * abs(self.values[0]) else np.inf)


def fiber_profile(K, Q, p, u, w, M, t_points=None, n_samples=2**14, seed=0, proposal_scale=1.0):
    """F_w(t) = int_{R^m} 1{n V_p(K_u(t), (w + s (x) u).Q^t) <= 1} phi(w + s (x) u) ds.

    ``w`` is an n x m matrix whose columns lie in u-perp. The s-integral is
    estimated by importance sampling from N(0, proposal_scale^2 I_m) with
    antithetic pairs (s, -s); the same draws are reused for every t.
    """
    if not p >= 1:
        raise InvalidP(f"p must be >= 1, got {p}")
    n, m = K.dim, Q.dim
    u = as_direction(u, n)
    w = np.asarray(w, dtype=float).reshape(n, m) if np.size(w) == n * m else None
    if w is None:
        raise DimensionMismatch(f"w must have {n * m} entries")
    if M.dim != n * m:
        raise DimensionMismatch(f"measure lives in R^{M.dim}, expected R^{n * m}")
    if np.max(np.abs(u @ w)) > 1e-9 * max(1.0, float(np.abs(w).max())):
        raise ValueError("columns of w must be orthogonal to u")
    ts = t_grid() if t_points is None else np.asarray(t_points, dtype=float)
    if np.any(np.abs(ts) > 1):
        raise ValueError("t values must lie in [-1, 1]")
    n_pairs = (n_samples + 1) // 2
    sigma = float(proposal_scale)
    s = sigma * substream(seed, 3).standard_normal((n_pairs, m))
    log_g = -0.5 * np.sum((s / sigma) ** 2, axis=1) - m * math.log(sigma * math.sqrt(2 * math.pi))

    def points(sign):
        x = w[None, :, :] + sign * s[:, None, :] * u[None, :, None]
        weight = M.density_at(x.reshape(n_pairs, n * m)) / np.exp(log_g)
        return x, weight

    (xp, wp), (xm, wm) = points(1.0), points(-1.0)
    S = shadow_system(K, u)
    ests, pvals = [], []
    for t in ts:
        body = S.at(float(t))
        vp = wp * (lpq_gauge_p(body, Q, p, xp) <= 1.0)
        vm = wm * (lpq_gauge_p(body, Q, p, xm) <= 1.0)
        pm = 0.5 * (vp + vm)
        pvals.append(pm)
        ests.append(estimate_from_pairs(pm, seed))
    return FiberProfile(ts, tuple(ests), np.array(pvals))


def random_fiber_offset(n, m, u, seed, scale=0.5):
    """Seeded w in (u-perp)^m."""
    basis = orthonormal_complement(as_direction(u, n))
    coeff = scale * substream(seed, 4).standard_normal((m, n - 1))
    return (coeff @ basis).T


# ------------------------------------------------------- joint convexity scan
def joint_convexity_scan(n_instances=20, seed=0, C=None, Q=None, n_points=41, n_segments=5):
    """Midpoint convexity of (t, s) -> n V(C_y(t)[n-1], (w + s (x) u).Q^t) in the plane.

    ``C_y(t) = [y_1 + t_1 u, ..., y_N + t_N u] C`` with fixed ``y`` in
    (u-perp)^N and ``w`` in (u-perp)^m; ``(t, s)`` runs along random segments
    of R^N x R^m. Returns the worst violation relative to the values' magnitude.
    """
    C = np.asarray(C) if C is not None else np.stack(np.meshgrid(*[[0.0, 1.0]] * 3, indexing="ij"), -1).reshape(-1, 3)
    Qv = (Q.vertices if Q is not None else np.array([[0.0], [1.0]]))
    N, m = C.shape[1], Qv.shape[1]
    ts = np.linspace(0.0, 1.0, n_points)
    worst = 0.0
    for k in range(n_instances):
        rng = substream(seed, 5, k)
        u = as_direction(rng.standard_normal(2))
        perp = np.array([-u[1], u[0]])
        y = rng.standard_normal(N)[:, None] * perp
        w = perp[:, None] * rng.standard_normal(m)[None, :]
        for _ in range(n_segments):
            a, b = rng.uniform(-2, 2, N + m), rng.uniform(-2, 2, N + m)
            vals = []
            for t in ts:
                z = (1 - t) * a + t * b
                x = w + u[:, None] * z[None, N:]
                try:
                    body = matrix_body(y + z[:N, None] * u, C)
                except DegenerateSample:
                    break
                vals.append(2.0 * mixed_volume_first(body, Qv @ x.T))
            if len(vals) < n_points:
                continue
            vals = np.asarray(vals)
            scale = max(float(np.abs(vals).max()), np.finfo(float).tiny)
            worst = max(worst, max(midpoint_violation(vals), 0.0) / scale)
    return worst
