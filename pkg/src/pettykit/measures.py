"""Rotationally invariant measures and their integrals over star bodies.

A radial measure has density ``phi(|x|)`` on R^d. Its mass on a star body with
radial function ``rho`` is, in polar coordinates,

    nu(S) = E_theta[ radial_mass(M, rho(theta)) ]

with ``theta`` uniform on the sphere and ``radial_mass(M, R) = nu(R B)``
(the sphere area is folded in).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, special
from scipy.stats import special_ortho_group

from ._parallel import pmap
from .errors import ConcavityViolation, DimensionMismatch

KINDS = ("lebesgue", "gaussian", "generalized_cauchy")
BATCH_PAIRS = 4096
K_SIGMA = 3.0


def sphere_area(d):
    """|S^{d-1}| = 2 pi^{d/2} / Gamma(d/2)."""
    return 2.0 * math.pi ** (d / 2) / math.gamma(d / 2)


@dataclass(frozen=True)
class RadialMeasure:
    """Measure with radial density on R^dim.

    ``gaussian`` is the standard normal law; ``generalized_cauchy`` has the
    unnormalized density ``(1 + r^2)^(-beta)``. ``gamma`` is the largest
    exponent for which the density is gamma-concave: ``(1+r^2)^(1/2)`` is
    convex, so the Cauchy density is ``-1/(2 beta)``-concave and no better.
    """

    kind: str
    dim: int
    beta: float | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown measure kind {self.kind!r}; expected one of {KINDS}")
        if int(self.dim) != self.dim or self.dim < 1:
            raise ValueError(f"dim must be a positive integer, got {self.dim}")
        if self.kind == "generalized_cauchy":
            if self.beta is None or not self.beta > 0:
                raise ValueError("generalized_cauchy needs a positive beta")
        elif self.beta is not None:
            raise ValueError(f"{self.kind} takes no beta")

    @property
    def gamma(self):
        if self.kind == "lebesgue":
            return math.inf
        if self.kind == "gaussian":
            return 0.0
        return -1.0 / (2.0 * self.beta)

    def density(self, r):
        r = np.asarray(r, dtype=float)
        if self.kind == "lebesgue":
            return np.ones_like(r)
        if self.kind == "gaussian":
            return (2.0 * math.pi) ** (-self.dim / 2) * np.exp(-0.5 * r * r)
        return (1.0 + r * r) ** (-self.beta)

    def density_at(self, x):
        """Density at points ``x`` of shape (..., dim)."""
        return self.density(np.linalg.norm(np.asarray(x, dtype=float), axis=-1))

    def to_dict(self):
        out = {"kind": self.kind, "dim": self.dim}
        if self.beta is not None:
            out["beta"] = self.beta
        return out


@dataclass(frozen=True)
class ConcavityReport:
    kind: str
    dim: int
    gamma: float
    required: float
    passed: bool
    n_checked: int
    worst_slack: float


def _power_mean(a, b, lam, gamma):
    if gamma == math.inf:
        return np.maximum(a, b)
    if gamma == 0:
        return a ** (1 - lam) * b**lam
    return ((1 - lam) * a**gamma + lam * b**gamma) ** (1.0 / gamma)


def _concavity_slack(M, x, y, lam, gamma):
    """Relative amount by which phi(mid) exceeds the gamma-mean; < 0 is a violation."""
    lam_ = lam[:, None]
    mid = M.density_at((1 - lam_) * x + lam_ * y)
    mean = _power_mean(M.density_at(x), M.density_at(y), lam, gamma)
    return (mid - mean) / np.maximum(np.abs(mean), np.finfo(float).tiny)


def _cauchy_witness(M):
    """Triple on a ray where phi^(-1/d) is strictly concave."""
    a = M.beta / M.dim  # phi^(-1/d) = (1 + r^2)^a, concave in r once r^2 > 1/(1-2a)
    R = 2.0 / math.sqrt(1.0 - 2.0 * a)
    e = np.zeros(M.dim)
    e[0] = 1.0
    return R * e, 3.0 * R * e, 0.5


def validate_concavity(M, n_triples=100, seed=0, box=3.0, rel_tol=1e-9):
    """Check that ``M`` is a convex measure (gamma >= -1/dim).

    The analytic verdict is cross-checked on ``n_triples`` random triples in
    ``[-box, box]^dim`` against the declared gamma. On failure a
    :class:`ConcavityViolation` carrying a witness ``(x, y, lam)`` for the
    ``-1/dim`` inequality is raised.
    """
    required = -1.0 / M.dim
    rng = np.random.default_rng(seed)
    x = rng.uniform(-box, box, (n_triples, M.dim))
    y = rng.uniform(-box, box, (n_triples, M.dim))
    lam = rng.uniform(0.0, 1.0, n_triples)
    analytic = M.gamma >= required
    if analytic:
        slack = _concavity_slack(M, x, y, lam, M.gamma)
        worst = float(slack.min())
        if worst < -rel_tol:
            k = int(np.argmin(slack))
            raise ConcavityViolation(
                f"density is not {M.gamma:g}-concave at a sampled triple", witness=(x[k], y[k], float(lam[k]))
            )
        return ConcavityReport(M.kind, M.dim, M.gamma, required, True, n_triples, worst)
    slack = _concavity_slack(M, x, y, lam, required)
    if slack.min() < -rel_tol:
        k = int(np.argmin(slack))
        witness = (x[k], y[k], float(lam[k]))
    else:
        witness = _cauchy_witness(M)
    raise ConcavityViolation(
        f"{M.kind} with beta={M.beta} is only {M.gamma:g}-concave, below {required:g}", witness=witness
    )


def radial_mass(M, R):
    """nu(R B): mass of the centred ball of radius ``R`` (vectorized in R)."""
    R = np.asarray(R, dtype=float)
    if np.any(R < 0):
        raise ValueError("radius must be nonnegative")
    d = M.dim
    if M.kind == "lebesgue":
        return sphere_area(d) / d * R**d
    if M.kind == "gaussian":
        return special.gammainc(d / 2, 0.5 * R * R)
    a, b = d / 2, M.beta - d / 2
    if b <= 0:
        return np.vectorize(lambda r: radial_mass_quadrature(M, r))(R)
    w = R * R / (1.0 + R * R)
    return sphere_area(d) * 0.5 * special.beta(a, b) * special.betainc(a, b, w)


def radial_mass_quadrature(M, R, epsabs=1e-10):
    """Adaptive quadrature of |S^{d-1}| int_0^R phi(r) r^{d-1} dr."""
    d = M.dim
    val, _ = integrate.quad(lambda r: float(M.density(r)) * r ** (d - 1), 0.0, float(R), epsabs=epsabs, epsrel=1e-12, limit=200)
    return sphere_area(d) * val


@dataclass(frozen=True)
class Estimate:
    value: float
    stderr: float
    n_samples: int
    seed: object = field(default=None)

    def to_dict(self):
        seed = list(self.seed) if isinstance(self.seed, tuple) else self.seed
        return {"value": self.value, "stderr": self.stderr, "n": self.n_samples, "seed": seed}


def _seed_key(seed):
    if isinstance(seed, (tuple, list)):
        return [int(s) for s in seed]
    return [int(seed)]


def substream(seed, *keys):
    """Generator for the substream ``keys`` of ``seed`` (an int or a tuple of ints)."""
    return np.random.default_rng(_seed_key(seed) + [int(k) for k in keys])


def _batch_sizes(n_pairs):
    full, rest = divmod(n_pairs, BATCH_PAIRS)
    return [BATCH_PAIRS] * full + ([rest] if rest else [])


def sphere_directions(dim, n_pairs, seed, batch=0):
    """``n_pairs`` uniform unit vectors from substream (seed, batch)."""
    g = substream(seed, batch).standard_normal((n_pairs, dim))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def random_rotation(dim, seed):
    return special_ortho_group.rvs(dim, random_state=substream(seed, 0x5EED))


def _radial_callable(body, dim):
    from .projbody import StarBodySpec, polar_proj_radial

    if isinstance(body, StarBodySpec):
        if body.d != dim:
            raise DimensionMismatch(f"star body lives in R^{body.d}, measure in R^{dim}")
        return lambda th: polar_proj_radial(body, th)
    if callable(body):
        return body
    raise TypeError("body must be a StarBodySpec or a radial function")


def pair_means(body, M, n_samples, seed, rotation=None):
    """Per-pair averages of radial_mass over antithetic directions (theta, -theta).

    Bodies evaluated with the same ``(n_samples, seed, rotation)`` see the same
    directions, which is what paired comparisons rely on.
    """
    if n_samples < 4:
        raise ValueError("n_samples must be at least 4")
    rho = _radial_callable(body, M.dim)
    n_pairs = (n_samples + 1) // 2

    def batch(args):
        b, size = args
        th = sphere_directions(M.dim, size, seed, b)
        if rotation is not None:
            th = th @ np.asarray(rotation).T
        return 0.5 * (radial_mass(M, rho(th)) + radial_mass(M, rho(-th)))

    return np.concatenate(pmap(batch, enumerate(_batch_sizes(n_pairs))))


def estimate_from_pairs(pm, seed=None):
    pm = np.asarray(pm, dtype=float)
    return Estimate(float(np.mean(pm)), float(np.std(pm, ddof=1) / math.sqrt(len(pm))), 2 * len(pm), seed)


def star_body_measure(body, M, n_samples, seed, rotation=None):
    """Monte-Carlo estimate of nu(body) in polar coordinates.

    ``body`` is a :class:`~pettykit.projbody.StarBodySpec` or any vectorized
    radial function ``theta (k, dim) -> rho (k,)``. The standard error is
    computed from the antithetic pair means.
    """
    return estimate_from_pairs(pair_means(body, M, n_samples, seed, rotation), seed)


def paired_difference(pm_a, pm_b):
    """Mean and standard error of ``b - a`` over common directions."""
    diff = np.asarray(pm_b) - np.asarray(pm_a)
    return float(diff.mean()), float(diff.std(ddof=1) / math.sqrt(len(diff)))
