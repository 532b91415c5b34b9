"""Verification suites run by the command line harness.

Each suite takes resolved parameters, tolerances and a seed and returns a
list of cases plus optional tabular profiles for plotting. Defaults and
tolerances live in ``SUITES`` so the CLI, the report and the tests read the
same numbers.
"""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import convexity, empirical, measures, mixed, projbody, rearrange, symmetrize
from .bodies import ball_like, make_standard, random_polygon, regular_polygon
from .errors import ConfigError, UnknownName
from .geometry import Polytope, hausdorff_distance, loads_body, reflect
from .measures import K_SIGMA, RadialMeasure, pair_means, paired_difference, substream


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if isinstance(x, float) and not math.isfinite(x):
        return repr(x)
    return x


@dataclass
class Case:
    name: str
    inputs: dict
    values: dict
    passed: bool
    stderr: dict | None = None

    def to_dict(self):
        inputs = _jsonable(self.inputs)
        digest = hashlib.sha256(json.dumps(inputs, sort_keys=True).encode()).hexdigest()[:16]
        out = {"name": self.name, "inputs": inputs, "inputs_digest": digest, "values": _jsonable(self.values)}
        if self.stderr is not None:
            out["stderr"] = _jsonable(self.stderr)
        out["verdict"] = "pass" if self.passed else "fail"
        return out


@dataclass
class SuiteOutcome:
    cases: list = field(default_factory=list)
    profiles: dict = field(default_factory=dict)

    @property
    def passed(self):
        return all(c.passed for c in self.cases)


# ------------------------------------------------------------- body references
def resolve_body(ref, base_dir=None):
    """Catalog name, ``{"name", "params"}``, ``{"vertices"}`` or ``{"file"}``."""
    if isinstance(ref, str):
        return make_standard(ref)
    if not isinstance(ref, dict):
        raise ConfigError(f"cannot read a body from {ref!r}")
    if "name" in ref:
        return make_standard(ref["name"], **ref.get("params", {}))
    if "vertices" in ref:
        return Polytope(ref["vertices"])
    if "file" in ref:
        import os

        path = ref["file"] if base_dir is None else os.path.join(base_dir, ref["file"])
        with open(path) as fh:
            return loads_body(fh.read())
    raise ConfigError(f"body reference needs 'name', 'vertices' or 'file': {ref!r}")


def _body_label(ref):
    return ref if isinstance(ref, str) else json.dumps(ref, sort_keys=True)


def resolve_measure(block, dim):
    block = dict(block)
    kind = block.pop("kind")
    beta = block.pop("beta", None)
    if block.get("dim", dim) != dim:
        raise ConfigError(f"measure dim {block['dim']} does not match the ambient dimension {dim}")
    if kind == "generalized_cauchy" and beta is None:
        beta = dim + 1.0
    return RadialMeasure(kind, dim, beta)


# --------------------------------------------------------------------- suites
def run_petty_classical(params, tol, seed, ctx):
    out = SuiteOutcome()
    bodies = [(_body_label(r), resolve_body(r, ctx.get("base_dir"))) for r in params["bodies"]]
    bodies += [(f"random_polygon[{seed},{i}]", random_polygon([seed, i])) for i in range(params["n_random"])]
    for label, K in bodies:
        if K.dim != 2:
            raise ConfigError(f"{label}: classical suite runs in the plane")
        pv = projbody.polar_projection_body(K).volume
        bv = projbody.ball_polar_projection_volume(2, K.volume)
        out.cases.append(Case(f"polar_projection_volume:{label}", {"body": K.to_dict()},
                              {"polar_projection_volume": pv, "ball_value": bv}, pv <= bv * (1 + tol["exact"])))
    bound = math.pi**2 / 4
    worst = 0.0
    for i in range(params["product_polygons"]):
        P = random_polygon([seed, 1000 + i], n_points=int(substream(seed, 8, i).integers(3, 12)))
        val = projbody.petty_product(P)
        worst = max(worst, val)
        out.cases.append(Case(f"petty_product:random[{i}]", {"body": P.to_dict()}, {"product": val, "bound": bound},
                              val <= bound + tol["product_slack"]))
    reg = projbody.petty_product(regular_polygon(params["reference_polygon"]))
    out.cases.append(Case("petty_product:regular_polygon", {"k": params["reference_polygon"]},
                          {"product": reg, "fraction_of_bound": reg / bound, "required_fraction": tol["reference_fraction"]},
                          reg >= tol["reference_fraction"] * bound))
    return out


def _lpq_grid(params, tol, seed, ctx, compare):
    out = SuiteOutcome()
    n_samples = params["n_samples"]
    for bi, ref in enumerate(params["bodies"]):
        K = resolve_body(ref, ctx.get("base_dir"))
        if K.dim != 2:
            raise ConfigError("the (L_p, Q) grid runs with n = 2")
        u = substream(seed, 7, bi).standard_normal(2)
        u /= np.linalg.norm(u)
        other = symmetrize.steiner(K, u) if compare == "steiner" else ball_like(2, K.volume, params["ball_resolution"])
        for qref in params["qs"]:
            Q = resolve_body(qref, ctx.get("base_dir"))
            d = K.dim * Q.dim
            for block in params["measures"]:
                M = resolve_measure(block, d)
                measures.validate_concavity(M, seed=seed)
                for p in params["p_values"]:
                    sk = projbody.StarBodySpec(K, Q, p)
                    so = sk.with_body(other)
                    case_seed = (seed, 9, bi)
                    pk = pair_means(sk, M, n_samples, case_seed)
                    po = pair_means(so, M, n_samples, case_seed)
                    ek, eo = measures.estimate_from_pairs(pk, case_seed), measures.estimate_from_pairs(po, case_seed)
                    diff, se = paired_difference(pk, po)
                    rel = max(ek.stderr / ek.value, eo.stderr / eo.value)
                    ok = diff >= -tol["k_sigma"] * se and rel <= tol["relative_stderr"]
                    out.cases.append(Case(
                        f"{compare}:{_body_label(ref)}:{_body_label(qref)}:{M.kind}:p={p:g}",
                        {"body": K.to_dict(), "u": u, "Q": Q.to_dict(), "p": p, "measure": M.to_dict(), "n_samples": n_samples, "seed": list(case_seed)},
                        {"nu_body": ek.value, f"nu_{compare}": eo.value, "difference": diff, "paired_stderr": se, "relative_stderr": rel},
                        ok,
                        {"nu_body": ek.stderr, f"nu_{compare}": eo.stderr, "difference": se},
                    ))
    return out


def run_petty_lpq(params, tol, seed, ctx):
    return _lpq_grid(params, tol, seed, ctx, "ball")


def run_steiner_step(params, tol, seed, ctx):
    return _lpq_grid(params, tol, seed, ctx, "steiner")


def _scan_cases(results, kind):
    return [Case(f"{kind}:{r.name}", {"n_instances": r.n_instances}, r.to_dict(), r.passed) for r in results]


def run_lemma_convexity(params, tol, seed, ctx):
    out = SuiteOutcome()
    n_inst, n_pts = params["n_instances"], params["n_points"]
    for dim in params["dims"]:
        out.cases += _scan_cases(convexity.lp_mixed_volume_scan(dim, n_inst, seed, tuple(params["p_values"]), n_pts), "lp_mixed_volume")
        out.cases += _scan_cases(convexity.mixed_volume_scan(dim, n_inst, seed, n_pts), "mixed_volume")
        out.cases += _scan_cases(convexity.volume_scan(dim, n_inst, seed, n_pts), "volume")
        out.cases += _scan_cases(convexity.p_sum_volume_scan(dim, n_inst, seed, tuple(params["psum_p_values"]), n_pts), "p_sum_volume")
    worst = empirical.joint_convexity_scan(params["joint_instances"], seed, n_points=n_pts)
    out.cases.append(Case("joint_convexity:matrix_body", {"n_instances": params["joint_instances"]},
                          {"max_violation": worst, "tolerance": tol["exact"]}, worst <= tol["exact"]))
    return out


def run_sp_monotone(params, tol, seed, ctx):
    out = SuiteOutcome()
    p_values = tuple(params["p_values"])
    for dim in params["dims"]:
        out.cases += _scan_cases(convexity.lp_surface_area_scan(dim, params["scan_instances"], seed, p_values, params["n_points"]), "lp_surface_area")
        out.cases += _scan_cases(convexity.steiner_surface_area_check(dim, params["check_instances"], seed, p_values), "steiner")
    return out


def _flow(K, seed, params, tol):
    target = tol["flow_fraction"] * K.diameter
    steps = symmetrize.symmetrization_flow(K, params["flow_steps"], seed, target=target)
    drift = abs(steps[-1].body.volume - K.volume) / K.volume
    step_drift = max(abs(s.volume_change) for s in steps)
    ok = steps[-1].distance <= target and max(drift, step_drift) <= tol["volume"]
    return steps, drift, step_drift, ok


def run_shadow_invariants(params, tol, seed, ctx):
    out = SuiteOutcome()
    ts = convexity.t_grid(params["n_points"])
    for dim in params["dims"]:
        for k in range(params["n_instances"]):
            K, _, u = convexity._instance_pair(dim, seed, k)
            S = symmetrize.shadow_system(K, u)
            scale = K.diameter
            vol_err = max(abs(S.at(t).volume - K.volume) / K.volume for t in ts)
            ends = max(
                hausdorff_distance(S.at(1.0), K),
                hausdorff_distance(S.at(-1.0), reflect(K, u)),
                hausdorff_distance(S.at(0.0), symmetrize.steiner(K, u)),
                hausdorff_distance(S.at(-0.3), reflect(S.at(0.3), u)),
            ) / scale
            idem = hausdorff_distance(symmetrize.steiner(S.at(0.0), u), S.at(0.0)) / scale
            ok = vol_err <= tol["volume"] and ends <= tol["exact"] and idem <= tol["exact"]
            out.cases.append(Case(f"shadow_system[n={dim}]:{k}", {"body": K.to_dict(), "u": u},
                                  {"volume_error": vol_err, "endpoint_error": ends, "idempotence_error": idem}, ok))
    rows = []
    for ref in params["flow_bodies"]:
        K = resolve_body(ref, ctx.get("base_dir"))
        flow_seed = seed
        steps, drift, step_drift, ok = _flow(K, flow_seed, params, tol)
        if not ok:  # soft criterion: one retry with a fresh seed
            flow_seed = seed + 1
            steps, drift, step_drift, ok = _flow(K, flow_seed, params, tol)
        label = _body_label(ref)
        rows += [(label, i + 1, s.distance / K.diameter) for i, s in enumerate(steps)]
        out.cases.append(Case(f"flow:{label}", {"body": K.to_dict(), "seed": flow_seed, "max_steps": params["flow_steps"]},
                              {"steps": len(steps), "final_distance_over_diameter": steps[-1].distance / K.diameter,
                               "volume_drift": drift, "max_step_volume_change": step_drift}, ok))
    out.profiles["flow"] = (("body", "step", "distance_over_diameter"), rows)
    return out


def _square_offsets(seed, N, spread):
    offs = substream(seed, 10).uniform(-spread, spread, (N, 2))
    return tuple(empirical.UniformBox(tuple(o), tuple(o + 1.0)) for o in offs)


_C_BODIES = {
    "cube": lambda N: np.stack(np.meshgrid(*[[0.0, 1.0]] * N, indexing="ij"), -1).reshape(-1, N),
    "simplex": lambda N: np.vstack([np.zeros(N), np.eye(N)]),
}


def run_empirical_petty(params, tol, seed, ctx):
    out = SuiteOutcome()
    N, n = params["N"], params["n"]
    Q = resolve_body(params["Q"], ctx.get("base_dir"))
    if params["densities"]:
        dens = tuple(empirical.UniformBox(tuple(b[0]), tuple(b[1])) for b in params["densities"])
    else:
        dens = _square_offsets(seed, N, params["offset_spread"])
    for cname in params["C"]:
        if cname not in _C_BODIES:
            raise ConfigError(f"unknown C body {cname!r}; known: {sorted(_C_BODIES)}")
        C = _C_BODIES[cname](N)
        for block in params["measures"]:
            M = resolve_measure(block, n * Q.dim)
            measures.validate_concavity(M, seed=seed)
            cfg = empirical.EmpiricalConfig(n, C, Q, dens, M, params["outer"], params["inner"], seed)
            rep = empirical.paired_comparison(cfg, tol["k_sigma"])
            out.cases.append(Case(f"empirical:{cname}:{M.kind}",
                                  {"C": C, "Q": Q.to_dict(), "densities": [[d.lo, d.hi] for d in dens], "measure": M.to_dict(),
                                   "outer": cfg.outer, "inner": cfg.inner, "seed": seed},
                                  {"raw": rep.raw.value, "rearranged": rep.rearranged.value, "difference": rep.difference,
                                   "paired_stderr": rep.paired_stderr},
                                  rep.passed, {"raw": rep.raw.stderr, "rearranged": rep.rearranged.stderr, "difference": rep.paired_stderr}))
    return out


def run_fiber_profile(params, tol, seed, ctx):
    out = SuiteOutcome()
    rows = []
    ts = convexity.t_grid(params["n_points"])
    qs = [resolve_body(r, ctx.get("base_dir")) for r in params["qs"]]
    for k in range(params["n_instances"]):
        rng = substream(seed, 11, k)
        K = random_polygon([seed, 11, k])
        u = rng.standard_normal(2)
        u /= np.linalg.norm(u)
        Q = qs[k % len(qs)]
        p = params["p_values"][k % len(params["p_values"])]
        w = empirical.random_fiber_offset(2, Q.dim, u, [seed, 11, k], params["offset_scale"])
        M = resolve_measure(params["measure"], 2 * Q.dim)
        fp = empirical.fiber_profile(K, Q, p, u, w, M, ts, params["n_samples"], [seed, 12, k])
        peak, asym = fp.peak_excess(), fp.endpoint_asymmetry()
        ok = peak <= tol["k_sigma"] and asym <= tol["k_sigma"]
        rows += [(k, float(t), float(v), float(e)) for t, v, e in zip(fp.t, fp.values, fp.stderr)]
        out.cases.append(Case(f"fiber_profile:{k}",
                              {"body": K.to_dict(), "u": u, "w": w, "Q": Q.to_dict(), "p": p, "measure": M.to_dict(), "n_samples": params["n_samples"]},
                              {"F_at_zero": float(fp.values[len(ts) // 2]), "peak_excess_sigma": peak, "endpoint_asymmetry_sigma": asym},
                              ok))
    out.profiles["fiber_profile"] = (("case", "t", "F", "stderr"), rows)
    return out


def run_rearrange_props(params, tol, seed, ctx):
    out = SuiteOutcome()
    res = params["resolution"]
    lo, hi = [-2.0, -2.0], [2.0, 2.0]
    for k in range(params["n_instances"]):
        P = random_polygon([seed, 13, k])
        f = rearrange.indicator(P, lo, hi, (res, res))
        noise = rearrange.from_function(lambda x: substream(seed, 14, k).uniform(size=x.shape[:-1]) * (x[..., 0] > 0), lo, hi, (res, res))
        for label, g in (("indicator", f), ("random", noise)):
            star = rearrange.symmetric_decreasing_rearrangement(g)
            equi = bool(np.array_equal(np.sort(g.values, axis=None), np.sort(star.values, axis=None)))
            fibers = [rearrange.steiner_rearrangement(g, a) for a in (0, 1)]
            mass_err = max(abs(h.mass - g.mass) / g.mass for h in [star] + fibers)
            levels = np.unique(g.values)
            mids = 0.5 * (levels[1:] + levels[:-1])
            level_ok = all(g.superlevel_volume(t) == star.superlevel_volume(t) for t in mids)
            out.cases.append(Case(f"equimeasurable:{label}:{k}", {"body": P.to_dict(), "resolution": res},
                                  {"multiset_equal": equi, "superlevel_volumes_equal": level_ok, "mass_error": mass_err},
                                  equi and level_ok and mass_err <= tol["mass"]))
        cell_diam = float(np.linalg.norm(f.widths))
        bound = 4.0 * P.surface_area * cell_diam
        for axis in (0, 1):
            u = np.eye(2)[axis]
            exact = rearrange.indicator(symmetrize.steiner(P, u), lo, hi, (res, res))
            err = rearrange.steiner_rearrangement(f, axis).l1_distance(exact)
            out.cases.append(Case(f"steiner_commutes:{k}:axis{axis}", {"body": P.to_dict(), "axis": axis},
                                  {"l1_distance": err, "bound": bound}, err <= bound))
        _, prof = rearrange.marginal_profile(f, 1)
        gap = rearrange.concavity_gap(prof)
        jump = float(f.widths[0] * f.values.max())
        out.cases.append(Case(f"marginal_concavity:{k}", {"body": P.to_dict()}, {"concavity_gap": gap, "cell_jump": jump}, gap <= jump))
    # iterated Steiner rearrangements approach f*
    P = random_polygon([seed, 15])
    f = rearrange.indicator(P, lo, hi, (res, res))
    star = rearrange.symmetric_decreasing_rearrangement(f)
    dists = [f.l1_distance(star)]
    h = f
    for _ in range(params["rounds"]):
        for step in params["lattice_steps"]:
            h = rearrange.steiner_rearrangement(h, step if isinstance(step, int) else tuple(step))
        dists.append(h.l1_distance(star))
    bound = 4.0 * P.surface_area * float(np.linalg.norm(f.widths))
    monotone = all(b <= a + 1e-12 for a, b in zip(dists, dists[1:]))
    out.cases.append(Case("steiner_iteration_converges", {"body": P.to_dict(), "rounds": params["rounds"]},
                          {"l1_distances": dists, "bound": bound}, monotone and dists[-1] <= bound))
    out.profiles["rearrange_convergence"] = (("round", "l1_distance"), list(enumerate(dists)))
    return out


def run_oracle_vp(params, tol, seed, ctx):
    out = SuiteOutcome()
    for i in range(params["n_pairs"]):
        K, L = random_polygon([seed, 16, i]), random_polygon([seed, 17, i])
        for p in params["p_values"]:
            exact = mixed.lp_mixed_volume(K, L, p)
            fd = mixed.lp_mixed_volume_fd_oracle(K, L, p, params["eps"], params["n_dirs"])
            rel = abs(fd - exact) / exact
            out.cases.append(Case(f"oracle_vp:{i}:p={p:g}", {"K": K.to_dict(), "L": L.to_dict(), "p": p},
                                  {"facet_formula": exact, "finite_difference": fd, "relative_error": rel}, rel <= tol["relative"]))
    return out


@dataclass(frozen=True)
class SuiteInfo:
    name: str
    verifies: str
    runner: object
    defaults: dict
    tolerances: dict
    mc_keys: tuple = ()


_GRID_DEFAULTS = {
    "bodies": ["triangle", {"name": "random_polygon", "params": {"seed": 0}}],
    "qs": ["q_unit", "q_sym", "q_square", "neg_simplex"],
    "p_values": [1.0, 2.0],
    "measures": [{"kind": "lebesgue"}, {"kind": "gaussian"}, {"kind": "generalized_cauchy"}],
    "n_samples": 2**14,
    "ball_resolution": 64,
}
_GRID_TOL = {"k_sigma": K_SIGMA, "relative_stderr": 0.02}

SUITES = {
    s.name: s
    for s in [
        SuiteInfo("petty-classical", "classical polar projection volume is maximal for the ball; planar Petty product bound",
                  run_petty_classical, {"bodies": ["square", "triangle"], "n_random": 20, "product_polygons": 50, "reference_polygon": 64},
                  {"exact": convexity.EXACT_TOL, "product_slack": 1e-6, "reference_fraction": 0.995}),
        SuiteInfo("petty-lpq", "nu of the (L_p,Q) polar projection body is maximal for the ball of equal volume",
                  run_petty_lpq, dict(_GRID_DEFAULTS), dict(_GRID_TOL), ("n_samples",)),
        SuiteInfo("steiner-step", "nu of the (L_p,Q) polar projection body does not decrease under Steiner symmetrization",
                  run_steiner_step, {**_GRID_DEFAULTS, "n_samples": 2**15}, dict(_GRID_TOL), ("n_samples",)),
        SuiteInfo("lemma-convexity", "convexity of L_p mixed volumes, mixed volumes, volumes and p-sum volumes along linear parameter systems",
                  run_lemma_convexity, {"dims": [2, 3], "n_instances": 50, "n_points": 41, "p_values": [1.0, 1.5, 2.0],
                                        "psum_p_values": [1.5, 2.0], "joint_instances": 20},
                  {"exact": convexity.EXACT_TOL, "grid_bias_factor": convexity.GRID_BIAS_FACTOR}),
        SuiteInfo("sp-monotone", "L_p surface area is convex along shadow systems and does not increase under Steiner symmetrization",
                  run_sp_monotone, {"dims": [2, 3], "scan_instances": 50, "check_instances": 100, "n_points": 41, "p_values": [1.0, 1.5, 2.0]},
                  {"exact": convexity.EXACT_TOL}),
        SuiteInfo("shadow-invariants", "shadow system identities and convergence of random Steiner symmetrization flows",
                  run_shadow_invariants, {"dims": [2, 3], "n_instances": 20, "n_points": 41,
                                          "flow_bodies": ["square", {"name": "random_polygon", "params": {"seed": 0, "n_points": 5}}],
                                          "flow_steps": 200},
                  {"exact": convexity.EXACT_TOL, "volume": convexity.EXACT_TOL, "flow_fraction": 0.05}),
        SuiteInfo("empirical-petty", "expected nu of polar projection bodies of random matrix bodies grows under rearrangement",
                  run_empirical_petty, {"n": 2, "N": 3, "C": ["cube", "simplex"], "Q": "q_unit", "densities": [], "offset_spread": 1.0,
                                        "measures": [{"kind": "gaussian"}, {"kind": "lebesgue"}], "outer": 200, "inner": 2048},
                  {"k_sigma": K_SIGMA}, ("outer", "inner")),
        SuiteInfo("fiber-profile", "fiber profiles of polar projection bodies along shadow systems peak at t = 0 and are even",
                  run_fiber_profile, {"n_instances": 20, "n_points": 41, "n_samples": 2**14, "qs": ["q_unit", "q_sym", "q_square", "neg_simplex"],
                                      "p_values": [1.0, 2.0], "measure": {"kind": "gaussian"}, "offset_scale": 0.5},
                  {"k_sigma": K_SIGMA}, ("n_samples",)),
        SuiteInfo("rearrange-props", "equimeasurability, mass conservation, Steiner commutation and concave marginals of convex indicators",
                  run_rearrange_props, {"resolution": 128, "n_instances": 5, "rounds": 4,
                                        "lattice_steps": [0, 1, [1, 1], [1, -1], [1, 2], [2, 1], [1, -2], [2, -1]]},
                  {"mass": 1e-12}),
        SuiteInfo("oracle-vp", "facet formula for L_p mixed volumes agrees with the p-sum finite-difference limit",
                  run_oracle_vp, {"n_pairs": 20, "p_values": [1.0, 1.5, 2.0], "eps": 1e-4, "n_dirs": 2048},
                  {"relative": 1e-3}),
    ]
}


def get_suite(name):
    try:
        return SUITES[name]
    except KeyError:
        raise UnknownName(f"unknown suite {name!r}; known: {sorted(SUITES)}") from None


def run_suite(name, params=None, tolerances=None, seed=0, samples_scale=1.0, base_dir=None):
    """Run a suite with defaults overlaid by ``params``/``tolerances``."""
    info = get_suite(name)
    merged = dict(info.defaults)
    for key, val in (params or {}).items():
        if key not in info.defaults:
            raise ConfigError(f"suite {name} has no parameter {key!r}; known: {sorted(info.defaults)}")
        merged[key] = val
    for key in info.mc_keys:
        merged[key] = max(4, int(round(merged[key] * samples_scale)))
    tol = dict(info.tolerances)
    for key, val in (tolerances or {}).items():
        if key not in info.tolerances:
            raise ConfigError(f"suite {name} has no tolerance {key!r}; known: {sorted(info.tolerances)}")
        tol[key] = val
    outcome = info.runner(merged, tol, seed, {"base_dir": base_dir})
    return merged, tol, outcome
