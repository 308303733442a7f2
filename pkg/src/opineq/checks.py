"""Named inequality checks and the randomized falsifier.

Each check verifies one inequality on hypothesis-satisfying instances and
produces a CheckReport with the Loewner margin (operator checks) or the
worst quadratic-form margin over a probe-vector batch (scalar checks).

Two policies are deliberate:

* Dual constants. The map-level bound for the geometrically-refined
  Kantorovich inequality is computed with both candidate constants,
  (m+M) / (2 sqrt(Mm)) / r  ("proof")   and
  (m+M) / (2 sqrt(Mmm')) / r ("stated"),
  which differ by sqrt(m'); every trial reports both side by side.

* Literal vs strengthened hypotheses. The quadratic-form Kantorovich
  refinement is checked both under its literal chain
  m I <= m' B <= A <= M I (falsifiable) and under the strengthened chain
  adding m'^2 B <= A (which supports the derivation). Campaigns run both,
  labeled; the expected-to-fail variants are tagged documented-discrepancy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .hypgen import (
    STREAM_INSTANCE,
    STREAM_PARAMS,
    STREAM_VECTORS,
    HypothesisSpec,
    InfeasibleHypothesis,
    Instance,
    feasibility,
    generate,
    hypothesis_check,
    rng_for,
)
from .matcore import inv_pd, jacobi_eig, spectral_norm, symmetrize
from .opmeans import geo_mean, mean_bundle
from .posmaps import resolve_descriptor
from .scalar_means import (
    CHAIN_PAIRS,
    bound_refine_factor,
    chain_eval,
)

OPERATOR_TOL = 1e-8
SCALAR_CHAIN_TOL = 1e-12

DEFAULT_MAPS = ("pinching", "compression", "mixture:j=1", "mixture:j=3")
DEFAULT_DIMS = (2, 5, 10)


class UnknownCheck(KeyError):
    """Requested check name is not in the registry."""


@dataclass(frozen=True)
class SampleSpace:
    """Parameter ranges a campaign draws from; None means per-check defaults."""

    dims: tuple[int, ...] = DEFAULT_DIMS
    m: tuple[float, float] | None = None
    m_prime: tuple[float, float] | None = None
    big_m: tuple[float, float] | None = None
    maps: tuple[str, ...] = DEFAULT_MAPS
    scalar_lo: float = 1e-8
    scalar_hi: float = 1e8


@dataclass(frozen=True)
class CheckReport:
    check_name: str
    instance_ref: dict
    hypothesis_ok: bool
    margin: float
    relative_margin: float
    violated: bool
    aux: dict = field(default_factory=dict)


def _report(name, trace, hyp_ok, margin, relative, tol, aux) -> CheckReport:
    # violations are only counted on hypothesis-valid instances
    return CheckReport(
        check_name=name,
        instance_ref=dict(trace),
        hypothesis_ok=bool(hyp_ok),
        margin=float(margin),
        relative_margin=float(relative),
        violated=bool(hyp_ok and relative < -tol),
        aux={k: (float(v) if isinstance(v, (int, float, np.floating)) else v) for k, v in aux.items()},
    )


def _loewner_margin(lhs: np.ndarray, rhs: np.ndarray) -> tuple[float, float]:
    """(margin, relative) for LHS <= RHS: lambda_min(RHS-LHS), scaled by ||RHS||."""
    d = jacobi_eig(symmetrize(rhs - lhs))
    margin = float(d.lam[0])
    return margin, margin / max(1.0, spectral_norm(rhs))


def _quad_batch(mat: np.ndarray, xs: np.ndarray) -> np.ndarray:
    return np.einsum("ki,ij,kj->k", xs, mat, xs)


def probe_vectors(rng: np.random.Generator, n: int, decomps=(), count: int = 64) -> np.ndarray:
    """Probe batch: random unit vectors, the standard basis, and balanced
    combinations of extreme eigenvectors of the supplied decompositions
    (quadratic-form violations concentrate near those mixtures)."""
    g = rng.standard_normal((count, n))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    parts = [g, np.eye(n)]
    if n >= 2:
        for d in decomps:
            v1, vn = d.q[:, 0], d.q[:, -1]
            parts.append(np.vstack([v1 + vn, v1 - vn]) / math.sqrt(2.0))
    return np.vstack(parts)


def kantorovich_constant(m: float, big_m: float) -> float:
    return (m + big_m) ** 2 / (4.0 * m * big_m)


# ---------------------------------------------------------------------------
# evaluators


def check_scalar_chain(inst, rng_v, tol, trace):
    x = float(trace["x"])
    rec = chain_eval(x, 1.0)
    worst_rel, worst_raw, worst_pair = np.inf, np.inf, ""
    for lhs, rhs in CHAIN_PAIRS:
        lo_v, hi_v = getattr(rec, lhs), getattr(rec, rhs)
        rel = (hi_v - lo_v) / max(lo_v, hi_v)
        if rel < worst_rel:
            worst_rel, worst_raw, worst_pair = rel, hi_v - lo_v, f"{lhs}<={rhs}"
    return _report("scalar_chain", trace, True, worst_raw, worst_rel, tol,
                   {"x": x, "worst_pair": worst_pair})


def check_op_amgm(inst: Instance, rng_v, tol, trace):
    hyp_ok, _ = hypothesis_check(inst)
    bundle = mean_bundle(inst.a, inst.b)
    gap_lo, rel_lo = _loewner_margin(bundle.geo, bundle.mid)
    gap_hi, rel_hi = _loewner_margin(bundle.mid, bundle.am)
    rel = min(rel_lo, rel_hi)
    raw = gap_lo if rel_lo <= rel_hi else gap_hi
    return _report("op_amgm", trace, hyp_ok, raw, rel, tol,
                   {"gap_geo_mid": gap_lo, "gap_mid_am": gap_hi,
                    "rel_geo_mid": rel_lo, "rel_mid_am": rel_hi})


def check_op_upper(inst: Instance, rng_v, tol, trace):
    hyp_ok, _ = hypothesis_check(inst)
    bundle = mean_bundle(inst.a, inst.b)
    margin, rel = _loewner_margin(bundle.am, bundle.upper)
    return _report("op_upper", trace, hyp_ok, margin, rel, tol, {})


def check_lemma31(inst: Instance, rng_v, tol, trace):
    hyp_ok, _ = hypothesis_check(inst)
    factor = bound_refine_factor(inst.spec.m) if inst.spec.m > 1.0 else float("nan")
    if not math.isfinite(factor):
        return _report("lemma31", trace, False, math.nan, math.nan, tol, {})
    lhs = factor * geo_mean(inst.a, inst.b)
    rhs = symmetrize((inst.a + inst.b) / 2.0)
    margin, rel = _loewner_margin(lhs, rhs)
    return _report("lemma31", trace, hyp_ok, margin, rel, tol, {"refine_factor": factor})


def check_eq31(inst: Instance, rng_v, tol, trace):
    hyp_ok, _ = hypothesis_check(inst)
    m, mp, M = inst.spec.m, inst.spec.m_prime, inst.spec.big_m
    b = inst.b_effective()
    factor = math.sqrt(M * mp / m) + math.sqrt(m * mp / M)
    lhs = symmetrize(inst.a + mp * b)
    rhs = factor * geo_mean(inst.a, b)
    margin, rel = _loewner_margin(lhs, rhs)
    return _report("eq31", trace, hyp_ok, margin, rel, tol, {"chain_factor": factor})


def _check_thm32(name):
    def run(inst: Instance, rng_v, tol, trace):
        hyp_ok, _ = hypothesis_check(inst)
        m, mp, M = inst.spec.m, inst.spec.m_prime, inst.spec.big_m
        b = inst.b_effective()
        geo = geo_mean(inst.a, b)
        kant = kantorovich_constant(m, M)
        refine = bound_refine_factor(mp)
        factor = kant / refine**2
        xs = probe_vectors(rng_v, inst.a.shape[0],
                           decomps=(jacobi_eig(inst.a), jacobi_eig(geo)))
        lhs = _quad_batch(inst.a, xs) * _quad_batch(b, xs)
        rhs = factor * _quad_batch(geo, xs) ** 2
        diffs = rhs - lhs
        k = int(np.argmin(diffs / np.maximum(1.0, np.abs(rhs))))
        margin = float(diffs[k])
        rel = margin / max(1.0, abs(float(rhs[k])))
        return _report(name, trace, hyp_ok, margin, rel, tol,
                       {"kantorovich_const": kant, "refine_factor": refine,
                        "bound_factor": factor, "worst_lhs": float(lhs[k]),
                        "worst_rhs": float(rhs[k]), "vectors": xs.shape[0]})

    return run


def check_cor33(inst: Instance, rng_v, tol, trace):
    hyp_ok, _ = hypothesis_check(inst)
    m, mp, M = inst.spec.m, inst.spec.m_prime, inst.spec.big_m
    a_inv = inv_pd(inst.a)
    kant = kantorovich_constant(m, M)
    refined = kant / bound_refine_factor(mp) ** 2
    xs = probe_vectors(rng_v, inst.a.shape[0], decomps=(jacobi_eig(inst.a),))
    lhs = _quad_batch(inst.a, xs) * _quad_batch(a_inv, xs)
    worst = float(np.max(lhs))
    margin = refined - worst
    rel = margin / max(1.0, refined)
    return _report("cor33_literal", trace, hyp_ok, margin, rel, tol,
                   {"classical_bound": kant, "refined_bound": refined,
                    "classical_margin": kant - worst, "worst_lhs": worst})


def check_nakamoto(inst: Instance, rng_v, tol, trace):
    hyp_ok, _ = hypothesis_check(inst)
    m, M = inst.spec.m, inst.spec.big_m
    phi = inst.phi
    lhs = geo_mean(phi(inst.a), phi(inv_pd(inst.a)))
    bound = (M + m) / (2.0 * math.sqrt(M * m))
    rhs = bound * np.eye(phi.output_dim)
    margin, rel = _loewner_margin(lhs, rhs)
    return _report("nakamoto", trace, hyp_ok, margin, rel, tol, {"bound": bound})


def _dual_constants(m, mp, M):
    refine = bound_refine_factor(mp)
    c_proof = (m + M) / (2.0 * math.sqrt(M * m)) / refine
    c_stated = (m + M) / (2.0 * math.sqrt(M * m * mp)) / refine
    return c_stated, c_proof


def _check_thm34(name, which):
    def run(inst: Instance, rng_v, tol, trace):
        hyp_ok, _ = hypothesis_check(inst)
        m, mp, M = inst.spec.m, inst.spec.m_prime, inst.spec.big_m
        b = inst.b_effective()
        phi = inst.phi
        lhs = geo_mean(phi(inst.a), phi(b))
        phi_geo = phi(geo_mean(inst.a, b))
        c_stated, c_proof = _dual_constants(m, mp, M)
        mg_stated, rel_stated = _loewner_margin(lhs, c_stated * phi_geo)
        mg_proof, rel_proof = _loewner_margin(lhs, c_proof * phi_geo)
        margin, rel = (mg_stated, rel_stated) if which == "stated" else (mg_proof, rel_proof)
        return _report(name, trace, hyp_ok, margin, rel, tol,
                       {"c_stated": c_stated, "c_proof": c_proof,
                        "margin_stated": mg_stated, "margin_proof": mg_proof})

    return run


def _check_cor35(name, which):
    def run(inst: Instance, rng_v, tol, trace):
        hyp_ok, _ = hypothesis_check(inst)
        m, mp, M = inst.spec.m, inst.spec.m_prime, inst.spec.big_m
        phi = inst.phi
        lhs = geo_mean(phi(inst.a), phi(inv_pd(inst.a)))
        eye = np.eye(phi.output_dim)
        c_stated, c_proof = _dual_constants(m, mp, M)
        mg_stated, rel_stated = _loewner_margin(lhs, c_stated * eye)
        mg_proof, rel_proof = _loewner_margin(lhs, c_proof * eye)
        margin, rel = (mg_stated, rel_stated) if which == "stated" else (mg_proof, rel_proof)
        nak = (M + m) / (2.0 * math.sqrt(M * m))
        return _report(name, trace, hyp_ok, margin, rel, tol,
                       {"c_stated": c_stated, "c_proof": c_proof,
                        "margin_stated": mg_stated, "margin_proof": mg_proof,
                        "nakamoto_bound": nak})

    return run


# ---------------------------------------------------------------------------
# parameter samplers (draw from user ranges when given, else defaults that
# keep the hypothesis feasible)


def _draw(rng, rng_spec, default):
    lo, hi = rng_spec if rng_spec is not None else default
    if lo == hi:
        return float(lo)
    return float(rng.uniform(lo, hi))


def _draw_log(rng, lo, hi):
    return float(np.exp(rng.uniform(np.log(lo), np.log(hi))))


def _sample_pair_ordered(rng, space):
    m = _draw(rng, space.m, (1.05, 4.0)) if space.m else _draw_log(rng, 1.05, 4.0)
    big = _draw(rng, space.big_m, None) if space.big_m else m * _draw_log(rng, 1.2, 4.0)
    return {"m": m, "M": big}

def _sample_literal_triple(rng, space):
    m = _draw(rng, space.m, (0.5, 2.0))
    mp = _draw(rng, space.m_prime, (1.5, 6.0))
    big = _draw(rng, space.big_m, None) if space.big_m else m * _draw_log(rng, 1.2, 6.0)
    return {"m": m, "m_prime": mp, "M": big}

def _sample_strengthened_triple(rng, space):
    m = _draw(rng, space.m, (0.5, 1.5))
    mp = _draw(rng, space.m_prime, (1.1, 2.2))
    big = _draw(rng, space.big_m, None) if space.big_m else m * mp * _draw_log(rng, 1.1, 3.0)
    return {"m": m, "m_prime": mp, "M": big}

def _sample_cor33(rng, space):
    mp = _draw(rng, space.m_prime, (2.0, 9.0))
    root = math.sqrt(mp)
    m = _draw(rng, space.m, None) if space.m else 1.0 + rng.uniform(0.02, 0.9) * (root - 1.0)
    big = _draw(rng, space.big_m, None) if space.big_m else _draw_log(rng, root, max(mp / m, root * 1.0000001))
    return {"m": m, "m_prime": mp, "M": big}

def _sample_cor35(rng, space):
    m = _draw(rng, space.m, (0.2, 1.0))
    mp = _draw(rng, space.m_prime, (1.2, 3.0))
    big = _draw(rng, space.big_m, None) if space.big_m else mp * _draw_log(rng, 1.0, 2.5)
    return {"m": m, "m_prime": mp, "M": big}

def _sample_nakamoto(rng, space):
    m = _draw(rng, space.m, None) if space.m else _draw_log(rng, 0.2, 2.0)
    big = _draw(rng, space.big_m, None) if space.big_m else m * _draw_log(rng, 1.5, 8.0)
    return {"m": m, "M": big}

def _sample_free_pair(rng, space):
    lo = space.m[0] if space.m else 0.2
    hi = space.big_m[1] if space.big_m else 8.0
    return {"m": lo, "M": max(hi, lo * 1.5)}

def _sample_scalar(rng, space):
    return {"x": _draw_log(rng, space.scalar_lo, space.scalar_hi)}


@dataclass(frozen=True)
class CheckDef:
    name: str
    kind: str
    description: str
    evaluate: Callable
    sample: Callable
    expected_to_fail: bool = False
    strengthened: bool = False
    needs_phi: bool = False
    tol: float = OPERATOR_TOL


CHECKS: dict[str, CheckDef] = {
    c.name: c
    for c in [
        CheckDef("scalar_chain", "scalar",
                 "refined scalar AM-GM chain and logarithmic-mean bracket",
                 check_scalar_chain, _sample_scalar, tol=SCALAR_CHAIN_TOL),
        CheckDef("op_amgm", "free_pair",
                 "operator sandwich geo <= refined mid <= arithmetic mean",
                 check_op_amgm, _sample_free_pair),
        CheckDef("op_upper", "free_pair",
                 "arithmetic mean <= eighth-order upper bound",
                 check_op_upper, _sample_free_pair),
        CheckDef("lemma31", "pair_ordered",
                 "refine factor r(m) on geo mean under m B <= A <= M B",
                 check_lemma31, _sample_pair_ordered),
        CheckDef("eq31", "kantorovich_triple",
                 "A + m'B <= (sqrt(Mm'/m)+sqrt(mm'/M)) geo, literal chain",
                 check_eq31, _sample_literal_triple),
        CheckDef("thm32_literal", "kantorovich_triple",
                 "refined Kantorovich quadratic-form bound, literal chain (falsifiable)",
                 _check_thm32("thm32_literal"), _sample_literal_triple,
                 expected_to_fail=True),
        CheckDef("thm32_strengthened", "kantorovich_triple",
                 "refined Kantorovich quadratic-form bound with m'^2 B <= A",
                 _check_thm32("thm32_strengthened"), _sample_strengthened_triple,
                 strengthened=True),
        CheckDef("cor33_literal", "self_inverse",
                 "refined Kantorovich for B = A^(-1), literal chain (falsifiable)",
                 check_cor33, _sample_cor33, expected_to_fail=True),
        CheckDef("nakamoto", "map_level",
                 "Phi(A) # Phi(A^-1) <= (M+m)/(2 sqrt(Mm)) I",
                 check_nakamoto, _sample_nakamoto, needs_phi=True),
        CheckDef("thm34_stated", "kantorovich_triple",
                 "map-level refined bound, stated constant (falsifiable)",
                 _check_thm34("thm34_stated", "stated"), _sample_strengthened_triple,
                 expected_to_fail=True, strengthened=True, needs_phi=True),
        CheckDef("thm34_proof", "kantorovich_triple",
                 "map-level refined bound, proof-implied constant",
                 _check_thm34("thm34_proof", "proof"), _sample_strengthened_triple,
                 strengthened=True, needs_phi=True),
        CheckDef("cor35_stated", "self_inverse",
                 "self-inverse map-level bound, stated constant (falsifiable)",
                 _check_cor35("cor35_stated", "stated"), _sample_cor35,
                 expected_to_fail=True, strengthened=True, needs_phi=True),
        CheckDef("cor35_proof", "self_inverse",
                 "self-inverse map-level bound, proof-implied constant",
                 _check_cor35("cor35_proof", "proof"), _sample_cor35,
                 strengthened=True, needs_phi=True),
    ]
}


def get_check(name: str) -> CheckDef:
    try:
        return CHECKS[name]
    except KeyError:
        raise UnknownCheck(name) from None


def sample_trace(check: CheckDef, space: SampleSpace, master: int, index: int) -> dict:
    """Draw one instance's parameters; raises InfeasibleHypothesis if the
    configured ranges cannot satisfy the check's hypothesis."""
    rng = rng_for(master, index, STREAM_PARAMS)
    trace = {"check": check.name, "seed": int(master), "index": int(index)}
    if check.kind == "scalar":
        trace.update(check.sample(rng, space))
        trace["n"] = 1
        return trace
    n = int(space.dims[int(rng.integers(0, len(space.dims)))])
    last_reason = ""
    for _ in range(200):
        params = check.sample(rng, space)
        spec = _spec_from(check, params, n)
        feas = feasibility(spec)
        if feas.feasible:
            trace.update({k: float(v) for k, v in params.items()})
            trace["n"] = n
            if check.needs_phi:
                trace["map"] = str(space.maps[int(rng.integers(0, len(space.maps)))])
            return trace
        last_reason = feas.reason
    raise InfeasibleHypothesis(
        f"{check.name}: no feasible parameters in the configured ranges ({last_reason})"
    )


def _spec_from(check: CheckDef, params: dict, n: int) -> HypothesisSpec:
    return HypothesisSpec(
        kind=check.kind,
        n=n,
        m=float(params.get("m", float("nan"))),
        m_prime=float(params.get("m_prime", float("nan"))),
        big_m=float(params.get("M", float("nan"))),
        strengthened=check.strengthened,
    )


def evaluate_trace(trace: dict, tol: float | None = None) -> CheckReport:
    """Rebuild the instance a trace describes and run its check.

    Only the instance and vector streams are consumed, so the result is
    bit-identical however the parameters were originally sampled.
    """
    check = get_check(trace["check"])
    use_tol = check.tol if tol is None else float(tol)
    master, index = int(trace["seed"]), int(trace["index"])
    if check.kind == "scalar":
        return check.evaluate(None, None, use_tol, trace)
    spec = _spec_from(check, trace, int(trace["n"]))
    rng_i = rng_for(master, index, STREAM_INSTANCE)
    inst = generate(spec, rng_i)
    if check.needs_phi:
        phi = resolve_descriptor(trace["map"], spec.n, rng_i)
        inst = replace(inst, phi=phi)
    inst = replace(inst, seed_trace=dict(trace))
    rng_v = rng_for(master, index, STREAM_VECTORS)
    return check.evaluate(inst, rng_v, use_tol, trace)


@dataclass(frozen=True)
class FalsifyResult:
    found: bool
    trials: int
    report: CheckReport | None = None

    @property
    def trace(self) -> dict | None:
        return None if self.report is None else self.report.instance_ref


def falsify(
    check_name: str,
    budget: int,
    space: SampleSpace = SampleSpace(),
    seed: int = 0,
    tol: float | None = None,
) -> FalsifyResult:
    """Randomized search for a violated=true report; returns the first hit
    with its full reproduction trace, or exhausted."""
    check = get_check(check_name)
    for index in range(int(budget)):
        try:
            trace = sample_trace(check, space, seed, index)
            report = evaluate_trace(trace, tol)
        except InfeasibleHypothesis:
            continue
        if report.violated:
            return FalsifyResult(found=True, trials=index + 1, report=report)
    return FalsifyResult(found=False, trials=int(budget))
