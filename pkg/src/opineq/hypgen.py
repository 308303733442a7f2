"""Deterministic seeded generation of matrix instances satisfying each
inequality's hypothesis chain, plus feasibility analysis of the chains.

Construction strategy is constructive-then-reject: pure rejection
sampling over SPD pairs essentially never satisfies chained Loewner
constraints, so each generator builds the constraints in by congruence
(which preserves the Loewner order) and verifies the result, retrying
only on residual numerical failures (cap 10^4, then an error rather than
a silent skip).

Seeding contract: a 64-bit master seed and an instance index determine
every random draw through

    seed = splitmix64(master + C1 * (index + 1) + C2 * (stream + 1))

with the published splitmix64 finalizer, feeding numpy's PCG64. Streams
separate parameter draws, instance construction, and probe vectors, so a
recorded instance replays bit-identically regardless of how campaign
parameters were originally sampled.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .matcore import (
    inv_pd,
    jacobi_eig,
    loewner_leq,
    spectral_norm,
    sqrt_pd,
    symmetrized_product,
)
from .posmaps import PosLinMap, random_orthogonal

HYPOTHESIS_TOL = 1e-10
RETRY_CAP = 10_000

STREAM_PARAMS = 0
STREAM_INSTANCE = 1
STREAM_VECTORS = 2

_MASK64 = (1 << 64) - 1


class InfeasibleHypothesis(ValueError):
    """The requested constraint set is provably empty."""


class RetriesExhausted(RuntimeError):
    """Constructive generation failed verification RETRY_CAP times."""


def splitmix64(z: int) -> int:
    """The splitmix64 finalizer; documented mixing function for seeds."""
    z &= _MASK64
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9 & _MASK64
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB & _MASK64
    return z ^ (z >> 31)


def mix_seed(master: int, index: int, stream: int = STREAM_INSTANCE) -> int:
    z = master + 0x9E3779B97F4A7C15 * (index + 1) + 0xD1342543DE82EF95 * (stream + 1)
    return splitmix64(z)


def rng_for(master: int, index: int, stream: int = STREAM_INSTANCE) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(mix_seed(master, index, stream)))


@dataclass(frozen=True)
class HypothesisSpec:
    """Constants parameterizing one hypothesis chain.

    kind: pair_ordered      1 < m < M with  m B <= A <= M B
          kantorovich_triple 0 < m I <= m' B <= A <= M I, plus
                             m'^2 B <= A when strengthened
          self_inverse       the kantorovich chain with B = A^(-1)
                             (literal variant additionally demands m > 1)
          map_level          0 < m I <= A <= M I (with a unital map)
          free_pair          no constraint (both operands PD)
    """

    kind: str
    n: int
    m: float = float("nan")
    m_prime: float = float("nan")
    big_m: float = float("nan")
    strengthened: bool = False


@dataclass(frozen=True)
class Instance:
    """A generated (A, B, phi) triple plus its reproducibility record."""

    spec: HypothesisSpec
    a: np.ndarray
    b: np.ndarray | None = None
    phi: PosLinMap | None = None
    seed_trace: dict = field(default_factory=dict)

    def b_effective(self) -> np.ndarray:
        """B, or A^(-1) for self-inverse kinds."""
        if self.b is not None:
            return self.b
        return inv_pd(self.a)


@dataclass(frozen=True)
class Feasibility:
    feasible: bool
    window: tuple[float, float] | None = None
    reason: str = ""


def feasibility(spec: HypothesisSpec) -> Feasibility:
    """Reduce a hypothesis chain to its admissible spectral window.

    For self-inverse kinds every constraint diagonalizes in A's
    eigenbasis, so the chain collapses to an interval for the eigenvalues
    of A; for congruence-built kinds feasibility is a scalar condition.
    """
    m, mp, M = spec.m, spec.m_prime, spec.big_m
    if spec.kind == "free_pair":
        return Feasibility(True, window=(0.0, float("inf")))
    if spec.kind == "pair_ordered":
        if not (1.0 < m <= M):
            return Feasibility(False, reason=f"need 1 < m <= M, got m={m}, M={M}")
        return Feasibility(True, window=(m, M))
    if spec.kind == "map_level":
        if not (0.0 < m <= M):
            return Feasibility(False, reason=f"need 0 < m <= M, got m={m}, M={M}")
        return Feasibility(True, window=(m, M))
    if spec.kind == "kantorovich_triple":
        if not (m > 0.0 and M >= m):
            return Feasibility(False, reason=f"need 0 < m <= M, got m={m}, M={M}")
        if not (mp > 1.0):
            return Feasibility(False, reason=f"need m' > 1, got m'={mp}")
        lo = m * mp if spec.strengthened else m
        if lo > M:
            return Feasibility(
                False,
                reason=f"A needs spectrum in [{lo:g}, {M:g}], which is empty",
            )
        return Feasibility(True, window=(lo, M))
    if spec.kind == "self_inverse":
        if not (mp > 1.0):
            return Feasibility(False, reason=f"need m' > 1, got m'={mp}")
        if not (m > 0.0):
            return Feasibility(False, reason=f"need m > 0, got m={m}")
        if spec.strengthened:
            # m I <= m' A^-1 <= m'^2 A^-1 <= A <= M I  <=>  m' <= lambda <= min(M, m'/m)
            lo, hi = mp, min(M, mp / m)
        else:
            # literal corollary chain: I < m I < m' A^-1 <= A <= M I
            if m <= 1.0:
                return Feasibility(False, reason=f"literal chain demands m > 1, got m={m}")
            lo, hi = float(np.sqrt(mp)), min(M, mp / m)
        if lo > hi:
            return Feasibility(
                False,
                reason=f"spectral window [{lo:g}, {hi:g}] is empty",
            )
        return Feasibility(True, window=(lo, hi))
    raise ValueError(f"unknown hypothesis kind {spec.kind!r}")


def rand_spd(
    n: int,
    interval: tuple[float, float],
    rng: np.random.Generator,
    pin: str = "both",
) -> np.ndarray:
    """Random SPD matrix with spectrum inside [lo, hi].

    Eigenvalues are sampled uniformly; with pin="both" (the default) each
    interval endpoint is included exactly once when n >= 2, so boundary
    cases are always exercised. pin="random" includes each endpoint with
    probability 1/2; pin="none" samples all eigenvalues strictly inside.
    The eigenbasis is a random orthogonal matrix.
    """
    lo, hi = float(interval[0]), float(interval[1])
    if not (0.0 < lo <= hi):
        raise ValueError(f"invalid spectral interval [{lo}, {hi}]")
    if n < 1:
        raise ValueError("dimension must be >= 1")
    lam = rng.uniform(lo, hi, size=n)
    if n >= 2 and lo < hi:
        if pin == "both":
            lam[0], lam[1] = lo, hi
        elif pin == "random":
            if rng.random() < 0.5:
                lam[0] = lo
            if rng.random() < 0.5:
                lam[1] = hi
        elif pin != "none":
            raise ValueError(f"unknown pin mode {pin!r}")
    q = random_orthogonal(n, rng)
    return symmetrized_product((q * lam) @ q.T)


def hypothesis_check(inst: Instance, tol: float = HYPOTHESIS_TOL) -> tuple[bool, dict]:
    """Verify every Loewner constraint of the instance's chain.

    Returns (ok, margins); margins maps constraint names to the relative
    lambda_min margins measured by loewner_leq.
    """
    spec = inst.spec
    a = inst.a
    n = a.shape[0]
    eye = np.eye(n)
    margins: dict[str, float] = {}
    ok = True

    def record(name: str, res) -> None:
        nonlocal ok
        margins[name] = res.relative_margin
        ok = ok and res.holds

    if spec.kind == "free_pair":
        da = jacobi_eig(a)
        margins["a_pd"] = float(da.lam[0]) / max(1.0, spectral_norm(a, da))
        ok = margins["a_pd"] > 0.0
        if inst.b is not None:
            db = jacobi_eig(inst.b)
            margins["b_pd"] = float(db.lam[0]) / max(1.0, spectral_norm(inst.b, db))
            ok = ok and margins["b_pd"] > 0.0
        return ok, margins

    if spec.kind == "pair_ordered":
        b = inst.b
        if not (1.0 < spec.m <= spec.big_m):
            return False, {"scalar_chain": -1.0}
        record("mB<=A", loewner_leq(spec.m * b, a, tol))
        record("A<=MB", loewner_leq(a, spec.big_m * b, tol))
        return ok, margins

    if spec.kind == "map_level":
        record("mI<=A", loewner_leq(spec.m * eye, a, tol))
        record("A<=MI", loewner_leq(a, spec.big_m * eye, tol))
        return ok, margins

    b = inst.b_effective()
    if spec.kind == "self_inverse" and not spec.strengthened and spec.m <= 1.0:
        # the literal corollary chain opens with I < mI
        return False, {"I<mI": spec.m - 1.0}
    record("mI<=m'B", loewner_leq(spec.m * eye, spec.m_prime * b, tol))
    record("m'B<=A", loewner_leq(spec.m_prime * b, a, tol))
    if spec.strengthened:
        record("m'^2B<=A", loewner_leq(spec.m_prime**2 * b, a, tol))
    record("A<=MI", loewner_leq(a, spec.big_m * eye, tol))
    return ok, margins


def gen_pair_ordered(spec: HypothesisSpec, rng: np.random.Generator) -> Instance:
    """Instance of m B <= A <= M B built by congruence: A = B^(1/2) C B^(1/2)."""
    feas = feasibility(spec)
    if not feas.feasible:
        raise InfeasibleHypothesis(feas.reason)
    for _ in range(RETRY_CAP):
        b = rand_spd(spec.n, (0.5, 2.0), rng, pin="none")
        c = rand_spd(spec.n, (spec.m, spec.big_m), rng)
        sb = sqrt_pd(b)
        a = symmetrized_product(sb @ c @ sb)
        inst = Instance(spec=spec, a=a, b=b)
        if hypothesis_check(inst)[0]:
            return inst
    raise RetriesExhausted(f"could not verify a pair_ordered instance for {spec}")


def gen_kantorovich_triple(spec: HypothesisSpec, rng: np.random.Generator) -> Instance:
    """Instance of the (possibly strengthened) chain m I <= m' B <= A <= M I.

    A gets spectrum in [a_lo, M]; B = A^(1/2) S A^(1/2) / m' with the
    spectrum of S inside (0, s_hi], s_hi = 1 (literal) or 1/m' (strengthened),
    and above m / lambda_min(A) so that m I <= m' B. With probability 1/4
    S is drawn commuting with A, which makes the boundary contact exact.
    """
    feas = feasibility(spec)
    if not feas.feasible:
        raise InfeasibleHypothesis(feas.reason)
    lo_a, hi_a = feas.window
    s_cap = 1.0 / spec.m_prime if spec.strengthened else 1.0
    for _ in range(RETRY_CAP):
        a_lo = lo_a * float(np.exp(rng.uniform(0.0, np.log(max(hi_a / lo_a, 1.0)) * 0.5)))
        a_lo = min(a_lo, hi_a)
        da_interval = (a_lo, hi_a)
        a = rand_spd(spec.n, da_interval, rng)
        dec_a = jacobi_eig(a)
        lam_min = float(dec_a.lam[0])
        s_lo = spec.m / lam_min
        if s_lo > s_cap:
            if s_lo > s_cap * (1.0 + 1e-9):
                continue
            s_lo = s_cap  # rounding pushed past a degenerate window
        if rng.random() < 0.25:
            # S commuting with A: boundary contact becomes exact
            lam_s = rng.uniform(s_lo, s_cap, size=spec.n)
            if spec.n >= 2 and s_lo < s_cap:
                if rng.random() < 0.5:
                    lam_s[0] = s_lo
                if rng.random() < 0.5:
                    lam_s[1] = s_cap
            s = symmetrized_product((dec_a.q * lam_s) @ dec_a.q.T)
        else:
            s = rand_spd(spec.n, (s_lo, s_cap), rng, pin="random")
        sa = sqrt_pd(a, decomp=dec_a)
        b = symmetrized_product(sa @ s @ sa) / spec.m_prime
        inst = Instance(spec=spec, a=a, b=b)
        if hypothesis_check(inst)[0]:
            return inst
    raise RetriesExhausted(f"could not verify a kantorovich instance for {spec}")


def gen_self_inverse(spec: HypothesisSpec, rng: np.random.Generator) -> Instance:
    """Instance with B = A^(-1): spectrum drawn from the feasibility window."""
    feas = feasibility(spec)
    if not feas.feasible:
        raise InfeasibleHypothesis(feas.reason)
    for _ in range(RETRY_CAP):
        a = rand_spd(spec.n, feas.window, rng)
        inst = Instance(spec=spec, a=a, b=None)
        if hypothesis_check(inst)[0]:
            return inst
    raise RetriesExhausted(f"could not verify a self_inverse instance for {spec}")


def gen_map_level(spec: HypothesisSpec, rng: np.random.Generator) -> Instance:
    """Instance of m I <= A <= M I (endpoints exercised by rand_spd)."""
    feas = feasibility(spec)
    if not feas.feasible:
        raise InfeasibleHypothesis(feas.reason)
    for _ in range(RETRY_CAP):
        a = rand_spd(spec.n, feas.window, rng)
        inst = Instance(spec=spec, a=a, b=None)
        if hypothesis_check(inst)[0]:
            return inst
    raise RetriesExhausted(f"could not verify a map_level instance for {spec}")


def gen_free_pair(spec: HypothesisSpec, rng: np.random.Generator) -> Instance:
    """Unconstrained PD pair with spectra inside the configured window."""
    lo = spec.m if np.isfinite(spec.m) and spec.m > 0 else 0.2
    hi = spec.big_m if np.isfinite(spec.big_m) and spec.big_m > lo else max(8.0, 2 * lo)
    a = rand_spd(spec.n, (lo, hi), rng, pin="random")
    b = rand_spd(spec.n, (lo, hi), rng, pin="random")
    return Instance(spec=spec, a=a, b=b)


_GENERATORS = {
    "pair_ordered": gen_pair_ordered,
    "kantorovich_triple": gen_kantorovich_triple,
    "self_inverse": gen_self_inverse,
    "map_level": gen_map_level,
    "free_pair": gen_free_pair,
}


def generate(spec: HypothesisSpec, rng: np.random.Generator) -> Instance:
    """Dispatch to the generator for the spec's kind."""
    try:
        gen = _GENERATORS[spec.kind]
    except KeyError:
        raise ValueError(f"unknown hypothesis kind {spec.kind!r}") from None
    return gen(spec, rng)
