"""Scalar means and the multiplicative refinement factors of the AM-GM chain.

For positive reals a, b (equivalently the single ratio x = a/b against 1)
the library works with the ordered chain

    sqrt(x)
      <= sqrt(x) * ratio_refine_factor(x)
      <= sqrt(x) * log_refine_factor(x)
      <= (x + 1) / 2
      <= sqrt(x) * upper_bound_factor(x)

together with the logarithmic-mean bracket sqrt(x) <= L(x, 1) <= (x + 1)/2.
Every function is a pure function of its inputs and accepts either floats
or numpy arrays (elementwise).

Tolerance policy: inequality slacks are measured relative to the larger
side and must stay >= -1e-12; equalities at x = 1 hold to 1e-15.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# Relative slack threshold for every scalar inequality assertion.
REL_SLACK_TOL = 1e-12

# |ln(a/b)| below this uses the series for the logarithmic mean.
_LOGMEAN_SERIES_CUT = 1e-6


def _require_positive(*vals):
    for v in vals:
        if not np.all(np.asarray(v) > 0):
            raise ValueError("scalar mean arguments must be positive")


def am(a, b):
    """Arithmetic mean (a + b) / 2."""
    _require_positive(a, b)
    return (a + b) / 2


def gm(a, b):
    """Geometric mean sqrt(a*b), switching to the log domain on overflow."""
    _require_positive(a, b)
    if np.isscalar(a) and np.isscalar(b):
        p = a * b
        if math.isfinite(p) and p > 0:
            return math.sqrt(p)
        # a*b overflowed or underflowed to 0: exp((ln a + ln b)/2)
        return math.exp(0.5 * (math.log(a) + math.log(b)))
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    with np.errstate(over="ignore", under="ignore"):
        p = a * b
    out = np.sqrt(p)
    bad = ~np.isfinite(p) | (p == 0.0)
    if np.any(bad):
        out = np.where(bad, np.exp(0.5 * (np.log(a) + np.log(b))), out)
    return out


def _log_ratio(a, b):
    """ln(a/b) computed to a few ulps even when a is close to b.

    Near-equal inputs go through log1p((a-b)/b): the subtraction is exact
    within one binade (Sterbenz), so no absolute error of size ulp(ln a)
    leaks into a tiny result.
    """
    r = (a - b) / b
    near = np.abs(r) < 0.5
    if np.isscalar(r):
        return math.log1p(r) if near else math.log(a) - math.log(b)
    with np.errstate(divide="ignore", invalid="ignore"):
        direct = np.log(a) - np.log(b)
    return np.where(near, np.log1p(np.where(near, r, 0.0)), direct)


def heinz(a, b, nu):
    """Heinz mean (a^(1-nu) b^nu + a^nu b^(1-nu)) / 2 for nu in [0, 1].

    Evaluated as gm(a,b) * cosh((1/2 - nu) * ln(a/b)), which is exactly
    symmetric under nu <-> 1-nu and under swapping a and b, and inherits
    the geometric mean's overflow handling.
    """
    _require_positive(a, b)
    if not np.all((np.asarray(nu) >= 0) & (np.asarray(nu) <= 1)):
        raise ValueError("heinz parameter nu must lie in [0, 1]")
    u = (0.5 - nu) * _log_ratio(a, b)
    g = gm(a, b)
    if np.isscalar(u):
        if abs(u) < 700.0:
            return g * math.cosh(u)
        # cosh would overflow: exp(ln g + |u| - ln 2) with the e^{-2|u|} term lost
        return math.exp(math.log(g) + abs(u) - math.log(2.0))
    with np.errstate(over="ignore"):
        out = g * np.cosh(u)
    big = np.abs(u) >= 700.0
    if np.any(big):
        out = np.where(big, np.exp(np.log(g) + np.abs(u) - math.log(2.0)), out)
    return out


def logmean(a, b):
    """Logarithmic mean (a - b) / (ln a - ln b), with L(a, a) = a.

    For |ln(a/b)| < 1e-6 the cancellation-free series
    sqrt(ab) * (1 + t^2/24 + t^4/1920), t = ln(a/b), is used; the two
    branches agree to well below the tolerance policy at the switch.
    """
    _require_positive(a, b)
    if np.isscalar(a) and np.isscalar(b):
        if a == b:
            return float(a)
        t = _log_ratio(a, b)
        if abs(t) < _LOGMEAN_SERIES_CUT:
            t2 = t * t
            return gm(a, b) * (1.0 + t2 / 24.0 + t2 * t2 / 1920.0)
        return (a - b) / t
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    t = _log_ratio(a, b)
    t2 = t * t
    series = gm(a, b) * (1.0 + t2 / 24.0 + t2 * t2 / 1920.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        direct = (a - b) / t
    return np.where(np.abs(t) < _LOGMEAN_SERIES_CUT, series, direct)


def log_refine_factor(x):
    """Refinement factor 1 + (ln x)^2 / 8; equals 1 iff x = 1."""
    _require_positive(x)
    lx = np.log(x) if not np.isscalar(x) else math.log(x)
    return 1.0 + lx * lx / 8.0


def ratio_refine_factor(x):
    """Refinement factor 1 + ((x-1)/(x+1))^2 / 2, in [1, 1.5).

    Invariant under x <-> 1/x; tighter than log_refine_factor since
    ((x-1)/(x+1))^2 <= (ln x)^2 / 4 for all x > 0.
    """
    _require_positive(x)
    z = (x - 1.0) / (x + 1.0)
    return 1.0 + 0.5 * z * z


def bound_refine_factor(m):
    """ratio_refine_factor evaluated at a lower bound m > 1 of the ratio.

    Strictly increasing in m with range (1, 1.5); valid as a refinement
    factor for every ratio x > m. Raises for m <= 1.
    """
    if not np.all(np.asarray(m) > 1.0):
        raise ValueError("bound parameter m must exceed 1")
    return ratio_refine_factor(m)


def upper_bound_factor(x):
    """Upper factor 1 + (sqrt(x) - 1/sqrt(x))^2 / 8 with sqrt(x)*u >= (x+1)/2."""
    _require_positive(x)
    s = np.sqrt(x) if not np.isscalar(x) else math.sqrt(x)
    d = s - 1.0 / s
    return 1.0 + d * d / 8.0


def upper_bound_factor_sum_form(x):
    """Algebraically identical form x/8 + 1/(8x) + 3/4 of upper_bound_factor.

    Kept as an independent evaluation path; the two must agree to 1e-15
    relative everywhere (checked by chain_scan and the test suite).
    """
    _require_positive(x)
    return x / 8.0 + 1.0 / (8.0 * x) + 0.75


@dataclass(frozen=True)
class ChainRecord:
    """All chain members evaluated for one positive pair (a, b).

    heinz_half is the Heinz mean at nu = 1/2, analytically equal to gm;
    it is carried as a cheap internal consistency probe.
    """

    gm: float
    gm_rat: float
    gm_log: float
    am: float
    logmean: float
    upper: float
    heinz_half: float


def chain_eval(a, b) -> ChainRecord:
    """Evaluate every member of the refined AM-GM chain for the pair (a, b)."""
    _require_positive(a, b)
    a = float(a)
    b = float(b)
    x = a / b
    g = gm(a, b)
    return ChainRecord(
        gm=g,
        gm_rat=g * ratio_refine_factor(x),
        gm_log=g * log_refine_factor(x),
        am=am(a, b),
        logmean=logmean(a, b),
        upper=g * upper_bound_factor(x),
        heinz_half=heinz(a, b, 0.5),
    )


def m_refinement_slack(m, x):
    """Slack (x+1)/2 - sqrt(x) * bound_refine_factor(m) for 1 < m < x.

    Non-negative whenever the arguments satisfy the ordering; returns the
    raw and relative slack.
    """
    m = float(m)
    x = float(x)
    if m <= 1.0:
        raise ValueError("bound parameter m must exceed 1")
    if x <= m:
        raise ValueError("ratio x must exceed the bound m")
    lhs = math.sqrt(x) * bound_refine_factor(m)
    rhs = (x + 1.0) / 2.0
    slack = rhs - lhs
    return SlackReport(slack=slack, relative=slack / max(lhs, rhs), lhs=lhs, rhs=rhs)


@dataclass(frozen=True)
class SlackReport:
    slack: float
    relative: float
    lhs: float
    rhs: float


# Adjacent inequalities measured by chain_scan. "bridge" is the scalar
# inequality ((x-1)/(x+1))^2 <= (ln x)^2 / 4 hiding inside the chain, and
# "upper_identity" is the two-form agreement of upper_bound_factor
# (an equality, so its slack is |difference|, sign-free).
CHAIN_PAIRS = (
    ("gm", "gm_rat"),
    ("gm_rat", "gm_log"),
    ("gm_log", "am"),
    ("am", "upper"),
    ("gm", "logmean"),
    ("logmean", "am"),
)


@dataclass(frozen=True)
class PairSlack:
    lhs: str
    rhs: str
    min_relative_slack: float
    argmin_x: float


@dataclass(frozen=True)
class ChainScanReport:
    lo: float
    hi: float
    samples: int
    mode: str
    pair_slacks: tuple[PairSlack, ...]
    bridge_min_slack: float
    bridge_argmin_x: float
    upper_identity_max_rel_diff: float
    worst_relative_slack: float
    worst_pair: str


def _chain_columns(x: np.ndarray) -> dict[str, np.ndarray]:
    s = np.sqrt(x)
    return {
        "gm": s,
        "gm_rat": s * ratio_refine_factor(x),
        "gm_log": s * log_refine_factor(x),
        "am": (x + 1.0) / 2.0,
        "logmean": logmean(x, np.ones_like(x)),
        "upper": s * upper_bound_factor(x),
    }


def _rel_slacks(cols, x):
    out = []
    for lhs, rhs in CHAIN_PAIRS:
        lo_v, hi_v = cols[lhs], cols[rhs]
        rel = (hi_v - lo_v) / np.maximum(lo_v, hi_v)
        k = int(np.argmin(rel))
        out.append(PairSlack(lhs, rhs, float(rel[k]), float(x[k])))
    return out


def chain_scan(lo, hi, samples, mode="log-grid") -> ChainScanReport:
    """Scan the chain over pairs (x, 1), x in [lo, hi]; report worst slacks.

    Modes: "grid" (uniform), "log-grid" (uniform in ln x), "adaptive"
    (log-grid plus bisection refinement of near-tangency intervals,
    depth-capped at 60).
    """
    lo = float(lo)
    hi = float(hi)
    samples = int(samples)
    if not (0.0 < lo <= hi):
        raise ValueError("scan range must satisfy 0 < lo <= hi")
    if lo == hi:
        x = np.array([lo])
    elif samples < 2:
        raise ValueError("need at least 2 samples for a non-degenerate range")
    elif mode == "grid":
        x = np.linspace(lo, hi, samples)
    elif mode in ("log-grid", "adaptive"):
        x = np.exp(np.linspace(math.log(lo), math.log(hi), samples))
    else:
        raise ValueError(f"unknown scan mode: {mode!r}")

    cols = _chain_columns(x)
    pair_slacks = _rel_slacks(cols, x)

    z2 = ((x - 1.0) / (x + 1.0)) ** 2
    bridge = 0.25 * np.log(x) ** 2 - z2
    kb = int(np.argmin(bridge))
    bridge_min, bridge_arg = float(bridge[kb]), float(x[kb])

    u1 = upper_bound_factor(x)
    u2 = upper_bound_factor_sum_form(x)
    ident = float(np.max(np.abs(u1 - u2) / u1))

    if mode == "adaptive" and len(x) > 1:
        pair_slacks = [_refine_pair(p, x) for p in pair_slacks]

    worst = min(pair_slacks, key=lambda p: p.min_relative_slack)
    return ChainScanReport(
        lo=lo,
        hi=hi,
        samples=len(x),
        mode=mode,
        pair_slacks=tuple(pair_slacks),
        bridge_min_slack=bridge_min,
        bridge_argmin_x=bridge_arg,
        upper_identity_max_rel_diff=ident,
        worst_relative_slack=worst.min_relative_slack,
        worst_pair=f"{worst.lhs}<={worst.rhs}",
    )


def _pair_rel_slack_at(lhs: str, rhs: str, x: float) -> float:
    rec = chain_eval(x, 1.0)
    lo_v = getattr(rec, lhs)
    hi_v = getattr(rec, rhs)
    return (hi_v - lo_v) / max(lo_v, hi_v)


def _refine_pair(p: PairSlack, grid: np.ndarray, depth_cap: int = 60) -> PairSlack:
    """Bisect around the grid argmin while the slack is near-tangent."""
    if p.min_relative_slack >= 10.0 * REL_SLACK_TOL:
        return p
    k = int(np.searchsorted(grid, p.argmin_x))
    lo = grid[max(k - 1, 0)]
    hi = grid[min(k + 1, len(grid) - 1)]
    best_x, best = p.argmin_x, p.min_relative_slack
    for _ in range(depth_cap):
        if hi <= lo or hi / lo < 1.0 + 1e-15:
            break
        mid = math.sqrt(lo * hi)
        s = _pair_rel_slack_at(p.lhs, p.rhs, mid)
        if s < best:
            best, best_x = s, mid
        # keep the half whose endpoint slack is smaller
        if _pair_rel_slack_at(p.lhs, p.rhs, math.sqrt(lo * mid)) <= _pair_rel_slack_at(
            p.lhs, p.rhs, math.sqrt(mid * hi)
        ):
            hi = mid
        else:
            lo = mid
    return PairSlack(p.lhs, p.rhs, best, best_x)
