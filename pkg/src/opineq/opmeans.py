"""Operator means for positive-definite pairs: the geometric mean A#B,
its refined lower-middle term, and the eighth-order upper bound.

All middle/upper terms are evaluated through functions of the single
positive operator T = A^(-1/2) B A^(-1/2) ("T-form"), which is symmetric
by construction:

    A#B            = A^(1/2) sqrt(T) A^(1/2)
    refined middle = A^(1/2) sqrt(T) (I + ((T+I)^-1 (T-I))^2 / 2) A^(1/2)
    upper bound    = A^(1/2) sqrt(T) (T/8 + T^-1/8 + 3I/4) A^(1/2)

The literal mixed products (A#B)(I + ((A+B)^-1(A-B))^2/2) and
(A#B)(A^-1 B + B^-1 A + 6I)/8 are algebraically identical but numerically
asymmetric; they are evaluated on every call purely as cross-check
identities against the T-form (1e-9 relative Frobenius, widened to 1e-6
when cond(A) or cond(B) exceeds 1e12, since congruence by A^(1/2)
amplifies error by the condition number).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from . import matcore
from .matcore import (
    NotPositiveDefinite,
    SpectralDecomp,
    apply_fn,
    inv_pd,
    jacobi_eig,
    symmetrize,
    symmetrized_product,
)
from .scalar_means import ratio_refine_factor, upper_bound_factor_sum_form

IDENTITY_CHECK_TOL = 1e-9
ILL_CONDITIONED = 1e12
WIDENED_TOL = 1e-6


class IdentityCheckError(ArithmeticError):
    """T-form and literal product form disagreed beyond tolerance."""


@dataclass(frozen=True)
class OpMeanBundle:
    """The four operators compared by the refined operator AM-GM chain."""

    geo: np.ndarray
    mid: np.ndarray
    upper: np.ndarray
    am: np.ndarray


@dataclass(frozen=True)
class _Congruence:
    """Shared factors of the T-form evaluation for one (A, B) pair."""

    a: np.ndarray
    b: np.ndarray
    dec_a: SpectralDecomp
    sqrt_a: np.ndarray
    t: np.ndarray
    dec_t: SpectralDecomp
    check_tol: float
    # congruence by A^(1/2) scales symmetry drift by cond(A)
    prod_tol: float


def _setup(a, b) -> _Congruence:
    a = matcore._check_square_sym(a)
    b = matcore._check_square_sym(b)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    dec_a = jacobi_eig(a)
    matcore._require_pd(dec_a, "geo_mean")
    sqrt_a = apply_fn(a, np.sqrt, decomp=dec_a)
    inv_sqrt_a = apply_fn(a, lambda t: 1.0 / np.sqrt(t), decomp=dec_a)

    cond_a = float(dec_a.lam[-1] / dec_a.lam[0])
    check_tol = IDENTITY_CHECK_TOL
    prod_tol = matcore.PRODUCT_ASYM_TOL * max(1.0, cond_a)
    t = symmetrized_product(inv_sqrt_a @ b @ inv_sqrt_a, rel_tol=prod_tol)
    dec_t = jacobi_eig(t)
    if float(dec_t.lam[0]) <= 0.0:
        # congruence preserves inertia, so T not PD means B not PD
        raise NotPositiveDefinite(
            f"second operand is not positive definite (lambda_min(T) = {dec_t.lam[0]:.3e})"
        )
    cond_t = float(dec_t.lam[-1] / dec_t.lam[0])
    # cond(B) <= cond(A) * cond(T); avoids a third full decomposition
    if cond_a > ILL_CONDITIONED or cond_a * cond_t > ILL_CONDITIONED:
        warnings.warn(
            f"ill-conditioned pair (cond(A)={cond_a:.2e}, cond(B)<= {cond_a * cond_t:.2e}); "
            f"widening identity-check tolerance to {WIDENED_TOL:.0e}",
            RuntimeWarning,
            stacklevel=3,
        )
        check_tol = WIDENED_TOL
    return _Congruence(a, b, dec_a, sqrt_a, t, dec_t, check_tol, prod_tol)


def _tform(c: _Congruence, f) -> np.ndarray:
    return symmetrized_product(
        c.sqrt_a @ apply_fn(c.t, f, decomp=c.dec_t) @ c.sqrt_a, rel_tol=c.prod_tol
    )


def _rel_frob_diff(x: np.ndarray, y: np.ndarray) -> float:
    den = max(float(np.linalg.norm(x)), np.finfo(float).tiny)
    return float(np.linalg.norm(x - y)) / den


def _assert_identity(tform: np.ndarray, literal: np.ndarray, tol: float, what: str):
    diff = _rel_frob_diff(tform, literal)
    if diff > tol:
        raise IdentityCheckError(
            f"{what}: T-form and product form differ by {diff:.3e} (tol {tol:.1e})"
        )


def geo_mean(a, b) -> np.ndarray:
    """Geometric mean A#B = A^(1/2) (A^(-1/2) B A^(-1/2))^(1/2) A^(1/2).

    The unique positive-definite solution X of X A^(-1) X = B.
    """
    return _tform(_setup(a, b), np.sqrt)


def riccati_residual(a, b, x) -> float:
    """Relative residual ||X A^(-1) X - B||_F / ||B||_F of the defining equation."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    x = np.asarray(x, dtype=float)
    res = x @ inv_pd(a) @ x - b
    den = max(float(np.linalg.norm(b)), np.finfo(float).tiny)
    return float(np.linalg.norm(res)) / den


def _mid_tform(c: _Congruence) -> np.ndarray:
    return _tform(c, lambda t: np.sqrt(t) * ratio_refine_factor(t))


def _mid_literal(c: _Congruence, geo: np.ndarray) -> np.ndarray:
    w = inv_pd(symmetrize(c.a + c.b)) @ (c.a - c.b)
    return geo @ (np.eye(c.a.shape[0]) + 0.5 * (w @ w))


def refined_mid(a, b) -> np.ndarray:
    """Middle term of the refined operator AM-GM sandwich.

    Equals (A#B)(I + ((A+B)^-1 (A-B))^2 / 2); satisfies
    A#B <= refined_mid(A, B) <= (A+B)/2 in the Loewner order.
    """
    c = _setup(a, b)
    mid = _mid_tform(c)
    _assert_identity(mid, _mid_literal(c, _tform(c, np.sqrt)), c.check_tol, "refined_mid")
    return mid


def _upper_tform(c: _Congruence) -> np.ndarray:
    return _tform(c, lambda t: np.sqrt(t) * upper_bound_factor_sum_form(t))


def _upper_literal(c: _Congruence, geo: np.ndarray) -> np.ndarray:
    inv_a = apply_fn(c.a, lambda t: 1.0 / t, decomp=c.dec_a)
    inv_b = inv_pd(c.b)
    return 0.125 * geo @ (inv_a @ c.b + inv_b @ c.a + 6.0 * np.eye(c.a.shape[0]))


def upper_bound(a, b) -> np.ndarray:
    """Upper term (A#B)(A^-1 B + B^-1 A + 6I)/8, above the arithmetic mean."""
    c = _setup(a, b)
    up = _upper_tform(c)
    _assert_identity(up, _upper_literal(c, _tform(c, np.sqrt)), c.check_tol, "upper_bound")
    return up


def mean_bundle(a, b) -> OpMeanBundle:
    """All chain terms for one pair, sharing the two eigendecompositions."""
    c = _setup(a, b)
    geo = _tform(c, np.sqrt)
    mid = _mid_tform(c)
    up = _upper_tform(c)
    _assert_identity(mid, _mid_literal(c, geo), c.check_tol, "refined_mid")
    _assert_identity(up, _upper_literal(c, geo), c.check_tol, "upper_bound")
    return OpMeanBundle(geo=geo, mid=mid, upper=up, am=symmetrize((c.a + c.b) / 2.0))
