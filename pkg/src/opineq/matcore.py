"""Dense real symmetric matrix kernel: eigendecomposition, functional
calculus, Loewner-order comparison, and the text matrix format.

Conventions
-----------
A "symmetric matrix" is a square float64 ndarray with entries[i, j] ==
entries[j, i] exactly; `symmetrize` produces one and every constructor in
the library goes through it. Real symmetric matrices stand in for
self-adjoint operators; every inequality handled here is exercised by
real instances.

The eigensolver is a cyclic Jacobi iteration (off-diagonal Frobenius
threshold 1e-14 * ||A||_F, sweep cap 100), chosen for unconditional
symmetry handling and high relative accuracy at desk scale (n <= ~100).
The rotation loop runs in the compiled kernel when available; see
`opineq._jacobi`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from ._jacobi import BACKEND, jacobi_sweeps

__all__ = [
    "BACKEND",
    "NotPositiveDefinite",
    "ConvergenceError",
    "SpectralDecomp",
    "LoewnerResult",
    "symmetrize",
    "symmetrized_product",
    "asymmetry",
    "jacobi_eig",
    "apply_fn",
    "sqrt_pd",
    "inv_pd",
    "spectral_norm",
    "spectral_interval",
    "quad_form",
    "loewner_leq",
    "unit_vector",
    "parse_matrix",
    "format_matrix",
]

JACOBI_OFF_TOL_FACTOR = 1e-14
JACOBI_MAX_SWEEPS = 100

# Products that are mathematically symmetric may drift by at most this
# much (relative Frobenius) before we treat it as corruption.
PRODUCT_ASYM_TOL = 1e-10

PARSER_ASYM_TOL = 1e-9


class NotPositiveDefinite(ValueError):
    """Matrix fails the positive-definiteness guard (lambda_min <= tol)."""


class ConvergenceError(RuntimeError):
    """Jacobi sweep cap exceeded; signals pathological input."""


@dataclass(frozen=True)
class SpectralDecomp:
    """Orthogonal eigenbasis q and ascending eigenvalues lam: A = q diag(lam) q.T."""

    q: np.ndarray
    lam: np.ndarray

    @property
    def n(self) -> int:
        return self.lam.shape[0]


def symmetrize(a) -> np.ndarray:
    """Return (a + a.T)/2 as an exactly symmetric float64 array."""
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    return (a + a.T) / 2.0


def asymmetry(a: np.ndarray) -> float:
    """Relative Frobenius asymmetry ||a - a.T|| / max(||a||, tiny)."""
    num = float(np.linalg.norm(a - a.T))
    den = float(np.linalg.norm(a))
    return num / max(den, np.finfo(float).tiny)


def symmetrized_product(a: np.ndarray, rel_tol: float = PRODUCT_ASYM_TOL) -> np.ndarray:
    """Symmetrize a computed product that is symmetric in exact arithmetic.

    Raises ArithmeticError if the floating-point drift exceeds rel_tol,
    turning silent corruption into a detected invariant violation.
    """
    drift = asymmetry(a)
    if drift > rel_tol:
        raise ArithmeticError(
            f"product asymmetry {drift:.3e} exceeds tolerance {rel_tol:.1e}"
        )
    return (a + a.T) / 2.0


def _check_square_sym(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if not np.array_equal(a, a.T):
        raise ValueError("matrix is not exactly symmetric; use symmetrize() first")
    return a


def jacobi_eig(a) -> SpectralDecomp:
    """Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations."""
    a = _check_square_sym(a)
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    n = a.shape[0]
    work = np.array(a, dtype=float, order="C", copy=True)
    q = np.eye(n, order="C")
    off_tol = JACOBI_OFF_TOL_FACTOR * float(np.linalg.norm(a))
    sweeps = jacobi_sweeps(work, q, off_tol, JACOBI_MAX_SWEEPS)
    if sweeps < 0:
        raise ConvergenceError(
            f"Jacobi did not reach off-norm {off_tol:.3e} in {JACOBI_MAX_SWEEPS} sweeps"
        )
    lam = np.diag(work).copy()
    order = np.argsort(lam, kind="stable")
    return SpectralDecomp(q=np.ascontiguousarray(q[:, order]), lam=lam[order])


def apply_fn(a, f: Callable, decomp: SpectralDecomp | None = None) -> np.ndarray:
    """Functional calculus: Q f(Lambda) Q.T, exactly symmetric by construction.

    f is applied to the eigenvalue vector (any ufunc-compatible callable).
    Raises ValueError when f is undefined (non-finite) at an eigenvalue.
    """
    d = decomp if decomp is not None else jacobi_eig(a)
    with np.errstate(all="ignore"):
        fl = np.asarray(f(d.lam), dtype=float)
    if fl.shape != d.lam.shape:
        raise ValueError("scalar function must map eigenvalues elementwise")
    if not np.all(np.isfinite(fl)):
        bad = d.lam[~np.isfinite(fl)]
        raise ValueError(f"function undefined at eigenvalue(s) {bad}")
    return symmetrize((d.q * fl) @ d.q.T)


def pd_tolerance(decomp: SpectralDecomp) -> float:
    """Eigenvalue floor below which a matrix is rejected as not PD."""
    scale = float(np.max(np.abs(decomp.lam))) if decomp.n else 0.0
    return 1e-12 * max(1.0, scale)


def _require_pd(decomp: SpectralDecomp, what: str) -> None:
    lam_min = float(decomp.lam[0])
    if lam_min <= pd_tolerance(decomp):
        raise NotPositiveDefinite(
            f"{what}: smallest eigenvalue {lam_min:.6e} is not safely positive"
        )


def sqrt_pd(a, decomp: SpectralDecomp | None = None) -> np.ndarray:
    """Positive-definite square root via the spectral decomposition."""
    d = decomp if decomp is not None else jacobi_eig(a)
    _require_pd(d, "sqrt_pd")
    return apply_fn(a, np.sqrt, decomp=d)


def inv_pd(a, decomp: SpectralDecomp | None = None) -> np.ndarray:
    """Inverse of a positive-definite matrix via the spectral decomposition."""
    d = decomp if decomp is not None else jacobi_eig(a)
    _require_pd(d, "inv_pd")
    return apply_fn(a, lambda t: 1.0 / t, decomp=d)


def spectral_norm(a, decomp: SpectralDecomp | None = None) -> float:
    d = decomp if decomp is not None else jacobi_eig(a)
    return float(np.max(np.abs(d.lam))) if d.n else 0.0


def spectral_interval(a, decomp: SpectralDecomp | None = None) -> tuple[float, float]:
    """Eigenvalue range [lambda_min, lambda_max]."""
    d = decomp if decomp is not None else jacobi_eig(a)
    return float(d.lam[0]), float(d.lam[-1])


def quad_form(a, x) -> float:
    """Quadratic form <A x, x>."""
    a = np.asarray(a, dtype=float)
    x = np.asarray(x, dtype=float)
    if x.shape != (a.shape[0],):
        raise ValueError("vector dimension does not match the matrix")
    return float(x @ a @ x)


def unit_vector(v) -> np.ndarray:
    """Normalize v to Euclidean length 1."""
    v = np.asarray(v, dtype=float)
    nrm = float(np.linalg.norm(v))
    if nrm == 0.0 or not np.isfinite(nrm):
        raise ValueError("cannot normalize a zero or non-finite vector")
    return v / nrm


@dataclass(frozen=True)
class LoewnerResult:
    """Outcome of testing A <= B: margin = lambda_min(B - A) plus verdict."""

    holds: bool
    margin: float
    scale: float

    @property
    def relative_margin(self) -> float:
        return self.margin / self.scale


def loewner_leq(a, b, tol: float = 1e-10, scale: float | None = None) -> LoewnerResult:
    """Test A <= B in the Loewner order with a relative tolerance.

    margin = lambda_min(B - A); the verdict holds iff
    margin >= -tol * max(1, ||B - A||_2, ||A||_2, ||B||_2). Pass `scale`
    to reuse norms already known to the caller.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    diff = symmetrize(b - a)
    d = jacobi_eig(diff)
    margin = float(d.lam[0]) if d.n else 0.0
    if scale is None:
        scale = max(1.0, spectral_norm(diff, d), spectral_norm(a), spectral_norm(b))
    else:
        scale = max(1.0, float(scale), spectral_norm(diff, d))
    return LoewnerResult(holds=margin >= -tol * scale, margin=margin, scale=scale)


def parse_matrix(text: str) -> np.ndarray:
    """Parse the text matrix format: first line n, then n rows of n decimals.

    Rejects inputs whose relative asymmetry exceeds 1e-9; the returned
    array is exactly symmetrized.
    """
    tokens = text.split()
    if not tokens:
        raise ValueError("empty matrix text")
    try:
        n = int(tokens[0])
    except ValueError as exc:
        raise ValueError(f"first token must be the dimension, got {tokens[0]!r}") from exc
    if n < 1:
        raise ValueError(f"dimension must be >= 1, got {n}")
    vals = tokens[1:]
    if len(vals) != n * n:
        raise ValueError(f"expected {n * n} entries for n={n}, got {len(vals)}")
    a = np.array([float(v) for v in vals], dtype=float).reshape(n, n)
    if asymmetry(a) > PARSER_ASYM_TOL:
        raise ValueError(
            f"matrix asymmetry {asymmetry(a):.3e} exceeds {PARSER_ASYM_TOL:.1e}"
        )
    return symmetrize(a)


def format_matrix(a) -> str:
    """Render a matrix in the text format with round-trip-exact decimals."""
    a = np.asarray(a, dtype=float)
    n = a.shape[0]
    lines = [str(n)]
    for row in a:
        lines.append(" ".join(repr(float(v)) for v in row))
    return "\n".join(lines) + "\n"
