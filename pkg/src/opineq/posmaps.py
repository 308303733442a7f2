"""Unital positive linear maps on symmetric matrices.

Three concrete families, each trivially unital and positivity-preserving:

  pinching       block-diagonal restriction for a partition of indices
                 (output stays n x n with zeroed off-blocks)
  compression    V.T A V for an isometry V (n x k, V.T V = I_k); output
                 lives in the k-dimensional space
  mixture        sum_i w_i U_i.T A U_i for orthogonal U_i and positive
                 weights summing to 1

The identity map is the one-term mixture with U = I.

CLI descriptors: "pinching" / "pinching:1,2|3" (1-based blocks),
"compression" / "compression:k=2", "mixture" / "mixture:j=3",
"identity"; random parts are resolved deterministically from the
campaign seed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .matcore import jacobi_eig, spectral_norm, symmetrize

ISOMETRY_TOL = 1e-10
ORTHONORMALIZE_RESIDUAL_TOL = 1e-12


class InvalidIsometry(ValueError):
    """Compression matrix fails V.T V = I beyond tolerance."""


def random_orthogonal(n: int, rng: np.random.Generator) -> np.ndarray:
    """Random n x n orthogonal matrix from QR of a Gaussian sample."""
    return random_isometry(n, n, rng)


def random_isometry(n: int, k: int, rng: np.random.Generator) -> np.ndarray:
    """Random n x k matrix with orthonormal columns (Gaussian + QR).

    The orthonormalization residual ||V.T V - I|| is asserted <= 1e-12.
    """
    if not (1 <= k <= n):
        raise ValueError(f"need 1 <= k <= n, got k={k}, n={n}")
    g = rng.standard_normal((n, k))
    q, r = np.linalg.qr(g)
    # fix the sign convention so the draw is canonical
    q = q * np.sign(np.where(np.diag(r) == 0.0, 1.0, np.diag(r)))
    resid = float(np.linalg.norm(q.T @ q - np.eye(k)))
    if resid > ORTHONORMALIZE_RESIDUAL_TOL:
        raise ArithmeticError(f"orthonormalization residual {resid:.3e} too large")
    return q


@dataclass(frozen=True, eq=False)
class PosLinMap:
    """One unital positive linear map; immutable after construction."""

    variant: str
    n: int
    blocks: tuple[tuple[int, ...], ...] = ()
    isometry: np.ndarray | None = None
    weights: np.ndarray | None = None
    rotations: tuple[np.ndarray, ...] = ()
    descriptor: str = field(default="", compare=False)

    @staticmethod
    def pinching(blocks, n: int, descriptor: str = "") -> "PosLinMap":
        """Pinching onto the given partition; uncovered indices become singletons."""
        blocks = [tuple(int(i) for i in b) for b in blocks if len(b) > 0]
        seen: set[int] = set()
        for b in blocks:
            for i in b:
                if i < 0 or i >= n:
                    raise ValueError(f"block index {i} out of range for n={n}")
                if i in seen:
                    raise ValueError(f"index {i} appears in two blocks")
                seen.add(i)
        blocks += [(i,) for i in range(n) if i not in seen]
        return PosLinMap("pinching", n, blocks=tuple(blocks),
                         descriptor=descriptor or "pinching")

    @staticmethod
    def compression(v: np.ndarray, descriptor: str = "") -> "PosLinMap":
        v = np.asarray(v, dtype=float)
        if v.ndim == 1:
            v = v[:, None]
        return PosLinMap("compression", v.shape[0], isometry=v,
                         descriptor=descriptor or f"compression:k={v.shape[1]}")

    @staticmethod
    def mixture(weights, rotations, descriptor: str = "") -> "PosLinMap":
        weights = np.asarray(weights, dtype=float)
        rotations = tuple(np.asarray(u, dtype=float) for u in rotations)
        if len(rotations) == 0 or weights.shape != (len(rotations),):
            raise ValueError("mixture needs one weight per rotation")
        n = rotations[0].shape[0]
        return PosLinMap("mixture", n, weights=weights, rotations=rotations,
                         descriptor=descriptor or f"mixture:j={len(rotations)}")

    @staticmethod
    def identity(n: int) -> "PosLinMap":
        return PosLinMap.mixture([1.0], [np.eye(n)], descriptor="identity")

    @property
    def output_dim(self) -> int:
        if self.variant == "compression":
            return self.isometry.shape[1]
        return self.n

    def apply(self, a) -> np.ndarray:
        """Evaluate the map on a symmetric matrix."""
        a = np.asarray(a, dtype=float)
        if a.shape != (self.n, self.n):
            raise ValueError(f"matrix shape {a.shape} incompatible with map on n={self.n}")
        if self.variant == "pinching":
            out = np.zeros_like(a)
            for b in self.blocks:
                idx = np.ix_(b, b)
                out[idx] = a[idx]
            return symmetrize(out)
        if self.variant == "compression":
            v = self.isometry
            resid = float(np.linalg.norm(v.T @ v - np.eye(v.shape[1])))
            if resid > ISOMETRY_TOL:
                raise InvalidIsometry(
                    f"V.T V deviates from identity by {resid:.3e} (tol {ISOMETRY_TOL:.0e})"
                )
            return symmetrize(v.T @ a @ v)
        out = np.zeros_like(a)
        for w, u in zip(self.weights, self.rotations):
            out += w * (u.T @ a @ u)
        return symmetrize(out)

    def __call__(self, a) -> np.ndarray:
        return self.apply(a)


@dataclass(frozen=True)
class MapValidationReport:
    ok: bool
    unitality_residual: float
    linearity_residual: float
    positivity_min_margin: float
    failures: tuple[str, ...]


def validate(phi: PosLinMap, trials: int = 100, seed: int = 0) -> MapValidationReport:
    """Check unitality, linearity, and positivity on random PSD inputs."""
    rng = np.random.default_rng(seed)
    failures: list[str] = []
    n = phi.n
    k = phi.output_dim

    try:
        unital = float(np.linalg.norm(phi.apply(np.eye(n)) - np.eye(k)))
    except InvalidIsometry as exc:
        return MapValidationReport(False, np.inf, np.inf, -np.inf, (f"invalid-isometry: {exc}",))
    if unital > 1e-12:
        failures.append(f"unitality residual {unital:.3e}")

    lin_worst = 0.0
    pos_worst = np.inf
    for _ in range(trials):
        g1 = rng.standard_normal((n, n))
        g2 = rng.standard_normal((n, n))
        s1 = symmetrize(g1 + g1.T)
        s2 = symmetrize(g2 + g2.T)
        alpha = float(rng.uniform(-2.0, 2.0))
        lhs = phi.apply(symmetrize(alpha * s1 + s2))
        rhs = alpha * phi.apply(s1) + phi.apply(s2)
        scale = max(1.0, float(np.linalg.norm(lhs)))
        lin_worst = max(lin_worst, float(np.linalg.norm(lhs - rhs)) / scale)

        psd = symmetrize(g1 @ g1.T)
        out = phi.apply(psd)
        lam_min = float(jacobi_eig(out).lam[0])
        pos_worst = min(pos_worst, lam_min / max(1.0, spectral_norm(psd)))

    if lin_worst > 1e-12:
        failures.append(f"linearity residual {lin_worst:.3e}")
    if pos_worst < -1e-10:
        failures.append(f"positivity margin {pos_worst:.3e}")
    return MapValidationReport(
        ok=not failures,
        unitality_residual=unital,
        linearity_residual=lin_worst,
        positivity_min_margin=float(pos_worst),
        failures=tuple(failures),
    )


def _random_partition(n: int, rng: np.random.Generator) -> list[tuple[int, ...]]:
    perm = [int(i) for i in rng.permutation(n)]
    nblocks = int(rng.integers(1, n + 1))
    cuts = sorted(rng.choice(np.arange(1, n), size=min(nblocks - 1, n - 1), replace=False).tolist()) if n > 1 and nblocks > 1 else []
    blocks, prev = [], 0
    for c in cuts + [n]:
        blocks.append(tuple(sorted(perm[prev:c])))
        prev = c
    return blocks


def resolve_descriptor(text: str, n: int, rng: np.random.Generator) -> PosLinMap:
    """Build a concrete map from a CLI descriptor, drawing random parts from rng."""
    head, _, arg = text.strip().partition(":")
    head = head.strip().lower()
    if head == "identity":
        return PosLinMap.identity(n)
    if head == "pinching":
        if arg:
            blocks = [
                tuple(int(i) - 1 for i in part.split(",") if i.strip())
                for part in arg.split("|")
            ]
            return PosLinMap.pinching(blocks, n, descriptor=text)
        return PosLinMap.pinching(_random_partition(n, rng), n, descriptor=text)
    if head == "compression":
        if arg:
            key, _, val = arg.partition("=")
            if key.strip() != "k":
                raise ValueError(f"unknown compression argument {arg!r}")
            k = int(val)
        else:
            k = int(rng.integers(1, n + 1))
        k = min(k, n)
        return PosLinMap.compression(random_isometry(n, k, rng), descriptor=text)
    if head == "mixture":
        if arg:
            key, _, val = arg.partition("=")
            if key.strip() != "j":
                raise ValueError(f"unknown mixture argument {arg!r}")
            j = int(val)
        else:
            j = 2
        if j < 1:
            raise ValueError("mixture needs at least one rotation")
        w = rng.uniform(0.1, 1.0, size=j)
        w /= w.sum()
        us = [random_orthogonal(n, rng) for _ in range(j)]
        return PosLinMap.mixture(w, us, descriptor=text)
    raise ValueError(f"unknown map descriptor {text!r}")
