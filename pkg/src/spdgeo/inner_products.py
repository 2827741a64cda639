"""
Rotation invariant inner products on symmetric matrices.

The O(n)-invariant family ``alpha tr(XY) + beta tr(X) tr(Y)``, the linear
isometry onto the Frobenius inner product, and two weaker families that are
only invariant under sign flips (``dpm``) or signed permutations (``spm``).
The latter two serve mainly as building blocks and test oracles.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import InvalidSpecError
from .symlin import sym


@dataclass(frozen=True)
class STParams:
    """Coefficients ``(alpha, beta)`` of an invariant inner product in dimension ``n``.

    Valid iff ``min(alpha, alpha + n beta) > 0`` (strict).
    """

    alpha: float
    beta: float
    n: int

    def __post_init__(self):
        if self.n < 1:
            raise InvalidSpecError(f"dimension must be positive, got {self.n}")
        if not (self.alpha > 0 and self.alpha + self.n * self.beta > 0):
            raise InvalidSpecError(
                f"(alpha, beta) = ({self.alpha}, {self.beta}) violates "
                f"min(alpha, alpha + n*beta) > 0 for n = {self.n}"
            )

    @property
    def p(self):
        return float(np.sqrt(self.alpha + self.n * self.beta))

    @property
    def q(self):
        return float(np.sqrt(self.alpha))


def _check_dims(n, *mats):
    for M in mats:
        if M.shape != (n, n):
            raise ValueError(f"expected {n}x{n} matrices, got {M.shape}")


def onp_inner(p: STParams, X, Y) -> float:
    """``alpha tr(XY) + beta tr(X) tr(Y)``."""
    X, Y = sym(X), sym(Y)
    _check_dims(p.n, X, Y)
    return float(p.alpha * np.sum(X * Y) + p.beta * np.trace(X) * np.trace(Y))


def fpq_map(p: STParams, X):
    """Isometry ``F(X) = q X + (p - q)/n tr(X) I`` onto the Frobenius inner product."""
    X = sym(X)
    _check_dims(p.n, X)
    return p.q * X + (p.p - p.q) / p.n * np.trace(X) * np.eye(p.n)


def fpq_inverse(p: STParams, Y):
    """Inverse of :func:`fpq_map`."""
    Y = sym(Y)
    _check_dims(p.n, Y)
    return Y / p.q + (1.0 / p.p - 1.0 / p.q) / p.n * np.trace(Y) * np.eye(p.n)


@dataclass(frozen=True)
class DpmInnerSpec:
    """Sign-flip invariant inner product.

    ``alpha_ij`` holds the positive weights of the off-diagonal products (the
    diagonal of the array is ignored); ``S`` is the SPD matrix coupling the
    diagonal entries.
    """

    alpha_ij: np.ndarray
    S: np.ndarray

    def __post_init__(self):
        A = np.asarray(self.alpha_ij, dtype=float)
        S = np.asarray(self.S, dtype=float)
        n = S.shape[0]
        if A.shape != (n, n) or S.shape != (n, n):
            raise InvalidSpecError("alpha_ij and S must be n x n")
        if not np.array_equal(A, A.T) or not np.array_equal(S, S.T):
            raise InvalidSpecError("alpha_ij and S must be symmetric")
        off = ~np.eye(n, dtype=bool)
        if np.any(A[off] <= 0):
            raise InvalidSpecError("off-diagonal weights must be positive")
        if np.linalg.eigvalsh(S)[0] <= 0:
            raise InvalidSpecError("S must be positive definite")
        object.__setattr__(self, "alpha_ij", A)
        object.__setattr__(self, "S", S)


def dpm_inner(spec: DpmInnerSpec, X, Y) -> float:
    """``sum_{i != j} a_ij X_ij Y_ij + sum_{i,j} S_ij X_ii Y_jj``."""
    X, Y = sym(X), sym(Y)
    n = spec.S.shape[0]
    _check_dims(n, X, Y)
    A = spec.alpha_ij * (1.0 - np.eye(n))
    return float(np.sum(A * X * Y) + np.diag(X) @ spec.S @ np.diag(Y))


@dataclass(frozen=True)
class SpmInnerSpec:
    """Signed-permutation invariant inner product with scalars ``alpha, beta, gamma``."""

    alpha: float
    beta: float
    gamma: float
    n: int

    def __post_init__(self):
        if not (
            self.alpha > 0
            and self.gamma > self.beta
            and self.gamma + (self.n - 1) * self.beta > 0
        ):
            raise InvalidSpecError(
                f"spm spec (alpha={self.alpha}, beta={self.beta}, gamma={self.gamma}) "
                f"needs alpha > 0, gamma > beta, gamma + (n-1) beta > 0"
            )

    def as_dpm(self) -> DpmInnerSpec:
        n = self.n
        S = self.beta * np.ones((n, n)) + (self.gamma - self.beta) * np.eye(n)
        return DpmInnerSpec(self.alpha * np.ones((n, n)), S)


def spm_inner(spec: SpmInnerSpec, X, Y) -> float:
    """``gamma sum X_ii Y_ii + alpha sum_{i!=j} X_ij Y_ij + beta sum_{i!=j} X_ii Y_jj``."""
    return dpm_inner(spec.as_dpm(), X, Y)
