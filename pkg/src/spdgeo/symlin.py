"""
Symmetric matrix calculus
~~~~~~~~~~~~~~~~~~~~~~~~~

Spectral decomposition with a deterministic basis, univariate matrix maps
``f(P D P^T) = P f(D) P^T``, their differentials through first divided
differences, the Sylvester lift and the square root of a product of SPD
matrices.

Every matrix function goes through :func:`eigh`; no Pade approximants.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .exceptions import (
    ConvergenceError,
    DomainError,
    NotSPDError,
    NotSymmetricError,
)

#: relative spacing below which the divided difference uses the derivative
DD_EPS = 1e-7
#: SPD guard: smallest eigenvalue must exceed this fraction of the largest
SPD_RTOL = 1e-12
#: relative eigenvalue gap under which eigenvectors are canonicalised together
CLUSTER_RTOL = 1e-10


class EigenDecomp(NamedTuple):
    """Orthogonal factor ``P`` and ascending eigenvalues ``d``."""

    P: np.ndarray
    d: np.ndarray

    def rebuild(self):
        return (self.P * self.d) @ self.P.T


def sym(A):
    """Return ``(A + A^T) / 2`` after checking that ``A`` is square and finite."""
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise NotSymmetricError(f"expected a square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise NotSymmetricError("matrix has non-finite entries")
    return 0.5 * (A + A.T)


def is_spd(A, rtol=SPD_RTOL):
    try:
        as_spd(A, rtol)
    except (NotSPDError, NotSymmetricError):
        return False
    return True


def as_spd(A, rtol=SPD_RTOL):
    """Symmetrize ``A`` and reject it unless ``lambda_min > rtol * lambda_max``."""
    S = sym(A)
    d = np.linalg.eigvalsh(S)
    if d[-1] <= 0 or d[0] <= rtol * d[-1]:
        raise NotSPDError(
            f"matrix is not positive definite (eigenvalues in [{d[0]:.3e}, {d[-1]:.3e}])"
        )
    return S


def _canonical_block(V):
    # Deterministic orthonormal basis of span(V): Gram-Schmidt on the columns
    # of the (basis independent) projector V V^T, scanned in index order.
    n, m = V.shape
    proj = V @ V.T
    thresh = 0.1 / np.sqrt(n)
    basis = []
    for k in range(n):
        w = proj[:, k].copy()
        for _ in range(2):
            for b in basis:
                w -= (b @ w) * b
        nrm = np.linalg.norm(w)
        if nrm > thresh:
            basis.append(w / nrm)
            if len(basis) == m:
                break
    while len(basis) < m:
        # pivoted fallback, only reached for adversarial subspaces
        R = proj.copy()
        for b in basis:
            R -= np.outer(b, b @ R)
        k = int(np.argmax(np.linalg.norm(R, axis=0)))
        w = R[:, k]
        basis.append(w / np.linalg.norm(w))
    return np.column_stack(basis)


def eigh(S) -> EigenDecomp:
    """Spectral decomposition ``S = P diag(d) P^T`` with ascending ``d``.

    Eigenvectors of (numerically) repeated eigenvalues are replaced by a basis
    obtained by orthonormalising the projected coordinate axes in index order,
    and every column is signed so that its first nonzero entry is positive.
    The output is therefore a function of ``S`` alone, not of LAPACK's choice
    inside eigenspaces.

    Raises
    ------
    ConvergenceError
        If LAPACK fails to converge.
    """
    S = sym(S)
    n = S.shape[0]
    try:
        d, P = np.linalg.eigh(S)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceError(
            f"symmetric eigensolver did not converge on a {n}x{n} matrix "
            f"(LAPACK syevd, iteration limit 30*n={30 * n}): {exc}"
        ) from exc
    scale = max(abs(d[0]), abs(d[-1]), np.finfo(float).tiny)
    gaps = np.diff(d) <= CLUSTER_RTOL * scale
    if gaps.any():
        start = 0
        for i in range(1, n + 1):
            if i == n or not gaps[i - 1]:
                if i - start > 1:
                    P[:, start:i] = _canonical_block(P[:, start:i])
                start = i
    tol = np.sqrt(np.finfo(float).eps)
    for j in range(n):
        col = P[:, j]
        k = int(np.argmax(np.abs(col) > tol))
        if col[k] < 0:
            P[:, j] = -col
    return EigenDecomp(P, d)


def _eig(S, eig):
    return eigh(S) if eig is None else eig


@dataclass(frozen=True)
class UnivariateFn:
    """Scalar map on ``(0, inf)`` (or the real line) and its derivative.

    ``f`` and ``df`` must accept numpy arrays.  ``domain`` is ``"positive"``
    or ``"real"``; ``inverse`` is optional and only used for documentation
    and round-trip helpers.
    """

    f: Callable[[np.ndarray], np.ndarray]
    df: Callable[[np.ndarray], np.ndarray]
    name: str = "f"
    domain: str = "positive"
    inverse: "UnivariateFn | None" = None

    def __call__(self, x):
        return self.f(x)

    def check_domain(self, d):
        if self.domain == "positive" and np.min(d) <= 0:
            raise DomainError(
                f"{self.name}: eigenvalue {np.min(d):.3e} outside (0, inf)"
            )


def pow_fn(p: float) -> UnivariateFn:
    """Power map ``x -> x**p``."""
    p = float(p)
    if p == 0:
        return UnivariateFn(np.ones_like, np.zeros_like, "pow_0")
    return UnivariateFn(
        lambda x: np.power(x, p),
        lambda x: p * np.power(x, p - 1.0),
        f"pow_{p:g}",
    )


IDENTITY = UnivariateFn(lambda x: np.array(x, dtype=float), np.ones_like, "id", "real")
LOG = UnivariateFn(np.log, lambda x: 1.0 / x, "log")
EXP = UnivariateFn(np.exp, np.exp, "exp", "real")
SQRT = UnivariateFn(np.sqrt, lambda x: 0.5 / np.sqrt(x), "sqrt")
POW2 = pow_fn(2)
INV = pow_fn(-1)
#: ``x -> exp(x) - 1``, a diffeomorphism of (0, inf)
EXPM1 = UnivariateFn(np.expm1, np.exp, "expm1")


def compose(f: UnivariateFn, h: UnivariateFn) -> UnivariateFn:
    """Return ``f o h`` with the chain-rule derivative."""
    return UnivariateFn(
        lambda x: f.f(h.f(x)),
        lambda x: f.df(h.f(x)) * h.df(x),
        f"{f.name}o{h.name}",
        h.domain,
    )


def divided_difference(f: UnivariateFn, x, y):
    """First divided difference ``f^[1](x, y)``.

    ``(f(x) - f(y)) / (x - y)`` when the points are separated by more than
    ``DD_EPS`` relative to ``max(|x|, |y|)``, otherwise ``f'`` at the midpoint.
    Exactly symmetric in ``(x, y)``.  Broadcasts over arrays.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if f.domain == "positive" and (np.any(x <= 0) or np.any(y <= 0)):
        raise DomainError(f"{f.name}: divided difference needs positive arguments")
    lo = np.minimum(x, y)
    hi = np.maximum(x, y)
    close = (hi - lo) <= DD_EPS * np.maximum(np.abs(hi), np.abs(lo))
    diff = np.where(close, 1.0, hi - lo)
    quot = (f.f(hi) - f.f(lo)) / diff
    out = np.where(close, f.df(0.5 * (lo + hi)), quot)
    return out if out.ndim else float(out)


def divided_difference_matrix(f: UnivariateFn, d):
    """Matrix ``[f^[1](d_i, d_j)]_{ij}``."""
    d = np.asarray(d, dtype=float)
    return divided_difference(f, d[:, None], d[None, :])


def univariate_apply(f: UnivariateFn, S, eig: EigenDecomp | None = None):
    """Apply ``f`` spectrally: ``P diag(f(d)) P^T``."""
    P, d = _eig(S, eig)
    f.check_domain(d)
    return sym((P * f.f(d)) @ P.T)


def univariate_diff(f: UnivariateFn, S, X, eig: EigenDecomp | None = None):
    """Differential of the univariate map ``f`` at ``S`` in direction ``X``.

    In the eigenbasis of ``S = P D P^T`` the differential multiplies the
    entries of ``X' = P^T X P`` by ``f^[1](d_i, d_j)`` (Daleckii-Krein).
    """
    P, d = _eig(S, eig)
    f.check_domain(d)
    Xp = P.T @ sym(X) @ P
    return sym(P @ (divided_difference_matrix(f, d) * Xp) @ P.T)


def univariate_diff_inverse(f: UnivariateFn, S, Y, eig: EigenDecomp | None = None):
    """Inverse of :func:`univariate_diff` (requires ``f^[1] != 0``)."""
    P, d = _eig(S, eig)
    f.check_domain(d)
    F1 = divided_difference_matrix(f, d)
    if np.any(F1 == 0):
        raise DomainError(f"{f.name}: differential is singular at this point")
    Yp = P.T @ sym(Y) @ P
    return sym(P @ (Yp / F1) @ P.T)


def sylvester_lift(S, X, eig: EigenDecomp | None = None):
    """Unique symmetric ``X0`` with ``S X0 + X0 S = X``."""
    P, d = _eig(S, eig)
    Xp = P.T @ sym(X) @ P
    return sym(P @ (Xp / (d[:, None] + d[None, :])) @ P.T)


def sqrtm_spd(S, eig: EigenDecomp | None = None):
    return univariate_apply(SQRT, S, eig)


def invsqrtm_spd(S, eig: EigenDecomp | None = None):
    return univariate_apply(pow_fn(-0.5), S, eig)


def logm_spd(S, eig: EigenDecomp | None = None):
    return univariate_apply(LOG, S, eig)


def expm_sym(X, eig: EigenDecomp | None = None):
    return univariate_apply(EXP, X, eig)


def inv_spd(S, eig: EigenDecomp | None = None):
    return univariate_apply(INV, S, eig)


def sqrt_product(S, L):
    """Square root of ``S L`` with positive eigenvalues.

    ``(S L)^{1/2} = S^{1/2} (S^{1/2} L S^{1/2})^{1/2} S^{-1/2}``; the result is
    not symmetric in general.
    """
    e = eigh(as_spd(S))
    L = as_spd(L)
    s_half = sqrtm_spd(S, e)
    s_ihalf = invsqrtm_spd(S, e)
    mid = sqrtm_spd(s_half @ L @ s_half)
    return s_half @ mid @ s_ihalf


def sym_basis(n: int) -> np.ndarray:
    """Frobenius-orthonormal basis of ``Sym(n)`` as an array of shape ``(m, n, n)``.

    Diagonal units ``E_ii`` come first, then ``(C_ij + C_ji)/sqrt(2)`` for
    ``i < j`` in row-major order; ``m = n(n+1)/2``.
    """
    mats = []
    for i in range(n):
        E = np.zeros((n, n))
        E[i, i] = 1.0
        mats.append(E)
    r = 1.0 / np.sqrt(2.0)
    for i in range(n):
        for j in range(i + 1, n):
            E = np.zeros((n, n))
            E[i, j] = E[j, i] = r
            mats.append(E)
    return np.array(mats)


def sym_to_vec(X) -> np.ndarray:
    """Coordinates of ``X`` in :func:`sym_basis` (an isometry onto R^m)."""
    X = sym(X)
    n = X.shape[0]
    iu = np.triu_indices(n, 1)
    return np.concatenate([np.diag(X), np.sqrt(2.0) * X[iu]])


def vec_to_sym(v) -> np.ndarray:
    """Inverse of :func:`sym_to_vec`."""
    v = np.asarray(v, dtype=float)
    m = v.shape[0]
    n = int(round((np.sqrt(8 * m + 1) - 1) / 2))
    if n * (n + 1) // 2 != m:
        raise ValueError(f"{m} is not a triangular number")
    X = np.diag(v[:n])
    iu = np.triu_indices(n, 1)
    X[iu] = v[n:] / np.sqrt(2.0)
    X[(iu[1], iu[0])] = v[n:] / np.sqrt(2.0)
    return X
