"""
General O(n)-invariant metrics described by three spectral functions.

At ``Sigma = P diag(d) P^T`` and ``X' = P^T X P`` such a metric reads

    g(X, X) = sum_{i != j} A_ij X'_ij^2 + diag(X')^T S diag(X')

where ``A_ij = alpha(d_i, d_j, rest)``, ``S_ii = gamma(d_i, rest)`` and
``S_ij = beta(d_i, d_j, rest)``.  Any object exposing ``spectral_form(d)``
returning ``(A, S)`` can be fed to :func:`metric_eval`, :func:`cometric_eval`
and :func:`gram_matrix`; kernel, trace-extended and separable specs in
:mod:`spdgeo.kernel_family` follow the same protocol.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np
from scipy.linalg import polar

from .exceptions import DomainError, InvalidSpecError
from .symlin import (
    CLUSTER_RTOL,
    EigenDecomp,
    UnivariateFn,
    as_spd,
    divided_difference,
    eigh,
    sym,
    sym_basis,
)

#: condition number above which S(d) is considered numerically singular
COND_MAX = 1e14


def _reorder(d, first):
    # (d_first..., remaining entries in index order)
    rest = [k for k in range(len(d)) if k not in first]
    return np.concatenate([d[list(first)], d[rest]])


def invert_block(S):
    """Inverse of the diagonal-block matrix, exact when ``S`` is diagonal."""
    off = S - np.diag(np.diag(S))
    if not np.any(off):
        return np.diag(1.0 / np.diag(S))
    if np.linalg.cond(S) > COND_MAX:
        raise InvalidSpecError(
            f"S(d) is numerically singular (condition number {np.linalg.cond(S):.2e})"
        )
    Sinv = np.linalg.inv(S)
    return 0.5 * (Sinv + Sinv.T)


def cometric_form(metric, d):
    """Spectral form ``(1/A, S^{-1})`` of the dual metric at eigenvalues ``d``."""
    if hasattr(metric, "cometric_form"):
        return metric.cometric_form(d)
    A, S = metric.spectral_form(d)
    A = A.copy()
    np.fill_diagonal(A, 1.0)
    return 1.0 / A, invert_block(S)


def _decomp(S, eig):
    if eig is not None:
        return eig
    return eigh(as_spd(S))


def eval_form(A, S, Xp, Yp):
    """Bilinear form of the spectral data on eigenbasis coordinates."""
    n = Xp.shape[0]
    off = 1.0 - np.eye(n)
    return float(np.sum(off * A * Xp * Yp) + np.diag(Xp) @ S @ np.diag(Yp))


def metric_eval(metric, Sigma, X, Y, eig: EigenDecomp | None = None) -> float:
    """Inner product ``g_Sigma(X, Y)`` of a metric given by its spectral form."""
    P, d = _decomp(Sigma, eig)
    A, S = metric.spectral_form(d)
    return eval_form(A, S, P.T @ sym(X) @ P, P.T @ sym(Y) @ P)


def cometric_eval(metric, Sigma, w, w2, eig: EigenDecomp | None = None) -> float:
    """Dual inner product of covectors represented by symmetric matrices.

    A covector ``w`` acts as ``X -> tr(w X)``.
    """
    P, d = _decomp(Sigma, eig)
    A, S = cometric_form(metric, d)
    return eval_form(A, S, P.T @ sym(w) @ P, P.T @ sym(w2) @ P)


def _gram_from_form(A, S, P):
    n = P.shape[0]
    B = sym_basis(n)
    Bp = np.einsum("ki,akl,lj->aij", P, B, P)
    off = (1.0 - np.eye(n)) * A
    G = np.einsum("aij,ij,bij->ab", Bp, off, Bp)
    D = np.einsum("aii->ai", Bp)
    G += D @ S @ D.T
    return 0.5 * (G + G.T)


def gram_matrix(metric, Sigma, cometric: bool = False, eig: EigenDecomp | None = None):
    """Gram matrix of the metric (or cometric) in the basis :func:`sym_basis`."""
    P, d = _decomp(Sigma, eig)
    A, S = cometric_form(metric, d) if cometric else metric.spectral_form(d)
    return _gram_from_form(A, S, P)


def duality_defect(metric, Sigma) -> float:
    """``max |G G* - I|`` at ``Sigma``."""
    e = eigh(as_spd(Sigma))
    G = gram_matrix(metric, Sigma, eig=e)
    Gs = gram_matrix(metric, Sigma, cometric=True, eig=e)
    return float(np.max(np.abs(G @ Gs - np.eye(G.shape[0]))))


@dataclass(frozen=True)
class MetricTriple:
    """Spectral functions ``(alpha, beta, gamma)`` of an invariant metric.

    Each callable takes the full eigenvalue vector, reordered so that the
    distinguished entries come first: ``alpha(d_i, d_j, rest)``,
    ``beta(d_i, d_j, rest)`` and ``gamma(d_i, rest)`` with ``rest`` in index
    order.  The symmetry conditions are checked by :func:`validate_triple`,
    never assumed.
    """

    alpha: Callable[[np.ndarray], float]
    beta: Callable[[np.ndarray], float]
    gamma: Callable[[np.ndarray], float]
    n: int
    name: str = "triple"
    symmetry: str = "general"
    ortho_diagonal: bool = False

    def spectral_form(self, d):
        d = np.asarray(d, dtype=float)
        n = len(d)
        if n != self.n:
            raise ValueError(f"triple declared for n={self.n}, got {n} eigenvalues")
        A = np.zeros((n, n))
        S = np.zeros((n, n))
        for i in range(n):
            S[i, i] = self.gamma(_reorder(d, (i,)))
            for j in range(i + 1, n):
                dij = _reorder(d, (i, j))
                A[i, j] = A[j, i] = self.alpha(dij)
                if not self.ortho_diagonal:
                    S[i, j] = S[j, i] = self.beta(dij)
        return A, S

    def S_matrix(self, d):
        return self.spectral_form(d)[1]


def bivariate_triple(a, b, n, name="bivariate") -> MetricTriple:
    """Triple with ``alpha = a(d1, d2)``, ``beta = b(d1, d2)``, ``gamma = a + b`` on the diagonal."""
    return MetricTriple(
        lambda d: a(d[0], d[1]),
        lambda d: b(d[0], d[1]),
        lambda d: a(d[0], d[0]) + b(d[0], d[0]),
        n,
        name,
        "bivariate",
    )


def frobenius_triple(n) -> MetricTriple:
    return MetricTriple(
        lambda d: 1.0, lambda d: 0.0, lambda d: 1.0, n, "frobenius", "bivariate", True
    )


def affine_invariant_triple(n, alpha=1.0, beta=0.0) -> MetricTriple:
    """Triple of ``alpha tr((S^-1 X)^2) + beta tr(S^-1 X)^2``."""
    return MetricTriple(
        lambda d: alpha / (d[0] * d[1]),
        lambda d: beta / (d[0] * d[1]),
        lambda d: (alpha + beta) / d[0] ** 2,
        n,
        "affine_invariant",
        "bivariate",
        beta == 0,
    )


def dual_triple(t: MetricTriple) -> MetricTriple:
    """Triple of the cometric: ``1/alpha`` off the diagonal, ``S(d)^{-1}`` on it."""

    def _sinv(d):
        return invert_block(t.S_matrix(d))

    if t.ortho_diagonal:
        return MetricTriple(
            lambda d: 1.0 / t.alpha(d),
            lambda d: 0.0,
            lambda d: 1.0 / t.gamma(d),
            t.n,
            f"dual({t.name})",
            t.symmetry,
            True,
        )
    return MetricTriple(
        lambda d: 1.0 / t.alpha(d),
        lambda d: _sinv(d)[0, 1],
        lambda d: _sinv(d)[0, 0],
        t.n,
        f"dual({t.name})",
        t.symmetry,
    )


def spectral_triple(metric, n, name=None) -> MetricTriple:
    """Read a triple off any object with ``spectral_form``.

    Entries are taken at positions ``(0, 1)`` and ``(0, 0)`` of the reordered
    spectrum, so nothing about the metric's symmetry is presupposed.
    """

    def entry(which, i, j):
        return lambda d: float(metric.spectral_form(d)[which][i, j])

    return MetricTriple(
        entry(0, 0, 1), entry(1, 0, 1), entry(1, 0, 0), n, name or getattr(metric, "name", "metric")
    )


# validation ----------------------------------------------------------------

class ConditionResult(NamedTuple):
    name: str
    passed: bool
    worst_sample: np.ndarray | None
    magnitude: float

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        ws = "-" if self.worst_sample is None else np.array2string(
            np.asarray(self.worst_sample), precision=6, separator=","
        ).replace("\n", "")
        return f"{self.name} {status} worst={ws} magnitude={self.magnitude:.6e}"


@dataclass
class ValidationReport:
    """Per-condition outcome of a sampled check."""

    results: list = field(default_factory=list)

    @property
    def passed(self):
        return all(r.passed for r in self.results)

    def __getitem__(self, name):
        for r in self.results:
            if r.name == name:
                return r
        raise KeyError(name)

    def __str__(self):
        return "\n".join(r.line() for r in self.results)


def default_grid(n, seed=0, n_random=200):
    """Sample eigenvalue vectors covering the compatibility set.

    Tensor grid over ``{0.1, 0.5, 1, 2, 10}^n`` when ``n <= 4``, log-uniform
    random points, then copies with ``d2 = d1`` and with a repeated tail.
    """
    rng = np.random.default_rng(seed)
    levels = np.array([0.1, 0.5, 1.0, 2.0, 10.0])
    pts = []
    if n <= 4:
        mesh = np.meshgrid(*([levels] * n), indexing="ij")
        pts.append(np.stack([m.ravel() for m in mesh], axis=1))
    pts.append(np.exp(rng.uniform(np.log(0.05), np.log(20.0), size=(n_random, n))))
    base = np.vstack(pts)
    tied = base.copy()
    if n >= 2:
        tied[:, 1] = tied[:, 0]
    grid = [base, tied]
    if n >= 4:
        tail = base.copy()
        tail[:, 3:] = tail[:, [2]]
        grid.append(tail)
    return np.vstack(grid)


def _rel(a, b):
    return abs(a - b) / max(abs(a), abs(b), 1e-300)


def validate_triple(t: MetricTriple, grid=None, rtol=1e-9, sym_rtol=1e-10) -> ValidationReport:
    """Check compatibility, positivity and symmetry of a triple on sampled spectra."""
    grid = default_grid(t.n) if grid is None else np.atleast_2d(np.asarray(grid, float))
    n = t.n
    rng = np.random.default_rng(1)

    worst_c, mag_c, compat_ok = None, 0.0, True
    worst_p, mag_p = None, np.inf
    worst_s, mag_s = None, 0.0
    for d in grid:
        if n >= 2 and d[0] == d[1]:
            a, b, g = t.alpha(d), t.beta(d), t.gamma(d)
            dev = abs(g - (a + b))
            if dev > rtol * max(abs(g), abs(a) + abs(b)):
                compat_ok = False
            if dev > mag_c:
                worst_c, mag_c = d, dev
        A, S = t.spectral_form(d)
        lo = np.linalg.eigvalsh(S)[0]
        if n >= 2:
            lo = min(lo, np.min(A[~np.eye(n, dtype=bool)]))
        if lo < mag_p:
            worst_p, mag_p = d, lo
        if n >= 2:
            sw = d.copy()
            sw[[0, 1]] = sw[[1, 0]]
            tail2 = np.concatenate([d[:2], rng.permutation(d[2:])])
            tail1 = np.concatenate([d[:1], rng.permutation(d[1:])])
            devs = [
                _rel(t.alpha(d), t.alpha(sw)),
                _rel(t.beta(d), t.beta(sw)) if t.beta(d) or t.beta(sw) else 0.0,
                _rel(t.alpha(d), t.alpha(tail2)),
                _rel(t.beta(d), t.beta(tail2)) if t.beta(d) or t.beta(tail2) else 0.0,
                _rel(t.gamma(d), t.gamma(tail1)),
            ]
            dev = max(devs)
            if dev > mag_s:
                worst_s, mag_s = d, dev
    return ValidationReport(
        [
            ConditionResult("compatibility", compat_ok, worst_c, mag_c),
            ConditionResult("positivity", bool(mag_p > 0), worst_p, float(mag_p)),
            ConditionResult("symmetry", mag_s <= sym_rtol, worst_s, mag_s),
        ]
    )


def scaling_invariance_check(t: MetricTriple, samples=None, lambdas=(0.3, 2.0, 7.5), rtol=1e-9):
    """Max relative deviation from ``f(lambda d) = lambda^-2 f(d)`` for the three functions."""
    samples = default_grid(t.n, n_random=50) if samples is None else np.atleast_2d(samples)
    worst, mag = None, 0.0
    for d in samples:
        for lam in lambdas:
            for f in (t.alpha, t.beta, t.gamma):
                dev = _rel(f(lam * d), f(d) / lam**2) if (f(d) or f(lam * d)) else 0.0
                if dev > mag:
                    worst, mag = d, dev
    return ValidationReport([ConditionResult("scaling", mag <= rtol, worst, mag)])


def inversion_invariance_check(t: MetricTriple, samples=None, rtol=1e-9):
    """Max relative deviation from the inversion identities.

    ``gamma(1/d) = d1^4 gamma(d)`` and ``f(1/d) = d1^2 d2^2 f(d)`` for ``f`` in
    ``(alpha, beta)``.
    """
    samples = default_grid(t.n, n_random=50) if samples is None else np.atleast_2d(samples)
    worst, mag = None, 0.0
    for d in samples:
        di = 1.0 / d
        checks = [(t.gamma(di), d[0] ** 4 * t.gamma(d))]
        if t.n >= 2:
            w = d[0] ** 2 * d[1] ** 2
            checks += [(t.alpha(di), w * t.alpha(d)), (t.beta(di), w * t.beta(d))]
        for lhs, rhs in checks:
            dev = _rel(lhs, rhs) if (lhs or rhs) else 0.0
            if dev > mag:
                worst, mag = d, dev
    return ValidationReport([ConditionResult("inversion", mag <= rtol, worst, mag)])


# pullback -----------------------------------------------------------------

_PROBE = np.exp(np.linspace(np.log(1e-3), np.log(1e3), 61))


def check_diffeomorphism(f: UnivariateFn, probe=_PROBE):
    """Reject ``f`` if its derivative vanishes or changes sign on a probe grid."""
    with np.errstate(over="ignore"):
        df = np.asarray(f.df(probe), dtype=float)
        vals = np.asarray(f.f(probe), dtype=float)
    if np.any(df == 0) or not (np.all(df > 0) or np.all(df < 0)):
        raise DomainError(f"{f.name}: derivative vanishes or changes sign on (0, inf)")
    if np.any(vals <= 0):
        raise DomainError(f"{f.name}: does not map (0, inf) into itself")


def pullback_triple(t: MetricTriple, f: UnivariateFn) -> MetricTriple:
    """Triple of the pullback metric ``f^* g`` by a univariate diffeomorphism.

    The differential of ``f`` scales ``X'_ij`` by ``f^[1](d_i, d_j)``, so
    ``alpha_f(d) = alpha(f(d)) f^[1](d1, d2)^2``,
    ``beta_f(d) = beta(f(d)) f'(d1) f'(d2)`` and
    ``gamma_f(d) = gamma(f(d)) f'(d1)^2``.
    """
    check_diffeomorphism(f)

    def fd(d):
        return np.asarray(f.f(np.asarray(d, float)), dtype=float)

    def df(x):
        return float(f.df(np.asarray(x, float)))

    return MetricTriple(
        lambda d: t.alpha(fd(d)) * divided_difference(f, d[0], d[1]) ** 2,
        lambda d: t.beta(fd(d)) * df(d[0]) * df(d[1]),
        lambda d: t.gamma(fd(d)) * df(d[0]) ** 2,
        t.n,
        f"{f.name}*{t.name}",
        t.symmetry,
        t.ortho_diagonal,
    )


# eigen continuity ---------------------------------------------------------

class ContinuityBounds(NamedTuple):
    dist_eigs: float
    dist_mats: float
    eigvec_lhs: float
    eigvec_rhs: float
    P: np.ndarray | None
    eig_ok: bool
    vec_ok: bool | None
    notice: str


def eig_continuity_bounds(Sigma, Lam, Q=None, spacing_rtol=1e-6) -> ContinuityBounds:
    """Eigenvalue and eigenvector perturbation bounds between two PSD matrices.

    Checks ``||D - Delta|| <= ||Sigma - Lam||`` for sorted spectra and, given
    a diagonaliser ``Q`` of ``Lam`` (default: :func:`eigh`), builds an
    eigenbasis ``P`` of ``Sigma`` aligned with ``Q``: the block-diagonal part
    ``W`` of ``P0^T Q`` is polar-decomposed as ``W = S R`` and ``P = P0 R``.
    Then ``||P - Q||^2 <= 4 sqrt(n/m) ||Sigma - Lam||`` with ``m`` the smallest
    squared gap of distinct eigenvalues of ``Sigma``.  The second bound is
    skipped (``vec_ok = None``) when the relative spacing is below
    ``spacing_rtol``.
    """
    Sigma, Lam = sym(Sigma), sym(Lam)
    n = Sigma.shape[0]
    P0, d = eigh(Sigma)
    if Q is None:
        Q, delta = eigh(Lam)
    else:
        Q = np.asarray(Q, float)
        delta = np.diag(Q.T @ Lam @ Q)
        if np.any(np.diff(delta) < 0):
            raise ValueError("Q must order the eigenvalues of Lam ascending")
    dist_eigs = float(np.linalg.norm(d - delta))
    dist_mats = float(np.linalg.norm(Sigma - Lam))
    eig_ok = dist_eigs <= dist_mats * (1 + 1e-12) + 1e-14 * max(1.0, np.abs(d).max())

    scale = max(np.abs(d).max(), 1e-300)
    gaps = np.diff(d)
    if n > 1 and np.min(gaps) <= spacing_rtol * scale:
        return ContinuityBounds(
            dist_eigs, dist_mats, np.nan, np.nan, None, eig_ok, None,
            "eigenvector bound skipped: eigenvalue spacing below "
            f"{spacing_rtol:g} relative",
        )
    # exact clusters (numerically repeated) form blocks of the recipe
    U = P0.T @ Q
    blocks, start = [], 0
    for i in range(1, n + 1):
        if i == n or gaps[i - 1] > CLUSTER_RTOL * scale:
            blocks.append(slice(start, i))
            start = i
    R = np.zeros((n, n))
    for b in blocks:
        u, _ = polar(U[b, b], side="left")
        R[b, b] = u
    P = P0 @ R
    m = float(np.min(gaps) ** 2) if n > 1 else np.inf
    lhs = float(np.linalg.norm(P - Q) ** 2)
    rhs = float(4.0 * np.sqrt(n / m) * dist_mats) if n > 1 else np.inf
    vec_ok = lhs <= rhs * (1 + 1e-12) + 1e-13
    return ContinuityBounds(dist_eigs, dist_mats, lhs, rhs, P, eig_ok, vec_ok, "")
