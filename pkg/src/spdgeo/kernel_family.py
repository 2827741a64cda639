"""
Kernel metrics and their extensions.

A kernel ``phi`` defines ``g(X, X) = sum_ij X'_ij^2 / phi(d_i, d_j)``.  The
module adds the scaled trace-term extension (:class:`BostSpec`), mean kernels
``a m^theta``, pullbacks, convex combinations, cometrics, a completeness
witness along the ray ``s I``, and bivariate separable metrics whose dual is
available in closed form.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np
from scipy.integrate import quad

from .exceptions import InvalidSpecError
from .invariant_metrics import (
    ConditionResult,
    MetricTriple,
    ValidationReport,
    check_diffeomorphism,
    default_grid,
    metric_eval,
)
from .symlin import LOG, EigenDecomp, UnivariateFn, as_spd, divided_difference, eigh, sym

Bivariate = Callable[[np.ndarray, np.ndarray], np.ndarray]


def _pair(d):
    d = np.asarray(d, dtype=float)
    return d[:, None], d[None, :]


@dataclass(frozen=True)
class KernelSpec:
    """Symmetric positive kernel ``phi(x, y)``; must broadcast over arrays."""

    phi: Bivariate
    name: str = "kernel"

    def __call__(self, x, y):
        return self.phi(np.asarray(x, float), np.asarray(y, float))

    def matrix(self, d):
        x, y = _pair(d)
        return np.broadcast_to(self.phi(x, y), (len(d), len(d))).astype(float)

    def spectral_form(self, d):
        Phi = self.matrix(d)
        return 1.0 / Phi, np.diag(1.0 / np.diag(Phi))

    def cometric_form(self, d):
        Phi = self.matrix(d)
        return Phi, np.diag(np.diag(Phi))

    def as_triple(self, n) -> MetricTriple:
        return MetricTriple(
            lambda d: 1.0 / float(self.phi(d[0], d[1])),
            lambda d: 0.0,
            lambda d: 1.0 / float(self.phi(d[0], d[0])),
            n,
            self.name,
            "bivariate",
            True,
        )


def validate_kernel(k: KernelSpec, n_samples=1000, seed=0) -> ValidationReport:
    """Sampled symmetry and positivity of a kernel."""
    rng = np.random.default_rng(seed)
    x, y = np.exp(rng.uniform(-4, 4, size=(2, n_samples)))
    a, b = k(x, y), k(y, x)
    asym = np.abs(a - b) / np.maximum(np.abs(a), 1e-300)
    i = int(np.argmax(asym))
    j = int(np.argmin(a))
    return ValidationReport(
        [
            ConditionResult("symmetry", bool(asym[i] <= 1e-12), np.array([x[i], y[i]]), float(asym[i])),
            ConditionResult("positivity", bool(a[j] > 0), np.array([x[j], y[j]]), float(a[j])),
        ]
    )


# means ---------------------------------------------------------------------

def arithmetic_mean(x, y):
    return 0.5 * (x + y)


def geometric_mean(x, y):
    return np.sqrt(x * y)


def harmonic_mean(x, y):
    return 2.0 * x * y / (x + y)


def logarithmic_mean(x, y):
    """``(x - y)/(log x - log y)``, equal to ``x`` on the diagonal."""
    return 1.0 / divided_difference(LOG, x, y)


MEANS = {
    "arithmetic": arithmetic_mean,
    "geometric": geometric_mean,
    "harmonic": harmonic_mean,
    "logarithmic": logarithmic_mean,
}


@dataclass(frozen=True)
class MeanKernelSpec:
    """Kernel ``a * m(x, y)**theta`` built on a symmetric homogeneous mean."""

    m: Bivariate
    theta: float
    a: float = 1.0
    name: str = "mean_kernel"

    def __post_init__(self):
        if not self.a > 0:
            raise InvalidSpecError(f"mean kernel coefficient must be positive, got {self.a}")

    def kernel(self) -> KernelSpec:
        m, th, a = self.m, self.theta, self.a
        return KernelSpec(lambda x, y: a * np.power(m(x, y), th), self.name)


def validate_mean(m: Bivariate, n_samples=1000, seed=0, rtol=1e-12) -> ValidationReport:
    """Sampled mean axioms: symmetry, homogeneity, betweenness, monotonicity."""
    rng = np.random.default_rng(seed)
    x, y = np.exp(rng.uniform(-4, 4, size=(2, n_samples)))
    lam = np.exp(rng.uniform(-3, 3, n_samples))
    mxy = m(x, y)

    def res(name, dev, tol):
        i = int(np.argmax(dev))
        return ConditionResult(name, bool(dev[i] <= tol), np.array([x[i], y[i]]), float(dev[i]))

    sym_dev = np.abs(mxy - m(y, x)) / mxy
    hom_dev = np.abs(m(lam * x, lam * y) - lam * mxy) / (lam * mxy)
    lo, hi = np.minimum(x, y), np.maximum(x, y)
    btw_dev = np.maximum(lo - mxy, mxy - hi).clip(min=0) / hi
    eps = 1e-3
    mono_dev = np.maximum(mxy - m(x * (1 + eps), y), mxy - m(x, y * (1 + eps))).clip(min=0) / mxy
    return ValidationReport(
        [
            res("symmetry", sym_dev, rtol),
            res("homogeneity", hom_dev, 1e-10),
            res("betweenness", btw_dev, rtol),
            res("monotonicity", mono_dev, rtol),
        ]
    )


# builtins ------------------------------------------------------------------

def _log_mean_sq(x, y):
    return logarithmic_mean(x, y) ** 2


_BUILTINS = {
    "euclidean": (lambda x, y: np.ones(np.broadcast(x, y).shape), "arithmetic", 0.0, 1.0),
    "log_euclidean": (_log_mean_sq, "logarithmic", 2.0, 1.0),
    "affine_invariant": (lambda x, y: x * y, "geometric", 2.0, 1.0),
    "polar_affine": (lambda x, y: harmonic_mean(x, y) ** 2, "harmonic", 2.0, 1.0),
    "bures_wasserstein": (lambda x, y: 2.0 * (x + y), "arithmetic", 1.0, 4.0),
    "bkm": (logarithmic_mean, "logarithmic", 1.0, 1.0),
}

ALIASES = {
    "e": "euclidean",
    "le": "log_euclidean",
    "ai": "affine_invariant",
    "pa": "polar_affine",
    "bw": "bures_wasserstein",
}


def _canonical(name):
    key = name.lower().replace("-", "_")
    key = ALIASES.get(key, key)
    if key not in _BUILTINS:
        raise InvalidSpecError(
            f"unknown kernel {name!r}; expected one of {sorted(_BUILTINS)}"
        )
    return key


def builtin_kernel(name: str) -> KernelSpec:
    """Kernel of a named classical metric.

    ``euclidean`` 1, ``log_euclidean`` squared log-mean, ``affine_invariant``
    ``xy``, ``polar_affine`` squared harmonic mean, ``bures_wasserstein``
    ``2(x + y)``, ``bkm`` log-mean.
    """
    key = _canonical(name)
    return KernelSpec(_BUILTINS[key][0], key)


def builtin_mean_kernel(name: str) -> MeanKernelSpec:
    """The same kernels written as ``a m^theta``."""
    key = _canonical(name)
    _, mean, theta, a = _BUILTINS[key]
    return MeanKernelSpec(MEANS[mean], theta, a, key)


# evaluation ------------------------------------------------------------------

def _dec(Sigma, eig):
    return eig if eig is not None else eigh(as_spd(Sigma))


def bod_eval(k: KernelSpec, Sigma, X, Y, eig: EigenDecomp | None = None) -> float:
    """``sum_ij X'_ij Y'_ij / phi(d_i, d_j)``."""
    P, d = _dec(Sigma, eig)
    Xp, Yp = P.T @ sym(X) @ P, P.T @ sym(Y) @ P
    return float(np.sum(Xp * Yp / k.matrix(d)))


def psi_apply(k: KernelSpec, Sigma, X, eig: EigenDecomp | None = None):
    """Equivariant map with ``[Psi_D(X)]_ij = phi(d_i, d_j)^{-1/2} X_ij``."""
    P, d = _dec(Sigma, eig)
    Xp = P.T @ sym(X) @ P
    return sym(P @ (Xp / np.sqrt(k.matrix(d))) @ P.T)


@dataclass(frozen=True)
class BostSpec:
    """Kernel metric with scaling and trace term: ``alpha tr(Psi^2) + beta tr(Psi)^2``."""

    kernel: KernelSpec
    alpha: float
    beta: float
    n: int

    def __post_init__(self):
        if not (self.alpha > 0 and self.alpha + self.n * self.beta > 0):
            raise InvalidSpecError(
                f"(alpha, beta) = ({self.alpha}, {self.beta}) outside "
                f"min(alpha, alpha + n beta) > 0 for n = {self.n}"
            )

    def spectral_form(self, d):
        Phi = self.kernel.matrix(d)
        u = 1.0 / np.sqrt(np.diag(Phi))
        return self.alpha / Phi, self.alpha * np.diag(u**2) + self.beta * np.outer(u, u)

    def cometric_form(self, d):
        return bost_cometric(self).spectral_form(d)


def bost_eval(b: BostSpec, Sigma, X, Y, eig: EigenDecomp | None = None) -> float:
    """``alpha tr(Psi(X) Psi(Y)) + beta tr(Psi(X)) tr(Psi(Y))``."""
    e = _dec(Sigma, eig)
    PX = psi_apply(b.kernel, Sigma, X, e)
    PY = psi_apply(b.kernel, Sigma, Y, e)
    return float(b.alpha * np.sum(PX * PY) + b.beta * np.trace(PX) * np.trace(PY))


def bod_cometric(k: KernelSpec) -> KernelSpec:
    """Dual kernel ``1/phi``."""
    phi = k.phi
    return KernelSpec(lambda x, y: 1.0 / phi(x, y), f"dual({k.name})")


def bost_cometric(b: BostSpec) -> BostSpec:
    """Dual spec ``(1/phi, 1/alpha, -beta/(alpha (alpha + n beta)))``."""
    a, be, n = b.alpha, b.beta, b.n
    return BostSpec(bod_cometric(b.kernel), 1.0 / a, -be / (a * (a + n * be)), n)


def pullback_kernel(k: KernelSpec, f: UnivariateFn) -> KernelSpec:
    """Kernel of ``f^* g``: ``phi(f(x), f(y)) / f^[1](x, y)^2``."""
    check_diffeomorphism(f)
    phi = k.phi
    return KernelSpec(
        lambda x, y: phi(f.f(x), f.f(y)) / divided_difference(f, x, y) ** 2,
        f"{f.name}*{k.name}",
    )


def pullback_bost(b: BostSpec, f: UnivariateFn) -> BostSpec:
    return BostSpec(pullback_kernel(b.kernel, f), b.alpha, b.beta, b.n)


def convex_combine(k1: KernelSpec, k2: KernelSpec, t: float) -> KernelSpec:
    """Kernel of ``(1 - t) g1 + t g2``: ``phi1 phi2 / ((1 - t) phi2 + t phi1)``."""
    if not 0.0 <= t <= 1.0:
        raise InvalidSpecError(f"combination weight must lie in [0, 1], got {t}")
    p1, p2 = k1.phi, k2.phi

    def phi(x, y):
        a, b = p1(x, y), p2(x, y)
        return a * b / ((1.0 - t) * b + t * a)

    return KernelSpec(phi, f"{1 - t:g}*{k1.name}+{t:g}*{k2.name}")


# completeness ----------------------------------------------------------------

def ray_length(metric, n, lo, hi):
    """Riemannian length of ``s -> s I`` for ``s`` in ``[lo, hi]``.

    Integrates ``sqrt(g_{sI}(I, I))`` in the variable ``log s``.
    """
    I = np.eye(n)
    d0 = np.ones(n)
    P = np.eye(n)

    def integrand(u):
        s = np.exp(u)
        return np.sqrt(metric_eval(metric, s * I, I, I, eig=EigenDecomp(P, s * d0))) * s

    val, _ = quad(integrand, np.log(lo), np.log(hi), limit=400)
    return float(val)


class CompletenessVerdict(NamedTuple):
    complete: bool
    theta: float
    length_to_zero: tuple
    length_to_infinity: tuple
    witness_complete: bool


def completeness_power(mk: MeanKernelSpec, n=2, eps=(1e-4, 1e-8)) -> CompletenessVerdict:
    """Completeness of a mean kernel metric, decided by ``theta == 2``.

    The advisory witness measures the ray ``s I`` towards ``0`` on
    ``[eps, 1]`` and towards infinity on ``[1, 1/eps]``; a ray whose length
    keeps growing markedly as ``eps`` shrinks is counted as divergent.
    """
    k = mk.kernel()
    to_zero = tuple(ray_length(k, n, e, 1.0) for e in eps)
    to_inf = tuple(ray_length(k, n, 1.0, 1.0 / e) for e in eps)
    grows = lambda L: L[-1] > 1.5 * L[0]  # noqa: E731
    return CompletenessVerdict(
        mk.theta == 2, mk.theta, to_zero, to_inf, grows(to_zero) and grows(to_inf)
    )


# bivariate separable ---------------------------------------------------------

class SMatrix(NamedTuple):
    """Diagonal-block matrix of a metric at eigenvalues ``d``."""

    d: np.ndarray
    S: np.ndarray


@dataclass(frozen=True)
class SeparableSpec:
    """``tr(Psi(X)^2) + tr(Psi1(X)) tr(Psi2(X))``.

    ``psi`` is a symmetric positive kernel on pairs of eigenvalues, ``psi1``
    and ``psi2`` act on single eigenvalues.  Real-valued ``psi1, psi2`` are
    accepted (duals of separable metrics need them).
    """

    psi: Bivariate
    psi1: Callable[[np.ndarray], np.ndarray]
    psi2: Callable[[np.ndarray], np.ndarray]
    name: str = "separable"

    def factors(self, d):
        """``(Delta, x, y)`` at eigenvalues ``d``; raises if the spec is not positive there."""
        d = np.asarray(d, float)
        delta = np.asarray(self.psi(d, d), float) * np.ones_like(d)
        x = np.asarray(self.psi1(d), float) * np.ones_like(d) / delta
        y = np.asarray(self.psi2(d), float) * np.ones_like(d) / delta
        gap = np.linalg.norm(x) * np.linalg.norm(y) - x @ y
        if not (np.all(delta > 0) and gap < 2.0):
            raise InvalidSpecError(
                f"separable spec not positive at d={d}: |x||y| - <x,y> = {gap:.6g} (needs < 2)"
            )
        return delta, x, y

    def is_valid_at(self, d):
        try:
            self.factors(d)
        except InvalidSpecError:
            return False
        return True

    def spectral_form(self, d):
        delta, x, y = self.factors(d)
        n = len(delta)
        xx, yy = _pair(d)
        A = np.broadcast_to(np.asarray(self.psi(xx, yy), float) ** 2, (n, n))
        S = delta[:, None] * (np.eye(n) + 0.5 * (np.outer(x, y) + np.outer(y, x))) * delta[None, :]
        return A, S

    def cometric_form(self, d):
        xx, yy = _pair(d)
        n = len(d)
        A = np.broadcast_to(np.asarray(self.psi(xx, yy), float) ** -2, (n, n))
        return A, separable_cometric(self, d).S


def validate_separable(s: SeparableSpec, n, grid=None) -> ValidationReport:
    grid = default_grid(n) if grid is None else np.atleast_2d(grid)
    worst, mag = None, -np.inf
    for d in grid:
        delta = np.asarray(s.psi(d, d), float) * np.ones_like(d)
        x = np.asarray(s.psi1(d), float) / delta
        y = np.asarray(s.psi2(d), float) / delta
        gap = np.linalg.norm(x) * np.linalg.norm(y) - x @ y
        if gap > mag:
            worst, mag = d, gap
    return ValidationReport([ConditionResult("positivity", bool(mag < 2), worst, float(mag))])


def separable_eval(s: SeparableSpec, Sigma, X, Y, eig: EigenDecomp | None = None) -> float:
    """``tr(Psi X Psi Y) + (tr Psi1 X tr Psi2 Y + tr Psi1 Y tr Psi2 X)/2``."""
    P, d = _dec(Sigma, eig)
    s.factors(d)
    Xp, Yp = P.T @ sym(X) @ P, P.T @ sym(Y) @ P
    xx, yy = _pair(d)
    w = np.asarray(s.psi(xx, yy), float) ** 2
    p1 = np.asarray(s.psi1(d), float) * np.ones_like(d)
    p2 = np.asarray(s.psi2(d), float) * np.ones_like(d)
    dx, dy = np.diag(Xp), np.diag(Yp)
    return float(np.sum(w * Xp * Yp) + 0.5 * ((p1 @ dx) * (p2 @ dy) + (p1 @ dy) * (p2 @ dx)))


def separable_cometric(s: SeparableSpec, d) -> SMatrix:
    """Closed-form inverse of the diagonal block ``S(d)``.

    ``S^{-1} = Delta^{-1} [I + (N - (2 + <x,y>) M) / (4c)] Delta^{-1}`` with
    ``M = x y^T + y x^T``, ``N = |y|^2 x x^T + |x|^2 y y^T`` and
    ``c = 1 + <x,y> - (|x|^2 |y|^2 - <x,y>^2)/4``.
    """
    d = np.asarray(d, float)
    delta, x, y = s.factors(d)
    xy = x @ y
    nx2, ny2 = x @ x, y @ y
    c = 1.0 + xy - 0.25 * (nx2 * ny2 - xy**2)
    if c <= 0:
        raise InvalidSpecError(f"separable cometric undefined: c = {c:.6g} <= 0")
    M = np.outer(x, y) + np.outer(y, x)
    N = ny2 * np.outer(x, x) + nx2 * np.outer(y, y)
    inner = np.eye(len(d)) + (N - (2.0 + xy) * M) / (4.0 * c)
    return SMatrix(d, inner / delta[:, None] / delta[None, :])


def _lookup(d, values):
    d = np.asarray(d, float)
    values = np.asarray(values, float)

    def f(v):
        v = np.asarray(v, float)
        idx = np.abs(v[..., None] - d).argmin(axis=-1)
        return values[idx]

    return f


def separable_dual(s: SeparableSpec, d) -> SeparableSpec:
    """Separable spec of the cometric at the spectrum ``d``.

    The dual vectors ``x', y'`` depend on the whole spectrum, so the returned
    ``psi1, psi2`` are tabulated on the entries of ``d`` (nearest-eigenvalue
    lookup) while ``psi`` is ``1/psi`` everywhere.
    """
    d = np.asarray(d, float)
    delta, x, y = s.factors(d)
    psi = s.psi
    ny = np.linalg.norm(y)
    if ny == 0:
        x1 = np.zeros_like(x)
        y1 = np.zeros_like(y)
    else:
        xy = x @ y
        nx = np.linalg.norm(x)
        c = 1.0 + xy - 0.25 * (nx**2 * ny**2 - xy**2)
        disc = (2.0 + xy + nx * ny) * (2.0 + xy - nx * ny)
        lam = (2.0 + xy + np.sqrt(disc)) / ny**2
        mu = (2.0 + xy - np.sqrt(disc)) / ny**2
        x1 = (ny * x - lam * ny * y) / (4.0 * c)
        y1 = ny * x - mu * ny * y
    # the dual diagonal scale is 1/delta, so psi*_k(d_i) = x'_i / delta_i
    return SeparableSpec(
        lambda a, b: 1.0 / psi(a, b),
        _lookup(d, x1 / delta),
        _lookup(d, y1 / delta),
        f"dual({s.name})",
    )


def bost_as_separable(b: BostSpec) -> SeparableSpec:
    """The same metric as a separable spec (``psi1 = beta phi(x,x)^-1/2``, ``psi2 = phi(x,x)^-1/2``)."""
    phi, a, be = b.kernel.phi, b.alpha, b.beta
    return SeparableSpec(
        lambda x, y: np.sqrt(a / phi(x, y)),
        lambda x: be / np.sqrt(phi(x, x)),
        lambda x: 1.0 / np.sqrt(phi(x, x)),
        f"sep({b.kernel.name})",
    )
