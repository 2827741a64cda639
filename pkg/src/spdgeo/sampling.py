"""Random matrices and random valid metric specs, for tests and validation grids."""
from __future__ import annotations

import numpy as np

from .inner_products import STParams
from .invariant_metrics import MetricTriple
from .kernel_family import (
    MEANS,
    BostSpec,
    KernelSpec,
    SeparableSpec,
    builtin_kernel,
    convex_combine,
)


def rng_from(seed=None):
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def random_orthogonal(n, rng=None):
    """Haar-distributed orthogonal matrix (QR with sign correction)."""
    rng = rng_from(rng)
    Q, R = np.linalg.qr(rng.standard_normal((n, n)))
    return Q * np.sign(np.diag(R))


def random_sym(n, rng=None, scale=1.0):
    rng = rng_from(rng)
    A = rng.standard_normal((n, n))
    return scale * 0.5 * (A + A.T)


def random_spd(n, rng=None, log_range=1.5, eigenvalues=None):
    """``R diag(d) R^T`` with ``log d`` uniform in ``[-log_range, log_range]``."""
    rng = rng_from(rng)
    d = np.exp(rng.uniform(-log_range, log_range, n)) if eigenvalues is None else np.asarray(eigenvalues, float)
    R = random_orthogonal(n, rng)
    S = (R * d) @ R.T
    return 0.5 * (S + S.T)


def random_st(n, rng=None, margin=0.1):
    """``(alpha, beta)`` with ``min(alpha, alpha + n beta) >= margin * alpha``."""
    rng = rng_from(rng)
    a = float(np.exp(rng.uniform(-1, 1)))
    b = float(rng.uniform(-(1 - margin) * a / n, a))
    return STParams(a, b, n)


def random_kernel(rng=None):
    """A kernel drawn among builtins, powers of means and convex combinations."""
    rng = rng_from(rng)
    kind = rng.integers(3)
    names = ["euclidean", "log_euclidean", "affine_invariant", "polar_affine", "bures_wasserstein", "bkm"]
    if kind == 0:
        return builtin_kernel(names[rng.integers(len(names))])
    if kind == 1:
        mean = MEANS[sorted(MEANS)[rng.integers(len(MEANS))]]
        theta = float(rng.uniform(0, 3))
        a = float(np.exp(rng.uniform(-1, 1)))
        return KernelSpec(lambda x, y: a * mean(x, y) ** theta, f"{a:.3g}*m^{theta:.3g}")
    k1 = builtin_kernel(names[rng.integers(len(names))])
    k2 = builtin_kernel(names[rng.integers(len(names))])
    return convex_combine(k1, k2, float(rng.uniform()))


def random_bost(n, rng=None, margin=0.1):
    rng = rng_from(rng)
    st = random_st(n, rng, margin)
    return BostSpec(random_kernel(rng), st.alpha, st.beta, n)


def random_separable(n, rng=None, margin=0.1):
    """Separable spec positive on every spectrum.

    With ``x = a g1(d)`` and ``y = b g2(d)``, ``0 < g <= 1``, the positivity
    gap is at most ``2 |a b| n``; ``|a b|`` is drawn below ``(1 - margin)/n``.
    """
    rng = rng_from(rng)
    k = random_kernel(rng)
    phi = k.phi
    s1, s2 = rng.uniform(-2, 2, 2)
    ab = (1 - margin) / n * rng.uniform(0.05, 1.0)
    r = np.exp(rng.uniform(-1, 1))
    a = np.sqrt(ab) * r * rng.choice([-1.0, 1.0])
    b = np.sqrt(ab) / r * rng.choice([-1.0, 1.0])

    def delta(t):
        return 1.0 / np.sqrt(phi(t, t))

    return SeparableSpec(
        lambda x, y: 1.0 / np.sqrt(phi(x, y)),
        lambda t: a * delta(t) / (1.0 + t**s1),
        lambda t: b * delta(t) / (1.0 + t**s2),
        f"sep({k.name})",
    )


def random_triple(n, rng=None, margin=0.1):
    """Triple that is not a kernel metric: a symmetric weight ``w(d)`` multiplies
    a trace-extended kernel whose trace vector varies with the eigenvalues."""
    rng = rng_from(rng)
    phi = random_kernel(rng).phi
    eps = float(rng.uniform(0, 0.5))
    lam = float(rng.uniform(-(1 - margin) / n, 1.0))
    s = float(rng.uniform(-1, 1))

    def w(d):
        return 1.0 + eps * np.sum(d) / len(d)

    def u(t):
        return phi(t, t) ** -0.5 / (1.0 + t**s)

    return MetricTriple(
        lambda d: w(d) / float(phi(d[0], d[1])),
        lambda d: w(d) * lam * float(u(d[0]) * u(d[1])),
        lambda d: w(d) * float(1.0 / phi(d[0], d[0]) + lam * u(d[0]) ** 2),
        n,
        "random_triple",
    )


def random_metric(n, rng=None):
    """One of kernel, trace-extended, separable or general triple, uniformly."""
    rng = rng_from(rng)
    kind = rng.integers(4)
    if kind == 0:
        return random_kernel(rng)
    if kind == 1:
        return random_bost(n, rng)
    if kind == 2:
        return random_separable(n, rng)
    return random_triple(n, rng)
