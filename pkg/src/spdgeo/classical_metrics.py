"""
Closed-form Riemannian operations of the classical invariant metrics.

Supported kinds: Euclidean, log-Euclidean and affine-invariant (each with
a trace coefficient ``beta``), Bures-Wasserstein, BKM (metric, connection and
curvature only) and polar-affine, handled as the pullback of the
affine-invariant metric by ``S -> S^2``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .exceptions import (
    DomainError,
    InvalidSpecError,
    UnsupportedOperationError,
)
from .inner_products import STParams, fpq_map
from .invariant_metrics import ConditionResult, ValidationReport
from .kernel_family import BostSpec, KernelSpec, builtin_kernel, pullback_kernel
from .symlin import (
    LOG,
    POW2,
    EigenDecomp,
    as_spd,
    eigh,
    expm_sym,
    logm_spd,
    sqrt_product,
    sqrtm_spd,
    sylvester_lift,
    sym,
    univariate_apply,
    univariate_diff,
    pow_fn,
)

KINDS = (
    "euclidean",
    "log_euclidean",
    "affine_invariant",
    "bures_wasserstein",
    "bkm",
    "polar_affine",
)
_ALIASES = {
    "e": "euclidean",
    "le": "log_euclidean",
    "ai": "affine_invariant",
    "bw": "bures_wasserstein",
    "pa": "polar_affine",
}
_WITH_TRACE = ("euclidean", "log_euclidean", "affine_invariant", "polar_affine")


@dataclass(frozen=True)
class MetricId:
    """A classical metric; ``alpha, beta`` only apply to the kinds with a trace term."""

    kind: str
    alpha: float = 1.0
    beta: float = 0.0

    def __post_init__(self):
        raw = self.kind.lower().replace("-", "_")
        k = _ALIASES.get(raw, raw)
        if k not in KINDS:
            raise InvalidSpecError(f"unknown metric kind {self.kind!r}")
        object.__setattr__(self, "kind", k)
        if k not in _WITH_TRACE and (self.alpha != 1.0 or self.beta != 0.0):
            raise InvalidSpecError(f"{k} takes no (alpha, beta) parameters")
        if not self.alpha > 0:
            raise InvalidSpecError(f"alpha must be positive, got {self.alpha}")

    def st(self, n) -> STParams:
        return STParams(self.alpha, self.beta, n)

    def spectral_spec(self, n):
        """Equivalent kernel or trace-extended kernel spec (for generic machinery)."""
        if self.kind in ("bures_wasserstein", "bkm"):
            return builtin_kernel(self.kind)
        self.st(n)
        if self.kind == "polar_affine":
            k = pullback_kernel(builtin_kernel("affine_invariant"), POW2)
        else:
            k = builtin_kernel(self.kind)
        return BostSpec(k, self.alpha, self.beta, n)


AI = MetricId("affine_invariant")
BW = MetricId("bures_wasserstein")
BKM = MetricId("bkm")


class GeodesicDomain(NamedTuple):
    """Open time interval ``(t_lo, t_hi)`` of a closed-form geodesic."""

    t_lo: float
    t_hi: float

    def __contains__(self, t):
        return self.t_lo < t < self.t_hi


def _unsupported(kind, op):
    raise UnsupportedOperationError(f"{op} has no known closed form for the {kind} metric")


def _spd(S):
    S = as_spd(S)
    return S, eigh(S)


def _n(S):
    return S.shape[0]


# BKM building blocks -------------------------------------------------------

def bkm_m2(x, y):
    """``int_0^inf dt / ((x+t)(y+t)) = log(x/y)/(x - y)``, ``1/x`` on the diagonal."""
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    diff = x - y
    same = diff == 0
    safe = np.where(same, 1.0, diff)
    out = np.where(same, 1.0 / x, np.log1p(diff / y) / safe)
    return out if out.ndim else float(out)


#: relative spread under which the three-point integral uses its Taylor form
M3_TAYLOR_RTOL = 1e-5


def bkm_m3(x, y, z):
    """``int_0^inf dt / ((x+t)(y+t)(z+t))``, symmetric in its arguments.

    Divided-difference form ``(m2(a,b) - m2(b,c))/(c - a)`` for sorted
    ``a <= b <= c``; near coincidence a third-order Taylor series about the
    mean is used.
    """
    a, b, c = np.sort(np.broadcast_arrays(*(np.asarray(v, float) for v in (x, y, z))), axis=0)
    spread = c - a
    close = spread <= M3_TAYLOR_RTOL * c
    m = (a + b + c) / 3.0
    e = np.stack([a - m, b - m, c - m])
    p2 = np.sum(e**2, axis=0)
    p3 = np.sum(e**3, axis=0)
    taylor = 0.5 / m**2 + p2 / (8.0 * m**4) - p3 / (15.0 * m**5)
    safe = np.where(close, 1.0, spread)
    exact = (bkm_m2(a, b) - bkm_m2(b, c)) / safe
    out = np.where(close, taylor, exact)
    return out if out.ndim else float(out)


def _m2_matrix(d):
    return bkm_m2(d[:, None], d[None, :])


def bkm_g(Sigma, X, eig: EigenDecomp | None = None):
    """``d_Sigma log (X)``, the operator of the BKM metric."""
    P, d = eig if eig is not None else eigh(as_spd(Sigma))
    return sym(P @ (_m2_matrix(d) * (P.T @ sym(X) @ P)) @ P.T)


def bkm_g_inv(Sigma, Y, eig: EigenDecomp | None = None):
    P, d = eig if eig is not None else eigh(as_spd(Sigma))
    return sym(P @ ((P.T @ sym(Y) @ P) / _m2_matrix(d)) @ P.T)


def bkm_metric(Sigma, X, Y, eig: EigenDecomp | None = None) -> float:
    """``tr(X d_Sigma log(Y))``."""
    return float(np.sum(sym(X) * bkm_g(Sigma, Y, eig)))


def bkm_dg(Sigma, X, Y, eig: EigenDecomp | None = None):
    """Derivative of ``Sigma -> d_Sigma log(Y)`` in direction ``X``.

    In the eigenbasis: ``-sum_k m3(d_i, d_k, d_j) (X_ik Y_kj + Y_ik X_kj)``.
    """
    P, d = eig if eig is not None else eigh(as_spd(Sigma))
    Xp, Yp = P.T @ sym(X) @ P, P.T @ sym(Y) @ P
    M3 = bkm_m3(d[:, None, None], d[None, :, None], d[None, None, :])  # (i, k, j)
    out = -np.einsum("ikj,ik,kj->ij", M3, Xp, Yp) - np.einsum("ikj,ik,kj->ij", M3, Yp, Xp)
    return sym(P @ out @ P.T)


def bkm_connection(Sigma, X, Y, dY, eig: EigenDecomp | None = None):
    """``dY + g^{-1}(dg(X)(Y)) / 2``."""
    e = eig if eig is not None else eigh(as_spd(Sigma))
    return sym(dY) + 0.5 * bkm_g_inv(Sigma, bkm_dg(Sigma, X, Y, e), e)


def bkm_riemann(Sigma, X, Y, Z, eig: EigenDecomp | None = None):
    """Curvature operator ``R(X, Y) Z = [nabla_X, nabla_Y] Z`` from ``g`` and ``dg``."""
    e = eig if eig is not None else eigh(as_spd(Sigma))

    def G(U, V):
        return bkm_g_inv(Sigma, bkm_dg(Sigma, U, V, e), e)

    return -0.25 * G(X, G(Y, Z)) + 0.25 * G(Y, G(X, Z))


# shared pieces -------------------------------------------------------------

def _ai_inner(alpha, beta, Sinv, X, Y):
    A, B = Sinv @ X, Sinv @ Y
    return float(alpha * np.sum(A * B.T) + beta * np.trace(A) * np.trace(B))


def _dlog(S, X, e):
    return univariate_diff(LOG, S, X, e)


def _dlog_inv(S, Y, e):
    return bkm_g_inv(S, Y, e)


def _ai_christoffel(Sinv, X, Y):
    return -0.5 * (X @ Sinv @ Y + Y @ Sinv @ X)


def _interval(lmin, lmax):
    lo = -1.0 / lmax if lmax > 0 else -np.inf
    hi = -1.0 / lmin if lmin < 0 else np.inf
    return GeodesicDomain(lo, hi)


# operations ----------------------------------------------------------------

def inner(mid: MetricId, Sigma, X, Y) -> float:
    """``g_Sigma(X, Y)`` in closed form."""
    S, e = _spd(Sigma)
    X, Y = sym(X), sym(Y)
    k, a, b = mid.kind, mid.alpha, mid.beta
    if k in _WITH_TRACE:
        mid.st(_n(S))
    if k == "euclidean":
        return float(a * np.sum(X * Y) + b * np.trace(X) * np.trace(Y))
    if k == "log_euclidean":
        LX, LY = _dlog(S, X, e), _dlog(S, Y, e)
        return float(a * np.sum(LX * LY) + b * np.trace(LX) * np.trace(LY))
    if k == "affine_invariant":
        return _ai_inner(a, b, univariate_apply(pow_fn(-1), S, e), X, Y)
    if k == "bures_wasserstein":
        return float(0.5 * np.sum(X * sylvester_lift(S, Y, e)))
    if k == "bkm":
        return bkm_metric(S, X, Y, e)
    S2inv = univariate_apply(pow_fn(-2), S, e)
    return _ai_inner(a, b, S2inv, S @ X + X @ S, S @ Y + Y @ S)


def norm(mid: MetricId, Sigma, X) -> float:
    return float(np.sqrt(inner(mid, Sigma, X, X)))


def _ai_dist2(a, b, S, L):
    e = eigh(S)
    Sih = univariate_apply(pow_fn(-0.5), S, e)
    w = np.linalg.eigvalsh(sym(Sih @ L @ Sih))
    lw = np.log(w)
    return a * np.sum(lw**2) + b * np.sum(lw) ** 2


def dist(mid: MetricId, Sigma, Lam) -> float:
    """Geodesic distance."""
    S, L = as_spd(Sigma), as_spd(Lam)
    k, a, b = mid.kind, mid.alpha, mid.beta
    if k in _WITH_TRACE:
        mid.st(_n(S))
    if k == "euclidean":
        D = L - S
        d2 = a * np.sum(D * D) + b * np.trace(D) ** 2
    elif k == "log_euclidean":
        D = logm_spd(L) - logm_spd(S)
        d2 = a * np.sum(D * D) + b * np.trace(D) ** 2
    elif k == "affine_invariant":
        d2 = _ai_dist2(a, b, S, L)
    elif k == "bures_wasserstein":
        # Procrustes form |S^1/2 - L^1/2 U| with U the polar factor; avoids
        # the cancellation of the trace formula near the diagonal
        A, B = sqrtm_spd(S), sqrtm_spd(L)
        W, _, Vt = np.linalg.svd(B @ A)
        d2 = np.sum((A - B @ W @ Vt) ** 2)
    elif k == "polar_affine":
        d2 = _ai_dist2(a, b, S @ S, L @ L)
    else:
        _unsupported(k, "distance")
    return float(np.sqrt(max(d2, 0.0)))


def geodesic_domain(mid: MetricId, Sigma, X) -> GeodesicDomain:
    """Maximal open interval on which the closed-form geodesic stays SPD."""
    S, e = _spd(Sigma)
    X = sym(X)
    k = mid.kind
    if k == "euclidean":
        Sih = univariate_apply(pow_fn(-0.5), S, e)
        w = np.linalg.eigvalsh(sym(Sih @ X @ Sih))
        return _interval(w[0], w[-1])
    if k == "bures_wasserstein":
        w = np.linalg.eigvalsh(sylvester_lift(S, X, e))
        return _interval(w[0], w[-1])
    if k == "bkm":
        _unsupported(k, "geodesic")
    return GeodesicDomain(-np.inf, np.inf)


def _check_t(mid, S, X, t):
    dom = geodesic_domain(mid, S, X)
    if t not in dom:
        raise DomainError(
            f"t={t} outside the geodesic domain ({dom.t_lo:.6g}, {dom.t_hi:.6g})",
            interval=(dom.t_lo, dom.t_hi),
        )


def exp_map(mid: MetricId, Sigma, X, t: float = 1.0):
    """Point at time ``t`` of the geodesic from ``Sigma`` with velocity ``X``."""
    S, e = _spd(Sigma)
    X = sym(X)
    k = mid.kind
    if k == "bkm":
        _unsupported(k, "exponential map")
    _check_t(mid, S, X, t)
    if k == "euclidean":
        return S + t * X
    if k == "log_euclidean":
        return expm_sym(logm_spd(S, e) + t * _dlog(S, X, e))
    if k == "affine_invariant":
        Sh = sqrtm_spd(S, e)
        Sih = univariate_apply(pow_fn(-0.5), S, e)
        return sym(Sh @ expm_sym(t * sym(Sih @ X @ Sih)) @ Sh)
    if k == "bures_wasserstein":
        X0 = sylvester_lift(S, X, e)
        return sym(S + t * X + t * t * X0 @ S @ X0)
    S2 = S @ S
    return sqrtm_spd(exp_map(AI, S2, S @ X + X @ S, t))


def log_map(mid: MetricId, Sigma, Lam):
    """Initial velocity of the geodesic from ``Sigma`` reaching ``Lam`` at time 1."""
    S, e = _spd(Sigma)
    L = as_spd(Lam)
    k = mid.kind
    if k == "euclidean":
        return L - S
    if k == "log_euclidean":
        return _dlog_inv(S, logm_spd(L) - logm_spd(S, e), e)
    if k == "affine_invariant":
        Sh = sqrtm_spd(S, e)
        Sih = univariate_apply(pow_fn(-0.5), S, e)
        return sym(Sh @ logm_spd(sym(Sih @ L @ Sih)) @ Sh)
    if k == "bures_wasserstein":
        C = sqrt_product(S, L)
        return sym(C + C.T - 2.0 * S)
    if k == "polar_affine":
        return sylvester_lift(S, log_map(AI, S @ S, L @ L), e)
    _unsupported(k, "logarithm map")


def connection(mid: MetricId, Sigma, X, Y, dY):
    """Levi-Civita derivative ``nabla_X Y`` given the chart derivative ``dY = d_X Y``."""
    S, e = _spd(Sigma)
    X, Y, dY = sym(X), sym(Y), sym(dY)
    k = mid.kind
    if k == "euclidean":
        return dY
    if k == "log_euclidean":
        return dY + _dlog_inv(S, bkm_dg(S, X, Y, e), e)
    if k == "affine_invariant":
        return dY + _ai_christoffel(univariate_apply(pow_fn(-1), S, e), X, Y)
    if k == "bures_wasserstein":
        X0, Y0 = sylvester_lift(S, X, e), sylvester_lift(S, Y, e)
        return dY - sym(X0 @ S @ Y0 + Y0 @ S @ X0)
    if k == "bkm":
        return bkm_connection(S, X, Y, dY, e)
    S2inv = univariate_apply(pow_fn(-2), S, e)
    U, V = S @ X + X @ S, S @ Y + Y @ S
    return dY + sylvester_lift(S, X @ Y + Y @ X + _ai_christoffel(S2inv, U, V), e)


def christoffel(mid: MetricId, Sigma, X, Y):
    """Quadratic part of the connection: ``nabla_X Y`` for constant fields."""
    return connection(mid, Sigma, X, Y, np.zeros_like(np.asarray(X, float)))


def ai_riemann(Sigma, X, Y, Z, T, alpha: float = 1.0) -> float:
    """``alpha/2 tr(X S^-1 Y S^-1 (Z S^-1 T - T S^-1 Z) S^-1)`` (any ``beta``)."""
    Si = univariate_apply(pow_fn(-1), as_spd(Sigma))
    X, Y, Z, T = (sym(M) for M in (X, Y, Z, T))
    return float(0.5 * alpha * np.trace(X @ Si @ Y @ Si @ (Z @ Si @ T - T @ Si @ Z) @ Si))


def bw_riemann_diag(Sigma, X, Y) -> float:
    """``R(X, Y, X, Y) = 3/2 sum_ij d_i d_j/(d_i + d_j) [X0', Y0']_ij^2``."""
    S, e = _spd(Sigma)
    P, d = e
    X0 = P.T @ sylvester_lift(S, X, e) @ P
    Y0 = P.T @ sylvester_lift(S, Y, e) @ P
    B = X0 @ Y0 - Y0 @ X0
    W = np.outer(d, d) / (d[:, None] + d[None, :])
    return float(1.5 * np.sum(W * B * B))


def riemann_xyxy(mid: MetricId, Sigma, X, Y) -> float:
    """Sectional-curvature numerator ``g(R(X, Y) Y, X)`` (nonpositive for AI)."""
    S = as_spd(Sigma)
    k = mid.kind
    if k in ("euclidean", "log_euclidean"):
        return 0.0
    if k == "affine_invariant":
        return ai_riemann(S, X, Y, X, Y, mid.alpha)
    if k == "bures_wasserstein":
        return bw_riemann_diag(S, X, Y)
    if k == "polar_affine":
        U, V = S @ X + X @ S, S @ Y + Y @ S
        return ai_riemann(S @ S, U, V, U, V, mid.alpha)
    return bkm_metric(S, bkm_riemann(S, X, Y, Y), X)


def sectional_curvature(mid: MetricId, Sigma, X, Y) -> float:
    """Sectional curvature of the plane spanned by ``X`` and ``Y``.

    Sign convention: negative for the affine-invariant metric, positive for
    Bures-Wasserstein.
    """
    gxx, gyy, gxy = inner(mid, Sigma, X, X), inner(mid, Sigma, Y, Y), inner(mid, Sigma, X, Y)
    den = gxx * gyy - gxy**2
    if den <= 1e-14 * gxx * gyy:
        raise DomainError("degenerate plane: X and Y are (nearly) collinear")
    return riemann_xyxy(mid, Sigma, X, Y) / den


def ai_curvature_basis(alpha, beta, n):
    """Orthonormal-direction basis ``E_ij - (p - q)/(n p) delta_ij I`` at the identity.

    With ``p = sqrt(alpha + n beta)`` and ``q = sqrt(alpha)`` these matrices
    are pairwise orthogonal and of squared norm ``alpha`` for the
    affine-invariant metric at ``I``.  Returns ``{(i, j): matrix}`` for ``i <= j``.
    """
    st = STParams(alpha, beta, n)
    c = (st.p - st.q) / (n * st.p)
    out = {}
    r = 1.0 / np.sqrt(2.0)
    for i in range(n):
        E = np.zeros((n, n))
        E[i, i] = 1.0
        out[(i, i)] = E - c * np.eye(n)
        for j in range(i + 1, n):
            E = np.zeros((n, n))
            E[i, j] = E[j, i] = r
            out[(i, j)] = E
    return out


def _commutes(S, L, rtol=1e-10):
    return np.linalg.norm(S @ L - L @ S) <= rtol * np.linalg.norm(S) * np.linalg.norm(L)


def common_eigenbasis(S, L):
    """Orthogonal ``P`` diagonalising two commuting symmetric matrices."""
    w = (np.sqrt(5.0) - 1.0) / 2.0
    P, _ = eigh(S / np.linalg.norm(S) + w * L / np.linalg.norm(L))
    return P


def parallel_transport(mid: MetricId, Sigma, Lam, X):
    """Transport of ``X`` from ``Sigma`` to ``Lam`` along the connecting geodesic."""
    S, e = _spd(Sigma)
    L, eL = _spd(Lam)
    X = sym(X)
    k = mid.kind
    if k == "euclidean":
        return X
    if k == "log_euclidean":
        return _dlog_inv(L, _dlog(S, X, e), eL)
    if k == "affine_invariant":
        C = sqrt_product(L, univariate_apply(pow_fn(-1), S, e))
        return sym(C @ X @ C.T)
    if k == "bures_wasserstein":
        if not _commutes(S, L):
            raise UnsupportedOperationError(
                "closed-form Bures-Wasserstein transport needs commuting endpoints; "
                "use geodesic_engine.bw_transport_ode"
            )
        P = common_eigenbasis(S, L)
        d, delta = np.diag(P.T @ S @ P), np.diag(P.T @ L @ P)
        F = np.sqrt((delta[:, None] + delta[None, :]) / (d[:, None] + d[None, :]))
        return sym(P @ (F * (P.T @ X @ P)) @ P.T)
    if k == "polar_affine":
        V = parallel_transport(AI, S @ S, L @ L, S @ X + X @ S)
        return sylvester_lift(L, V, eL)
    _unsupported(k, "parallel transport")


def trace_isometry(mid: MetricId, Sigma):
    """Map sending the ``(alpha, beta)`` metric onto one without trace term.

    Returns ``(image, target)`` with ``dist_mid(S, L) = dist_target(f(S), f(L))``.
    Euclidean and log-Euclidean land on the Frobenius versions through
    ``F_{p,q}``; affine-invariant lands on ``(alpha, 0)`` through
    ``S -> det(S)^{(p/q - 1)/n} S``.
    """
    S = as_spd(Sigma)
    n = _n(S)
    st = mid.st(n)
    if mid.kind == "euclidean":
        return fpq_map(st, S), MetricId("euclidean")
    if mid.kind == "log_euclidean":
        return expm_sym(fpq_map(st, logm_spd(S))), MetricId("log_euclidean")
    if mid.kind == "affine_invariant":
        c = (st.p / st.q - 1.0) / n
        logdet = np.sum(np.log(np.linalg.eigvalsh(S)))
        return np.exp(c * logdet) * S, MetricId("affine_invariant", mid.alpha, 0.0)
    raise UnsupportedOperationError(f"no trace isometry for {mid.kind}")


def bw_quotient_check(A, X, skew=None, tol=1e-10) -> ValidationReport:
    """Check the quotient picture ``A -> A A^T`` of the Bures-Wasserstein metric.

    Verifies that ``X0 A`` projects to ``X``, that ``Sym(n) A`` is orthogonal
    to ``Skew(n) A^{-T}`` (tested on ``X0 A`` against ``skew A^{-T}``), and
    that ``|X0 A|_F^2`` equals the metric norm of ``X``.
    """
    A = np.asarray(A, float)
    n = A.shape[0]
    if abs(np.linalg.det(A)) <= 1e-12 * max(1.0, np.linalg.norm(A)) ** n:
        raise DomainError("A must be invertible")
    X = sym(X)
    Sigma = A @ A.T
    X0 = sylvester_lift(Sigma, X)
    H = X0 @ A
    if skew is None:
        rng = np.random.default_rng(0)
        K = rng.standard_normal((n, n))
        skew = K - K.T
    V = skew @ np.linalg.inv(A).T
    proj = H @ A.T + A @ H.T
    scale = max(np.linalg.norm(X), 1e-300)
    dev1 = float(np.linalg.norm(proj - X) / scale)
    dev2 = float(abs(np.sum(H * V)) / max(np.linalg.norm(H) * np.linalg.norm(V), 1e-300))
    g = inner(BW, Sigma, X, X)
    dev3 = float(abs(np.sum(H * H) - g) / max(g, 1e-300))
    return ValidationReport(
        [
            ConditionResult("horizontal_projection", dev1 <= tol, None, dev1),
            ConditionResult("vertical_orthogonality", dev2 <= tol, None, dev2),
            ConditionResult("horizontal_isometry", dev3 <= tol, None, dev3),
        ]
    )


def kernel_of(mid: MetricId) -> KernelSpec:
    """Kernel of the ``beta = 0`` member (scaled by ``1/alpha``)."""
    spec = mid.spectral_spec(2)
    k = spec if isinstance(spec, KernelSpec) else spec.kernel
    if mid.alpha == 1.0:
        return k
    a = mid.alpha
    return KernelSpec(lambda x, y: k.phi(x, y) / a, k.name)
