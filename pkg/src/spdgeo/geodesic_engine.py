"""
Numerical geodesics and parallel transport.

Geodesics are integrated in Hamiltonian form: the position ``x`` and the
momentum ``p`` are coordinates in the orthonormal basis of
:func:`spdgeo.symlin.sym_basis`, and

    H(x, p) = p^T G*(x) p / 2,   dx/dt = G*(x) p,   dp/dt = -dH/dx,

so only the cometric Gram matrix ``G*`` is needed.  Its coordinate
derivative is taken by a five-point stencil.  Transport integrates the
connection along closed-form geodesics; the Bures-Wasserstein transport also
has a dedicated linear ODE on the Sylvester lift.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

import numpy as np

from .classical_metrics import MetricId, christoffel, log_map
from .exceptions import (
    DomainError,
    GeodesicBoundaryError,
    InvalidSpecError,
    NotSPDError,
    UnsupportedOperationError,
)
from .invariant_metrics import cometric_form, eval_form, gram_matrix
from .symlin import (
    EXP,
    LOG,
    as_spd,
    eigh,
    expm_sym,
    invsqrtm_spd,
    is_spd,
    logm_spd,
    sqrtm_spd,
    sylvester_lift,
    sym,
    sym_basis,
    sym_to_vec,
    univariate_diff,
    vec_to_sym,
)

SCHEMES = ("rk4", "midpoint")


@dataclass(frozen=True)
class IntegratorConfig:
    """Fixed-step integrator settings.

    ``fd_step`` is the stencil step for the cometric derivative, relative to
    the smallest eigenvalue of the current point.
    """

    steps: int = 100
    scheme: str = "rk4"
    fd_step: float = 1e-3

    def __post_init__(self):
        if int(self.steps) != self.steps or self.steps < 1:
            raise InvalidSpecError(f"steps must be a positive integer, got {self.steps}")
        if self.scheme not in SCHEMES:
            raise InvalidSpecError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")
        if not 0 < self.fd_step < 0.1:
            raise InvalidSpecError(f"fd_step must lie in (0, 0.1), got {self.fd_step}")


class Trajectory(NamedTuple):
    """Sampled geodesic: ``points[k]`` at ``times[k]``, with ``H`` at each sample."""

    times: np.ndarray
    points: np.ndarray
    hamiltonian: np.ndarray

    @property
    def endpoint(self):
        return self.points[-1]


def _spectral(metric, n):
    return metric.spectral_spec(n) if isinstance(metric, MetricId) else metric


def momentum_from_velocity(metric, Sigma, X):
    """Flat map: the symmetric ``W`` with ``tr(W Y) = g_Sigma(X, Y)`` for all ``Y``."""
    S = as_spd(Sigma)
    G = gram_matrix(_spectral(metric, S.shape[0]), S)
    return vec_to_sym(G @ sym_to_vec(X))


def velocity_from_momentum(metric, Sigma, W):
    """Sharp map, inverse of :func:`momentum_from_velocity`, through the cometric."""
    S = as_spd(Sigma)
    Gs = gram_matrix(_spectral(metric, S.shape[0]), S, cometric=True)
    return vec_to_sym(Gs @ sym_to_vec(W))


class _Outside(Exception):
    pass


def _cometric_gram(metric, x):
    try:
        S = as_spd(vec_to_sym(x))
        e = eigh(S)
        return gram_matrix(metric, S, cometric=True, eig=e), e.d[0]
    except (NotSPDError, DomainError, FloatingPointError) as err:
        raise _Outside from err


_basis = lru_cache(maxsize=None)(sym_basis)

_STENCIL = np.array([1.0, -8.0, 8.0, -1.0]) / 12.0
_OFFSETS = np.array([-2.0, -1.0, 1.0, 2.0])


def _cometric_value(metric, S, W):
    # H-type scalar w -> g*_S(w, w); plain LAPACK eigh is enough since the
    # form is invariant under the choice of eigenbasis
    d, P = np.linalg.eigh(S)
    if d[0] <= 0:
        raise _Outside
    try:
        A, Sd = cometric_form(metric, d)
    except (DomainError, FloatingPointError) as err:
        raise _Outside from err
    Wp = P.T @ W @ P
    return eval_form(A, Sd, Wp, Wp)


def _vector_field(metric, fd_step):
    def rhs(state):
        m = state.size // 2
        x, p = state[:m], state[m:]
        Gs, lmin = _cometric_gram(metric, x)
        S, W = vec_to_sym(x), vec_to_sym(p)
        h = fd_step * lmin
        grad = np.empty(m)
        for k, B in enumerate(_basis(S.shape[0])):
            acc = 0.0
            for c, o in zip(_STENCIL, _OFFSETS):
                acc += c * _cometric_value(metric, S + (o * h) * B, W)
            grad[k] = 0.5 * acc / h
        return np.concatenate([Gs @ p, -grad])

    return rhs


def _step(rhs, y, dt, scheme):
    if scheme == "midpoint":
        k1 = rhs(y)
        return y + dt * rhs(y + 0.5 * dt * k1)
    k1 = rhs(y)
    k2 = rhs(y + 0.5 * dt * k1)
    k3 = rhs(y + 0.5 * dt * k2)
    k4 = rhs(y + dt * k3)
    return y + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)


def hamiltonian_geodesic(metric, Sigma, X, t_final: float = 1.0, cfg: IntegratorConfig | None = None):
    """Integrate the geodesic from ``Sigma`` with initial velocity ``X``.

    ``metric`` is a :class:`MetricId` or any spectral-form metric object
    (kernel, trace-extended, separable, triple).  Negative ``t_final``
    integrates backwards.

    Raises
    ------
    GeodesicBoundaryError
        When an intermediate state leaves the SPD cone; ``last_t`` is the last
        time at which the trajectory was valid.
    """
    cfg = cfg or IntegratorConfig()
    S = as_spd(Sigma)
    spec = _spectral(metric, S.shape[0])
    x0 = sym_to_vec(S)
    p0 = sym_to_vec(momentum_from_velocity(spec, S, X))
    y = np.concatenate([x0, p0])
    m = x0.size
    rhs = _vector_field(spec, cfg.fd_step)
    dt = t_final / cfg.steps

    def energy(state):
        Gs, _ = _cometric_gram(spec, state[:m])
        pp = state[m:]
        return 0.5 * pp @ Gs @ pp

    times, points, ham = [0.0], [S], [energy(y)]
    for k in range(cfg.steps):
        t = (k + 1) * dt
        try:
            y_new = _step(rhs, y, dt, cfg.scheme)
            if not is_spd(vec_to_sym(y_new[:m])):
                raise _Outside
            H = energy(y_new)
        except _Outside:
            raise GeodesicBoundaryError(
                f"geodesic left the SPD cone after t={times[-1]:.6g}", last_t=times[-1]
            ) from None
        y = y_new
        times.append(t)
        points.append(vec_to_sym(y[:m]))
        ham.append(H)
    return Trajectory(np.array(times), np.array(points), np.array(ham))


# transport -----------------------------------------------------------------

def _geodesic_point_velocity(mid: MetricId, Sigma, V, t):
    """Closed-form geodesic ``gamma(t)`` and ``gamma'(t)`` with ``gamma'(0) = V``."""
    k = mid.kind
    if k == "euclidean":
        return Sigma + t * V, V
    if k == "log_euclidean":
        W = univariate_diff(LOG, Sigma, V)
        L = logm_spd(Sigma) + t * W
        return expm_sym(L), univariate_diff(EXP, L, W)
    if k == "affine_invariant":
        Sh, Sih = sqrtm_spd(Sigma), invsqrtm_spd(Sigma)
        A = sym(Sih @ V @ Sih)
        E = expm_sym(t * A)
        return sym(Sh @ E @ Sh), sym(Sh @ E @ A @ Sh)
    if k == "bures_wasserstein":
        X0 = sylvester_lift(Sigma, V)
        Q = sym(X0 @ Sigma @ X0)
        return Sigma + t * V + t * t * Q, V + 2 * t * Q
    if k == "polar_affine":
        U = Sigma @ V + V @ Sigma
        G2, dG2 = _geodesic_point_velocity(MetricId("affine_invariant"), Sigma @ Sigma, U, t)
        G = sqrtm_spd(G2)
        return G, sylvester_lift(G, dG2)
    raise UnsupportedOperationError(f"no closed-form geodesic for {k}")


def _rk4_linear(f, X, steps):
    h = 1.0 / steps
    for k in range(steps):
        t = k * h
        k1 = f(t, X)
        k2 = f(t + h / 2, X + h / 2 * k1)
        k3 = f(t + h / 2, X + h / 2 * k2)
        k4 = f(t + h, X + h * k3)
        X = X + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    return sym(X)


def connection_transport(mid: MetricId, Sigma, Lam, X, cfg: IntegratorConfig | None = None):
    """Parallel transport along the closed-form geodesic from ``Sigma`` to ``Lam``.

    Solves ``dX/dt = -Gamma_gamma(t)(gamma'(t), X)`` with fixed-step RK4.
    """
    cfg = cfg or IntegratorConfig()
    if mid.kind == "bkm":
        raise UnsupportedOperationError("bkm has no closed-form geodesic to transport along")
    S, L = as_spd(Sigma), as_spd(Lam)
    V = log_map(mid, S, L)

    def f(t, Y):
        G, dG = _geodesic_point_velocity(mid, S, V, t)
        return -christoffel(mid, G, dG, Y)

    return _rk4_linear(f, sym(X), cfg.steps)


def bw_transport_ode(Sigma, Lam, X, cfg: IntegratorConfig | None = None):
    """Bures-Wasserstein transport of ``X`` from ``Sigma`` to ``Lam`` for any pair.

    Works on the horizontal curve ``A(t) = (1-t) S^{1/2} + t S^{-1/2}
    (S^{1/2} L S^{1/2})^{1/2}`` above the geodesic ``gamma = A A^T`` and
    integrates the Sylvester lift ``X0`` of the transported vector:
    ``gamma X0' + X0' gamma = -(A A'^T X0 + X0 A' A^T)``.
    """
    cfg = cfg or IntegratorConfig()
    S, L = as_spd(Sigma), as_spd(Lam)
    e = eigh(S)
    Sh, Sih = sqrtm_spd(S, e), invsqrtm_spd(S, e)
    B = Sih @ sqrtm_spd(sym(Sh @ L @ Sh))
    dA = B - Sh

    def f(t, X0):
        A = (1 - t) * Sh + t * B
        M = A @ dA.T @ X0
        return sylvester_lift(sym(A @ A.T), -(M + M.T))

    X0 = _rk4_linear(f, sylvester_lift(S, X, e), cfg.steps)
    return sym(L @ X0 + X0 @ L)
