"""Independent reference computations used across the test modules.

Nothing here calls the spectral machinery under test: Gram matrices come from
polarization of plain bilinear forms, curvature from finite differences of
Christoffel maps, integrals from adaptive quadrature.
"""
import numpy as np
from scipy.integrate import quad
from scipy.linalg import expm, logm, sqrtm


def basis(n):
    mats = []
    for i in range(n):
        E = np.zeros((n, n))
        E[i, i] = 1.0
        mats.append(E)
    for i in range(n):
        for j in range(i + 1, n):
            E = np.zeros((n, n))
            E[i, j] = E[j, i] = 1 / np.sqrt(2)
            mats.append(E)
    return mats


def gram(form, n):
    """Gram matrix of a bilinear form ``form(X, Y)`` in the basis above."""
    B = basis(n)
    return np.array([[form(X, Y) for Y in B] for X in B])


def symm(A):
    return 0.5 * (A + A.T)


def msqrt(S):
    return symm(np.real(sqrtm(S)))


def mlog(S):
    return symm(np.real(logm(S)))


def mexp(X):
    return symm(expm(X))


def dlog(S, X):
    """Derivative of the matrix log: upper-right block of ``log [[S, X], [0, S]]``."""
    n = S.shape[0]
    M = np.block([[S, X], [np.zeros((n, n)), S]])
    return symm(np.real(logm(M))[:n, n:])


def frechet(f, S, X, h=1e-6):
    """Central difference of a matrix function."""
    return (f(S + h * X) - f(S - h * X)) / (2 * h)


def fd_riemann(christoffel, S, X, Y, Z, h=1e-5):
    """``R(X, Y) Z`` for constant fields from a Christoffel map ``G(S, U, V)``."""

    def D(U, V, W):
        return (christoffel(S + h * U, V, W) - christoffel(S - h * U, V, W)) / (2 * h)

    G = lambda U, V: christoffel(S, U, V)  # noqa: E731
    return D(X, Y, Z) - D(Y, X, Z) + G(X, G(Y, Z)) - G(Y, G(X, Z))


def triple_integral(x, y, z):
    val, _ = quad(lambda t: 1 / ((x + t) * (y + t) * (z + t)), 0, np.inf, epsabs=1e-15, epsrel=1e-13, limit=200)
    return val


def double_integral(x, y):
    val, _ = quad(lambda t: 1 / ((x + t) * (y + t)), 0, np.inf, epsabs=1e-15, epsrel=1e-13, limit=200)
    return val


def golden_min(f, a, b, tol=1e-12):
    g = (np.sqrt(5) - 1) / 2
    c, d = b - g * (b - a), a + g * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - g * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + g * (b - a)
            fd = f(d)
    return min(fc, fd)


def rot(theta):
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [s, c]])


def koszul(inner, S, X, Y, Z, h=1e-5):
    """``g(nabla_X Y, Z)`` for constant fields, from derivatives of the metric alone."""

    def D(U, V, W):
        return (inner(S + h * U, V, W) - inner(S - h * U, V, W)) / (2 * h)

    return 0.5 * (D(X, Y, Z) + D(Y, X, Z) - D(Z, X, Y))
