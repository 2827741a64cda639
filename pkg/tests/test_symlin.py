"""
Symmetric matrix calculus.

Ground truth: scipy.linalg (expm, logm, sqrtm) and central finite
differences; hand-computed values for the small diagonal cases.
"""
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spdgeo.exceptions import DomainError, NotSPDError, NotSymmetricError
from spdgeo.sampling import random_orthogonal, random_spd, random_sym
from spdgeo.symlin import (
    EXP,
    IDENTITY,
    LOG,
    POW2,
    SQRT,
    as_spd,
    compose,
    divided_difference,
    eigh,
    expm_sym,
    logm_spd,
    pow_fn,
    sqrt_product,
    sqrtm_spd,
    sylvester_lift,
    sym,
    sym_basis,
    sym_to_vec,
    univariate_apply,
    univariate_diff,
    univariate_diff_inverse,
    vec_to_sym,
)
from oracles import frechet, mexp, mlog, msqrt


class TestEigh:
    def test_identity(self):
        P, d = eigh(np.eye(2))
        np.testing.assert_array_equal(P, np.eye(2))
        np.testing.assert_array_equal(d, [1, 1])

    def test_diagonal_is_sorted_ascending(self):
        P, d = eigh(np.diag([4.0, 1.0]))
        np.testing.assert_array_equal(d, [1, 4])
        np.testing.assert_array_equal(P, [[0, 1], [1, 0]])

    def test_two_by_two(self):
        P, d = eigh(np.array([[2.0, 1.0], [1.0, 2.0]]))
        np.testing.assert_allclose(d, [1, 3], atol=1e-14)
        r = 1 / np.sqrt(2)
        np.testing.assert_allclose(P, [[r, r], [-r, r]], atol=1e-14)

    def test_reconstruction_and_orthogonality(self, rng):
        for n in (1, 3, 6):
            S = random_spd(n, rng)
            e = eigh(S)
            assert np.linalg.norm(e.P.T @ e.P - np.eye(n)) <= 1e-12 * n
            assert np.linalg.norm(e.rebuild() - S) <= 1e-10 * np.linalg.norm(S)
            assert np.all(np.diff(e.d) >= 0)

    def test_repeated_eigenvalue_basis_is_canonical(self, rng):
        # two different rotations of the same matrix give the same P
        R = random_orthogonal(4, rng)
        S = sym((R * np.array([1.0, 2.0, 2.0, 5.0])) @ R.T)
        P1 = eigh(S).P
        P2 = eigh(S + 0.0).P
        np.testing.assert_array_equal(P1, P2)
        for col in P1.T:
            first = col[np.abs(col) > 1e-8][0]
            assert first > 0

    def test_apply_is_independent_of_basis_in_eigenspace(self, rng):
        R = random_orthogonal(3, rng)
        d = np.array([0.5, 0.5, 3.0])
        S = sym((R * d) @ R.T)
        c, s = np.cos(0.7), np.sin(0.7)
        B = np.eye(3)
        B[:2, :2] = [[c, -s], [s, c]]
        R2 = R @ B
        L1 = univariate_apply(LOG, S)
        L2 = sym((R2 * np.log(d)) @ R2.T)
        np.testing.assert_allclose(L1, L2, atol=1e-12)


class TestDividedDifference:
    def test_log_diagonal(self):
        assert divided_difference(LOG, 2.0, 2.0) == 0.5

    def test_log_closed(self):
        assert divided_difference(LOG, 1.0, np.e) == pytest.approx(1 / (np.e - 1), rel=1e-15)

    @given(st.floats(0.01, 100), st.floats(0.01, 100))
    def test_square_is_sum(self, x, y):
        assert divided_difference(POW2, x, y) == pytest.approx(x + y, rel=1e-8)

    @given(st.floats(1e-3, 1e3), st.floats(1e-3, 1e3))
    def test_exactly_symmetric(self, x, y):
        assert divided_difference(LOG, x, y) == divided_difference(LOG, y, x)

    def test_near_tie_uses_midpoint_derivative(self):
        x = 1.0
        y = 1.0 + 5e-8
        assert divided_difference(LOG, x, y) == pytest.approx(1 / (1 + 2.5e-8), rel=1e-15)

    def test_domain(self):
        with pytest.raises(DomainError):
            divided_difference(LOG, -1.0, 2.0)


class TestUnivariateMaps:
    @pytest.mark.parametrize("f", [LOG, EXP, SQRT, POW2, pow_fn(-1.5)])
    def test_derivatives_match_finite_differences(self, f):
        x = np.exp(np.linspace(-3, 3, 25))
        h = 1e-5 * x
        fd = (f(x + h) - f(x - h)) / (2 * h)
        assert np.all(np.abs(f.df(x) - fd) <= 1e-6 * (1 + np.abs(f.df(x))))

    def test_exp_log_inverse(self, rng):
        S = random_spd(4, rng)
        np.testing.assert_allclose(expm_sym(logm_spd(S)), S, atol=1e-10 * np.linalg.norm(S))

    def test_square_of_diagonal(self):
        np.testing.assert_allclose(univariate_apply(POW2, np.diag([1.0, 2.0])), np.diag([1.0, 4.0]))

    def test_log_against_series(self):
        S = np.array([[2.0, 1.0], [1.0, 2.0]]) / 2.5
        E = S - np.eye(2)
        series = sum((-1) ** (k + 1) * np.linalg.matrix_power(E, k) / k for k in range(1, 200))
        np.testing.assert_allclose(logm_spd(S), series, atol=1e-13)

    def test_against_scipy(self, rng):
        S = random_spd(5, rng)
        X = random_sym(5, rng)
        np.testing.assert_allclose(logm_spd(S), mlog(S), atol=1e-10)
        np.testing.assert_allclose(sqrtm_spd(S), msqrt(S), atol=1e-10)
        np.testing.assert_allclose(expm_sym(X), mexp(X), rtol=1e-10, atol=1e-10)

    def test_equivariance(self, rng):
        for _ in range(20):
            S = random_spd(4, rng)
            R = random_orthogonal(4, rng)
            np.testing.assert_allclose(
                univariate_apply(LOG, R @ S @ R.T), R @ univariate_apply(LOG, S) @ R.T, atol=1e-10
            )

    def test_domain_violation(self):
        with pytest.raises(DomainError):
            univariate_apply(LOG, np.diag([1.0, -1.0]))

    def test_compose_chain_rule(self):
        f = compose(LOG, POW2)
        x = np.array([0.3, 2.0])
        np.testing.assert_allclose(f(x), 2 * np.log(x))
        np.testing.assert_allclose(f.df(x), 2 / x)


class TestDifferential:
    def test_identity_map(self, rng):
        S, X = random_spd(3, rng), random_sym(3, rng)
        np.testing.assert_allclose(univariate_diff(IDENTITY, S, X), X, atol=1e-15)

    def test_log_at_identity(self, rng):
        X = random_sym(3, rng)
        np.testing.assert_allclose(univariate_diff(LOG, np.eye(3), X), X, atol=1e-15)

    def test_log_example(self):
        X = np.array([[0.0, 1.0], [1.0, 0.0]])
        S = np.diag([1.0, np.e])
        c = 1 / (np.e - 1)
        np.testing.assert_allclose(univariate_diff(LOG, S, X), [[0, c], [c, 0]], atol=1e-15)
        np.testing.assert_allclose(frechet(mlog, S, X), [[0, c], [c, 0]], atol=1e-6)

    @pytest.mark.parametrize("f", [LOG, SQRT, EXP, pow_fn(3)])
    def test_finite_difference_oracle(self, f, rng):
        S, X = random_spd(4, rng), random_sym(4, rng)
        fd = frechet(lambda M: univariate_apply(f, M), S, X)
        np.testing.assert_allclose(univariate_diff(f, S, X), fd, atol=1e-7)

    def test_inverse(self, rng):
        S, X = random_spd(4, rng), random_sym(4, rng)
        Y = univariate_diff(LOG, S, X)
        np.testing.assert_allclose(univariate_diff_inverse(LOG, S, Y), X, atol=1e-12)


class TestSylvester:
    def test_identity(self, rng):
        X = random_sym(3, rng)
        np.testing.assert_allclose(sylvester_lift(np.eye(3), X), X / 2)

    def test_example(self):
        X0 = sylvester_lift(np.diag([1.0, 3.0]), np.array([[4.0, 4.0], [4.0, 12.0]]))
        np.testing.assert_allclose(X0, [[2, 1], [1, 2]], atol=1e-15)

    def test_zero(self, rng):
        assert not np.any(sylvester_lift(random_spd(3, rng), np.zeros((3, 3))))

    def test_residual_and_linearity(self, rng):
        S = random_spd(5, rng)
        X, Y = random_sym(5, rng), random_sym(5, rng)
        X0 = sylvester_lift(S, X)
        assert np.linalg.norm(S @ X0 + X0 @ S - X) <= 1e-10 * np.linalg.norm(X)
        np.testing.assert_allclose(
            sylvester_lift(S, 2 * X - 3 * Y), 2 * X0 - 3 * sylvester_lift(S, Y), atol=1e-12
        )


class TestSqrtProduct:
    def test_identity_base(self, rng):
        L = random_spd(3, rng)
        np.testing.assert_allclose(sqrt_product(np.eye(3), L), msqrt(L), atol=1e-12)

    def test_inverse_pair(self, rng):
        S = random_spd(3, rng)
        np.testing.assert_allclose(sqrt_product(S, np.linalg.inv(S)), np.eye(3), atol=1e-10)

    def test_commuting_diagonal(self):
        np.testing.assert_allclose(sqrt_product(np.diag([1.0, 4.0]), np.diag([4.0, 1.0])), 2 * np.eye(2))

    def test_squares_to_product(self, rng):
        S, L = random_spd(4, rng), random_spd(4, rng)
        C = sqrt_product(S, L)
        assert np.linalg.norm(C @ C - S @ L) <= 1e-9 * np.linalg.norm(S @ L)
        w = np.linalg.eigvals(C)
        assert np.all(w.real > 0) and np.allclose(w.imag, 0)


class TestValidationAndBasis:
    def test_sym_rejects_non_square(self):
        with pytest.raises(NotSymmetricError):
            sym(np.ones((2, 3)))

    def test_spd_guard_is_scale_invariant(self):
        as_spd(1e-20 * np.diag([1.0, 2.0]))
        with pytest.raises(NotSPDError):
            as_spd(np.diag([1.0, 1e-13]))

    def test_basis_is_orthonormal(self):
        B = sym_basis(4).reshape(10, -1)
        np.testing.assert_allclose(B @ B.T, np.eye(10), atol=1e-15)

    @settings(max_examples=30)
    @given(st.lists(st.floats(-10, 10), min_size=6, max_size=6))
    def test_vec_round_trip(self, v):
        v = np.array(v)
        np.testing.assert_allclose(sym_to_vec(vec_to_sym(v)), v, atol=1e-12)
