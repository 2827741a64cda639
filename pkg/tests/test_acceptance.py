"""
Acceptance suite: one test per exit criterion, each printing a single
``criterion N PASS|FAIL`` line (collected in the terminal summary).

Ground truth: polarization Gram matrices and dense inverses, scipy matrix
functions (non-symmetric square roots included), golden-section Procrustes
minimization, adaptive quadrature and closed-form geodesics.  Tolerances are
pinned in the constants below.
"""
import time

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.linalg import sqrtm

from spdgeo import classical_metrics as cm
from spdgeo.classical_metrics import AI, BKM, BW, MetricId
from spdgeo.geodesic_engine import IntegratorConfig, bw_transport_ode, connection_transport, hamiltonian_geodesic
from spdgeo.invariant_metrics import cometric_eval, eig_continuity_bounds, gram_matrix, metric_eval, pullback_triple
from spdgeo.kernel_family import (
    KernelSpec,
    bod_eval,
    bost_cometric,
    bost_eval,
    builtin_kernel,
    pullback_kernel,
    ray_length,
    separable_cometric,
    separable_dual,
)
from spdgeo.sampling import (
    random_bost,
    random_kernel,
    random_orthogonal,
    random_separable,
    random_spd,
    random_sym,
    random_triple,
)
from spdgeo.symlin import EXPM1, INV, POW2, eigh, univariate_apply, univariate_diff
from oracles import gram, golden_min, mlog, msqrt, rot, triple_integral

pytestmark = pytest.mark.acceptance

TOL_CURV = 1e-8
TOL_PROCRUSTES = 1e-6
TOL_DUAL = 1e-10
TOL_SEP = 1e-12
TOL_HAM = 1e-6
ORDER, ORDER_TOL = 4.0, 0.3
TOL_TRANSPORT = 1e-7
TOL_PULLBACK = 1e-9
TOL_KERNEL_FORM = 1e-10
TOL_ROUNDTRIP, TOL_EQUIV = 1e-9, 1e-8


def verdict(ok):
    return "PASS" if ok else "FAIL"


def rel_dev(A, B):
    """max |A - B| relative to max |B|."""
    return float(np.max(np.abs(A - B)) / max(np.max(np.abs(B)), 1e-300))


def test_criterion_01_ai_curvature(rng, report):
    t0 = time.perf_counter()
    n, worst = 3, 0.0
    for alpha in (0.5, 1.0, 2.0):
        for beta in (0.0, 0.3):
            mid = MetricId("ai", alpha, beta)
            S = random_spd(n, rng)
            Sh = msqrt(S)
            basis = {k: Sh @ v @ Sh for k, v in cm.ai_curvature_basis(alpha, beta, n).items()}
            keys = sorted(basis)
            for a in range(len(keys)):
                for b in range(a + 1, len(keys)):
                    (i, j), (k, l) = keys[a], keys[b]
                    diag_a, diag_b = i == j, k == l
                    if diag_a != diag_b and len({i, j} & {k, l}) == 1 and {i, j} != {k, l}:
                        want = -1 / (4 * alpha)  # (ii, ij)
                    elif not diag_a and not diag_b and len({i, j} & {k, l}) == 1:
                        want = -1 / (8 * alpha)  # (ij, ik)
                    else:
                        want = 0.0
                    got = cm.sectional_curvature(mid, S, basis[keys[a]], basis[keys[b]])
                    worst = max(worst, abs(got - want))
    dt = time.perf_counter() - t0
    ok = worst <= TOL_CURV and dt < 5
    report(f"criterion 1 {verdict(ok)} AI basis-plane curvature max dev {worst:.2e} (tol {TOL_CURV:g}), {dt:.2f}s (< 5s)")
    assert ok


def test_criterion_02_bw_procrustes(rng, report):
    t0 = time.perf_counter()
    worst = 0.0
    grid = np.linspace(0, 2 * np.pi, 73)
    for _ in range(100):
        S, L = random_spd(2, rng), random_spd(2, rng)
        A, B = msqrt(S), msqrt(L)
        best = np.inf
        for refl in (np.eye(2), np.diag([1.0, -1.0])):
            f = lambda t: np.sum((A - B @ rot(t) @ refl) ** 2)  # noqa: E731
            t0_ = grid[np.argmin([f(t) for t in grid])]
            best = min(best, golden_min(f, t0_ - 0.1, t0_ + 0.1))
        trace_form = np.trace(S) + np.trace(L) - 2 * np.real(np.trace(sqrtm(S @ L)))
        worst = max(worst, abs(best - trace_form), abs(cm.dist(BW, S, L) ** 2 - trace_form))
    dt = time.perf_counter() - t0
    ok = worst <= TOL_PROCRUSTES and dt < 5
    report(f"criterion 2 {verdict(ok)} BW dist^2 vs Procrustes max dev {worst:.2e} (tol {TOL_PROCRUSTES:g}), {dt:.2f}s (< 5s)")
    assert ok


def test_criterion_03_cometric_duality(rng, report):
    makers = [lambda n: random_kernel(rng), lambda n: random_bost(n, rng),
              lambda n: random_separable(n, rng), lambda n: random_triple(n, rng)]
    worst_dual = worst_bost = 0.0
    for k in range(50):
        n = int(rng.integers(2, 5))
        m = makers[k % 4](n)
        S = random_spd(n, rng)
        G = gram(lambda X, Y: metric_eval(m, S, X, Y), n)
        Gs = gram(lambda X, Y: cometric_eval(m, S, X, Y), n)
        worst_dual = max(worst_dual, float(np.max(np.abs(G @ Gs - np.eye(len(G))))))
        b = random_bost(n, rng)
        Gb = gram(lambda X, Y: bost_eval(b, S, X, Y), n)
        Gd = gram(lambda X, Y: bost_eval(bost_cometric(b), S, X, Y), n)
        worst_bost = max(worst_bost, rel_dev(Gd, np.linalg.inv(Gb)))
    ok = worst_dual <= TOL_DUAL and worst_bost <= TOL_DUAL
    report(f"criterion 3 {verdict(ok)} max |G G* - I| {worst_dual:.2e}, BOST dual vs dense inverse {worst_bost:.2e} (tol {TOL_DUAL:g})")
    assert ok


def test_criterion_04_separable_closed_form(rng, report):
    worst_inv = worst_dual = 0.0
    for k in range(500):
        n = (2, 3, 5)[k % 3]
        s = random_separable(n, rng)
        Sig = random_spd(n, rng)
        d = np.linalg.eigvalsh(Sig)
        Sd = s.spectral_form(d)[1]
        worst_inv = max(worst_inv, rel_dev(separable_cometric(s, d).S, np.linalg.inv(Sd)))
        if k % 10 == 0:
            dual = separable_dual(s, d)
            worst_dual = max(worst_dual, rel_dev(gram_matrix(dual, Sig), gram_matrix(s, Sig, cometric=True)))
    ok = worst_inv <= TOL_SEP and worst_dual <= TOL_SEP
    report(f"criterion 4 {verdict(ok)} separable inverse max rel dev {worst_inv:.2e}, dual spec Gram {worst_dual:.2e} (tol {TOL_SEP:g})")
    assert ok


def _unit(mid, S, X):
    return X / cm.norm(mid, S, X)


def test_criterion_05_hamiltonian(rng, report):
    n = 3
    errs, orders = {}, {}
    for mid in (AI, MetricId("le"), BW, MetricId("e")):
        # eigenvalues in [1.5, 4] keep the unit Euclidean line inside the cone
        S = random_spd(n, rng, eigenvalues=rng.uniform(1.5, 4.0, n))
        X = _unit(mid, S, random_sym(n, rng))
        exact = cm.exp_map(mid, S, X)
        steps = (25, 50, 100, 200) if mid.kind != "euclidean" else (200,)
        e = [np.max(np.abs(hamiltonian_geodesic(mid, S, X, cfg=IntegratorConfig(k)).endpoint - exact)) for k in steps]
        errs[mid.kind] = e[-1]
        if len(steps) > 1:
            orders[mid.kind] = -np.polyfit(np.log(steps), np.log(e), 1)[0]
    ok = max(errs.values()) <= TOL_HAM and all(abs(o - ORDER) <= ORDER_TOL for o in orders.values())
    es = ", ".join(f"{k[:2]} {v:.1e}" for k, v in errs.items())
    os_ = ", ".join(f"{k[:2]} {v:.2f}" for k, v in orders.items())
    report(f"criterion 5 {verdict(ok)} endpoint err @200 [{es}] (tol {TOL_HAM:g}); order [{os_}] ({ORDER:g} +- {ORDER_TOL:g})")
    assert ok


def test_criterion_06_transport(rng, report):
    w_comm = w_norm = w_ai = 0.0
    for _ in range(5):
        Q = random_orthogonal(3, rng)
        S = Q @ np.diag(np.exp(rng.uniform(-1, 1, 3))) @ Q.T
        L = Q @ np.diag(np.exp(rng.uniform(-1, 1, 3))) @ Q.T
        X = random_sym(3, rng)
        w_comm = max(w_comm, float(np.max(np.abs(bw_transport_ode(S, L, X) - cm.parallel_transport(BW, S, L, X)))))
        S, L = random_spd(3, rng), random_spd(3, rng)
        Y = bw_transport_ode(S, L, X)
        w_norm = max(w_norm, abs(cm.norm(BW, L, Y) / cm.norm(BW, S, X) - 1))
        Si = np.linalg.inv(S)
        closed = np.real(sqrtm(L @ Si) @ X @ sqrtm(Si @ L))
        w_ai = max(w_ai, float(np.max(np.abs(connection_transport(AI, S, L, X) - closed))))
    ok = max(w_comm, w_norm, w_ai) <= TOL_TRANSPORT
    report(f"criterion 6 {verdict(ok)} BW ode vs commuting {w_comm:.1e}, BW norm drift {w_norm:.1e}, AI ode vs closed {w_ai:.1e} (tol {TOL_TRANSPORT:g})")
    assert ok


def test_criterion_07_kernel_stability(rng, report):
    worst_k = worst_t = 0.0
    for f in (POW2, INV, EXPM1):
        for _ in range(200):
            k = random_kernel(rng)
            S, X = random_spd(3, rng, log_range=1.0), random_sym(3, rng)
            fS, dX = univariate_apply(f, S), univariate_diff(f, S, X)
            direct = bod_eval(k, fS, dX, dX)
            worst_k = max(worst_k, abs(bod_eval(pullback_kernel(k, f), S, X, X) - direct) / abs(direct))
        for _ in range(20):
            t = random_triple(3, rng)
            tp = pullback_triple(t, f)
            for _ in range(10):
                S, X = random_spd(3, rng, log_range=1.0), random_sym(3, rng)
                fS, dX = univariate_apply(f, S), univariate_diff(f, S, X)
                direct = metric_eval(t, fS, dX, dX)
                worst_t = max(worst_t, abs(metric_eval(tp, S, X, X) - direct) / abs(direct))
    ok = max(worst_k, worst_t) <= TOL_PULLBACK
    report(f"criterion 7 {verdict(ok)} pullback kernel rel dev {worst_k:.1e}, pullback triple {worst_t:.1e} (tol {TOL_PULLBACK:g})")
    assert ok


def test_criterion_08_completeness(report):
    n = 2
    lines, ok = [], True
    for name, complete in [("affine_invariant", True), ("log_euclidean", True), ("polar_affine", True),
                           ("euclidean", False), ("bures_wasserstein", False)]:
        k = builtin_kernel(name)
        full = ray_length(k, n, 1e-8, 1.0)
        short = ray_length(k, n, 1e-3, 1.0)
        # quadrature oracle in the radial variable
        ref, _ = quad(lambda s: np.sqrt(n / k(s, s)), 1e-8, 1.0, points=[1e-6, 1e-4, 1e-2], limit=200)
        ok &= abs(full - ref) <= 1e-6 * ref
        ok &= full > 10 if complete else full <= 10 * short
        lines.append(f"{name[:2]} {full:.3g}")
    report(f"criterion 8 {verdict(ok)} ray lengths on [1e-8, 1]: {', '.join(lines)} (complete > 10; incomplete <= 10x [1e-3, 1])")
    assert ok


def test_criterion_09_continuity(rng, report):
    v_eig = v_vec = skipped = 0
    for k in range(1000):
        n = int(rng.integers(2, 6))
        S = random_spd(n, rng)
        L = S + 10.0 ** rng.uniform(-6, 0) * random_sym(n, rng)
        b = eig_continuity_bounds(S, L)
        d, delta = np.linalg.eigvalsh(S), np.linalg.eigvalsh(L)
        dm = np.linalg.norm(S - L)
        v_eig += np.linalg.norm(d - delta) > dm * (1 + 1e-12) + 1e-14
        if b.P is None:
            skipped += 1
            continue
        # P must be an orthogonal eigenbasis of S; Q is the default basis of L
        D = b.P.T @ S @ b.P
        basis_ok = np.allclose(b.P.T @ b.P, np.eye(n), atol=1e-10) and np.allclose(
            D - np.diag(np.diag(D)), 0, atol=1e-9 * np.abs(d).max())
        m = np.min(np.diff(d)) ** 2
        lhs = np.linalg.norm(b.P - eigh(L).P) ** 2
        v_vec += (not basis_ok) or lhs > 4 * np.sqrt(n / m) * dm * (1 + 1e-12) + 1e-13
    ok = v_eig == 0 and v_vec == 0
    report(f"criterion 9 {verdict(ok)} 1000 pairs: eigenvalue-bound violations {v_eig}, eigenvector-bound violations {v_vec} ({skipped} near-degenerate skipped)")
    assert ok


def test_criterion_10_kernel_forms(rng, report):
    worst = 0.0
    mids = [MetricId("e"), MetricId("le"), AI, MetricId("pa"), BW, BKM]
    for k in range(500):
        mid = mids[k % len(mids)]
        S, X = random_spd(4, rng), random_sym(4, rng)
        scale = 4.0 if mid.kind == "polar_affine" else 1.0
        kv = scale * bod_eval(builtin_kernel(mid.kind), S, X, X)
        worst = max(worst, abs(cm.inner(mid, S, X, X) - kv) / kv)
    logmean = KernelSpec(lambda x, y: np.where(np.isclose(x, y, rtol=1e-12), x, (x - y) / np.log(x / np.where(x == y, 1, y))))
    worst_bkm = 0.0
    for _ in range(100):
        S, X = random_spd(4, rng), random_sym(4, rng)
        kv = bod_eval(logmean, S, X, X)
        worst_bkm = max(worst_bkm, abs(cm.bkm_metric(S, X, X) - kv) / kv)
    worst_m3 = 0.0
    for _ in range(50):
        x, y, z = np.exp(rng.uniform(-3, 3, 3))
        worst_m3 = max(worst_m3, abs(cm.bkm_m3(x, y, z) / triple_integral(x, y, z) - 1))
    for xyz in [(1, 2, 4), (2, 2, 2), (1, 1 + 1e-8, 3), (0.5, 0.5 + 1e-6, 0.5 - 1e-6)]:
        worst_m3 = max(worst_m3, abs(cm.bkm_m3(*xyz) / triple_integral(*xyz) - 1))
    ok = max(worst, worst_bkm, worst_m3) <= TOL_KERNEL_FORM
    report(f"criterion 10 {verdict(ok)} classical vs kernel {worst:.1e}, BKM vs log-mean kernel {worst_bkm:.1e}, m3 vs quadrature {worst_m3:.1e} (tol {TOL_KERNEL_FORM:g})")
    assert ok


def test_criterion_11_roundtrip_equivariance(rng, report):
    t0 = time.perf_counter()
    mids = [MetricId("e"), MetricId("le"), AI, MetricId("pa"), BW, MetricId("ai", 2.0, 0.3), MetricId("le", 1.0, 0.5)]
    w_rt = w_eq = 0.0
    for mid in mids:
        for _ in range(500):
            S, L = random_spd(3, rng), random_spd(3, rng)
            V = cm.log_map(mid, S, L)
            w_rt = max(w_rt, rel_dev(cm.exp_map(mid, S, V), L))
            R = random_orthogonal(3, rng)
            c = lambda M: R @ M @ R.T  # noqa: E731
            X = random_sym(3, rng, 0.3)
            t = min(1.0, 0.5 * cm.geodesic_domain(mid, S, X).t_hi)
            w_eq = max(
                w_eq,
                abs(cm.dist(mid, c(S), c(L)) - cm.dist(mid, S, L)) / cm.dist(mid, S, L),
                rel_dev(cm.log_map(mid, c(S), c(L)), c(V)),
                rel_dev(cm.exp_map(mid, c(S), c(X), t), c(cm.exp_map(mid, S, X, t))),
            )
            if mid.kind != "bures_wasserstein":
                w_eq = max(w_eq, rel_dev(cm.parallel_transport(mid, c(S), c(L), c(X)), c(cm.parallel_transport(mid, S, L, X))))
    dt = time.perf_counter() - t0
    ok = w_rt <= TOL_ROUNDTRIP and w_eq <= TOL_EQUIV
    report(f"criterion 11 {verdict(ok)} exp/log round trip {w_rt:.1e} (tol {TOL_ROUNDTRIP:g}), O(n)-equivariance {w_eq:.1e} (tol {TOL_EQUIV:g}), {dt:.1f}s; suite total in summary")
    assert ok
