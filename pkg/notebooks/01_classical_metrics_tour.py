"""
A tour of the classical SPD metrics
===================================

Same pair of covariance matrices, six metrics.  We look at distances,
midpoints, how the geodesics treat the boundary of the cone and the sign of
the curvature.
"""

# %%
import numpy as np

from spdgeo import classical_metrics as cm
from spdgeo.classical_metrics import MetricId

np.set_printoptions(precision=4, suppress=True)

S = np.array([[2.0, 0.3], [0.3, 0.5]])
L = np.array([[0.4, -0.2], [-0.2, 3.0]])
metrics = [MetricId(k) for k in ("e", "le", "ai", "pa", "bw")]

# %% distances and midpoints
# The midpoint exp(S, log(S, L) / 2) is a different matrix for each metric.
# Its determinant shows the "swelling" of the Euclidean mean.
for mid in metrics:
    M = cm.exp_map(mid, S, cm.log_map(mid, S, L), 0.5)
    print(f"{mid.kind:18s} dist={cm.dist(mid, S, L):.4f}  det(mid)={np.linalg.det(M):.4f}")
print("geometric mean of determinants:", np.sqrt(np.linalg.det(S) * np.linalg.det(L)))

# %% how far does a straight line go?
# Euclidean and Bures-Wasserstein geodesics can leave the cone; the others never do.
X = np.diag([1.0, -2.0])
for mid in metrics:
    lo, hi = cm.geodesic_domain(mid, np.eye(2), X)
    print(f"{mid.kind:18s} domain ({lo:g}, {hi:g})")

# %% curvature on random planes
rng = np.random.default_rng(0)
for mid in metrics + [MetricId("bkm")]:
    ks = []
    for _ in range(200):
        A, B = rng.standard_normal((2, 3, 3))
        ks.append(cm.sectional_curvature(mid, np.eye(3) + 0.1 * np.diag([1, 2, 3]), A + A.T, B + B.T))
    print(f"{mid.kind:18s} curvature range [{min(ks):+.4f}, {max(ks):+.4f}]")

# %% the trace term
# beta changes the weight of tr(S^-1 X)^2; the isometry to beta = 0 is an
# explicit rescaling by a power of the determinant.
for beta in (-0.4, 0.0, 1.0):
    mid = MetricId("ai", 1.0, beta)
    fS, target = cm.trace_isometry(mid, S)
    fL, _ = cm.trace_isometry(mid, L)
    print(f"beta={beta:+.1f}  dist={cm.dist(mid, S, L):.6f}  via isometry={cm.dist(target, fS, fL):.6f}")
