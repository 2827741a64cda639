"""
Kernel metrics, pullbacks and completeness
==========================================

A kernel phi(x, y) weights the eigenbasis components of a tangent vector.
This script pulls kernels back by powers, watches them drift toward the
log-Euclidean kernel and measures how far the boundary of the cone is.
"""

# %%
import numpy as np

from spdgeo.kernel_family import builtin_kernel, builtin_mean_kernel, completeness_power, pullback_kernel, ray_length
from spdgeo.symlin import pow_fn

x, y = 0.5, 3.0
names = ["euclidean", "log_euclidean", "affine_invariant", "polar_affine", "bures_wasserstein", "bkm"]
for name in names:
    print(f"{name:18s} phi({x}, {y}) = {float(builtin_kernel(name)(x, y)):.5f}")

# %% power pullbacks
# p^2 * (pullback by x^p) / phi(1, 1) tends to the log-Euclidean kernel.
# The error shrinks linearly in p; near the identity it is much smaller.
le = float(builtin_kernel("le")(x, y))
for name in ("euclidean", "bures_wasserstein", "affine_invariant"):
    k = builtin_kernel(name)
    row = []
    for p in (1.0, 0.1, 0.01, 0.001):
        v = p**2 * float(pullback_kernel(k, pow_fn(p))(x, y)) / float(k(1.0, 1.0))
        row.append(f"{abs(v / le - 1):.1e}")
    print(f"{name:18s} rel. gap to LE at p=1, .1, .01, .001: {row}")

# %% distance to the boundary along s -> s I
for name in names:
    lengths = [ray_length(builtin_kernel(name), 2, eps, 1.0) for eps in (1e-2, 1e-4, 1e-8)]
    v = completeness_power(builtin_mean_kernel(name))
    print(f"{name:18s} theta={v.theta:g}  lengths {np.round(lengths, 3)}  complete={v.complete}")
