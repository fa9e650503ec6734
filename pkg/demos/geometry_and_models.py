"""Walkthrough: the constant-modulus spectral geometry and why the reduction
model must preserve it.

A receiver phase trajectory theta maps to the spectral vector
delta = fft(exp(-1j*theta))/n.  Because its time samples all have the same
modulus, delta satisfies a family of quadratic identities (unit norm plus
vanishing cyclic-shift forms).  Estimators work in a reduced dimension; this
script shows that the piecewise-constant geometry-preserving model keeps a
reduced spectrum on the full geometry while the classical low-frequency
selection does not.
"""

import numpy as np

from pnofdm import (
    default_lft,
    geometry_residual,
    pc_ppt,
    spectral_vector,
    validate_ppt,
    wiener_realization,
)

rng = np.random.default_rng(1)

print("=== 1. Every phase trajectory lands on the geometry ===")
for rho in (0.0, 0.02, 0.5):
    theta = wiener_realization(64, rho, rng.integers(1 << 31))
    sv = spectral_vector(theta)
    print(f"rho={rho:4}: ||delta||={np.linalg.norm(sv.values):.12f}  "
          f"worst residual={sv.residual_max:.2e}")

print("\n=== 2. An arbitrary unit vector does not ===")
v = rng.standard_normal(64) + 1j * rng.standard_normal(64)
v /= np.linalg.norm(v)
print(f"random unit vector: worst residual={geometry_residual(v).max_abs:.3f}")

print("\n=== 3. The piecewise-constant core passes all three conditions ===")
model = pc_ppt(128, 8)
rep = validate_ppt(model.Ttilde)
print(f"unitarity        {rep.unitarity:.2e}")
print(f"off-diagonal     {rep.off_diagonal:.2e}")
print(f"trace sums       {rep.trace_sum:.2e}")

print("\n=== 4. Lifting a reduced spectrum: geometry preserved vs broken ===")
lft_model = default_lft(128, 8)
for _ in range(3):
    gamma = spectral_vector(rng.uniform(-np.pi, np.pi, 8)).values
    r_ppt = geometry_residual(model.T @ gamma).max_abs
    r_lft = geometry_residual(lft_model.T @ gamma).max_abs
    print(f"feasible gamma -> residual after lift: ppt {r_ppt:.2e}   lft {r_lft:.2e}")

print("\nThe low-frequency model is a fine subspace approximation but its"
      "\nlifted estimates leave the geometry; the preserving model never does.")
