"""Invariant densities, dual cylinder measures and entropy.

    python3 demos/measures_and_entropy.py
"""
import math

import numpy as np

from circlelab.circle_map import make_map
from circlelab.dual_deriv import dual_derivative_table
from circlelab.measures import (cesaro_distribution, dual_cylinder_measure, entropy_cylinder,
                                entropy_rohlin, equilibrium_residual, gibbs_report,
                                invariant_density)

m = make_map("trig:d=2,eps=0.5")
rho = invariant_density(m)
print(f"density: {rho.iterations} iterations, residual {rho.residual:.1e}, "
      f"range [{rho.values.min():.4f}, {rho.values.max():.4f}]")

# The Cesaro route converges like 1/n, so it lags behind the transfer iteration.
dist = rho.distribution()
for n in (2, 4, 6, 8, 10):
    g = cesaro_distribution(m, n)
    print(f"Cesaro n={n:2d}  sup |H_n - mu| = {np.max(np.abs(g.y - dist(g.x))):.2e}")

# Cylinder masses on the dual side, and both entropy estimates.
mu = dual_cylinder_measure(m, dist, 14)
tab = dual_derivative_table(m, 14)
est = entropy_cylinder(mu)
print("conditional entropy by depth", np.round(est.conditional[::3], 8))
print(f"Rohlin {entropy_rohlin(m, rho):.8f}, cylinder {est.value:.8f}, log 2 {math.log(2):.8f}")
g = gibbs_report(mu, tab)
print(f"Gibbs bracket [{min(g.lower):.5f}, {max(g.upper):.5f}], "
      f"h + int log(1/D*) = {equilibrium_residual(mu, tab):.1e}")

# Lebesgue-preserving maps with a long flat stretch lose entropy as s -> 1.
print(" s      h(f_s)   upper bound")
for s in (0.5, 0.7, 0.9, 0.97):
    r = 1 - s
    bound = -math.log(s) - r * (1 + s) * math.log(r / 4)
    print(f"{s:.2f}  {entropy_rohlin(make_map('fs-smooth', s=s, M=4)):.5f}  {bound:.5f}")
