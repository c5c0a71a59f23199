"""The conjugacy to the doubling map, the linear model, and a Beltrami field.

    python3 demos/conjugacy_and_extension.py
"""
import numpy as np

from circlelab.ba_extension import beltrami_at, piecewise_line, vanishing_profile
from circlelab.circle_map import make_map
from circlelab.conjugacy import conjugacy_map, conjugacy_residual, qs_report
from circlelab.dual_deriv import dual_derivative_table
from circlelab.linear_model import check_functional_eq, linear_model_map, reconstruct_from_dual

f, q = make_map("trig:d=2,eps=0.5"), make_map("power:d=2")
h = conjugacy_map(f, q, 12)
print(f"F o H = H o Q on {len(h.x) - 1} knots, residual {conjugacy_residual(h, f, q):.1e}")

# The fixed point has multiplier 2.5 for F and 2 for Q, so H is not
# symmetric there and M(t) settles near a constant above 1.
rep = qs_report(h, [2.0 ** -k for k in range(1, 9)])
print("M(t) for t = 2^-1..2^-8:", np.round(rep.maxima, 3))

# The linear model: L(x) = theta(theta^-1(x) + 1) and L = delta^-1 L^2(delta x).
model = linear_model_map(f, 16, K=3)
print(f"delta {model.delta:.10f}, functional equation residual {check_functional_eq(model):.1e}")
rec = reconstruct_from_dual(dual_derivative_table(f, 16), 3)
print("L^k(0) from theta   ", np.round(model.orbit, 6))
print("L^k(0) from D* only ", np.round(rec, 6))

# Beltrami coefficient of the extension. The kink 2x | x gives a constant.
kink = piecewise_line([-10.0, 0.0, 10.0], [-20.0, 0.0, 10.0])
print("kink mu(iy):", [complex(np.round(beltrami_at(kink, 1j * y).mu, 12)) for y in (0.1, 1, 7.5)],
      "vs (5-20i)/51 =", (5 - 20j) / 51)
ys = [0.2, 0.1, 0.05, 0.02, 0.01]
xs = np.sort(np.random.default_rng(0).uniform(0, 1, 16))
print("conjugacy sup|mu| by height", np.round(vanishing_profile(h, ys, xs).sup_mu, 3))
