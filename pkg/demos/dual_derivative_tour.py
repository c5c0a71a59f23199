"""Dual derivatives of three degree-2 maps, from partitions to the solenoid.

    python3 demos/dual_derivative_tour.py
"""
import numpy as np

from circlelab.circle_map import make_map
from circlelab.dual_deriv import (check_compatibility, check_summation, dual_derivative,
                                  dual_derivative_table, gap_decay, solenoid)
from circlelab.symbolic import bounded_geometry_report, partition_endpoints

maps = {name: make_map(name) for name in ("power:d=2", "pl:s=0.3", "trig:d=2,eps=0.5")}

# Level-3 partitions. The power map cuts evenly, the others do not.
for name, m in maps.items():
    lv = partition_endpoints(m, 3)
    print(f"{name:18s} level-3 lengths", np.round(np.asarray(lv.lengths, dtype=float), 4))

# D* at a few dual words. For PL it only sees the last symbol.
tabs = {name: dual_derivative_table(m, 14) for name, m in maps.items()}
for w in ("0", "1", "0110", "1011"):
    print(f"D*({w:>4s})", {k: round(t.value(w), 6) for k, t in tabs.items()})

# On the trig map the depth gaps shrink geometrically.
m = maps["trig:d=2,eps=0.5"]
gaps, c, tau = gap_decay(m, "0110", 24)
print(f"trig gaps fitted as {c:.2f} * {tau:.3f}^k, last gap {gaps[-1]:.1e}")
print("D*(...000) =", dual_derivative(m, "0" * 30, 30).value, "(slope at the fixed point is 2.5)")

# Summation holds for every map. Compatibility separates smooth from PL.
for name, mp in maps.items():
    worst = max(check_summation(mp, n).residual for n in range(1, 13))
    comp = check_compatibility(mp, terms=10, depth=16)
    print(f"{name:18s} summation {worst:.1e}  compatibility {comp.verdict} "
          f"(spread {comp.spread:.1e}, witness {comp.witness})")

# Geometry stays bounded for trig. For PL the wrap-around pair grows like (7/3)^n.
for n in (4, 8, 12):
    print(f"n={n:2d} nearby ratio trig {bounded_geometry_report(m, n).nearby:.3f}  "
          f"pl {bounded_geometry_report(maps['pl:s=0.3'], n).nearby:.1f}")

# The solenoid value two ways: a ratio of D* and a product of compatibility terms.
for w in ("01", "0111", "1101"):
    s = solenoid(m, w, terms=12, depth=18)
    print(f"sol({w}) ratio {s.ratio_form:.6f}  product {s.product_form:.6f}")
