"""
Where does dynamic pricing help?
================================

Compare optimal dynamic prices with the best static prices and with the
switch-over heuristic on a small elasticity grid.
"""

import numpy as np

from spectrum_pricing import improvement, optimize_static_prices, solve_dynamic, switchover_baseline

N = 100
ks = np.array([10.0, 40.0, 70.0, 100.0])

print("improvement over static pricing (%), rows k_l, columns k_h")
print("        " + "".join(f"{k:>10.0f}" for k in ks))
for k_l in ks:
    row = []
    for k_h in ks:
        dyn = solve_dynamic(k_l, k_h, N).v1
        static = optimize_static_prices(k_l, k_h, N, resolution=200).value
        row.append(100 * improvement(dyn, static))
    print(f"{k_l:8.0f}" + "".join(f"{x:10.4f}" for x in row))

# the switch-over rule admits a heavy SU only if half its price covers a light one
for k_l, k_h in [(100.0, 65.0), (10.0, 10.0), (1.0, 1.0)]:
    dyn = solve_dynamic(k_l, k_h, N).v1
    base, _ = switchover_baseline(k_l, k_h, N)
    print(f"k = ({k_l:g}, {k_h:g}): dynamic beats switch-over by {100 * improvement(dyn, base):.4f}%")
