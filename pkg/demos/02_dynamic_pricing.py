"""
Dynamic pricing with elastic demand
===================================

Prices and admission are chosen together, slot by slot, from the end of the
horizon backwards.  Demand is linear in price, p = 1 - k r.
"""

from spectrum_pricing import optimize_static_prices, solve_dynamic

k_l, k_h, N = 1.0, 1.0, 6
sched = solve_dynamic(k_l, k_h, N)
for n, slot in enumerate(sched.slots, start=1):
    print(f"slot {n}: {slot.strategy}  case {slot.case}  r_l = {slot.r_l:.5f}  r_h = {slot.r_h:.5f}  V = {slot.value:.5f}")

# a single price pair for the whole horizon, with optimal admission behind it
static = optimize_static_prices(k_l, k_h, N)
print(f"static: r_l = {static.r_l:.5f}  r_h = {static.r_h:.5f}  V_1 = {static.value:.6f}  ({static.regime})")
print(f"dynamic V_1 = {sched.v1:.6f}, gain {100 * (sched.v1 - static.value) / static.value:.3f}%")
