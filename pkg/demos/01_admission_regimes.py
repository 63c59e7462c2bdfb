"""
Admission control at fixed prices
=================================

Two SU types share one channel: a light SU uses one slot, a heavy SU uses two.
With prices fixed, the only decision is whom to let in when both show up.
"""

import numpy as np

from spectrum_pricing import MarketInstance, classify_price_ratio, hp_threshold_sequence, solve_admission

p_l, p_h = 0.5, 0.5
N = 8

# sweep the heavy price and watch the per-slot strategy change
for r_h in [0.3, 1.2, 1.8, 2.5]:
    inst = MarketInstance.two_type(N, 2, p_l, p_h, 1.0, r_h)
    policy, values = solve_admission(inst)
    regime = classify_price_ratio(r_h, p_l, p_h)
    print(f"r_h/r_l = {r_h:4.1f}  {str(regime):16s} V_1 = {values.v1:.4f}  slots: {' '.join(policy.labels)}")

# in the middle band the threshold depends on how many slots remain
theta, top = hp_threshold_sequence(p_l, p_h, N)
print("per-slot heavy-priority thresholds:", np.round(theta, 4))
print("supremum:", top)
