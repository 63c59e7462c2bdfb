"""
Executing a contingency plan
============================

The optimal schedule is a table from (slot, demand pattern) to prices and
actions.  Running it forward against random demand should recover V_1 on
average.
"""

from spectrum_pricing import monte_carlo, run_episode, solve_dynamic

sched = solve_dynamic(1.0, 2.0, 12)
policy = sched.policy()

trace = run_episode(sched, policy, seed=3)
print("demands (light, heavy):", trace.demands.tolist())
print("actions:", trace.actions.tolist())
print("revenue:", round(trace.total, 4))

mean, stderr = monte_carlo(sched, policy, trials=100_000, seed=3)
print(f"simulated {mean:.5f} +/- {stderr:.5f}, planned {sched.v1:.5f}")
