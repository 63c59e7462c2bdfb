"""Slot-by-slot price optimization with the admission strategy chosen jointly.

Each slot solves three small constrained problems, one per admission strategy,
in closed form.  The only coupling between slots is the value gap
``dR = V_{n+1} - V_{n+M}``, the revenue given up by committing the channel to
a heavy SU.  All per-slot values below are computed with linear demand
``p = 1 - k r``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .admission import PolicyTable, Strategy, ValueFunction, stage_value, strategy_rule
from .market import PricePlan, ValidationError

FEASIBILITY_TOL = 1e-12


@dataclass(frozen=True)
class SlotPricing:
    strategy: Strategy
    r_l: float
    r_h: float
    case: str  # "I0" interior, "E1"/"E2" constrained extreme points
    value: float
    feasible: bool = True


def strategy_condition_slack(strategy, r_l, r_h, v_next, v_skip) -> float:
    """Smallest slack of the inequalities that make ``strategy`` optimal at these prices.

    Nonnegative means the condition holds.
    """
    vl, vh = r_l + v_next, r_h + v_skip
    strategy = Strategy(strategy)
    if strategy is Strategy.HP:
        return vh - vl
    if strategy is Strategy.LP:
        return min(vh - v_next, vl - vh)
    return v_next - vh


def slot_strategy_value(strategy, r_l, r_h, k_l, k_h, v_next, v_skip) -> tuple[float, bool]:
    """Value of one slot under ``strategy`` with elastic demand, and whether its condition holds."""
    value = stage_value(strategy, v_next, v_skip, 1.0 - k_l * r_l, 1.0 - k_h * r_h, r_l, r_h)
    return value, strategy_condition_slack(strategy, r_l, r_h, v_next, v_skip) >= 0


def _finish(strategy, r_l, r_h, case, k_l, k_h, dR, v_next, feasible=True):
    v_skip = v_next - dR
    value = stage_value(strategy, v_next, v_skip, 1.0 - k_l * r_l, 1.0 - k_h * r_h, r_l, r_h)
    slack = strategy_condition_slack(strategy, r_l, r_h, v_next, v_skip)
    scale = max(1.0, abs(v_next), abs(r_l), abs(r_h))
    feasible = feasible and slack >= -FEASIBILITY_TOL * scale
    return SlotPricing(Strategy(strategy), float(r_l), float(r_h), case, float(value), feasible)


def _edge_point(dR, k_l, k_h):
    # on the line r_h - r_l = dR, where heavy and light bring the same revenue-to-go
    s = math.sqrt(dR * dR + 3.0 / (k_l * k_h))
    return (s - dR) / 3.0, (s + 2.0 * dR) / 3.0


def hp_slot_pricing(dR: float, k_l: float, k_h: float, v_next: float = 0.0) -> SlotPricing:
    """Optimal prices when a present heavy SU is always preferred."""
    interior_bound = 1.0 / k_h - 3.0 / (4.0 * k_l)
    cap_bound = (2.0 - math.sqrt(1.0 + k_h / k_l)) / k_h
    if dR <= interior_bound:
        r_l, r_h, case = 1.0 / (2.0 * k_l), (1.0 / (4.0 * k_l) + 1.0 / k_h + dR) / 2.0, "I0"
    elif dR < cap_bound:
        (r_l, r_h), case = _edge_point(dR, k_l, k_h), "E1"
    else:
        r_l, r_h, case = 1.0 / k_h - dR, 1.0 / k_h, "E2"
        if r_l < 0:
            # a heavy SU cannot pay for the slots it blocks even at the cap
            return _finish(Strategy.HP, 0.0, r_h, case, k_l, k_h, dR, v_next, feasible=False)
    return _finish(Strategy.HP, r_l, r_h, case, k_l, k_h, dR, v_next)


def lp_slot_pricing(dR: float, k_l: float, k_h: float, v_next: float = 0.0) -> SlotPricing:
    """Optimal prices when light is preferred but a lone heavy SU is still admitted."""
    if dR > 1.0 / k_h:
        return _finish(Strategy.LP, 1.0 / (2.0 * k_l), 1.0 / k_h, "I0", k_l, k_h, dR, v_next, feasible=False)
    x = k_h / k_l
    interior_bound = (2.0 * math.sqrt(1.0 - x) - 1.0) / k_h if x <= 1.0 else -math.inf
    cap_bound = 1.0 / (2.0 * k_h) - 3.0 / (2.0 * k_l)
    if dR >= interior_bound:
        gap = 1.0 / k_h - dR
        r_l, r_h, case = k_h / 8.0 * gap * gap + 1.0 / (2.0 * k_l), (dR + 1.0 / k_h) / 2.0, "I0"
    elif dR > cap_bound:
        (r_l, r_h), case = _edge_point(dR, k_l, k_h), "E1"
    else:
        r_l, r_h, case = 1.0 / k_l, 1.0 / k_l + dR, "E2"
    return _finish(Strategy.LP, r_l, r_h, case, k_l, k_h, dR, v_next)


def ld_slot_pricing(dR: float, k_l: float, k_h: float, v_next: float = 0.0) -> SlotPricing:
    """Optimal prices when heavy SUs are never admitted; ``r_h`` only has to deter them."""
    return _finish(Strategy.LD, 1.0 / (2.0 * k_l), min(dR, 1.0 / k_h), "I0", k_l, k_h, dR, v_next)


_SLOT_SOLVERS = {Strategy.LD: ld_slot_pricing, Strategy.LP: lp_slot_pricing, Strategy.HP: hp_slot_pricing}


@dataclass(frozen=True)
class PriceSchedule:
    k_l: float
    k_h: float
    occupancy: int
    slots: tuple[SlotPricing, ...]
    values: ValueFunction

    @property
    def horizon(self) -> int:
        return len(self.slots)

    @property
    def v1(self) -> float:
        return self.values.v1

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(str(s.strategy) for s in self.slots)

    def heavy_admissible(self, n: int) -> bool:
        return n + self.occupancy - 1 <= self.horizon

    def policy(self) -> PolicyTable:
        rules = [strategy_rule(s.strategy, self.occupancy) for s in self.slots]
        return PolicyTable(self.horizon, (1, self.occupancy), rules, self.labels)

    def plan(self) -> PricePlan:
        prices = np.array([[s.r_l, s.r_h] for s in self.slots])
        probs = np.clip(1.0 - prices * np.array([self.k_l, self.k_h]), 0.0, 1.0)
        return PricePlan(prices, probs, (1, self.occupancy))


def solve_dynamic(k_l: float, k_h: float, horizon: int, occupancy: int = 2) -> PriceSchedule:
    """Optimal per-slot prices and admission strategies by backward recursion.

    A heavy occupancy larger than the horizon is accepted; such a heavy type
    simply never fits and every slot is light dominant.
    """
    if not (k_l > 0 and k_h > 0):
        raise ValidationError("elasticities must be > 0")
    if int(horizon) != horizon or horizon < 1:
        raise ValidationError(f"horizon must be a positive integer, got {horizon!r}")
    if int(occupancy) != occupancy or occupancy < 2:
        raise ValidationError(f"heavy occupancy must be an integer >= 2, got {occupancy!r}")
    M = occupancy
    V = [0.0] * (horizon + M + 1)
    slots = [None] * horizon
    for n in range(horizon, 0, -1):
        v_next = V[n + 1]
        dR = v_next - V[n + M]
        if n + M - 1 > horizon:
            best = ld_slot_pricing(dR, k_l, k_h, v_next)
        else:
            # visiting LD, LP, HP in order and requiring strict gains breaks ties toward LD
            best = None
            for solver in _SLOT_SOLVERS.values():
                cand = solver(dR, k_l, k_h, v_next)
                if cand.feasible and (best is None or cand.value > best.value):
                    best = cand
        slots[n - 1] = best
        V[n] = best.value
    return PriceSchedule(k_l, k_h, M, tuple(slots), ValueFunction(tuple(V[1:])))
