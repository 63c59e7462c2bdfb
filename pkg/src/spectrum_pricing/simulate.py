"""Seeded Monte Carlo execution of price schedules and admission policies.

Randomness comes from numpy's PCG64 generator.  Trials are simulated in
fixed-size blocks; block ``b`` draws from ``SeedSequence(seed, spawn_key=(b,))``,
so results depend only on (seed, trials) and blocks can run in any order.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .admission import PolicyTable, Strategy, ValueFunction, stage_value
from .dynamic import PriceSchedule, SlotPricing, ld_slot_pricing, solve_dynamic
from .market import ChannelModel, MarketInstance, PricePlan, ValidationError

BLOCK = 8192


@dataclass(frozen=True)
class EpisodeTrace:
    prices: np.ndarray  # (N, I)
    demands: np.ndarray  # (N, I) presence bits
    actions: np.ndarray  # (N,) admitted occupancy, 0 for none
    revenues: np.ndarray  # (N,)
    remaining: np.ndarray  # (N,) busy slots left after the slot's transition
    gains: np.ndarray | None = None  # (N, I, max occupancy) when a channel is simulated

    @property
    def total(self) -> float:
        return float(self.revenues.sum())


def _plan_of(schedule) -> PricePlan:
    if isinstance(schedule, PricePlan):
        return schedule
    if isinstance(schedule, MarketInstance):
        return PricePlan.constant(schedule)
    return schedule.plan()


def _rng(seed: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(block,))))


def _run_block(plan, policy, rng, trials, channel, record):
    N, I = plan.prices.shape
    if policy.horizon != N:
        raise ValidationError(f"policy covers {policy.horizon} slots but the schedule has {N}")
    occ = np.array(plan.occupancies)
    weights = 2 ** np.arange(I - 1, -1, -1)
    depth = int(occ.max())
    used = np.arange(depth)[None, :] < occ[:, None]  # (I, depth) slots each type would occupy

    remaining = np.zeros(trials, dtype=np.int64)
    total = np.zeros(trials)
    log = {"demands": [], "actions": [], "revenues": [], "remaining": [], "gains": []}
    for n in range(N):
        if channel is None:
            demand = rng.random((trials, I)) < plan.probs[n]
        else:
            gains = rng.uniform(channel.gain_low, channel.gain_high, (trials, I, depth))
            nats = channel.slot_duration * channel.bandwidth * np.log1p(channel.snr_scale * gains)
            utility = channel.valuation * np.where(used, nats, 0.0).sum(axis=2)
            demand = utility >= plan.prices[n]
            if record:
                log["gains"].append(gains[0])
        pattern = demand.astype(np.int64) @ weights
        action = np.where(remaining > 0, 0, policy.rule_array(n + 1)[pattern])
        price_of = np.zeros(depth + 1)
        price_of[occ] = plan.prices[n]
        revenue = price_of[action]
        total += revenue
        remaining = np.where(remaining > 0, remaining - 1, np.maximum(action - 1, 0))
        if record:
            log["demands"].append(demand[0].astype(np.int64))
            log["actions"].append(action[0])
            log["revenues"].append(revenue[0])
            log["remaining"].append(remaining[0])
    return total, log


def run_episode(schedule, policy: PolicyTable, seed: int, channel: ChannelModel | None = None) -> EpisodeTrace:
    """One forward run; identical to the single trial of ``monte_carlo(..., trials=1, seed)``."""
    plan = _plan_of(schedule)
    _, log = _run_block(plan, policy, _rng(seed, 0), 1, channel, record=True)
    return EpisodeTrace(
        prices=plan.prices.copy(),
        demands=np.array(log["demands"]),
        actions=np.array(log["actions"]),
        revenues=np.array(log["revenues"]),
        remaining=np.array(log["remaining"]),
        gains=np.array(log["gains"]) if channel is not None else None,
    )


def monte_carlo(schedule, policy: PolicyTable, trials: int, seed: int, channel: ChannelModel | None = None):
    """Mean episode revenue and its standard error (0 for a single trial)."""
    if trials < 1:
        raise ValidationError(f"trials must be >= 1, got {trials}")
    plan = _plan_of(schedule)
    totals = []
    for b, start in enumerate(range(0, trials, BLOCK)):
        size = min(BLOCK, trials - start)
        totals.append(_run_block(plan, policy, _rng(seed, b), size, channel, record=False)[0])
    totals = np.concatenate(totals)
    mean = float(np.mean(totals))
    stderr = float(np.std(totals, ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0
    return mean, stderr


def _switchover_values(rl, rh, k_l, k_h, v_next, v_skip):
    p_l, p_h = 1.0 - k_l * rl, 1.0 - k_h * rh
    hp = rh / 2.0 >= rl
    return np.where(
        hp,
        stage_value(Strategy.HP, v_next, v_skip, p_l, p_h, rl, rh),
        stage_value(Strategy.LD, v_next, v_skip, p_l, p_h, rl, rh),
    )


def _best_switchover_prices(k_l, k_h, v_next, v_skip, resolution):
    cap_l, cap_h = 1.0 / k_l, 1.0 / k_h

    def search(rl, rh):
        vals = _switchover_values(rl[:, None], rh[None, :], k_l, k_h, v_next, v_skip)
        i, j = np.unravel_index(int(np.argmax(vals)), vals.shape)
        best = (rl[i], rh[j], float(vals[i, j]))
        # the rule switches on r_h = 2 r_l; search that line too
        line = np.linspace(rl[0], min(rl[-1], cap_h / 2.0), rl.size)
        if line[-1] >= line[0]:
            lv = _switchover_values(line, 2.0 * line, k_l, k_h, v_next, v_skip)
            t = int(np.argmax(lv))
            if lv[t] > best[2]:
                best = (line[t], 2.0 * line[t], float(lv[t]))
        return best

    rl, rh, value = search(np.linspace(0, cap_l, resolution), np.linspace(0, cap_h, resolution))
    hl, hh = cap_l / (resolution - 1), cap_h / (resolution - 1)
    fine = search(
        np.linspace(max(rl - hl, 0), min(rl + hl, cap_l), 21), np.linspace(max(rh - hh, 0), min(rh + hh, cap_h), 21)
    )
    return fine if fine[2] > value else (rl, rh, value)


def switchover_baseline(
    k_l: float, k_h: float, horizon: int, occupancy: int = 2, resolution: int = 200, literal: bool = False
) -> tuple[float, PriceSchedule]:
    """Heuristic that admits a heavy SU only when half its price is at least the light price.

    By default prices are re-optimized per slot under that rule.  With
    ``literal`` the prices are taken from the optimal dynamic schedule and only
    the admission rule changes.
    """
    M = occupancy
    reference = solve_dynamic(k_l, k_h, horizon, M) if literal else None
    V = [0.0] * (horizon + M + 1)
    slots = [None] * horizon
    for n in range(horizon, 0, -1):
        v_next, v_skip = V[n + 1], V[n + M]
        if n + M - 1 > horizon and not literal:
            slot = ld_slot_pricing(v_next - v_skip, k_l, k_h, v_next)
        else:
            if literal:
                ref = reference.slots[n - 1]
                rl, rh, case = ref.r_l, ref.r_h, "fixed"
                value = float(_switchover_values(rl, rh, k_l, k_h, v_next, v_skip))
                if n + M - 1 > horizon:
                    value = float(stage_value(Strategy.LD, v_next, v_skip, 1.0 - k_l * rl, 0.0, rl, rh))
            else:
                rl, rh, value = _best_switchover_prices(k_l, k_h, v_next, v_skip, resolution)
                case = "grid"
            heavy = rh / 2.0 >= rl and n + M - 1 <= horizon
            slot = SlotPricing(Strategy.HP if heavy else Strategy.LD, float(rl), float(rh), case, value)
        slots[n - 1] = slot
        V[n] = slot.value
    schedule = PriceSchedule(k_l, k_h, M, tuple(slots), ValueFunction(tuple(V[1:])))
    return V[1], schedule


def improvement(better: float, baseline: float) -> float:
    """Relative revenue gain (R1 - R2) / R2."""
    if baseline == 0:
        raise ValidationError("baseline revenue is zero; improvement is undefined")
    return (better - baseline) / baseline
