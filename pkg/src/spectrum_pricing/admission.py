"""Admission control under fixed prices for a light type and one heavy type.

The backward recursion runs on numpy arrays, so the same code serves a single
price pair (``solve_admission``) and a whole price grid (``optimize_static_prices``).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from types import MappingProxyType
from typing import Mapping

import numpy as np

from .market import NO_ADMIT, MarketInstance, SystemState, ValidationError, demand_patterns


class Strategy(str, Enum):
    HP = "HP"  # heavy priority
    LP = "LP"  # light priority
    LD = "LD"  # light dominant

    def __str__(self):
        return self.value


class Regime(str, Enum):
    LIGHT_DOMINANT = "LightDominant"
    LIGHT_PRIORITY = "LightPriority"
    ALGORITHM_NEEDED = "AlgorithmNeeded"
    HEAVY_PRIORITY = "HeavyPriority"

    def __str__(self):
        return self.value


_CODES = (Strategy.HP, Strategy.LP, Strategy.LD)


def strategy_rule(strategy: Strategy, occupancy: int) -> dict[tuple[int, int], int]:
    """Free-channel action for each (light, heavy) demand pattern."""
    heavy_alone = NO_ADMIT if strategy is Strategy.LD else occupancy
    both = occupancy if strategy is Strategy.HP else 1
    return {(0, 0): NO_ADMIT, (1, 0): 1, (0, 1): heavy_alone, (1, 1): both}


@dataclass(frozen=True)
class ValueFunction:
    """Revenue-to-go with a free channel; ``vf[n]`` is V_n and vanishes past the horizon."""

    values: tuple[float, ...]

    def __getitem__(self, n: int) -> float:
        if n < 1:
            raise IndexError(f"slots are numbered from 1, got {n}")
        return self.values[n - 1] if n <= len(self.values) else 0.0

    def __len__(self):
        return len(self.values)

    @property
    def v1(self) -> float:
        return self.values[0]


@dataclass(frozen=True)
class PolicyTable:
    """Contingency plan: for each slot, the action taken for each demand pattern.

    A busy channel always means no admission, so only free-channel rules are stored.
    """

    horizon: int
    occupancies: tuple[int, ...]
    rules: tuple[Mapping[tuple[int, ...], int], ...]
    labels: tuple[str, ...] = ()
    orders: tuple = field(default=(), compare=False)

    def __post_init__(self):
        object.__setattr__(self, "rules", tuple(MappingProxyType(dict(r)) for r in self.rules))
        if len(self.rules) != self.horizon:
            raise ValidationError(f"expected {self.horizon} slot rules, got {len(self.rules)}")

    def rule(self, n: int) -> Mapping[tuple[int, ...], int]:
        return self.rules[n - 1]

    def action(self, n: int, state: SystemState) -> int:
        if not state.free:
            return NO_ADMIT
        return self.rules[n - 1][state.demands]

    def rule_array(self, n: int) -> np.ndarray:
        """Actions indexed by the demand pattern read as a binary number, light bit first."""
        rule = self.rules[n - 1]
        return np.array([rule[p] for p in demand_patterns(len(self.occupancies))], dtype=np.int64)


def stage_value(strategy, v_next, v_skip, p_l, p_h, r_l, r_h):
    """Expected revenue-to-go of one slot when the strategy fixes the actions.

    ``v_skip`` is the value after a heavy admission, i.e. V_{n+M}.
    """
    strategy = Strategy(strategy)
    if strategy is Strategy.HP:
        return (1 - p_h) * v_next + p_h * v_skip + p_l * r_l * (1 - p_h) + p_h * r_h
    if strategy is Strategy.LP:
        return (1 - p_h + p_l * p_h) * v_next + (1 - p_l) * p_h * v_skip + p_l * r_l + (1 - p_l) * p_h * r_h
    return v_next + p_l * r_l


def _backward(p_l, p_h, r_l, r_h, horizon, occupancy, keep=False):
    """Optimal backward recursion, broadcast over price arrays.

    Returns V_1 and, when ``keep`` is set, the full value list and per-slot
    strategy codes (indices into ``_CODES``).
    """
    M = occupancy
    zero = np.zeros(np.broadcast(p_l, p_h, r_l, r_h).shape)
    V = {n: zero for n in range(horizon + 1, horizon + M + 1)}
    codes = {}
    for n in range(horizon, 0, -1):
        v_next = V[n + 1]
        if n + M - 1 <= horizon:
            v_skip = V[n + M]
            vl = r_l + v_next
            vh = r_h + v_skip
            hp = vh >= vl
            lp = ~hp & (vh > v_next)
            V[n] = np.where(
                hp,
                stage_value(Strategy.HP, v_next, v_skip, p_l, p_h, r_l, r_h),
                np.where(lp, stage_value(Strategy.LP, v_next, v_skip, p_l, p_h, r_l, r_h), v_next + p_l * r_l),
            )
            if keep:
                codes[n] = np.where(hp, 0, np.where(lp, 1, 2))
        else:
            V[n] = v_next + p_l * r_l
            if keep:
                codes[n] = np.full(zero.shape, 2)
        if not keep:
            V.pop(n + M, None)
    return V[1], (V, codes)


def _two_type_params(instance: MarketInstance):
    if len(instance.types) != 2:
        raise ValidationError(f"expected a light and a heavy type, got {len(instance.types)} types")
    if instance.mode != "fixed_prices":
        raise ValidationError("admission control needs fixed prices; use MarketInstance.with_prices")
    light, heavy = instance.types
    return light.prob, heavy.prob, light.price, heavy.price, heavy.occupancy


def solve_admission(instance: MarketInstance) -> tuple[PolicyTable, ValueFunction]:
    """Optimal admission policy and value function for fixed prices."""
    p_l, p_h, r_l, r_h, M = _two_type_params(instance)
    N = instance.horizon
    _, (V, codes) = _backward(p_l, p_h, r_l, r_h, N, M, keep=True)
    labels = tuple(_CODES[int(codes[n])] for n in range(1, N + 1))
    rules = tuple(strategy_rule(s, M) for s in labels)
    values = tuple(float(V[n]) for n in range(1, N + M + 1))
    policy = PolicyTable(N, (1, M), rules, tuple(str(s) for s in labels))
    return policy, ValueFunction(values)


def stationary_value(strategy, p_l, p_h, r_l, r_h, horizon, occupancy):
    """V_1 of the stationary policy that follows ``strategy`` whenever a heavy SU still fits."""
    M = occupancy
    zero = np.zeros(np.broadcast(p_l, p_h, r_l, r_h).shape)
    V = {n: zero for n in range(horizon + 1, horizon + M + 1)}
    for n in range(horizon, 0, -1):
        if n + M - 1 <= horizon:
            V[n] = stage_value(strategy, V[n + 1], V[n + M], p_l, p_h, r_l, r_h)
        else:
            V[n] = V[n + 1] + p_l * r_l
        V.pop(n + M, None)
    return V[1]


def classify_price_ratio(ratio: float, p_l: float, p_h: float) -> Regime:
    if ratio < 0:
        raise ValidationError(f"price ratio must be >= 0, got {ratio!r}")
    if p_h < 1 and ratio >= 2 * p_l + (1 - p_l) / (1 - p_h):
        return Regime.HEAVY_PRIORITY
    if p_l <= ratio <= 1 + p_l:
        return Regime.LIGHT_PRIORITY
    if ratio < p_l:
        return Regime.LIGHT_DOMINANT
    return Regime.ALGORITHM_NEEDED


def hp_threshold_sequence(p_l: float, p_h: float, horizon: int) -> tuple[np.ndarray, float]:
    """Per-slot price-ratio thresholds for heavy priority, n = 1..N-1, and their maximum."""
    n = np.arange(1, horizon)
    t = np.power(-float(p_h), horizon - n - 1)
    theta = (1 + p_h + p_l * (1 - p_h) + 2 * p_l * p_h * t) / (1 + p_h * t)
    return theta, float(theta.max()) if theta.size else math.nan


def closed_form_value(policy, n: int, instance: MarketInstance) -> float:
    """V_n of a stationary policy in closed form (heavy occupancy 2)."""
    p_l, p_h, r_l, r_h, M = _two_type_params(instance)
    if M != 2:
        raise ValidationError(f"closed forms assume heavy occupancy 2, got {M}")
    steps = instance.horizon - n + 1
    policy = Strategy(policy)
    if policy is Strategy.HP:
        c = p_l * r_l * (1 - p_h) + p_h * r_h
        b = (2 * p_l * r_l * p_h - p_h * r_h) / (1 + p_h)
        return steps * c / (1 + p_h) + b * (1 - (-p_h) ** steps) / (1 + p_h)
    if policy is Strategy.LP:
        q = p_l * p_h - p_h
        c = p_l * r_l + (1 - p_l) * p_h * r_h
        b = q * (r_h - p_l * r_l) / (1 - q)
        return steps * c / (1 - q) + b * (1 - q**steps) / (1 - q)
    return steps * p_l * r_l


@dataclass(frozen=True)
class StaticOptimum:
    r_l: float
    r_h: float
    value: float
    regime: Regime


def _price_axes(k_l, k_h, resolution):
    return np.linspace(0.0, 1.0 / k_l, resolution), np.linspace(0.0, 1.0 / k_h, resolution)


def _grid_values(rl, rh, k_l, k_h, horizon, occupancy):
    p_l = np.clip(1.0 - k_l * rl, 0.0, 1.0)[:, None]
    p_h = np.clip(1.0 - k_h * rh, 0.0, 1.0)[None, :]
    return _backward(p_l, p_h, rl[:, None], rh[None, :], horizon, occupancy)[0]


def _pick(values):
    """Arg-max with ties going to the smallest r_l, then the largest r_h."""
    best = values.max()
    i = int(np.flatnonzero((values == best).any(axis=1))[0])
    j = int(np.flatnonzero(values[i] == best)[-1])
    return i, j, float(best)


def optimize_static_prices(k_l: float, k_h: float, horizon: int, occupancy: int = 2, resolution: int = 400) -> StaticOptimum:
    """Best time-invariant prices, scoring every grid cell with the optimal admission DP."""
    if not (k_l > 0 and k_h > 0):
        raise ValidationError("elasticities must be > 0")
    if resolution < 2:
        raise ValidationError(f"resolution must be >= 2, got {resolution}")
    rl, rh = _price_axes(k_l, k_h, resolution)
    i, j, _ = _pick(_grid_values(rl, rh, k_l, k_h, horizon, occupancy))

    # one pass at 10x resolution over the neighbouring cells
    hl, hh = rl[1] - rl[0], rh[1] - rh[0]
    fl = np.clip(np.linspace(rl[i] - hl, rl[i] + hl, 21), 0.0, 1.0 / k_l)
    fh = np.clip(np.linspace(rh[j] - hh, rh[j] + hh, 21), 0.0, 1.0 / k_h)
    fl, fh = np.unique(fl), np.unique(fh)
    a, b, value = _pick(_grid_values(fl, fh, k_l, k_h, horizon, occupancy))
    r_l, r_h = float(fl[a]), float(fh[b])
    p_l, p_h = 1.0 - k_l * r_l, 1.0 - k_h * r_h
    ratio = r_h / r_l if r_l > 0 else math.inf
    return StaticOptimum(r_l, r_h, value, classify_price_ratio(ratio, max(p_l, 0.0), max(p_h, 0.0)))


def best_stationary_value(k_l: float, k_h: float, horizon: int, occupancy: int = 2, resolution: int = 400) -> float:
    """Best V_1 over static prices on the coarse grid when the admission policy must be stationary."""
    rl, rh = _price_axes(k_l, k_h, resolution)
    p_l = np.clip(1.0 - k_l * rl, 0.0, 1.0)[:, None]
    p_h = np.clip(1.0 - k_h * rh, 0.0, 1.0)[None, :]
    return max(
        float(np.max(stationary_value(s, p_l, p_h, rl[:, None], rh[None, :], horizon, occupancy)))
        for s in Strategy
    )
