"""Markets with any number of SU types and arbitrary heavy occupancy."""
from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import permutations, product
from typing import Sequence

import numpy as np

from .admission import PolicyTable, ValueFunction
from .market import NO_ADMIT, MarketInstance, ValidationError, admissible, demand_patterns


def expected_max_value(v0: float, candidates: Sequence[tuple[float, float]]) -> float:
    """E[max(v0, v_i over present candidates)] with independent presence probabilities.

    Walks the candidates from best to worst: each one is collected when it is
    present and everything ranked above it is absent.
    """
    total = 0.0
    none_above = 1.0
    for v, p in sorted(candidates, key=lambda c: c[0], reverse=True):
        if v < v0:
            break
        total += v * p * none_above
        none_above *= 1.0 - p
    return total + v0 * none_above


def expected_max_enumerated(v0: float, candidates: Sequence[tuple[float, float]]) -> float:
    """Same expectation by summing over all 2^I presence patterns."""
    total = 0.0
    for bits in product((0, 1), repeat=len(candidates)):
        prob, best = 1.0, v0
        for bit, (v, p) in zip(bits, candidates):
            prob *= p if bit else 1.0 - p
            if bit:
                best = max(best, v)
        total += prob * best
    return total


@dataclass(frozen=True)
class PriorityOrder:
    """Actions ranked from most to least preferred; 0 stands for admitting nobody."""

    ranking: tuple[int, ...]

    def choose(self, present: set[int]) -> int:
        for a in self.ranking:
            if a == NO_ADMIT or a in present:
                return a
        return NO_ADMIT

    def admitted(self) -> tuple[int, ...]:
        """Actions ranked above no-admit, i.e. the ones that are ever taken."""
        return self.ranking[: self.ranking.index(NO_ADMIT)]


def priority_order(v0: float, candidates: dict[int, float]) -> PriorityOrder:
    """Rank actions by candidate value.

    Among types, ties go to the larger occupancy.  Against no-admit, a type
    needs a strictly larger value, except the light type which wins ties.
    """
    ranked = sorted(candidates, key=lambda a: (candidates[a], a), reverse=True)
    above = [a for a in ranked if candidates[a] > v0 or (a == 1 and candidates[a] == v0)]
    below = [a for a in ranked if a not in above]
    return PriorityOrder(tuple(above) + (NO_ADMIT,) + tuple(below))


def solve_multitype(instance: MarketInstance) -> tuple[PolicyTable, ValueFunction]:
    """Optimal admission for any number of types with fixed prices."""
    if instance.mode != "fixed_prices":
        raise ValidationError("multi-type admission needs fixed prices; use MarketInstance.with_prices")
    N, occ = instance.horizon, instance.occupancies
    probs, prices = instance.probs, instance.prices
    top = N + instance.max_occupancy
    V = [0.0] * (top + 1)
    rules, orders = [None] * N, [None] * N
    patterns = demand_patterns(len(occ))
    for n in range(N, 0, -1):
        v0 = V[n + 1]
        fits = [i for i, m in enumerate(occ) if admissible(m, n, N)]
        values = {occ[i]: prices[i] + V[n + occ[i]] for i in fits}
        V[n] = expected_max_value(v0, [(values[occ[i]], probs[i]) for i in fits])
        order = priority_order(v0, values)
        orders[n - 1] = order
        rules[n - 1] = {p: order.choose({m for m, bit in zip(occ, p) if bit}) for p in patterns}
    return PolicyTable(N, occ, rules, orders=tuple(orders)), ValueFunction(tuple(V[1:]))


@dataclass(frozen=True)
class LinearValueCoeffs:
    """V_n = alpha[n] r_l + beta[n] r_h under the stationary heavy-priority policy."""

    alpha: np.ndarray  # indexed by slot n, with padding zeros past the horizon
    beta: np.ndarray

    def value(self, n: int, r_l: float, r_h: float) -> float:
        return float(self.alpha[n] * r_l + self.beta[n] * r_h)


def hp_value_coeffs(p_l: float, p_h: float, occupancy: int, horizon: int) -> LinearValueCoeffs:
    M, N = occupancy, horizon
    alpha = np.zeros(N + M + 1)
    beta = np.zeros(N + M + 1)
    for n in range(N, 0, -1):
        if n + M - 1 <= N:
            alpha[n] = (1 - p_h) * alpha[n + 1] + p_h * alpha[n + M] + p_l * (1 - p_h)
            beta[n] = (1 - p_h) * beta[n + 1] + p_h * beta[n + M] + p_h
        else:
            alpha[n] = alpha[n + 1] + p_l
    return LinearValueCoeffs(alpha, beta)


def hp_threshold_general(p_l: float, p_h: float, occupancy: int, horizon: int) -> float:
    """Smallest price ratio r_h/r_l above which heavy priority is optimal in every slot.

    Returns ``inf`` when some slot can never prefer heavy at any finite ratio.
    """
    if not 0 <= p_h < 1:
        raise ValidationError(f"need 0 <= p_h < 1, got {p_h!r}")
    M, N = occupancy, horizon
    if M < 2 or M > N:
        raise ValidationError(f"need 2 <= occupancy <= horizon, got {M} and {N}")
    c = hp_value_coeffs(p_l, p_h, M, N)
    theta = -math.inf
    for n in range(1, N - M + 2):
        # heavy beats light at n: r_h (1 - b[n+1] + b[n+M]) >= r_l (1 + a[n+1] - a[n+M])
        den = 1 - c.beta[n + 1] + c.beta[n + M]
        num = 1 + c.alpha[n + 1] - c.alpha[n + M]
        if den <= 0:
            return math.inf
        theta = max(theta, num / den)
    return theta


class UnsupportedDimension(ValidationError):
    pass


def _order_slack(order, values, v0):
    """Smallest gap between consecutive ranked candidate values (nonnegative when the order holds)."""
    vals = [v0 if a == NO_ADMIT else values[a] for a in order.ranking]
    slack = None
    for hi, lo in zip(vals, vals[1:]):
        gap = hi - lo
        slack = gap if slack is None else np.minimum(slack, gap)
    return slack


def _order_objective(order, prices, probs, v_tail, occupancies):
    v0 = v_tail[0]
    values = {m: prices[i] + v_tail[m - 1] for i, m in enumerate(occupancies)}
    total, none_above = 0.0, 1.0
    for a in order.admitted():
        i = occupancies.index(a)
        total = total + values[a] * probs[i] * none_above
        none_above = none_above * (1.0 - probs[i])
    return total + v0 * none_above, _order_slack(order, values, v0)


def optimize_slot_prices_numeric(
    order: PriorityOrder,
    v_tail: Sequence[float],
    elasticities: Sequence[float],
    occupancies: Sequence[int],
    resolution: int = 201,
    sweeps: int = 12,
) -> tuple[np.ndarray, float]:
    """Per-slot prices that maximize the expected value while respecting ``order``.

    ``v_tail[j]`` is V_{n+1+j}.  A coarse full grid picks a start, then pairs of
    prices are searched jointly on shrinking windows, which lets the search
    slide along the lines where two candidates tie.
    """
    occupancies = tuple(occupancies)
    I = len(occupancies)
    if I > 4:
        raise UnsupportedDimension(f"numeric slot pricing supports at most 4 types, got {I}")
    if len(elasticities) != I:
        raise ValidationError("one elasticity per type is required")
    if sorted(order.ranking) != sorted((NO_ADMIT,) + occupancies):
        raise ValidationError(f"priority order {order.ranking} does not match occupancies {occupancies}")
    given = np.asarray(v_tail, dtype=float)[: max(occupancies)]
    v_tail = np.zeros(max(occupancies))
    v_tail[: given.size] = given
    k = np.asarray(elasticities, dtype=float)
    caps = 1.0 / k

    def evaluate(grids):
        probs = [1.0 - k[i] * grids[i] for i in range(I)]
        value, slack = _order_objective(order, grids, probs, v_tail, occupancies)
        scale = 1e-12 * max(1.0, float(np.max(np.abs(v_tail))))
        return np.where(slack >= -scale, value, -np.inf) if slack is not None else value

    coarse = max(3, int(round(200_000 ** (1.0 / I))))
    axes = [np.linspace(0.0, caps[i], coarse) for i in range(I)]
    mesh = np.meshgrid(*axes, indexing="ij")
    vals = np.broadcast_to(evaluate(mesh), mesh[0].shape)
    if not np.isfinite(vals).any():
        raise ValidationError(f"priority order {order.ranking} is not realizable with these tail values")
    idx = np.unravel_index(int(np.argmax(vals)), vals.shape)
    x = np.array([axes[i][idx[i]] for i in range(I)])
    best = float(vals[idx])
    width = caps / (coarse - 1)

    pairs = [(i, j) for i in range(I) for j in range(i + 1, I)] or [(0, None)]
    for _ in range(sweeps):
        for i, j in pairs:
            dims = [d for d in (i, j) if d is not None]
            local = [np.clip(np.linspace(x[d] - width[d], x[d] + width[d], resolution), 0.0, caps[d]) for d in dims]
            grid = np.meshgrid(*local, indexing="ij")
            trial = [np.full(grid[0].shape, x[d]) for d in range(I)]
            for d, g in zip(dims, grid):
                trial[d] = g
            cand = np.broadcast_to(evaluate(trial), grid[0].shape)
            pos = np.unravel_index(int(np.argmax(cand)), cand.shape)
            if cand[pos] > best:
                best = float(cand[pos])
                for d, g in zip(dims, grid):
                    x[d] = g[pos]
        width = width / 4.0
    return x, best


def realizable_priority_orders(occupancies: Sequence[int], probes: int = 20_000, seed: int = 0) -> set[tuple[int, ...]]:
    """Distinct priority orders produced by random prices and nonincreasing value tails."""
    rng = np.random.default_rng(seed)
    occupancies = tuple(occupancies)
    depth = max(occupancies)
    seen = set()
    for _ in range(probes):
        tail = np.sort(rng.uniform(0.0, 2.0, depth))[::-1]
        prices = rng.uniform(0.0, 1.0, len(occupancies))
        values = {m: prices[i] + tail[m - 1] for i, m in enumerate(occupancies)}
        seen.add(priority_order(tail[0], values).ranking)
    return seen


@dataclass(frozen=True)
class NumericSlot:
    order: PriorityOrder
    prices: tuple[float, ...]
    value: float


def _candidate_orders(fitting: Sequence[int]):
    """Rankings of the fitting types and no-admit in which the light type outranks no-admit."""
    for perm in permutations((NO_ADMIT,) + tuple(fitting)):
        if 1 not in perm or perm.index(1) < perm.index(NO_ADMIT):
            yield PriorityOrder(perm)


def solve_dynamic_numeric(
    elasticities: Sequence[float], occupancies: Sequence[int], horizon: int, resolution: int = 101
) -> tuple[list[NumericSlot], ValueFunction]:
    """Experimental multi-type dynamic pricing: every priority order is priced numerically per slot.

    Types that cannot fit before the horizon are priced at their cap.
    """
    occupancies = tuple(int(m) for m in occupancies)
    k = np.asarray(elasticities, dtype=float)
    if len(k) != len(occupancies) or occupancies[0] != 1 or len(set(occupancies)) != len(occupancies):
        raise ValidationError("need distinct occupancies starting with the light type, one elasticity each")
    N = horizon
    V = np.zeros(N + max(occupancies) + 1)
    slots = [None] * N
    for n in range(N, 0, -1):
        idx = [i for i, m in enumerate(occupancies) if admissible(m, n, N)]
        fit = tuple(occupancies[i] for i in idx)
        tail = V[n + 1 : n + 1 + max(fit)]
        best = None
        for order in _candidate_orders(fit):
            try:
                x, value = optimize_slot_prices_numeric(order, tail, k[idx], fit, resolution=resolution, sweeps=8)
            except ValidationError:
                continue
            if best is None or value > best[2]:
                best = (order, x, value)
        prices = 1.0 / k
        prices[idx] = best[1]
        slots[n - 1] = NumericSlot(best[0], tuple(float(r) for r in prices), best[2])
        V[n] = best[2]
    return slots, ValueFunction(tuple(float(v) for v in V[1:]))
