"""Brute-force reference computations.

Nothing here shares code with the fast solvers beyond the data types: values
come from explicit enumeration of demand paths, of policies, or of price
grids.  Every routine refuses inputs it cannot handle exactly.
"""
from __future__ import annotations

from itertools import product

import numpy as np

from .admission import PolicyTable, Strategy
from .market import NO_ADMIT, MarketInstance, PricePlan, ValidationError, admissible, demand_patterns

MAX_TREE_PATHS = 4**12
MAX_POLICY_PATHS = 5_000_000


class SizeGuardError(ValidationError):
    pass


def _as_plan(market) -> PricePlan:
    return market if isinstance(market, PricePlan) else PricePlan.constant(market)


def scenario_paths(probs_by_slot):
    """Yield every demand path with its probability; one presence tuple per slot."""
    num_types = len(probs_by_slot[0]) if len(probs_by_slot) else 0
    patterns = demand_patterns(num_types)
    for path in product(patterns, repeat=len(probs_by_slot)):
        prob = 1.0
        for pattern, probs in zip(path, probs_by_slot):
            for bit, p in zip(pattern, probs):
                prob *= p if bit else 1.0 - p
        yield path, prob


def _check_tree_size(num_types, horizon):
    if (2**num_types) ** horizon > MAX_TREE_PATHS:
        raise SizeGuardError(f"{(2 ** num_types) ** horizon} demand paths exceed the limit of {MAX_TREE_PATHS}")


def scenario_tree_value(policy: PolicyTable, market, horizon: int | None = None) -> float:
    """Expected revenue of ``policy``, executed forward along every demand path.

    ``market`` is a fixed-price instance or a per-slot price plan.  ``horizon``
    truncates the run; 0 gives an empty tree worth nothing.
    """
    plan = _as_plan(market)
    N = plan.horizon if horizon is None else horizon
    if N == 0:
        return 0.0
    occ = plan.occupancies
    _check_tree_size(len(occ), N)
    total = 0.0
    for path, prob in scenario_paths(plan.probs[:N]):
        remaining, revenue = 0, 0.0
        for n, pattern in enumerate(path, start=1):
            a = policy.rule(n)[pattern] if remaining == 0 else NO_ADMIT
            if a != NO_ADMIT:
                i = occ.index(a)
                if not pattern[i] or not admissible(a, n, N):
                    raise ValidationError(f"policy admits an infeasible action {a} at slot {n}")
                revenue += plan.prices[n - 1, i]
                remaining = a - 1
            elif remaining > 0:
                remaining -= 1
        total += prob * revenue
    return total


def tree_optimal_value(market) -> float:
    """Optimal expected revenue by exhaustive search of the full decision tree (no memoization)."""
    plan = _as_plan(market)
    N, occ = plan.horizon, plan.occupancies
    _check_tree_size(len(occ), N)
    patterns = demand_patterns(len(occ))

    def node(n, remaining):
        if n > N:
            return 0.0
        if remaining > 0:
            return node(n + 1, remaining - 1)
        out = 0.0
        for pattern in patterns:
            prob = 1.0
            for bit, p in zip(pattern, plan.probs[n - 1]):
                prob *= p if bit else 1.0 - p
            if prob == 0.0:
                continue
            best = node(n + 1, 0)
            for i, (bit, m) in enumerate(zip(pattern, occ)):
                if bit and admissible(m, n, N):
                    best = max(best, plan.prices[n - 1, i] + node(n + 1, m - 1))
            out += prob * best
        return out

    return node(1, 0)


def _slot_rules(occ, n, N):
    """Every free-channel decision rule for slot n, as dicts from pattern to action."""
    patterns = demand_patterns(len(occ))
    choices = []
    for pattern in patterns:
        acts = [NO_ADMIT] + [m for bit, m in zip(pattern, occ) if bit and admissible(m, n, N)]
        choices.append(acts)
    return [dict(zip(patterns, pick)) for pick in product(*choices)]


def enumerate_policies_value(market) -> tuple[float, PolicyTable]:
    """Best expected revenue over every contingency policy, evaluated on all demand paths."""
    plan = _as_plan(market)
    N, occ = plan.horizon, plan.occupancies
    slot_rules = [_slot_rules(occ, n, N) for n in range(1, N + 1)]
    num_policies = int(np.prod([len(r) for r in slot_rules]))
    num_paths = (2 ** len(occ)) ** N
    if num_policies * num_paths > MAX_POLICY_PATHS:
        raise SizeGuardError(f"{num_policies} policies x {num_paths} paths exceed the limit of {MAX_POLICY_PATHS}")

    patterns = demand_patterns(len(occ))
    tables = [np.array([[r[p] for p in patterns] for r in rules]) for rules in slot_rules]
    choice = np.array(list(product(*[range(len(r)) for r in slot_rules])))
    paths = np.array(list(product(range(len(patterns)), repeat=N)))
    bits = np.array(patterns)
    prob = np.ones(len(paths))
    for n in range(N):
        b = bits[paths[:, n]]
        prob *= np.prod(np.where(b == 1, plan.probs[n], 1.0 - plan.probs[n]), axis=1)

    remaining = np.zeros((len(choice), len(paths)), dtype=np.int64)
    revenue = np.zeros((len(choice), len(paths)))
    for n in range(N):
        price_of = np.zeros(max(occ) + 1)
        price_of[list(occ)] = plan.prices[n]
        a = tables[n][choice[:, n][:, None], paths[None, :, n]]
        a = np.where(remaining > 0, NO_ADMIT, a)
        revenue += price_of[a]
        remaining = np.where(remaining > 0, remaining - 1, np.maximum(a - 1, 0))
    values = revenue @ prob
    best = int(np.argmax(values))
    rules = [slot_rules[n][choice[best, n]] for n in range(N)]
    return float(values[best]), PolicyTable(N, occ, rules)


def _slot_objective(strategy, r_l, r_h, k_l, k_h, dR, v_next):
    """Expected revenue-to-go of one slot, summed over the four demand patterns."""
    p = (1.0 - k_l * r_l, 1.0 - k_h * r_h)
    heavy_alone = {Strategy.HP: 2, Strategy.LP: 2, Strategy.LD: 0}[strategy]
    both = 2 if strategy is Strategy.HP else 1
    outcome = {0: v_next, 1: r_l + v_next, 2: r_h + v_next - dR}
    rule = {(0, 0): 0, (1, 0): 1, (0, 1): heavy_alone, (1, 1): both}
    total = 0.0
    for (x, y), a in rule.items():
        total = total + (p[0] if x else 1 - p[0]) * (p[1] if y else 1 - p[1]) * outcome[a]
    return total


def _feasible(strategy, r_l, r_h, dR):
    # compare the three candidate values directly: none = 0, light = r_l, heavy = r_h - dR
    vh = r_h - dR
    if strategy is Strategy.HP:
        return vh >= r_l
    if strategy is Strategy.LP:
        return (vh >= 0) & (vh <= r_l)
    return vh <= 0


def _boundary_points(strategy, dR, cap_l, cap_h, lo_l, hi_l, count):
    """Points on the tie lines that bound the strategy's region, restricted to r_l in [lo_l, hi_l]."""
    pts = []
    if strategy in (Strategy.HP, Strategy.LP):
        hi = min(hi_l, cap_h - dR)
        if hi >= lo_l:
            rl = np.linspace(lo_l, hi, count)
            pts.append((rl, rl + dR))
    if strategy in (Strategy.LP, Strategy.LD) and dR <= cap_h:
        rl = np.linspace(lo_l, hi_l, count)
        pts.append((rl, np.full_like(rl, dR)))
    return pts


def grid_search_slot_prices(strategy, dR: float, k_l: float, k_h: float, resolution: int = 2000, v_next: float = 0.0):
    """Best prices for one slot under ``strategy`` by exhaustive grid search.

    The grid covers the price box plus the tie lines bounding the strategy's
    region, then one pass at 10x resolution around the incumbent.
    """
    strategy = Strategy(strategy)
    if resolution < 100:
        raise ValidationError(f"resolution must be >= 100, got {resolution}")
    cap_l, cap_h = 1.0 / k_l, 1.0 / k_h

    def search(rl_axis, rh_axis, lo_l, hi_l, count):
        RL, RH = rl_axis[:, None], rh_axis[None, :]
        vals = np.where(
            _feasible(strategy, RL, RH, dR), _slot_objective(strategy, RL, RH, k_l, k_h, dR, v_next), -np.inf
        )
        pos = np.unravel_index(int(np.argmax(vals)), vals.shape)
        found = (rl_axis[pos[0]], rh_axis[pos[1]], float(vals[pos]))
        for rl, rh in _boundary_points(strategy, dR, cap_l, cap_h, lo_l, hi_l, count):
            line = _slot_objective(strategy, rl, rh, k_l, k_h, dR, v_next)
            i = int(np.argmax(line))
            if line[i] > found[2]:
                found = (rl[i], rh[i], float(line[i]))
        return None if found[2] == -np.inf else found

    found = search(np.linspace(0, cap_l, resolution), np.linspace(0, cap_h, resolution), 0.0, cap_l, resolution)
    if found is None:
        raise ValidationError(f"empty feasible region for {strategy} at dR={dR!r}")
    r_l, r_h, value = found
    hl, hh = cap_l / (resolution - 1), cap_h / (resolution - 1)
    lo_l, hi_l = max(r_l - hl, 0.0), min(r_l + hl, cap_l)
    fine = search(
        np.linspace(lo_l, hi_l, 21), np.linspace(max(r_h - hh, 0.0), min(r_h + hh, cap_h), 21), lo_l, hi_l, 21
    )
    if fine is not None and fine[2] > value:
        r_l, r_h, value = fine
    return float(r_l), float(r_h), value
