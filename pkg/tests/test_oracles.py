import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from spectrum_pricing.admission import PolicyTable, Strategy, solve_admission, strategy_rule
from spectrum_pricing.dynamic import hp_slot_pricing, ld_slot_pricing, lp_slot_pricing
from spectrum_pricing.market import MarketInstance, ValidationError
from spectrum_pricing.oracles import (
    SizeGuardError,
    enumerate_policies_value,
    grid_search_slot_prices,
    scenario_paths,
    scenario_tree_value,
    tree_optimal_value,
)

EXAMPLE_A = MarketInstance.two_type(2, 2, 0.5, 0.5, 1.0, 3.0)


def stationary(strategy, N, M=2):
    """Follow ``strategy`` while a heavy SU fits, light-only afterwards."""
    rules = [strategy_rule(strategy if n + M - 1 <= N else Strategy.LD, M) for n in range(1, N + 1)]
    return PolicyTable(N, (1, M), rules)


def test_scenario_tree_stationary_policies():
    assert scenario_tree_value(stationary(Strategy.HP, 2), EXAMPLE_A) == pytest.approx(2.0)
    assert scenario_tree_value(stationary(Strategy.LD, 2), EXAMPLE_A) == pytest.approx(1.0)
    assert scenario_tree_value(stationary(Strategy.HP, 2), EXAMPLE_A, horizon=0) == 0.0


def test_scenario_tree_rejects_infeasible_policy():
    # heavy admitted in the last slot cannot fit
    with pytest.raises(ValidationError):
        scenario_tree_value(PolicyTable(1, (1, 2), [strategy_rule(Strategy.HP, 2)]), MarketInstance.two_type(1, 2, 0.5, 0.5, 1, 3))


def test_paths_are_a_distribution():
    probs = np.array([[0.2, 0.7], [0.5, 0.1], [0.9, 0.4]])
    total = sum(p for _, p in scenario_paths(probs))
    assert total == pytest.approx(1.0)


def test_policy_enumeration_examples():
    assert enumerate_policies_value(EXAMPLE_A)[0] == pytest.approx(2.0)
    assert enumerate_policies_value(MarketInstance.two_type(1, 2, 0.5, 0.5, 1.0, 3.0))[0] == pytest.approx(0.5)
    inst = MarketInstance.two_type(3, 2, 0.5, 0.5, 1.0, 1.2)
    best, policy = enumerate_policies_value(inst)
    assert best == pytest.approx(solve_admission(inst)[1].v1, abs=1e-12)
    assert scenario_tree_value(policy, inst) == pytest.approx(best, abs=1e-12)


@settings(max_examples=25, deadline=None)
@given(st.floats(0, 1), st.floats(0, 1), st.floats(0.01, 3), st.floats(0.01, 6))
def test_tree_and_enumeration_agree(p_l, p_h, r_l, r_h):
    inst = MarketInstance.two_type(3, 2, p_l, p_h, r_l, r_h)
    assert tree_optimal_value(inst) == pytest.approx(enumerate_policies_value(inst)[0], rel=1e-12, abs=1e-12)


def test_size_guards():
    big = MarketInstance.two_type(13, 2, 0.5, 0.5, 1, 2)
    with pytest.raises(SizeGuardError):
        tree_optimal_value(big)
    with pytest.raises(SizeGuardError):
        enumerate_policies_value(MarketInstance.two_type(6, 2, 0.5, 0.5, 1, 2))


def test_grid_search_examples():
    r_l, r_h, _ = grid_search_slot_prices("HP", 0.0, 1, 1, 2000)
    assert (r_l, r_h) == pytest.approx((0.5, 0.625), abs=1e-3)
    r_l, _, _ = grid_search_slot_prices("LD", 0.3, 2, 1, 2000)
    assert r_l == pytest.approx(0.25, abs=1e-3)
    r_l, r_h, _ = grid_search_slot_prices("LP", 1.8, 1, 0.5, 2000)
    assert (r_l, r_h) == pytest.approx((0.5025, 1.9), abs=1e-3)


def test_grid_search_refuses_coarse_grid_and_empty_region():
    with pytest.raises(ValidationError):
        grid_search_slot_prices("HP", 0.0, 1, 1, 10)
    with pytest.raises(ValidationError):
        grid_search_slot_prices("HP", 1.5, 1, 1, 200)


@settings(max_examples=12, deadline=None)
@given(st.floats(-1.5, 1.5), st.floats(-1.5, 1.5), st.floats(0, 0.999))
def test_closed_forms_never_lose_to_grid(log_kl, log_kh, frac):
    k_l, k_h = float(np.exp(log_kl)), float(np.exp(log_kh))
    dR = frac / k_h
    for name, solver in (("HP", hp_slot_pricing), ("LP", lp_slot_pricing), ("LD", ld_slot_pricing)):
        sp = solver(dR, k_l, k_h)
        if not sp.feasible:
            continue
        _, _, grid_value = grid_search_slot_prices(name, dR, k_l, k_h, 400)
        assert sp.value >= grid_value - 1e-12
