import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from spectrum_pricing.market import (
    NO_ADMIT,
    ChannelModel,
    ContractViolation,
    DomainError,
    MarketInstance,
    PricePlan,
    SystemState,
    TypeSpec,
    ValidationError,
    demand_patterns,
    demand_probability,
    elasticity_from_channel,
    feasible_actions,
    mean_utility,
    pattern_probability,
    state_transition,
    su_accepts,
    su_utility,
    transmitted_data,
)

UNIT = ChannelModel()


def test_demand_probability_values():
    assert demand_probability(2, 0) == 1.0
    assert demand_probability(2, 0.5) == 0.0
    assert demand_probability(100, 0.004) == pytest.approx(0.6, abs=1e-15)


@pytest.mark.parametrize("k, r", [(0, 0.1), (-1, 0.1), (1, -0.01), (1, 1.01)])
def test_demand_probability_domain(k, r):
    with pytest.raises(DomainError):
        demand_probability(k, r)


@given(st.floats(0.01, 100), st.floats(0, 1))
def test_demand_probability_linear(k, frac):
    r = frac / k
    p = demand_probability(k, r)
    assert 0 <= p <= 1
    assert p == pytest.approx(1 - frac, abs=1e-12)


def test_transmitted_data():
    assert transmitted_data(UNIT, 0.0, slots=1) == 0.0
    assert transmitted_data(UNIT, math.e - 1, slots=1) == pytest.approx(1.0)
    assert transmitted_data(UNIT, [math.e - 1, math.e - 1], slots=2) == pytest.approx(2.0)
    assert su_utility(ChannelModel(valuation=3.0), math.e - 1) == pytest.approx(3.0)


def test_transmitted_data_rejects_bad_gains():
    with pytest.raises(DomainError):
        transmitted_data(UNIT, [-0.1])
    with pytest.raises(DomainError):
        transmitted_data(UNIT, [1.0, 1.0, 1.0], slots=2)


def test_mean_utility_matches_quadrature():
    ch = ChannelModel(max_power=2.0, bandwidth=1.5, gain_low=0.2, gain_high=3.0)
    edges = np.linspace(ch.gain_low, ch.gain_high, 400_001)
    mid = 0.5 * (edges[1:] + edges[:-1])
    expected = np.mean(ch.slot_duration * ch.bandwidth * np.log1p(ch.snr_scale * mid))
    assert mean_utility(ch, 1) == pytest.approx(expected, rel=1e-9)
    assert mean_utility(ch, 3) == pytest.approx(3 * expected, rel=1e-9)


def test_mean_utility_degenerate_channel():
    fixed = ChannelModel(gain_low=math.e - 1, gain_high=math.e - 1)
    assert mean_utility(fixed, 2) == pytest.approx(2.0)
    assert mean_utility(ChannelModel(gain_low=0, gain_high=0)) == 0.0


def test_elasticity_from_channel():
    assert elasticity_from_channel(UNIT, 1.0) == 1.0
    assert elasticity_from_channel(ChannelModel(sensitivity=2.0), 4.0) == 0.5
    with pytest.raises(DomainError):
        elasticity_from_channel(UNIT, 0.0)


def test_su_accepts_boundary():
    assert su_accepts(1.0, 1.0)
    assert not su_accepts(0.5, 1.0)
    assert su_accepts(2.0, 0)


def test_state_transition():
    assert state_transition(0, NO_ADMIT) == 0
    assert state_transition(0, 2) == 1
    assert state_transition(0, 1) == 0
    assert state_transition(1, NO_ADMIT) == 0
    assert state_transition(3, NO_ADMIT) == 2
    with pytest.raises(ContractViolation):
        state_transition(1, 2)


@given(st.integers(0, 10), st.integers(1, 10))
def test_state_transition_counts_down(remaining, occ):
    if remaining == 0:
        assert state_transition(0, occ) == occ - 1
    else:
        assert state_transition(remaining, NO_ADMIT) == remaining - 1


def test_feasible_actions():
    inst = MarketInstance.two_type(10, 2, 0.5, 0.5, 1, 3)
    assert feasible_actions(SystemState(0, (1, 1)), 1, inst) == {0, 1, 2}
    assert feasible_actions(SystemState(1, (1, 1)), 1, inst) == {0}
    assert feasible_actions(SystemState(0, (0, 1)), 10, inst) == {0}
    assert feasible_actions(SystemState(0, (0, 1)), 9, inst) == {0, 2}


def test_patterns_and_probability():
    pats = demand_patterns(2)
    assert pats == [(0, 0), (0, 1), (1, 0), (1, 1)]
    probs = (0.3, 0.8)
    assert sum(pattern_probability(p, probs) for p in pats) == pytest.approx(1.0)
    assert pattern_probability((1, 0), probs) == pytest.approx(0.3 * 0.2)


def test_instance_validation():
    with pytest.raises(ValidationError):
        MarketInstance(2, (TypeSpec(1, 1.0), TypeSpec(1, 2.0)), mode="elastic")
    with pytest.raises(ValidationError):
        MarketInstance(2, (TypeSpec(2, 1.0),), mode="elastic")
    with pytest.raises(ValidationError):
        MarketInstance(0, (TypeSpec(1, 1.0),), mode="elastic")
    with pytest.raises(ValidationError):
        MarketInstance(2, (TypeSpec(1, 1.0),))  # fixed prices without a price
    with pytest.raises(ValidationError):
        TypeSpec(1, elasticity=2.0, price=0.6)
    with pytest.raises(ValidationError):
        TypeSpec(1, demand_prob=1.5)


def test_heavy_longer_than_horizon_is_allowed():
    inst = MarketInstance.two_type(1, 2, 0.5, 0.5, 1, 3)
    assert inst.max_occupancy == 2


def test_with_prices_derives_probabilities():
    inst = MarketInstance.elastic(5, (1, 2), (2.0, 4.0)).with_prices([0.25, 0.125])
    assert inst.mode == "fixed_prices"
    assert inst.probs == pytest.approx((0.5, 0.5))
    assert inst.type_of(2) == 1


def test_price_plan_constant():
    inst = MarketInstance.two_type(3, 2, 0.4, 0.6, 1.0, 2.0)
    plan = PricePlan.constant(inst)
    assert plan.horizon == 3
    assert plan.prices.shape == (3, 2)
    assert np.all(plan.probs[:, 1] == 0.6)
    with pytest.raises(ValidationError):
        PricePlan(np.zeros((3, 2)), np.zeros((3, 3)), (1, 2))
