"""Revenue-maximizing spectrum pricing and admission control for a slotted single-channel market."""
from .admission import (
    PolicyTable,
    Regime,
    StaticOptimum,
    Strategy,
    ValueFunction,
    best_stationary_value,
    classify_price_ratio,
    closed_form_value,
    hp_threshold_sequence,
    optimize_static_prices,
    solve_admission,
    stage_value,
    stationary_value,
    strategy_rule,
)
from .dynamic import (
    PriceSchedule,
    SlotPricing,
    hp_slot_pricing,
    ld_slot_pricing,
    lp_slot_pricing,
    slot_strategy_value,
    solve_dynamic,
    strategy_condition_slack,
)
from .general import (
    PriorityOrder,
    UnsupportedDimension,
    expected_max_enumerated,
    expected_max_value,
    hp_threshold_general,
    optimize_slot_prices_numeric,
    priority_order,
    realizable_priority_orders,
    solve_dynamic_numeric,
    solve_multitype,
)
from .market import (
    NO_ADMIT,
    ChannelModel,
    ContractViolation,
    DomainError,
    MarketInstance,
    ModelError,
    PricePlan,
    SystemState,
    TypeSpec,
    ValidationError,
    admissible,
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
from .oracles import (
    SizeGuardError,
    enumerate_policies_value,
    grid_search_slot_prices,
    scenario_tree_value,
    tree_optimal_value,
)
from .simulate import EpisodeTrace, improvement, monte_carlo, run_episode, switchover_baseline

__version__ = "0.1.0"
