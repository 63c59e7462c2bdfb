"""Market primitives: SU types, instances, linear demand, channel utility and slot dynamics.

Admission actions are encoded by the occupancy of the admitted type, with 0
meaning nobody is admitted.  Occupancies are distinct within an instance, so
the encoding is unambiguous and the state update below needs no lookup.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import product
from typing import Sequence

import numpy as np

NO_ADMIT = 0


class ModelError(ValueError):
    """Base class for invalid inputs to any solver in this package."""


class DomainError(ModelError):
    pass


class ValidationError(ModelError):
    pass


class ContractViolation(ModelError):
    pass


@dataclass(frozen=True)
class TypeSpec:
    """One class of secondary user.

    ``price`` and ``demand_prob`` only matter for fixed-price instances.  When
    ``demand_prob`` is omitted it is derived from the elasticity.
    """

    occupancy: int
    elasticity: float | None = None
    price: float | None = None
    demand_prob: float | None = None

    def __post_init__(self):
        if int(self.occupancy) != self.occupancy or self.occupancy < 1:
            raise ValidationError(f"occupancy must be a positive integer, got {self.occupancy!r}")
        if self.elasticity is not None and not self.elasticity > 0:
            raise ValidationError(f"elasticity must be > 0, got {self.elasticity!r}")
        if self.price is not None:
            if self.price < 0:
                raise ValidationError(f"price must be >= 0, got {self.price!r}")
            if self.elasticity is not None and self.price > 1.0 / self.elasticity:
                raise ValidationError(
                    f"price {self.price!r} exceeds the cap 1/k = {1.0 / self.elasticity!r}"
                )
        if self.demand_prob is not None and not 0.0 <= self.demand_prob <= 1.0:
            raise ValidationError(f"demand_prob must lie in [0, 1], got {self.demand_prob!r}")

    @property
    def cap(self) -> float:
        if self.elasticity is None:
            return math.inf
        return 1.0 / self.elasticity

    @property
    def prob(self) -> float:
        if self.demand_prob is not None:
            return self.demand_prob
        if self.elasticity is None or self.price is None:
            raise ValidationError("demand probability needs either demand_prob or elasticity and price")
        return demand_probability(self.elasticity, self.price)


@dataclass(frozen=True)
class MarketInstance:
    """A finite-horizon single-channel market.

    Types are ordered; index 0 is the light type (occupancy 1).  A type whose
    occupancy exceeds the horizon is allowed but can never be admitted.
    """

    horizon: int
    types: tuple[TypeSpec, ...]
    mode: str = "fixed_prices"

    def __post_init__(self):
        object.__setattr__(self, "types", tuple(self.types))
        if int(self.horizon) != self.horizon or self.horizon < 1:
            raise ValidationError(f"horizon must be a positive integer, got {self.horizon!r}")
        if not self.types:
            raise ValidationError("an instance needs at least one SU type")
        occ = [t.occupancy for t in self.types]
        if len(set(occ)) != len(occ):
            raise ValidationError(f"occupancies must be distinct, got {occ}")
        if occ[0] != 1:
            raise ValidationError(f"type 0 must be the light type with occupancy 1, got {occ[0]}")
        if self.mode not in ("fixed_prices", "elastic"):
            raise ValidationError(f"mode must be 'fixed_prices' or 'elastic', got {self.mode!r}")
        if self.mode == "elastic":
            for i, t in enumerate(self.types):
                if t.elasticity is None:
                    raise ValidationError(f"type {i}: elastic mode requires an elasticity")
        else:
            for i, t in enumerate(self.types):
                if t.price is None:
                    raise ValidationError(f"type {i}: fixed_prices mode requires a price")
                t.prob  # raises when neither probability source is present

    @classmethod
    def two_type(cls, horizon, occupancy, p_l, p_h, r_l, r_h):
        """Fixed-price light/heavy instance with demand probabilities given directly."""
        return cls(
            horizon,
            (TypeSpec(1, price=r_l, demand_prob=p_l), TypeSpec(occupancy, price=r_h, demand_prob=p_h)),
        )

    @classmethod
    def elastic(cls, horizon, occupancies: Sequence[int], elasticities: Sequence[float]):
        if len(occupancies) != len(elasticities):
            raise ValidationError("occupancies and elasticities must have the same length")
        types = tuple(TypeSpec(int(m), elasticity=float(k)) for m, k in zip(occupancies, elasticities))
        return cls(horizon, types, mode="elastic")

    def with_prices(self, prices: Sequence[float]) -> "MarketInstance":
        """Freeze prices on an elastic instance; probabilities follow from the demand curve."""
        if len(prices) != len(self.types):
            raise ValidationError("one price per type is required")
        types = tuple(
            TypeSpec(t.occupancy, elasticity=t.elasticity, price=float(r)) for t, r in zip(self.types, prices)
        )
        return MarketInstance(self.horizon, types)

    @property
    def occupancies(self) -> tuple[int, ...]:
        return tuple(t.occupancy for t in self.types)

    @property
    def prices(self) -> tuple[float, ...]:
        return tuple(t.price for t in self.types)

    @property
    def probs(self) -> tuple[float, ...]:
        return tuple(t.prob for t in self.types)

    @property
    def max_occupancy(self) -> int:
        return max(self.occupancies)

    def type_of(self, action: int) -> int:
        """Index of the type admitted by ``action``."""
        return self.occupancies.index(action)


@dataclass(frozen=True)
class SystemState:
    remaining: int
    demands: tuple[int, ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "demands", tuple(int(bool(b)) for b in self.demands))
        if self.remaining < 0:
            raise ValidationError(f"remaining occupancy must be >= 0, got {self.remaining}")

    @property
    def free(self) -> bool:
        return self.remaining == 0


@dataclass(frozen=True)
class ChannelModel:
    """Link parameters used to turn channel gains into SU utility.

    Per-slot gains are drawn uniformly from ``[gain_low, gain_high]``; setting
    both ends equal gives a deterministic channel.
    """

    slot_duration: float = 1.0
    bandwidth: float = 1.0
    max_power: float = 1.0
    noise_density: float = 1.0
    valuation: float = 1.0
    sensitivity: float = 1.0
    gain_low: float = 0.0
    gain_high: float = 2.0

    def __post_init__(self):
        for name in ("slot_duration", "bandwidth", "max_power", "noise_density", "valuation", "sensitivity"):
            if not getattr(self, name) > 0:
                raise ValidationError(f"channel {name} must be > 0, got {getattr(self, name)!r}")
        if not 0 <= self.gain_low <= self.gain_high:
            raise ValidationError("channel gains need 0 <= gain_low <= gain_high")

    @property
    def snr_scale(self) -> float:
        return self.max_power / (self.noise_density * self.bandwidth)


def demand_probability(k: float, r: float) -> float:
    """Probability that an SU requests access at price ``r`` under elasticity ``k``."""
    if not k > 0:
        raise DomainError(f"elasticity must be > 0, got {k!r}")
    if r < 0:
        raise DomainError(f"price {r!r} is below the lower bound 0")
    if r > 1.0 / k:
        raise DomainError(f"price {r!r} is above the cap 1/k = {1.0 / k!r}")
    return 1.0 - k * r


def transmitted_data(ch: ChannelModel, gains, slots: int | None = None) -> float:
    """Nats delivered over the occupied slots, one gain per slot.

    A scalar gain with ``slots`` given is reused for every slot.
    """
    z = np.atleast_1d(np.asarray(gains, dtype=float))
    if slots is not None:
        if slots < 1:
            raise DomainError(f"slots must be >= 1, got {slots}")
        if z.size == 1:
            z = np.repeat(z, slots)
        elif z.size != slots:
            raise DomainError(f"got {z.size} gains for {slots} slots")
    if np.any(z < 0):
        raise DomainError("channel gains must be nonnegative")
    return float(np.sum(ch.slot_duration * ch.bandwidth * np.log1p(ch.snr_scale * z)))


def su_utility(ch: ChannelModel, gains, slots: int | None = None) -> float:
    return ch.valuation * transmitted_data(ch, gains, slots)


def mean_utility(ch: ChannelModel, occupancy: int = 1) -> float:
    """Expected utility of an SU occupying ``occupancy`` slots with uniform gains."""
    a, lo, hi = ch.snr_scale, ch.gain_low, ch.gain_high
    if hi == lo:
        per_slot = math.log1p(a * lo)
    else:
        # antiderivative of ln(1 + a z) is ((1 + a z) ln(1 + a z) - a z) / a
        f = lambda z: ((1 + a * z) * math.log1p(a * z) - a * z) / a
        per_slot = (f(hi) - f(lo)) / (hi - lo)
    return ch.valuation * ch.slot_duration * ch.bandwidth * per_slot * occupancy


def elasticity_from_channel(ch: ChannelModel, mean_utility: float) -> float:
    if not mean_utility > 0:
        raise DomainError(f"mean utility must be > 0, got {mean_utility!r} (degenerate channel)")
    return ch.sensitivity / mean_utility


def su_accepts(utility: float, price: float) -> bool:
    return utility >= price


def state_transition(remaining: int, action: int) -> int:
    """Remaining occupancy after admitting ``action`` (an occupancy, 0 for nobody)."""
    if remaining >= 1 and action != NO_ADMIT:
        raise ContractViolation(f"cannot admit while the channel is busy for {remaining} more slot(s)")
    return max(remaining + action * (1 - remaining) - 1, 0)


def admissible(occupancy: int, n: int, horizon: int) -> bool:
    """Whether a type of this occupancy still fits before the horizon ends."""
    return n + occupancy - 1 <= horizon


def feasible_actions(state: SystemState, n: int, instance: MarketInstance) -> frozenset[int]:
    actions = {NO_ADMIT}
    if state.free:
        for bit, occ in zip(state.demands, instance.occupancies):
            if bit and admissible(occ, n, instance.horizon):
                actions.add(occ)
    return frozenset(actions)


def demand_patterns(num_types: int):
    """All presence-bit tuples, light type first, in lexicographic order."""
    return list(product((0, 1), repeat=num_types))


def pattern_probability(pattern: Sequence[int], probs: Sequence[float]) -> float:
    out = 1.0
    for bit, p in zip(pattern, probs):
        out *= p if bit else 1.0 - p
    return out


@dataclass(frozen=True)
class PricePlan:
    """Per-slot prices and request probabilities, shape (N, number of types)."""

    prices: np.ndarray
    probs: np.ndarray
    occupancies: tuple[int, ...]

    def __post_init__(self):
        prices = np.asarray(self.prices, dtype=float)
        probs = np.asarray(self.probs, dtype=float)
        if prices.ndim != 2 or prices.shape != probs.shape or prices.shape[1] != len(self.occupancies):
            raise ValidationError("prices and probs must both be (N, number of types) arrays")
        object.__setattr__(self, "prices", prices)
        object.__setattr__(self, "probs", probs)
        object.__setattr__(self, "occupancies", tuple(self.occupancies))

    @property
    def horizon(self) -> int:
        return self.prices.shape[0]

    @classmethod
    def constant(cls, instance: MarketInstance) -> "PricePlan":
        """The plan of a fixed-price instance: the same prices in every slot."""
        N = instance.horizon
        return cls(np.tile(instance.prices, (N, 1)), np.tile(instance.probs, (N, 1)), instance.occupancies)
