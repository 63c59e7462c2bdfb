"""Command-line entry point.

    python -m spectrum_pricing {static,dynamic,policy,sweep,simulate,compare,verify} [options]

Exit status is 0 on success, 2 for invalid input or usage and 1 for anything else.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from . import admission, dynamic, general, oracles, simulate
from .market import ChannelModel, MarketInstance, ModelError, TypeSpec, ValidationError, demand_patterns, mean_utility

SWEEP_HEADER = ["k_l", "k_h", "static_revenue", "dynamic_revenue", "improvement_pct", "dynamic_regime", "static_regime"]

_KEYS = {
    "horizon", "occupancies", "elasticities", "prices", "demand_probs", "sweep",
    "search_resolution", "trials", "seed", "channel",
}
_CHANNEL_KEYS = {"T", "w", "p_max", "n0", "eta", "k_hat", "gain_range"}


class ConfigError(ValidationError):
    pass


@dataclass(frozen=True)
class Axis:
    min: float = 10.0
    max: float = 150.0
    steps: int = 30

    def values(self) -> np.ndarray:
        return np.linspace(self.min, self.max, self.steps)


@dataclass(frozen=True)
class Config:
    horizon: int = 100
    occupancies: tuple[int, ...] = (1, 2)
    elasticities: tuple[float, ...] | None = None
    prices: tuple[float, ...] | None = None
    demand_probs: tuple[float, ...] | None = None
    sweep_k_l: Axis = field(default_factory=Axis)
    sweep_k_h: Axis = field(default_factory=Axis)
    search_resolution: int = 400
    trials: int = 100_000
    seed: int = 42
    channel: ChannelModel | None = None
    k_hat: tuple[float, ...] | None = None

    @property
    def fixed_prices(self) -> bool:
        return self.prices is not None

    @property
    def heavy_occupancy(self) -> int:
        return self.occupancies[1] if len(self.occupancies) > 1 else 2

    def instance(self) -> MarketInstance:
        occ = self.occupancies
        if self.fixed_prices:
            types = []
            for i, m in enumerate(occ):
                k = self.elasticities[i] if self.elasticities else None
                p = self.demand_probs[i] if self.demand_probs else None
                types.append(TypeSpec(m, elasticity=k, price=self.prices[i], demand_prob=p))
            return MarketInstance(self.horizon, tuple(types))
        return MarketInstance.elastic(self.horizon, occ, self.elasticities)

    def echo(self) -> dict:
        out = {
            "horizon": self.horizon,
            "occupancies": list(self.occupancies),
            "elasticities": None if self.elasticities is None else list(self.elasticities),
            "prices": None if self.prices is None else list(self.prices),
            "demand_probs": None if self.demand_probs is None else list(self.demand_probs),
            "sweep": {"k_l": asdict(self.sweep_k_l), "k_h": asdict(self.sweep_k_h)},
            "search_resolution": self.search_resolution,
            "trials": self.trials,
            "seed": self.seed,
        }
        if self.channel is not None:
            out["channel"] = asdict(self.channel) | {"k_hat": list(self.k_hat)}
        return out


def _number_list(raw, name, positive=False, integer=False):
    if not isinstance(raw, list) or not raw:
        raise ConfigError(f"{name}: expected a non-empty list")
    out = []
    for x in raw:
        if isinstance(x, bool) or not isinstance(x, (int, float)):
            raise ConfigError(f"{name}: entries must be numbers, got {x!r}")
        if integer and int(x) != x:
            raise ConfigError(f"{name}: entries must be integers, got {x!r}")
        if positive and not x > 0:
            raise ConfigError(f"{name}: entries must be > 0, got {x!r}")
        out.append(int(x) if integer else float(x))
    return tuple(out)


def _int_field(raw, name, minimum):
    if isinstance(raw, bool) or not isinstance(raw, int) or raw < minimum:
        raise ConfigError(f"{name}: expected an integer >= {minimum}, got {raw!r}")
    return raw


def _axis(raw, name) -> Axis:
    if not isinstance(raw, dict) or set(raw) - {"min", "max", "steps"}:
        raise ConfigError(f"sweep.{name}: expected an object with min, max, steps")
    axis = Axis(float(raw.get("min", 10.0)), float(raw.get("max", 150.0)), raw.get("steps", 30))
    _int_field(axis.steps, f"sweep.{name}.steps", 2)
    if not 0 < axis.min <= axis.max:
        raise ConfigError(f"sweep.{name}: need 0 < min <= max")
    return axis


def _channel(raw, occupancies):
    if not isinstance(raw, dict):
        raise ConfigError("channel: expected an object")
    unknown = set(raw) - _CHANNEL_KEYS
    if unknown:
        raise ConfigError(f"channel: unknown field(s) {sorted(unknown)}")
    lo, hi = raw.get("gain_range", [0.0, 2.0])
    try:
        ch = ChannelModel(
            slot_duration=raw.get("T", 1.0), bandwidth=raw.get("w", 1.0), max_power=raw.get("p_max", 1.0),
            noise_density=raw.get("n0", 1.0), valuation=raw.get("eta", 1.0), gain_low=lo, gain_high=hi,
        )
    except ValidationError as exc:
        raise ConfigError(f"channel: {exc}") from None
    k_hat = _number_list(raw.get("k_hat", [1.0] * len(occupancies)), "channel.k_hat", positive=True)
    if len(k_hat) != len(occupancies):
        raise ConfigError("channel.k_hat: need one sensitivity per type")
    return ch, k_hat


def parse_config(data: dict) -> Config:
    if not isinstance(data, dict):
        raise ConfigError("config: expected a JSON object")
    unknown = set(data) - _KEYS
    if unknown:
        raise ConfigError(f"config: unknown field(s) {sorted(unknown)}")
    horizon = _int_field(data.get("horizon", 100), "horizon", 1)
    occ = _number_list(data.get("occupancies", [1, 2]), "occupancies", positive=True, integer=True)
    if len(set(occ)) != len(occ):
        raise ConfigError(f"occupancies: must be distinct, got {list(occ)}")
    if occ[0] != 1:
        raise ConfigError("occupancies: the first type must be the light type with occupancy 1")

    def per_type(key, **kw):
        if data.get(key) is None:
            return None
        vals = _number_list(data[key], key, **kw)
        if len(vals) != len(occ):
            raise ConfigError(f"{key}: expected {len(occ)} entries, one per type, got {len(vals)}")
        return vals

    elasticities = per_type("elasticities", positive=True)
    prices = per_type("prices")
    probs = per_type("demand_probs")
    if probs is not None and prices is None:
        raise ConfigError("demand_probs: only meaningful together with fixed prices")
    if probs is not None and not all(0 <= p <= 1 for p in probs):
        raise ConfigError("demand_probs: entries must lie in [0, 1]")
    if prices is not None and any(r < 0 for r in prices):
        raise ConfigError("prices: entries must be >= 0")

    channel = k_hat = None
    if data.get("channel") is not None:
        channel, k_hat = _channel(data["channel"], occ)
        if elasticities is None:
            elasticities = tuple(
                kh / mean_utility(channel, m) for kh, m in zip(k_hat, occ)
            )
    if prices is not None and probs is None and elasticities is None:
        raise ConfigError("prices: fixed prices need demand_probs or elasticities")
    if prices is None and elasticities is None:
        raise ConfigError("elasticities: required unless fixed prices are given")

    sweep = data.get("sweep") or {}
    if not isinstance(sweep, dict) or set(sweep) - {"k_l", "k_h"}:
        raise ConfigError("sweep: expected an object with k_l and k_h axes")
    cfg = Config(
        horizon=horizon,
        occupancies=occ,
        elasticities=elasticities,
        prices=prices,
        demand_probs=probs,
        sweep_k_l=_axis(sweep.get("k_l", {}), "k_l"),
        sweep_k_h=_axis(sweep.get("k_h", {}), "k_h"),
        search_resolution=_int_field(data.get("search_resolution", 400), "search_resolution", 2),
        trials=_int_field(data.get("trials", 100_000), "trials", 1),
        seed=_int_field(data.get("seed", 42), "seed", 0),
        channel=channel,
        k_hat=k_hat,
    )
    try:
        cfg.instance()
    except ModelError as exc:
        raise ConfigError(str(exc)) from None
    return cfg


def load_config(path) -> Config:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"config: cannot read {path}: {exc.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return parse_config(data)


def _round12(obj):
    if isinstance(obj, float):
        return float(f"{obj:.12g}") if math.isfinite(obj) else str(obj)
    if isinstance(obj, dict):
        return {k: _round12(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round12(v) for v in obj]
    return obj


def _pattern_key(pattern) -> str:
    return "".join(str(b) for b in pattern)


def policy_document(schedule, policy: admission.PolicyTable) -> dict:
    """Serializable contingency plan: one entry per slot."""
    slots = []
    heavy = max(policy.occupancies)
    for n in range(1, policy.horizon + 1):
        if isinstance(schedule, dynamic.PriceSchedule):
            s = schedule.slots[n - 1]
            strategy, r_l, r_h, case, value = str(s.strategy), s.r_l, s.r_h, s.case, s.value
        else:
            strategy = policy.labels[n - 1] if policy.labels else None
            r_l, r_h = schedule.prices[n - 1][0], schedule.prices[n - 1][-1]
            case, value = None, schedule.values[n]
        slots.append({
            "n": n,
            "strategy": strategy,
            "r_l": r_l,
            "r_h": r_h,
            "r_h_advisory": n + heavy - 1 > policy.horizon,
            "kkt_case": case,
            "actions": {_pattern_key(p): a for p, a in policy.rule(n).items()},
            "V_n": value,
        })
    return {"horizon": policy.horizon, "occupancies": list(policy.occupancies), "slots": slots}


@dataclass(frozen=True)
class _FixedSchedule:
    prices: tuple
    values: admission.ValueFunction


def emit_policy_json(schedule, policy: admission.PolicyTable, path) -> None:
    text = json.dumps(policy_document(schedule, policy), indent=2) + "\n"
    Path(path).write_text(text)


def _dynamic_regime(labels, horizon, occupancy):
    active = set(labels[: max(horizon - occupancy + 1, 0)]) or set(labels)
    return active.pop() if len(active) == 1 else "Mixed"


def sweep_cell(k_l: float, k_h: float, horizon: int, occupancy: int, resolution: int) -> dict:
    static = admission.optimize_static_prices(k_l, k_h, horizon, occupancy, resolution)
    dyn = dynamic.solve_dynamic(k_l, k_h, horizon, occupancy)
    return {
        "k_l": k_l,
        "k_h": k_h,
        "static_revenue": static.value,
        "dynamic_revenue": dyn.v1,
        "improvement_pct": 100.0 * (dyn.v1 - static.value) / static.value,
        "dynamic_regime": _dynamic_regime(dyn.labels, horizon, occupancy),
        "static_regime": str(static.regime),
    }


def sweep_rows(cfg: Config, workers: int | None = None) -> list[dict]:
    """All grid cells in row-major order (k_l outer).  Cells are solved in parallel processes."""
    cells = [(float(a), float(b)) for a in cfg.sweep_k_l.values() for b in cfg.sweep_k_h.values()]
    k_l, k_h = [c[0] for c in cells], [c[1] for c in cells]
    fixed = [[v] * len(cells) for v in (cfg.horizon, cfg.heavy_occupancy, cfg.search_resolution)]
    workers = workers if workers is not None else min(len(cells), os.cpu_count() or 1)
    if workers <= 1:
        return list(map(sweep_cell, k_l, k_h, *fixed))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(sweep_cell, k_l, k_h, *fixed, chunksize=max(1, len(cells) // (4 * workers))))


def write_sweep_csv(rows, stream) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(SWEEP_HEADER)
    for row in rows:
        writer.writerow([repr(row[k]) if isinstance(row[k], float) else row[k] for k in SWEEP_HEADER])


def _two_type_elasticities(cfg: Config):
    if len(cfg.occupancies) != 2 or cfg.elasticities is None:
        raise ConfigError("this command needs exactly two types (light and heavy) with elasticities")
    return cfg.elasticities


def _solve(cfg: Config):
    """Schedule-like object, policy and V_1 for the configured market."""
    if cfg.fixed_prices:
        inst = cfg.instance()
        solver = admission.solve_admission if len(inst.types) == 2 else general.solve_multitype
        policy, values = solver(inst)
        return inst, policy, values, _FixedSchedule(tuple(inst.prices for _ in range(inst.horizon)), values)
    k_l, k_h = _two_type_elasticities(cfg)
    sched = dynamic.solve_dynamic(k_l, k_h, cfg.horizon, cfg.heavy_occupancy)
    return sched, sched.policy(), sched.values, sched


def cmd_static(cfg, args):
    if cfg.fixed_prices:
        inst = cfg.instance()
        policy, values = (admission.solve_admission if len(inst.types) == 2 else general.solve_multitype)(inst)
        out = {"V_1": values.v1, "labels": list(policy.labels)}
        if len(inst.types) == 2:
            (p_l, p_h), (r_l, r_h) = inst.probs, inst.prices
            ratio = r_h / r_l if r_l > 0 else math.inf
            out["regime"] = str(admission.classify_price_ratio(ratio, p_l, p_h))
        return out
    k_l, k_h = _two_type_elasticities(cfg)
    opt = admission.optimize_static_prices(k_l, k_h, cfg.horizon, cfg.heavy_occupancy, cfg.search_resolution)
    return {"r_l": opt.r_l, "r_h": opt.r_h, "V_1": opt.value, "regime": str(opt.regime)}


def cmd_dynamic(cfg, args):
    if cfg.fixed_prices:
        raise ConfigError("dynamic pricing optimizes prices; remove the fixed prices from the config")
    if len(cfg.occupancies) != 2:
        slots, values = general.solve_dynamic_numeric(cfg.elasticities, cfg.occupancies, cfg.horizon)
        return {
            "experimental": True,
            "V_1": values.v1,
            "slots": [
                {"n": n, "order": list(s.order.ranking), "prices": list(s.prices), "V_n": s.value}
                for n, s in enumerate(slots, start=1)
            ],
        }
    sched, policy, _, _ = _solve(cfg)
    doc = policy_document(sched, policy)
    return {"V_1": sched.v1, "labels": list(sched.labels), "slots": doc["slots"]}


def cmd_policy(cfg, args):
    sched, policy, _, doc_source = _solve(cfg)
    if args.out:
        emit_policy_json(doc_source, policy, args.out)
        return {"written": str(args.out), "slots": policy.horizon}
    return policy_document(doc_source, policy)


def cmd_sweep(cfg, args):
    if args.out:
        with open(args.out, "w", newline="") as fh:
            write_sweep_csv(sweep_rows(cfg), fh)
        return {"written": str(args.out), "rows": cfg.sweep_k_l.steps * cfg.sweep_k_h.steps}
    buf = io.StringIO()
    write_sweep_csv(sweep_rows(cfg), buf)
    return buf.getvalue()


def cmd_simulate(cfg, args):
    market, policy, values, _ = _solve(cfg)
    mean, stderr = simulate.monte_carlo(market, policy, cfg.trials, cfg.seed, channel=cfg.channel)
    return {"mean": mean, "stderr": stderr, "V_1": values.v1, "trials": cfg.trials, "seed": cfg.seed}


def cmd_compare(cfg, args):
    k_l, k_h = _two_type_elasticities(cfg)
    if cfg.fixed_prices:
        raise ConfigError("compare optimizes prices; remove the fixed prices from the config")
    M = cfg.heavy_occupancy
    dyn = dynamic.solve_dynamic(k_l, k_h, cfg.horizon, M).v1
    if args.baseline == "static":
        base = admission.optimize_static_prices(k_l, k_h, cfg.horizon, M, cfg.search_resolution).value
    else:
        base, _ = simulate.switchover_baseline(k_l, k_h, cfg.horizon, M, literal=args.literal_switchover)
    return {
        "baseline": args.baseline,
        "dynamic_revenue": dyn,
        "baseline_revenue": base,
        "improvement_pct": 100.0 * simulate.improvement(dyn, base),
    }


def verification_checks():
    """Desk-scale oracle comparisons; yields (name, passed, detail)."""
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(10):
        p_l, p_h = rng.uniform(0, 1, 2)
        r_l, r_h = rng.uniform(0.1, 2.0, 2)
        inst = MarketInstance.two_type(3, 2, p_l, p_h, r_l, r_h)
        _, values = admission.solve_admission(inst)
        best, _ = oracles.enumerate_policies_value(inst)
        worst = max(worst, abs(best - values.v1))
    yield "dp_vs_policy_enumeration", worst <= 1e-12, worst

    inst = MarketInstance.two_type(6, 2, 0.4, 0.7, 1.0, 2.5)
    policy, values = admission.solve_admission(inst)
    gap = abs(oracles.scenario_tree_value(policy, inst) - values.v1)
    yield "dp_vs_scenario_tree", gap <= 1e-12, gap

    worst = 0.0
    for strategy, dR, k_l, k_h in [("HP", 0.0, 1, 1), ("HP", 0.5, 1, 1), ("LP", 1.8, 1, 0.5), ("LP", 0.4, 1, 0.5), ("LD", 0.1, 2, 4)]:
        sp = {"HP": dynamic.hp_slot_pricing, "LP": dynamic.lp_slot_pricing, "LD": dynamic.ld_slot_pricing}[strategy](dR, k_l, k_h)
        g_l, g_h, g_v = oracles.grid_search_slot_prices(strategy, dR, k_l, k_h, 1000)
        gap = max(abs(g_l - sp.r_l), 0.0 if strategy == "LD" else abs(g_h - sp.r_h))
        worst = max(worst, gap)
    yield "kkt_vs_grid_prices", worst <= 1e-3, worst

    sched = dynamic.solve_dynamic(1.0, 1.0, 2, 2)
    yield "dynamic_two_slot_example", abs(sched.v1 - 0.57525634765625) <= 1e-12, sched.v1


def cmd_verify(cfg, args):
    results = list(verification_checks())
    for name, ok, detail in results:
        print(f"{'PASS' if ok else 'FAIL'} {name} ({detail:.3g})")
    return {"passed": all(ok for _, ok, _ in results)}


COMMANDS = {
    "static": cmd_static,
    "dynamic": cmd_dynamic,
    "policy": cmd_policy,
    "sweep": cmd_sweep,
    "simulate": cmd_simulate,
    "compare": cmd_compare,
    "verify": cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="spectrum-pricing", description="Spectrum pricing and admission control solver")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", type=Path, help="JSON configuration file")
        p.add_argument("--out", type=Path, help="write the result to this file")
        p.add_argument("--seed", type=int)
        p.add_argument("--trials", type=int)
        p.add_argument("--resolution", type=int, help="static price grid points per axis")
        p.add_argument("--occupancy", type=int, metavar="M", help="heavy SU occupancy in slots")
        p.add_argument("--baseline", choices=("switchover", "static"), default="static")
        p.add_argument("--literal-switchover", action="store_true", help="keep optimal prices, change only admission")
    return parser


def _apply_overrides(cfg: Config, args) -> Config:
    changes = {}
    if args.seed is not None:
        changes["seed"] = _int_field(args.seed, "--seed", 0)
    if args.trials is not None:
        changes["trials"] = _int_field(args.trials, "--trials", 1)
    if args.resolution is not None:
        changes["search_resolution"] = _int_field(args.resolution, "--resolution", 2)
    if args.occupancy is not None:
        M = _int_field(args.occupancy, "--occupancy", 2)
        if len(cfg.occupancies) != 2:
            raise ConfigError("--occupancy applies to two-type configs only")
        changes["occupancies"] = (1, M)
    cfg = replace(cfg, **changes)
    cfg.instance()
    return cfg


def run_command(argv) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.config is not None:
            cfg = load_config(args.config)
        elif args.command == "verify":
            cfg = Config(elasticities=(1.0, 1.0))
        else:
            raise ConfigError("--config is required for this command")
        cfg = _apply_overrides(cfg, args)
        result = COMMANDS[args.command](cfg, args)
    except ModelError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - report and map to the internal-error status
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    if isinstance(result, str):
        sys.stdout.write(result)
    else:
        if args.command not in ("verify",) and not (args.command == "policy" and args.out is None):
            result = {"config": cfg.echo(), **result}
        print(json.dumps(_round12(result), indent=2))
    if args.command == "verify" and not result.get("passed"):
        return 1
    return 0


def main() -> None:
    sys.exit(run_command(sys.argv[1:]))
