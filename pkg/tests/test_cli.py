import csv
import json

import pytest

from spectrum_pricing.cli import SWEEP_HEADER, ConfigError, load_config, parse_config, run_command, sweep_rows


def write(tmp_path, name, data):
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return path


@pytest.fixture
def two_slot(tmp_path):
    return write(tmp_path, "two_slot.json", {"horizon": 2, "occupancies": [1, 2], "elasticities": [1, 1]})


def test_defaults_are_applied(tmp_path):
    cfg = load_config(write(tmp_path, "c.json", {"elasticities": [1, 1]}))
    assert (cfg.horizon, cfg.occupancies, cfg.search_resolution, cfg.trials, cfg.seed) == (100, (1, 2), 400, 100_000, 42)
    assert cfg.sweep_k_l.steps == 30 and cfg.sweep_k_h.min == 10 and cfg.sweep_k_h.max == 150


def test_minimal_single_type(tmp_path):
    cfg = load_config(write(tmp_path, "c.json", {"horizon": 1, "occupancies": [1], "elasticities": [1.0]}))
    assert cfg.instance().occupancies == (1,)


@pytest.mark.parametrize(
    "data, field",
    [
        ({"occupancies": [1, 1], "elasticities": [1, 1]}, "occupancies"),
        ({"elasticities": [1, -1]}, "elasticities"),
        ({"elasticities": [1, 1], "horizon": 0}, "horizon"),
        ({"elasticities": [1, 1], "colour": 3}, "colour"),
        ({"elasticities": [1, 1], "sweep": {"k_l": {"steps": 1}}}, "sweep.k_l.steps"),
        ({"elasticities": [1]}, "elasticities"),
        ({"elasticities": [1, 1], "channel": {"T": 1, "foo": 2}}, "foo"),
    ],
)
def test_validation_names_the_field(data, field):
    with pytest.raises(ConfigError, match=field):
        parse_config(data)


def test_channel_block_derives_elasticities():
    cfg = parse_config({"horizon": 3, "channel": {"k_hat": [1.0, 2.0], "gain_range": [0.0, 2.0]}})
    assert cfg.elasticities[1] == pytest.approx(cfg.elasticities[0])  # utility doubles with occupancy


def test_dynamic_two_slot(two_slot, capsys):
    assert run_command(["dynamic", "--config", str(two_slot)]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["V_1"] == pytest.approx(0.575256347656, abs=1e-12)
    assert out["labels"] == ["LP", "LD"]
    assert out["config"]["horizon"] == 2


def test_policy_dump(two_slot, tmp_path):
    out = tmp_path / "policy.json"
    assert run_command(["policy", "--config", str(two_slot), "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    first = doc["slots"][0]
    assert list(first) == ["n", "strategy", "r_l", "r_h", "r_h_advisory", "kkt_case", "actions", "V_n"]
    assert (first["strategy"], first["kkt_case"]) == ("LP", "I0")
    assert first["actions"] == {"00": 0, "01": 2, "10": 1, "11": 1}
    assert first["V_n"] == 0.57525634765625  # files keep full precision


def test_policy_single_slot(tmp_path):
    cfg = write(tmp_path, "c.json", {"horizon": 1, "occupancies": [1, 2], "elasticities": [1, 1]})
    out = tmp_path / "p.json"
    assert run_command(["policy", "--config", str(cfg), "--out", str(out)]) == 0
    slots = json.loads(out.read_text())["slots"]
    assert len(slots) == 1 and slots[0]["strategy"] == "LD"


def test_policy_bad_path_is_internal_error(two_slot, tmp_path):
    assert run_command(["policy", "--config", str(two_slot), "--out", str(tmp_path / "missing" / "p.json")]) == 1


def test_sweep_csv_is_stable(tmp_path):
    cfg = write(
        tmp_path,
        "sweep.json",
        {"horizon": 12, "elasticities": [1, 1], "search_resolution": 40,
         "sweep": {"k_l": {"min": 10, "max": 100, "steps": 3}, "k_h": {"min": 10, "max": 100, "steps": 2}}},
    )
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run_command(["sweep", "--config", str(cfg), "--out", str(a)]) == 0
    assert run_command(["sweep", "--config", str(cfg), "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    rows = list(csv.reader(a.open()))
    assert rows[0] == SWEEP_HEADER
    assert [(float(r[0]), float(r[1])) for r in rows[1:]] == [(x, y) for x in (10, 55, 100) for y in (10, 100)]
    for r in rows[1:]:
        static, dyn, pct = float(r[2]), float(r[3]), float(r[4])
        assert dyn >= static - 1e-9
        assert pct == 100 * (dyn - static) / static


def test_sweep_parallel_matches_serial():
    cfg = parse_config({"horizon": 8, "elasticities": [1, 1], "search_resolution": 30,
                        "sweep": {"k_l": {"min": 10, "max": 50, "steps": 2}, "k_h": {"min": 10, "max": 50, "steps": 2}}})
    assert sweep_rows(cfg, workers=1) == sweep_rows(cfg, workers=2)


def test_static_and_compare(two_slot, capsys):
    assert run_command(["static", "--config", str(two_slot)]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["V_1"] == pytest.approx(0.573062746668, abs=1e-12)
    assert run_command(["compare", "--config", str(two_slot), "--baseline", "switchover"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["baseline_revenue"] <= out["dynamic_revenue"]


def test_fixed_prices_static(tmp_path, capsys):
    cfg = write(tmp_path, "c.json", {"horizon": 2, "prices": [1, 3], "demand_probs": [0.5, 0.5]})
    assert run_command(["static", "--config", str(cfg)]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["V_1"] == 2.0 and out["regime"] == "HeavyPriority"


def test_simulate_is_reproducible(two_slot, capsys):
    argv = ["simulate", "--config", str(two_slot), "--trials", "5000", "--seed", "7"]
    assert run_command(argv) == 0
    first = capsys.readouterr().out
    assert run_command(argv) == 0
    assert capsys.readouterr().out == first
    out = json.loads(first)
    assert abs(out["mean"] - out["V_1"]) <= 4 * out["stderr"]


def test_usage_errors(two_slot, capsys):
    assert run_command(["dynamic", "--bogus"]) == 2
    assert run_command(["nonsense"]) == 2
    assert run_command(["dynamic"]) == 2
    assert run_command(["dynamic", "--config", "/does/not/exist.json"]) == 2
    assert run_command(["dynamic", "--config", str(two_slot), "--occupancy", "1"]) == 2


def test_stdout_uses_twelve_digits(two_slot, capsys):
    run_command(["dynamic", "--config", str(two_slot)])
    out = json.loads(capsys.readouterr().out)
    assert out["slots"][0]["r_l"] == 0.5703125
    assert len(repr(out["V_1"]).replace("0.", "", 1)) <= 12


def test_verify_exits_zero(capsys):
    assert run_command(["verify"]) == 0
    assert "FAIL" not in capsys.readouterr().out
