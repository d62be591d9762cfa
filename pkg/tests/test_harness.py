import json
import logging
from fractions import Fraction

import pytest

import bounds
import config as config_module
import harness
from error_handlers import EXIT_CONFIG, EXIT_IO, EXIT_OK, EXIT_PARSE, EXIT_VIOLATION
from models import ConfigError
from report_utils import parse_report


@pytest.fixture(autouse=True)
def isolated(tmp_path, monkeypatch):
    monkeypatch.delenv("RESKNAP_SEED", raising=False)
    monkeypatch.delenv("LOG_LEVEL", raising=False)
    monkeypatch.setattr(config_module, "CONFIG_FILE", str(tmp_path / "missing.json"))
    config_module.use_config_file(str(tmp_path / "missing.json"))
    root = logging.getLogger()
    saved_handlers, saved_level = list(root.handlers), root.level
    yield
    root.handlers = saved_handlers
    root.setLevel(saved_level)


def write_instance(tmp_path, text, name="items.txt"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def run_cli(capsys, *argv):
    code = harness.main(list(argv))
    return code, capsys.readouterr().out


# ----- simulate -----


def test_simulate_single_item(tmp_path, capsys):
    path = write_instance(tmp_path, "1,1\n")
    code, out = run_cli(capsys, "simulate", "--input", path, "--mode", "value", "--alpha", "0.1", "--policy", "alg2")
    report = parse_report(out)
    assert code == EXIT_OK
    assert report["net_gain"] == "9/10"
    assert report["opt_value"] == "1"
    assert report["strict_ratio"] == "10/9"
    assert report["decisions"] == "reserve"


def test_simulate_three_items_with_output(tmp_path, capsys):
    path = write_instance(tmp_path, "# three items\n0.6,0.6\n0.5,0.5\n0.5,2\n")
    output = tmp_path / "report.txt"
    code, out = run_cli(
        capsys, "simulate", "--input", path, "--alpha", "0.1", "--c", "2", "--output", str(output)
    )
    report = parse_report(out)
    assert code == EXIT_OK
    assert output.read_text() == out
    assert report["policy"] == "alg2"
    assert report["decisions"] == "reserve,reserve,reserve"
    assert report["final_packing"] == "1,2"
    assert report["net_gain"] == "219/100"
    assert report["opt_value"] == "5/2"
    assert report["strict_ratio"] == "250/219"
    assert report["nonstrict_ratio"] == "0"
    assert report["epoch_count"] == "0"


def test_simulate_reject_all(tmp_path, capsys):
    path = write_instance(tmp_path, "1,1\n")
    code, out = run_cli(capsys, "simulate", "--input", path, "--policy", "reject-all", "--beta", "0.5")
    report = parse_report(out)
    assert code == EXIT_OK
    assert report["net_gain"] == "0"
    assert report["strict_ratio"] == "inf"
    assert report["nonstrict_ratio"] == "inf"


def test_simulate_size_mode_uses_threshold_policy(tmp_path, capsys):
    path = write_instance(tmp_path, "0.5,0.05\n0.5,1\n")
    code, out = run_cli(capsys, "simulate", "--input", path, "--mode", "size", "--alpha", "0.2")
    report = parse_report(out)
    assert code == EXIT_OK
    assert report["policy"] == "alg1"
    assert report["c"] == "11/10"
    assert report["decisions"] == "reject,reserve"


def test_simulate_beta_from_ledger(tmp_path, capsys):
    path = write_instance(tmp_path, "0.5,1\n0.6,2\n")
    code, out = run_cli(
        capsys, "simulate", "--input", path, "--mode", "size", "--alpha", "0.1", "--epsilon", "0.5",
        "--beta", "from-ledger",
    )
    report = parse_report(out)
    level = int(report["density_level"])
    assert code == EXIT_OK
    assert Fraction(report["beta"]) == Fraction(5, 2) * 2 * Fraction(1, 10) * (level + 1) + Fraction(1, 5)


def test_simulate_size_mode_without_alpha_is_refused(tmp_path, capsys):
    path = write_instance(tmp_path, "1,1\n")
    code, _ = run_cli(capsys, "simulate", "--input", path, "--mode", "size", "--alpha", "0")
    assert code == EXIT_CONFIG


def test_simulate_mode_mismatch(tmp_path, capsys):
    path = write_instance(tmp_path, "1,1\n")
    code, _ = run_cli(capsys, "simulate", "--input", path, "--mode", "size", "--policy", "alg2")
    assert code == EXIT_CONFIG


def test_parse_error_exit_code(tmp_path, capsys):
    path = write_instance(tmp_path, "0.5,1\n0.5,abc\n")
    code, _ = run_cli(capsys, "simulate", "--input", path)
    assert code == EXIT_PARSE


def test_missing_input_exit_code(tmp_path, capsys):
    code, _ = run_cli(capsys, "simulate", "--input", str(tmp_path / "absent.txt"))
    assert code == EXIT_IO


def test_missing_input_flag(capsys):
    code, _ = run_cli(capsys, "solve")
    assert code == EXIT_CONFIG


def test_unknown_flag_is_a_config_error(capsys):
    code, _ = run_cli(capsys, "solve", "--bogus", "1")
    assert code == EXIT_CONFIG
    code, _ = run_cli(capsys, "simulate", "--alpha", "lots")
    assert code == EXIT_CONFIG


def test_beta_from_ledger_only_for_size_runs(tmp_path, capsys):
    path = write_instance(tmp_path, "1,1\n")
    code, _ = run_cli(capsys, "simulate", "--input", path, "--mode", "value", "--beta", "from-ledger")
    assert code == EXIT_CONFIG


def test_config_file_supplies_defaults(tmp_path, capsys):
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps({"mode": "size", "policy": "alg1", "alpha": 0.25, "delta": 0.5}))
    path = write_instance(tmp_path, "1,1\n")
    code, out = run_cli(capsys, "simulate", "--input", path, "--config", str(cfg_path))
    report = parse_report(out)
    assert code == EXIT_OK
    assert report["mode"] == "size"
    assert report["alpha"] == "1/4"
    assert report["c"] == "3/2"


# ----- solve -----


def test_solve(tmp_path, capsys):
    path = write_instance(tmp_path, "0.6,1.2\n0.5,0.5\n0.4,1.2\n")
    code, out = run_cli(capsys, "solve", "--input", path)
    report = parse_report(out)
    assert code == EXIT_OK
    assert report["chosen"] == "0,2"
    assert report["total_value"] == "12/5"
    assert report["total_size"] == "1"


# ----- adversary -----


def test_adversary_size_pack_first_fit(capsys):
    code, out = run_cli(
        capsys, "adversary", "--family", "size", "--policy", "pack-first-fit", "--C", "1e6", "--beta", "10"
    )
    report = parse_report(out)
    assert code == EXIT_OK
    assert report["termination"] == "TookBait"
    assert Fraction(report["forced_ratio"]) == Fraction(2999990, 1000000)
    assert float(report["forced_ratio_float"]) >= 2.99


def test_adversary_value_threshold_policy(capsys):
    code, out = run_cli(capsys, "adversary", "--family", "value", "--policy", "alg2", "--alpha", "0.1", "--N", "4")
    report = parse_report(out)
    assert code == EXIT_OK
    assert report["termination"] == "TookBait"
    forced = float(report["forced_ratio_float"])
    assert 2 <= forced <= float(report["ub"])
    assert float(report["ub"]) == pytest.approx(bounds.ub_value_opt(0.1), rel=1e-3)
    assert float(report["finite_n_bound"]) > 2
    assert "series_bound" in report


def test_adversary_value_reserve_all_bleeds_out(capsys):
    code, out = run_cli(
        capsys, "adversary", "--family", "value", "--policy", "reserve-all", "--alpha", "0.3", "--N", "4"
    )
    report = parse_report(out)
    assert code == EXIT_OK
    assert report["termination"] == "ScheduleConverged"
    assert report["forced_ratio"] == "inf" or float(report["forced_ratio_float"]) > 1000


def test_adversary_mode_mismatch(capsys):
    code, _ = run_cli(capsys, "adversary", "--family", "size", "--policy", "alg2")
    assert code == EXIT_CONFIG


# ----- bounds-curve -----


def test_bounds_curve_is_deterministic(tmp_path, capsys):
    first, second = tmp_path / "a.csv", tmp_path / "b.csv"
    assert harness.main(["bounds-curve", "--output", str(first)]) == EXIT_OK
    assert harness.main(["bounds-curve", "--output", str(second)]) == EXIT_OK
    assert first.read_bytes() == second.read_bytes()

    lines = first.read_text().splitlines()
    assert lines[0] == "alpha,lb,ub_opt,c_star,f_star"
    assert len(lines) == 100
    rows = {line.split(",")[0]: [float(x) for x in line.split(",")] for line in lines[1:]}
    alpha, lb, ub, c, f = rows["0.25"]
    assert lb == pytest.approx(10.472136, abs=1e-5)
    assert ub == pytest.approx(39.596, abs=0.01)
    assert c == pytest.approx(5.449490, abs=1e-5)
    assert f == pytest.approx(2.618034, abs=1e-6)
    first_row = rows["0.005"]
    assert 2 <= first_row[1] <= 2.7 and 2 <= first_row[2] <= 2.7
    lbs = [float(line.split(",")[1]) for line in lines[1:]]
    assert all(a < b for a, b in zip(lbs, lbs[1:]))


def test_bounds_curve_size_family(capsys):
    code, out = run_cli(capsys, "bounds-curve", "--family", "size")
    lines = out.splitlines()
    assert code == EXIT_OK
    assert lines[0] == "alpha,lb,ub"
    assert lines[1] == "0.005,2,2"


def test_bounds_curve_unwritable_output(tmp_path, capsys):
    code, _ = run_cli(capsys, "bounds-curve", "--output", str(tmp_path / "no" / "such" / "dir.csv"))
    assert code == EXIT_IO


# ----- verify -----


def test_verify_value_mode_passes(capsys):
    code, out = run_cli(
        capsys, "verify", "--mode", "value", "--alpha", "0.1", "--n", "40", "--max-items", "25", "--N", "4"
    )
    report = parse_report(out)
    assert code == EXIT_OK
    assert report["violations"] == "0"
    assert report["checked"] == "44"
    assert report["game_termination"] == "TookBait"
    assert float(report["game_forced_ratio_float"]) == pytest.approx(float(Fraction(report["game_forced_ratio"])))


def test_verify_size_mode_with_ledger_beta(capsys):
    code, out = run_cli(
        capsys, "verify", "--mode", "size", "--alpha", "0.2", "--epsilon", "0.5", "--beta", "from-ledger",
        "--n", "40", "--max-items", "25",
    )
    report = parse_report(out)
    assert code == EXIT_OK
    assert report["policy"] == "alg1"
    assert report["c"] == "5/4"
    assert report["beta"] == "from-ledger"
    assert report["violations"] == "0"


def test_verify_refuses_alpha_above_half(capsys):
    code, _ = run_cli(capsys, "verify", "--mode", "value", "--alpha", "0.6")
    assert code == EXIT_CONFIG


def test_verify_size_mode_refuses_large_c(capsys):
    code, _ = run_cli(capsys, "verify", "--mode", "size", "--alpha", "0.2", "--epsilon", "0.2", "--c", "1.5")
    assert code == EXIT_CONFIG


def test_verify_reports_counterexample(monkeypatch, capsys):
    monkeypatch.setattr(harness, "check_instance", lambda task: (False, "3", "forced failure"))
    code, out = run_cli(capsys, "verify", "--mode", "size", "--alpha", "0.2", "--n", "3", "--max-items", "4")
    assert code == EXIT_VIOLATION
    assert "violations=4" in out
    assert "# counterexample: forced failure" in out
    tail = out.split("# counterexample: forced failure\n", 1)[1]
    assert tail and all("," in line for line in tail.splitlines())


def test_seed_environment_overrides_flag(monkeypatch, capsys):
    monkeypatch.setenv("RESKNAP_SEED", "77")
    code, out = run_cli(
        capsys, "verify", "--mode", "size", "--alpha", "0.2", "--seed", "5", "--n", "2", "--max-items", "5"
    )
    assert code == EXIT_OK
    assert parse_report(out)["seed"] == "77"


def test_seed_flag_used_without_environment(monkeypatch, capsys):
    monkeypatch.delenv("RESKNAP_SEED", raising=False)
    code, out = run_cli(
        capsys, "verify", "--mode", "size", "--alpha", "0.2", "--seed", "5", "--n", "2", "--max-items", "5"
    )
    assert code == EXIT_OK
    assert parse_report(out)["seed"] == "5"


def test_check_instance_value_task():
    task = ("value", "1/10", "2", "alg2", "10", "", "1/2", "1,1\n")
    assert harness.check_instance(task) == (True, "10/9", "")


# ----- sweep -----


def test_sweep_rows(tmp_path, capsys):
    output = tmp_path / "sweep.csv"
    code, _ = run_cli(
        capsys, "sweep", "--grid", "0.1:0.2:0.1", "--n", "15", "--max-items", "20", "--N", "4", "--output", str(output)
    )
    lines = output.read_text().splitlines()
    assert code == EXIT_OK
    assert lines[0] == "alpha,measured_worst,adversary_forced,lb,ub"
    assert [line.split(",")[0] for line in lines[1:]] == ["0.1", "0.2"]
    for line in lines[1:]:
        _, measured, forced, lb, ub = (float(x) for x in line.split(","))
        assert measured <= ub
        assert forced >= 2 * (1 - 0.2)
        assert lb <= ub


def test_sweep_row_includes_unit_density_instances(monkeypatch):
    seen = []
    real_run = harness.run

    def recording_run(config, instance):
        seen.append(instance)
        return real_run(config, instance)

    monkeypatch.setattr(harness, "run", recording_run)
    harness.sweep_row(("0.1", 3, 20, 6, "1/4", "8", 2, "1/20"))
    assert len(seen) == 22
    assert all(item.value == item.size for instance in seen[20:] for item in instance.items)


def test_sweep_refuses_grid_outside_range(capsys):
    code, _ = run_cli(capsys, "sweep", "--grid", "0.3:0.6:0.1")
    assert code == EXIT_CONFIG


def test_parse_grid():
    assert harness.parse_grid("0.05:0.15:0.05") == (Fraction(1, 20), Fraction(1, 10), Fraction(3, 20))
    with pytest.raises(ConfigError):
        harness.parse_grid("0.1:0.2")
    with pytest.raises(ConfigError):
        harness.parse_grid("0.2:0.1:0.1")
