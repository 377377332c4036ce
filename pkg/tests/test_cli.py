import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import aimbandit.cli as cli
from aimbandit.config import ConfigError, emit_csv, parse_config, parse_sweep, read_csv
from aimbandit.sim import AggregatedTable, MeanSource, PolicySpec
from aimbandit.validate import validate_suite

MINIMAL = """\
[experiment]
policies = aim_gauss2
means = 0.8, 0.79
horizon = 1000
runs = 10
seed = 1
"""


def write(tmp_path, text, name="exp.ini"):
    path = tmp_path / name
    path.write_text(text)
    return path


class TestParseConfig:
    def test_minimal(self, tmp_path):
        cfg = parse_config(write(tmp_path, MINIMAL))
        assert cfg.policies == (PolicySpec("aim_gauss2"),)
        assert cfg.mean_source == MeanSource("fixed", values=(0.8, 0.79))
        assert (cfg.horizon, cfg.runs, cfg.base_seed) == (1000, 10, 1)
        assert cfg.family == "gaussian" and cfg.sigma2 == 1.0

    def test_policy_defaults(self, tmp_path):
        text = MINIMAL.replace("aim_gauss2", "ucb_tuned, thompson")
        cfg = parse_config(write(tmp_path, text))
        assert [p.constant for p in cfg.policies if p.name == "ucb_tuned"] == [2.1]
        text = MINIMAL.replace("aim_gauss2", "kl_ucb").replace("[experiment]", "[experiment]\nfamily = bernoulli")
        assert parse_config(write(tmp_path, text)).policies[0].constant == 1e-5

    def test_policy_constant_section(self, tmp_path):
        text = MINIMAL.replace("aim_gauss2", "ucb_tuned") + "\n[ucb_tuned]\nc = 1.5\n"
        assert parse_config(write(tmp_path, text)).policies[0].constant == 1.5

    def test_horizon_below_arms(self, tmp_path):
        with pytest.raises(ConfigError, match="horizon 1"):
            parse_config(write(tmp_path, MINIMAL.replace("horizon = 1000", "horizon = 1")))

    def test_override(self, tmp_path):
        path = write(tmp_path, MINIMAL.replace("runs = 10", "runs = 100"))
        assert parse_config(path, {"runs": 5}).runs == 5
        assert parse_config(path, {"runs": None}).runs == 100

    def test_unknown_keys_with_lines(self, tmp_path):
        text = MINIMAL + "colour = blue\n\n[thompson]\nc = 3\n"
        with pytest.raises(ConfigError) as info:
            parse_config(write(tmp_path, text))
        problems = info.value.problems
        assert any("line 7" in p and "colour" in p for p in problems)
        assert any("[thompson]" in p for p in problems)

    def test_all_violations_listed(self, tmp_path):
        text = "[experiment]\npolicies = aim_gauss2, kl_ucb\nmeans = 0.1, 0.2, 0.3\nhorizon = 2\nruns = 0\n"
        with pytest.raises(ConfigError) as info:
            parse_config(write(tmp_path, text))
        assert len(info.value.problems) == 4

    def test_unparsable_value(self, tmp_path):
        with pytest.raises(ConfigError) as info:
            parse_config(write(tmp_path, MINIMAL.replace("runs = 10", "runs = ten")))
        assert info.value.problems == ["line 5, [experiment] runs: cannot parse 'ten'"]

    def test_mean_source_exclusive(self, tmp_path):
        with pytest.raises(ConfigError, match="exactly one"):
            parse_config(write(tmp_path, MINIMAL + "sobol_pairs = 4\n"))

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="cannot read"):
            parse_config(tmp_path / "absent.ini")

    def test_sweep_section_rejected_by_run(self, tmp_path):
        with pytest.raises(ConfigError, match="sweep"):
            parse_config(write(tmp_path, MINIMAL + "[sweep]\nhorizon = 10; 20\n"))


def _table(values, checkpoints=(1, 10, 100)):
    return AggregatedTable(
        np.array(checkpoints),
        {n: np.array(v[0]) for n, v in values.items()},
        {n: np.array(v[1]) for n, v in values.items()},
        runs=7,
    )


class TestCsv:
    def test_layout(self, tmp_path):
        path = tmp_path / "t.csv"
        emit_csv(_table({"thompson": ([0.0, 1.5, 2.25], [0.0, 0.1, 0.2]), "aim_gauss2": ([0, 1, 2], [0, 0, 0])}), path)
        lines = path.read_text().splitlines()
        assert lines[0] == "policy,t,mean_regret,stderr,runs"
        assert lines[1] == "aim_gauss2,1,0,0,7"
        assert lines[-1] == "thompson,100,2.25,0.2,7"
        assert len(lines) == 7

    def test_single_row(self, tmp_path):
        path = tmp_path / "t.csv"
        emit_csv(_table({"thompson": ([1 / 3], [0.0])}, checkpoints=(5,)), path)
        assert path.read_text() == "policy,t,mean_regret,stderr,runs\nthompson,5,0.333333333,0,7\n"

    @settings(max_examples=50, deadline=None)
    @given(st.lists(st.floats(-1e12, 1e12, allow_nan=False), min_size=3, max_size=3))
    def test_round_trip(self, tmp_path_factory, values):
        path = tmp_path_factory.mktemp("csv") / "t.csv"
        emit_csv(_table({"kl_ucb": (values, np.abs(values))}), path)
        rows = read_csv(path)
        for row, v in zip(rows, values):
            assert math.isclose(row["mean_regret"], v, rel_tol=1e-8, abs_tol=1e-300)
            assert math.isclose(row["stderr"], abs(v), rel_tol=1e-8, abs_tol=1e-300)

    def test_negative_zero_printed_as_zero(self, tmp_path):
        path = tmp_path / "t.csv"
        emit_csv(_table({"thompson": ([-0.0], [0.0])}, checkpoints=(1,)), path)
        assert ",-0," not in path.read_text()

    def test_unwritable_path(self, tmp_path):
        with pytest.raises(OSError, match="cannot write"):
            emit_csv(_table({"thompson": ([1.0], [0.0])}, checkpoints=(1,)), tmp_path / "no" / "t.csv")


class TestMain:
    def test_run_and_replay(self, tmp_path):
        path = write(tmp_path, MINIMAL.replace("aim_gauss2", "aim_gauss2, thompson"))
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        assert cli.main(["run", "--config", str(path), "--out", str(a), "--horizon", "300"]) == 0
        assert cli.main(["run", "--config", str(path), "--out", str(b), "--horizon", "300"]) == 0
        assert a.read_bytes() == b.read_bytes()
        rows = read_csv(a)
        assert {r["policy"] for r in rows} == {"aim_gauss2", "thompson"}
        assert rows[-1]["t"] == 300 and rows[-1]["runs"] == 10

    def test_zero_gap_rows(self, tmp_path):
        path = write(tmp_path, MINIMAL.replace("0.8, 0.79", "0.5, 0.5"))
        out = tmp_path / "z.csv"
        assert cli.main(["run", "--config", str(path), "--out", str(out)]) == 0
        assert all(r["mean_regret"] == 0 for r in read_csv(out))

    def test_policy_override(self, tmp_path):
        path = write(tmp_path, MINIMAL)
        out = tmp_path / "p.csv"
        assert cli.main(["run", "--config", str(path), "--out", str(out), "--policies", "ucb_tuned", "--runs", "2"]) == 0
        assert {r["policy"] for r in read_csv(out)} == {"ucb_tuned"}

    def test_config_error_code(self, tmp_path, capsys):
        path = write(tmp_path, MINIMAL.replace("horizon = 1000", "horizon = 1"))
        assert cli.main(["run", "--config", str(path), "--out", str(tmp_path / "x.csv")]) == cli.EXIT_CONFIG
        assert "config error" in capsys.readouterr().err

    def test_run_error_code(self, tmp_path, monkeypatch):
        from aimbandit.sim import RunError

        def fail(config):
            raise RunError("policy=thompson instance=0 replicate=3 base_seed=1: boom")

        monkeypatch.setattr(cli, "run_experiment", fail)
        path = write(tmp_path, MINIMAL)
        assert cli.main(["run", "--config", str(path), "--out", str(tmp_path / "x.csv")]) == cli.EXIT_RUN

    def test_unwritable_output_is_run_error(self, tmp_path):
        path = write(tmp_path, MINIMAL.replace("runs = 10", "runs = 1"))
        out = tmp_path / "missing" / "x.csv"
        assert cli.main(["run", "--config", str(path), "--out", str(out), "--horizon", "10"]) == cli.EXIT_RUN

    def test_usage_error(self):
        with pytest.raises(SystemExit) as info:
            cli.main(["run"])
        assert info.value.code == 2

    def test_exit_codes_distinct(self):
        assert len({cli.EXIT_OK, cli.EXIT_CONFIG, cli.EXIT_RUN, cli.EXIT_VALIDATION, 2}) == 5

    def test_validate_ignores_config(self, tmp_path, capsys):
        path = write(tmp_path, "[experiment]\npolicies =\n")
        assert cli.main(["validate", "--config", str(path)]) == 0
        out = capsys.readouterr().out
        assert "FAIL" not in out and "PASS" in out

    def test_validate_perturbation_fails(self, monkeypatch):
        report = validate_suite(tail_offset=1e-3, print_fn=lambda *_: None)
        assert not report.passed
        import aimbandit.validate as validate

        real = validate.validate_suite
        monkeypatch.setattr(cli, "validate_suite", lambda: real(tail_offset=1e-3, print_fn=lambda *_: None))
        assert cli.main(["validate"]) == cli.EXIT_VALIDATION

    def test_sweep(self, tmp_path):
        text = MINIMAL.replace("runs = 10", "runs = 2") + "\n[sweep]\nhorizon = 50; 80\nmeans = 0.8, 0.79; 0.5, 0.5\n"
        path = write(tmp_path, text)
        assert len(parse_sweep(path)) == 4
        out = tmp_path / "grid"
        assert cli.main(["sweep", "--config", str(path), "--out", str(out)]) == 0
        index = (out / "index.csv").read_text().splitlines()
        assert index[0] == "file,horizon,means"
        assert len(index) == 5
        assert read_csv(out / "point_001.csv")[-1]["t"] == 50
        assert all(r["mean_regret"] == 0 for r in read_csv(out / "point_003.csv"))
