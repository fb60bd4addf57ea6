import json

import pytest

from config.run_config import echo_config
from main import cli_dispatch
from utils.io_utils import read_csv, read_json


@pytest.fixture
def config_file(small_config, tmp_path):
    return echo_config(small_config, tmp_path / "cfg")


class TestDispatch:
    def test_no_arguments(self):
        assert cli_dispatch([]) != 0

    def test_unknown_subcommand(self):
        assert cli_dispatch(["fly"]) != 0

    def test_help(self, capsys):
        assert cli_dispatch(["--help"]) == 0
        assert "train" in capsys.readouterr().out

    def test_subcommand_help(self):
        assert cli_dispatch(["grid-search", "--help"]) == 0

    def test_invalid_config_is_a_usage_error(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps({"episodes": 0}))
        assert cli_dispatch(["evaluate", "--policy", "always-a2", "--config", str(bad), "--out", str(tmp_path / "o")]) == 2

    def test_missing_checkpoint_is_a_failure(self, config_file, tmp_path):
        code = cli_dispatch(["evaluate", "--checkpoint", str(tmp_path / "nope.ckpt"), "--config", str(config_file), "--out", str(tmp_path / "o")])
        assert code == 1


class TestSubcommands:
    def test_channel_probe(self, config_file, tmp_path):
        out = tmp_path / "probe"
        code = cli_dispatch([
            "channel-probe", "--config", str(config_file), "--out", str(out),
            "--max-distance", "10", "--distance-step", "5", "--angle-step", "90",
        ])
        assert code == 0
        probe = read_csv(out / "channel_probe.csv")
        assert list(probe.columns) == ["distance", "angle", "p_dsrc", "p_head", "p_tail"]
        assert probe[["p_dsrc", "p_head", "p_tail"]].stack().between(0.0, 1.0).all()
        assert list(read_csv(out / "track.csv").columns) == ["x", "y", "arc_length"]
        assert (out / "config.json").exists()

    def test_evaluate_scripted_policy(self, config_file, tmp_path):
        out = tmp_path / "eval"
        assert cli_dispatch(["evaluate", "--policy", "heuristic", "--config", str(config_file), "--out", str(out)]) == 0
        metrics = read_json(out / "metrics.json")
        assert 0.0 <= metrics["reliability"] <= 100.0
        assert len(read_csv(out / "trace.csv")) == 30

    def test_train_then_decision_map(self, config_file, tmp_path):
        out = tmp_path / "train"
        assert cli_dispatch(["train", "--agent", "ppo", "--config", str(config_file), "--out", str(out)]) == 0
        for name in ("curve.csv", "metrics.json", "best.ckpt", "final.ckpt", "config.json"):
            assert (out / name).exists(), name
        maps = tmp_path / "map"
        code = cli_dispatch([
            "decision-map", "--checkpoint", str(out / "final.ckpt"), "--trace", str(out / "trace.csv"),
            "--config", str(config_file), "--out", str(maps),
        ])
        assert code == 0
        assert len(read_csv(maps / "decision_map.csv")) == 32
        assert (maps / "decision_overlap.csv").exists()


class TestEchoedConfig:
    def test_train_overrides_reach_config_json(self, config_file, tmp_path):
        out = tmp_path / "a"
        assert cli_dispatch(["train", "--agent", "trpo", "--config", str(config_file), "--out", str(out), "--episodes", "1", "--seed", "7"]) == 0
        echoed = read_json(out / "config.json")
        assert echoed["episodes"] == 1
        assert echoed["seeds"] == [7]
        assert echoed["agent"] == "trpo"
        assert len(read_csv(out / "curve.csv")) == 1

    def test_rerun_from_echoed_config_is_identical(self, config_file, tmp_path):
        first, second = tmp_path / "a", tmp_path / "b"
        assert cli_dispatch(["train", "--agent", "ppo", "--config", str(config_file), "--out", str(first), "--episodes", "2", "--seed", "7"]) == 0
        assert cli_dispatch(["train", "--config", str(first / "config.json"), "--out", str(second)]) == 0
        for name in ("curve.csv", "trace.csv", "config.json"):
            assert (first / name).read_bytes() == (second / name).read_bytes(), name

    def test_evaluate_overrides_reach_config_json(self, config_file, tmp_path):
        first, second = tmp_path / "a", tmp_path / "b"
        args = ["evaluate", "--policy", "myopic", "--config", str(config_file), "--scenario", "2", "--seed", "42", "--episodes", "2"]
        assert cli_dispatch([*args, "--out", str(first)]) == 0
        echoed = read_json(first / "config.json")
        assert echoed["scenario"] == 2
        assert echoed["evaluation"]["seed"] == 42
        assert echoed["evaluation"]["episodes"] == 2
        assert cli_dispatch(["evaluate", "--policy", "myopic", "--config", str(first / "config.json"), "--out", str(second)]) == 0
        assert (first / "trace.csv").read_bytes() == (second / "trace.csv").read_bytes()
        assert (first / "metrics.json").read_bytes() == (second / "metrics.json").read_bytes()

    def test_non_positive_evaluation_episodes_is_a_usage_error(self, config_file, tmp_path):
        code = cli_dispatch(["evaluate", "--policy", "always-a2", "--config", str(config_file), "--episodes", "0", "--out", str(tmp_path / "o")])
        assert code == 2


class TestCsvHeaders:
    """Cabeceras exactas de los CSV emitidos"""

    def test_curve_and_trace(self, config_file, tmp_path):
        out = tmp_path / "train"
        assert cli_dispatch(["train", "--agent", "ppo", "--config", str(config_file), "--out", str(out), "--episodes", "1"]) == 0
        assert (out / "curve.csv").read_text().splitlines()[0] == "episode,return"
        assert (out / "trace.csv").read_text().splitlines()[0] == (
            "step,X,Y,cos_phi,sin_phi,action_id,reward,success,p_dsrc,p_head,p_tail,distance"
        )

    def test_aggregated_curve(self, config_file, tmp_path):
        out = tmp_path / "seeds"
        assert cli_dispatch(["train", "--agent", "ppo", "--config", str(config_file), "--out", str(out), "--episodes", "1", "--all-seeds", "--workers", "1"]) == 0
        assert (out / "curve.csv").read_text().splitlines()[0] == "episode,seed_0,seed_1,mean,ci_half_width"

    def test_evaluation_trace(self, config_file, tmp_path):
        out = tmp_path / "eval"
        assert cli_dispatch(["evaluate", "--policy", "always-a3", "--config", str(config_file), "--out", str(out)]) == 0
        assert (out / "trace.csv").read_text().splitlines()[0] == (
            "step,X,Y,cos_phi,sin_phi,action_id,reward,success,p_dsrc,p_head,p_tail,distance"
        )
