import json

import pytest

from config.run_config import RunConfig, echo_config, load_config, parse_config
from models.agent_models import AGENT_CONFIGS, AgentKind, PpoConfig
from utils.errors import ConfigurationError


class TestLoadConfig:
    def test_empty_file_gives_defaults(self, tmp_path):
        path = tmp_path / "empty.json"
        path.write_text("")
        assert load_config(path) == RunConfig()

    def test_none_gives_defaults(self):
        config = load_config(None)
        assert config.episodes == 300
        assert config.environment.horizon == 4000
        assert config.seeds == [0, 1, 2, 3, 4]

    def test_unknown_key_is_named(self, tmp_path):
        path = tmp_path / "typo.json"
        path.write_text(json.dumps({"mobility": {"speeed": 35}}))
        with pytest.raises(ConfigurationError, match="speeed"):
            load_config(path)

    def test_negative_episodes(self):
        with pytest.raises(ConfigurationError, match="episodes"):
            parse_config({"episodes": -3})

    def test_syntax_error_reports_position(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text('{\n  "episodes": 10,\n  "seeds": [0, 1\n}')
        with pytest.raises(ConfigurationError, match=r"línea 4, columna 1"):
            load_config(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigurationError):
            load_config(tmp_path / "nope.json")

    def test_invalid_scenario(self):
        with pytest.raises(ConfigurationError, match="scenario"):
            parse_config({"scenario": 3})

    def test_duplicated_seeds(self):
        with pytest.raises(ConfigurationError, match="seeds"):
            parse_config({"seeds": [1, 1]})

    @pytest.mark.parametrize("mobility, key", [
        ({"speed_min_kmh": 50.0, "speed_max_kmh": 40.0}, "speed_min_kmh"),
        ({"min_gap": 60.0, "max_gap": 60.0}, "min_gap"),
        ({"start_gap": 80.0}, "start_gap"),
    ])
    def test_inconsistent_mobility_ranges(self, mobility, key):
        with pytest.raises(ConfigurationError, match=key):
            parse_config({"mobility": mobility})

    def test_inverted_rainbow_support(self):
        with pytest.raises(ConfigurationError, match="v_min"):
            parse_config({"rainbow": {"v_min": 2.0}})


class TestRunConfig:
    def test_with_agent_params(self, default_config):
        cell = default_config.with_agent_params(AgentKind.PPO, {"clip_eps": 0.3, "lr_actor": 1e-2})
        assert cell.agent == AgentKind.PPO
        assert cell.ppo.clip_eps == 0.3
        assert default_config.ppo.clip_eps == 0.2

    def test_with_overrides(self, small_config):
        cfg = small_config.with_overrides(scenario=2, episodes=4, seed=9, agent="sac", eval_seed=5, eval_episodes=2)
        assert (cfg.scenario, cfg.episodes, cfg.seeds, cfg.agent) == (2, 4, [9], AgentKind.SAC)
        assert (cfg.evaluation.seed, cfg.evaluation.episodes) == (5, 2)
        assert small_config.with_overrides() == small_config

    def test_overrides_are_validated(self, small_config):
        with pytest.raises(ConfigurationError, match="episodes"):
            small_config.with_overrides(episodes=0)

    def test_grid_sizes(self):
        assert len(PpoConfig.grid_cells()) == 8

    @pytest.mark.parametrize("config_cls", list(AGENT_CONFIGS.values()))
    def test_defaults_are_grid_entries(self, config_cls):
        defaults = config_cls()
        for key, values in config_cls.GRID.items():
            assert getattr(defaults, key) in values, key

    def test_echo_round_trips(self, small_config, tmp_path):
        path = echo_config(small_config, tmp_path)
        assert load_config(path) == small_config
        assert path.read_text() == small_config.to_json()
