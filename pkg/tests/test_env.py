import math

import numpy as np
import pytest

from config.run_config import parse_config
from models.env_models import Action, CostTable, N_ACTIONS, Observation
from models.link_models import LinkKind
from models.mobility_models import RelGeometry
from services.env_service import HandoverEnv, action_cost, observe, reward_bounds, run_policy_episode
from services.agents import ConstantPolicy
from utils.errors import ConfigurationError, ContractViolation


def run_actions(env, actions, scenario_id=1, seed=0):
    env.reset(scenario_id, seed)
    return [env.step(a) for a in actions]


class TestObservation:
    def test_receiver_half_range_ahead(self):
        obs = observe(RelGeometry(500.0, 0.0, math.pi), 1000.0)
        assert obs.X == pytest.approx(0.5)
        assert obs.Y == pytest.approx(0.0)

    def test_clipped_beyond_range(self):
        assert observe(RelGeometry(2000.0, 0.0, math.pi), 1000.0).X == 1.0

    def test_phi_is_unit_vector(self, rng):
        for _ in range(50):
            geom = RelGeometry(rng.uniform(0, 100), rng.uniform(-math.pi, math.pi), rng.uniform(-math.pi, math.pi))
            obs = observe(geom, 1000.0)
            assert obs.cos_phi ** 2 + obs.sin_phi ** 2 == pytest.approx(1.0)

    def test_array_round_trip(self):
        obs = Observation(0.1, -0.2, 0.6, 0.8)
        assert Observation.from_array(obs.to_array()) == obs


class TestCosts:
    @pytest.mark.parametrize("action, expected", [(Action.A1, 0.0), (Action.A4, 0.5), (Action.A8, 0.6), (Action.A7, 0.2)])
    def test_action_cost(self, action, expected):
        assert action_cost(action, CostTable()) == pytest.approx(expected)

    def test_reward_bounds(self):
        assert reward_bounds(CostTable()) == pytest.approx((-0.6, 1.0))

    def test_action_space(self):
        assert N_ACTIONS == 8
        assert Action.A1.links == frozenset()
        assert Action.A8.links == frozenset(LinkKind)
        assert [Action.from_index(i) for i in range(8)] == list(Action)


class TestEpisode:
    def test_default_horizon(self, default_config):
        env = HandoverEnv(default_config)
        env.reset(1, 7)
        assert env.horizon == 4000

    def test_reset_is_deterministic(self, default_config):
        env = HandoverEnv(default_config)
        assert env.reset(1, 7) == env.reset(1, 7)

    def test_scenario_two_track(self, default_config):
        env = HandoverEnv(default_config)
        env.reset(2, 7)
        assert env.track.hairpin_count == 9

    def test_unknown_scenario(self, default_config):
        with pytest.raises(ConfigurationError):
            HandoverEnv(default_config).reset(5, 0)

    def test_step_before_reset(self, default_config):
        with pytest.raises(ContractViolation):
            HandoverEnv(default_config).step(Action.A2)

    def test_step_after_done(self, small_config):
        env = HandoverEnv(small_config)
        transitions = run_actions(env, [Action.A2] * env.horizon)
        assert transitions[-1].done and not any(t.done for t in transitions[:-1])
        with pytest.raises(ContractViolation):
            env.step(Action.A2)

    def test_no_transmission_reward_is_zero(self, small_config):
        env = HandoverEnv(small_config)
        transitions = run_actions(env, [Action.A1] * env.horizon)
        assert all(t.reward == 0.0 and not t.info["success"] for t in transitions)

    def test_forced_headlight_reward(self):
        config = parse_config({"environment": {"sim_time_s": 2.0}, "channels": {"headlight": {"clamp": [1.0, 1.0]}}})
        env = HandoverEnv(config)
        transitions = run_actions(env, [Action.A3] * env.horizon)
        assert all(t.reward == pytest.approx(0.9) for t in transitions)

    def test_rewards_within_bounds(self, small_config, rng):
        env = HandoverEnv(small_config)
        transitions = run_actions(env, rng.integers(1, 9, size=env.horizon))
        lo, hi = reward_bounds(small_config.costs)
        assert all(lo - 1e-12 <= t.reward <= hi for t in transitions)

    def test_random_policy_observations_keep_layout(self, small_config, rng):
        env = HandoverEnv(small_config)
        R = small_config.environment.max_range
        transitions = run_actions(env, rng.integers(1, 9, size=env.horizon))
        assert len(transitions) == env.horizon
        assert transitions[-1].done and not any(t.done for t in transitions[:-1])
        for prev, t in zip(transitions[:-1], transitions[1:]):
            assert prev.next_obs == t.obs
        for t in transitions:
            s = t.obs.to_array()
            assert s.shape == (4,)
            assert np.all(np.abs(s[:2]) <= 1.0)
            assert s[2] ** 2 + s[3] ** 2 == pytest.approx(1.0, abs=1e-12)
            info = t.info
            assert s[0] == pytest.approx(info["distance"] * math.cos(info["bearing_tx"]) / R, abs=1e-12)
            assert s[1] == pytest.approx(info["distance"] * math.sin(info["bearing_tx"]) / R, abs=1e-12)
            assert (s[2], s[3]) == pytest.approx((math.cos(info["bearing_rx"]), math.sin(info["bearing_rx"])), abs=1e-12)

    def test_dynamics_do_not_depend_on_actions(self, small_config):
        env = HandoverEnv(small_config)
        a = run_actions(env, [Action.A1] * env.horizon, seed=3)
        b = run_actions(env, [Action.A8] * env.horizon, seed=3)
        assert [t.next_obs for t in a] == [t.next_obs for t in b]

    def test_airtime_is_recorded(self, small_config):
        env = HandoverEnv(small_config)
        env.reset(1, 0)
        info = env.step(Action.A4).info
        expected = 8_000.0 * 1024 / 6e6 + 8_000.0 * 1024 / 1e6
        assert info["airtime_ms"] == pytest.approx(expected)

    def test_mean_reward_matches_link_probability(self):
        # Geometría congelada a 20 m en la recta inicial: p_dsrc = 0.5 con range_50 = 20
        config = parse_config({
            "environment": {"sim_time_s": 10_000.0, "frozen_mobility": True},
            "channels": {"dsrc": {"range_50": 20.0}},
        })
        env = HandoverEnv(config)
        transitions = run_actions(env, [Action.A2] * env.horizon, seed=5)
        p = transitions[0].info["p_dsrc"]
        assert p == pytest.approx(0.5, abs=1e-9)
        rewards = np.array([t.reward for t in transitions])
        sigma = math.sqrt(p * (1 - p) / len(rewards))
        assert abs(rewards.mean() - (p - 0.4)) <= 3 * sigma


def test_always_no_transmission_policy_has_zero_return(small_config):
    trace = run_policy_episode(HandoverEnv(small_config), ConstantPolicy(Action.A1), 1, 0)
    assert sum(t.reward for t in trace) == 0.0
    assert len(trace) == HandoverEnv(small_config).horizon
