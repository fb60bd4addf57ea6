import numpy as np
import pytest

from models.agent_models import PpoConfig, TrpoConfig
from services.agents import PpoAgent, TrpoAgent
from services.agents.ppo import clipped_surrogate, ppo_loss
from services.agents.rollout import RolloutBatch, compute_advantages
from services.agents.trpo import conjugate_gradient, trpo_update
from services.nn import DenseNet, entropy, flatten, get_flat, kl_categorical, log_softmax, set_flat, softmax


def _batch(rng, n=12, advantages=None, policy=None):
    obs = rng.normal(size=(n, 4))
    actions = rng.integers(8, size=n)
    log_probs_old = np.log(np.full(n, 1 / 8))
    if policy is not None:
        log_probs_old = log_softmax(policy(obs))[np.arange(n), actions]
    adv = rng.normal(size=n) if advantages is None else advantages
    return RolloutBatch(
        observations=obs,
        actions=actions,
        rewards=np.zeros(n),
        dones=np.zeros(n),
        values=np.zeros(n),
        log_probs_old=log_probs_old,
        advantages=adv,
        returns=rng.normal(size=n),
    )


class TestAdvantages:
    def test_matches_double_loop(self, rng):
        rewards, values = rng.normal(size=15), rng.normal(size=15)
        gamma, lam = 0.97, 0.9
        adv, returns = compute_advantages(rewards, values, gamma, lam)
        deltas = [rewards[t] + gamma * (values[t + 1] if t + 1 < 15 else 0.0) - values[t] for t in range(15)]
        expected = [sum((gamma * lam) ** (k - t) * deltas[k] for k in range(t, 15)) for t in range(15)]
        np.testing.assert_allclose(adv, expected, rtol=1e-12, atol=1e-12)
        np.testing.assert_allclose(returns, adv + values)

    def test_gamma_zero_is_one_step(self, rng):
        rewards, values = rng.normal(size=6), rng.normal(size=6)
        adv, _ = compute_advantages(rewards, values, 0.0, 0.95)
        np.testing.assert_allclose(adv, rewards - values)

    def test_lambda_one_is_discounted_return(self):
        rewards = np.array([1.0, 0.0, 2.0])
        adv, returns = compute_advantages(rewards, np.zeros(3), 0.5, 1.0)
        np.testing.assert_allclose(returns, [1.5, 1.0, 2.0])

    def test_done_masks_bootstrap(self):
        adv, _ = compute_advantages(np.array([1.0, 1.0]), np.array([0.0, 5.0]), 0.9, 0.9, dones=np.array([1.0, 0.0]))
        assert adv[0] == pytest.approx(1.0)

    def test_normalization(self, rng):
        batch = _batch(rng).normalized()
        assert batch.advantages.mean() == pytest.approx(0.0, abs=1e-12)
        assert batch.advantages.std() == pytest.approx(1.0)

    def test_constant_advantages_are_not_scaled(self, rng):
        batch = _batch(rng, advantages=np.full(12, 3.0)).normalized()
        np.testing.assert_array_equal(batch.advantages, np.zeros(12))


class TestClippedSurrogate:
    @pytest.mark.parametrize(
        "ratio, adv, objective, grad",
        [
            (1.5, 1.0, 1.2, 0.0),
            (0.5, 1.0, 0.5, 1.0),
            (0.5, -1.0, -0.8, 0.0),
            (1.5, -1.0, -1.5, -1.0),
            (1.0, 2.0, 2.0, 2.0),
        ],
    )
    def test_cases(self, ratio, adv, objective, grad):
        obj, d_ratio = clipped_surrogate(np.array([ratio]), np.array([adv]), 0.2)
        assert obj[0] == pytest.approx(objective)
        assert d_ratio[0] == pytest.approx(grad)

    def test_actor_gradient_matches_finite_differences(self, rng):
        policy = DenseNet([4, 8, 8], seed=5)
        critic = DenseNet([4, 8, 1], seed=6)
        batch = _batch(rng, policy=policy)
        batch.log_probs_old = batch.log_probs_old + rng.normal(scale=0.05, size=len(batch))
        clip_eps, coef = 0.9, 0.01
        analytic = flatten(ppo_loss(batch, policy, critic, clip_eps, coef).actor_grads)

        def actor_loss():
            result = ppo_loss(batch, policy, critic, clip_eps, coef)
            return -result.surrogate - coef * result.entropy

        theta = get_flat(policy)
        numeric = np.zeros_like(theta)
        h = 1e-6
        for i in range(theta.size):
            step = np.zeros_like(theta)
            step[i] = h
            set_flat(policy, theta + step)
            plus = actor_loss()
            set_flat(policy, theta - step)
            minus = actor_loss()
            numeric[i] = (plus - minus) / (2 * h)
        set_flat(policy, theta)
        np.testing.assert_allclose(analytic, numeric, rtol=1e-4, atol=1e-8)


class TestConjugateGradient:
    def test_solves_spd_system(self, rng):
        m = rng.normal(size=(6, 6))
        a = m @ m.T + 6 * np.eye(6)
        b = rng.normal(size=6)
        x, residual = conjugate_gradient(lambda v: a @ v, b, iters=10)
        np.testing.assert_allclose(x, np.linalg.solve(a, b), atol=1e-8)
        assert residual < 1e-8

    def test_zero_rhs(self):
        x, residual = conjugate_gradient(lambda v: v, np.zeros(3))
        np.testing.assert_array_equal(x, np.zeros(3))
        assert residual == 0.0

    def test_non_positive_curvature_is_reported(self):
        x, residual = conjugate_gradient(lambda v: -v, np.ones(3))
        assert np.isnan(residual)


class TestTrpoUpdate:
    def test_zero_advantages_leave_policy(self, rng):
        policy = DenseNet([4, 16, 8], seed=2)
        theta = get_flat(policy).copy()
        result = trpo_update(_batch(rng, advantages=np.zeros(12)), policy, TrpoConfig())
        assert not result["accepted"]
        np.testing.assert_array_equal(get_flat(policy), theta)

    @pytest.mark.parametrize("seed", range(5))
    def test_accepted_step_respects_trust_region(self, seed):
        rng = np.random.default_rng(seed)
        policy = DenseNet([4, 16, 8], seed=seed)
        cfg = TrpoConfig(max_kl=0.01)
        batch = _batch(rng, n=32, policy=policy)
        p_old = softmax(policy(batch.observations))
        result = trpo_update(batch, policy, cfg)
        if result["accepted"]:
            kl = float(kl_categorical(p_old, softmax(policy(batch.observations))).mean())
            assert kl <= cfg.max_kl + 1e-12
            assert result["surrogate_delta"] > 0.0
        else:
            np.testing.assert_array_equal(softmax(policy(batch.observations)), p_old)


class TestOnPolicyAgents:
    @pytest.mark.parametrize("agent_cls, config", [
        (PpoAgent, PpoConfig(minibatch=8, epochs=2)),
        (TrpoAgent, TrpoConfig(critic_minibatch=8, critic_epochs=2)),
    ])
    def test_episode_update_clears_rollout(self, agent_cls, config, rng):
        agent = agent_cls(config, seed=3)
        before = get_flat(agent.critic).copy()
        obs = rng.uniform(size=4)
        for t in range(20):
            action = agent.select_action(obs)
            assert 0 <= action < 8
            next_obs = rng.uniform(size=4)
            agent.observe(obs, action, float(rng.uniform(-0.6, 1.0)), next_obs, t == 19)
            obs = next_obs
        agent.end_episode()
        assert agent.updates == 1
        assert len(agent.rollout) == 0
        assert not np.array_equal(get_flat(agent.critic), before)
        assert agent.diagnostics

    def test_greedy_action_uses_no_randomness(self, rng):
        agent = PpoAgent(PpoConfig(), seed=1)
        state = agent.rng.bit_generator.state
        obs = rng.uniform(size=4)
        assert agent.greedy_action(obs) == int(np.argmax(agent.policy_probs(obs)))
        assert agent.rng.bit_generator.state == state

    def test_policy_entropy_is_bounded(self, rng):
        agent = TrpoAgent(TrpoConfig(), seed=1)
        probs = agent.policy_probs(rng.uniform(size=(5, 4)))
        assert np.all(entropy(probs) <= np.log(8) + 1e-12)
