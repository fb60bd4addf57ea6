import math

import numpy as np
import pytest

from models.agent_models import PpoConfig, RainbowConfig, SacConfig, TrpoConfig
from services.agents import PpoAgent, RainbowAgent, SacAgent, TrpoAgent
from services.nn import (
    AdamState,
    DenseNet,
    DuelingHeadSpec,
    adam_step,
    backward,
    count_params,
    entropy,
    flatten,
    get_flat,
    hard_update,
    jvp,
    kl_categorical,
    set_flat,
    soft_update,
    unflatten,
)
from utils.errors import ContractViolation, TrainingDivergedError
from utils.rng import restore_rng, rng_state

ARCHITECTURES = [
    ([4, 16, 8], ["tanh", "identity"], None),
    ([4, 16, 8], ["relu", "identity"], None),
    ([4, 8, 8, 1], ["relu", "tanh", "identity"], None),
    ([4, 12, 6], ["tanh", "identity"], [True, True]),
    ([3, 5], ["identity"], [True]),
]


def _numeric_grads(net, x, out_grad, h=1e-5, noise_state=None):
    """Diferencias centrales de L = sum(out_grad * net(x))"""
    def loss():
        if noise_state is not None:
            net.noise_rng = restore_rng(noise_state)
        return float((net(x) * out_grad).sum())

    grads = []
    for p in net.parameters():
        g = np.zeros_like(p)
        for idx in np.ndindex(p.shape):
            orig = p[idx]
            p[idx] = orig + h
            plus = loss()
            p[idx] = orig - h
            minus = loss()
            p[idx] = orig
            g[idx] = (plus - minus) / (2 * h)
        grads.append(g)
    return grads


def _rel_error(a, b):
    a, b = flatten(a), flatten(b)
    return np.linalg.norm(a - b) / max(np.linalg.norm(a) + np.linalg.norm(b), 1e-12)


class TestForward:
    def test_identity_layer(self):
        net = DenseNet([3, 3], ["identity"])
        net.layers[0].weight[...] = np.eye(3)
        net.layers[0].bias[...] = 0.0
        x = np.array([1.0, -2.0, 0.5])
        np.testing.assert_array_equal(net(x), x)

    def test_relu_zeroes_negative_preactivations(self):
        net = DenseNet([2, 4], ["relu"])
        net.layers[0].weight[...] = 1.0
        net.layers[0].bias[...] = 0.0
        np.testing.assert_array_equal(net(np.array([-1.0, -2.0])), np.zeros(4))

    def test_pure_in_eval_mode(self, rng):
        net = DenseNet([4, 16, 8], noisy=[True, True], seed=3).eval()
        x = rng.normal(size=4)
        np.testing.assert_array_equal(net(x), net(x))

    def test_noisy_layers_resample_in_training(self, rng):
        net = DenseNet([4, 16, 8], noisy=[True, True], seed=3)
        x = rng.normal(size=4)
        assert not np.array_equal(net(x), net(x))

    def test_wrong_input_width(self):
        with pytest.raises(ContractViolation):
            DenseNet([4, 8])(np.zeros(5))

    def test_stale_tape_is_rejected(self, rng):
        net = DenseNet([4, 8])
        _, tape = net.forward(rng.normal(size=(2, 4)))
        set_flat(net, get_flat(net) * 0.5)
        with pytest.raises(ContractViolation):
            backward(net, tape, np.ones((2, 8)))


class TestBackward:
    def test_linear_scalar(self):
        net = DenseNet([1, 1], ["identity"])
        net.layers[0].weight[...] = 2.0
        _, tape = net.forward(np.array([3.0]))
        grads = backward(net, tape, np.array([1.0]))
        assert grads.params[0][0, 0] == pytest.approx(3.0)
        assert grads.params[1][0] == pytest.approx(1.0)
        assert grads.inputs[0] == pytest.approx(2.0)

    def test_zero_output_grad(self, rng):
        net = DenseNet([4, 16, 8], seed=1)
        _, tape = net.forward(rng.normal(size=(5, 4)))
        grads = backward(net, tape, np.zeros((5, 8)))
        assert all(not g.any() for g in grads.params)

    @pytest.mark.parametrize("trial", range(24))
    def test_matches_finite_differences(self, trial):
        sizes, activations, noisy = ARCHITECTURES[trial % len(ARCHITECTURES)]
        rng = np.random.default_rng(100 + trial)
        net = DenseNet(sizes, activations, noisy=noisy, seed=trial)
        x = rng.normal(size=(3, sizes[0]))
        out_grad = rng.normal(size=(3, sizes[-1]))
        noise_state = rng_state(net.noise_rng)
        _, tape = net.forward(x)
        analytic = backward(net, tape, out_grad).params
        numeric = _numeric_grads(net, x, out_grad, noise_state=noise_state)
        assert _rel_error(analytic, numeric) < 1e-4

    def test_jvp_matches_directional_derivative(self, rng):
        net = DenseNet([4, 10, 8], ["tanh", "identity"], seed=4)
        x = rng.normal(size=(6, 4))
        direction = rng.normal(size=get_flat(net).size)
        _, tape = net.forward(x)
        analytic = jvp(net, tape, unflatten(direction, net.parameters()))
        theta = get_flat(net)
        h = 1e-6
        set_flat(net, theta + h * direction)
        plus = net(x)
        set_flat(net, theta - h * direction)
        minus = net(x)
        set_flat(net, theta)
        np.testing.assert_allclose(analytic, (plus - minus) / (2 * h), rtol=1e-5, atol=1e-7)


class TestAdam:
    def test_first_step_moves_by_learning_rate(self):
        p = [np.array([1.0, -1.0, 0.5])]
        g = [np.array([0.3, -2.0, 1e-3])]
        state = AdamState.for_params(p, lr=0.01)
        before = p[0].copy()
        adam_step(p, g, state)
        np.testing.assert_allclose(before - p[0], 0.01 * np.sign(g[0]), rtol=1e-3)

    def test_zero_grads_leave_params(self):
        p = [np.ones(4)]
        state = AdamState.for_params(p, lr=0.1)
        adam_step(p, [np.zeros(4)], state)
        np.testing.assert_array_equal(p[0], np.ones(4))

    def test_same_stream_same_trajectory(self):
        def run():
            rng = np.random.default_rng(9)
            p = [np.zeros(3)]
            state = AdamState.for_params(p, lr=0.05)
            for _ in range(20):
                adam_step(p, [rng.normal(size=3)], state)
            return p[0]

        np.testing.assert_array_equal(run(), run())

    def test_non_finite_grad_names_layer(self):
        p = [np.zeros(2), np.zeros(2)]
        state = AdamState.for_params(p, lr=0.1)
        with pytest.raises(TrainingDivergedError) as info:
            adam_step(p, [np.zeros(2), np.array([np.nan, 0.0])], state, layer_of=[0, 3])
        assert info.value.diagnostics["layer"] == 3


class TestTargetUpdates:
    def test_soft_update_extremes(self):
        online = DenseNet([4, 8], seed=1)
        target = DenseNet([4, 8], seed=2)
        before = get_flat(target).copy()
        soft_update(target, online, 0.0)
        np.testing.assert_array_equal(get_flat(target), before)
        soft_update(target, online, 1.0)
        np.testing.assert_array_equal(get_flat(target), get_flat(online))

    def test_soft_update_geometric_formula(self):
        online = DenseNet([1, 1], ["identity"], seed=1)
        target = DenseNet([1, 1], ["identity"], seed=2)
        t0, o = get_flat(target).copy(), get_flat(online).copy()
        k, tau = 50, 0.005
        for _ in range(k):
            soft_update(target, online, tau)
        np.testing.assert_allclose(get_flat(target), o + (t0 - o) * (1 - tau) ** k, rtol=1e-12, atol=1e-14)

    def test_shape_mismatch(self):
        with pytest.raises(ContractViolation):
            soft_update(DenseNet([4, 8]), DenseNet([4, 9]), 0.5)

    def test_hard_update(self):
        online, target = DenseNet([4, 8], seed=1), DenseNet([4, 8], seed=2)
        hard_update(target, online)
        np.testing.assert_array_equal(get_flat(target), get_flat(online))


class TestParameterCounts:
    def test_ppo(self):
        assert count_params([4, 64, 64, 8]) == 5000
        assert PpoAgent(PpoConfig()).parameter_counts()["table"] == 9545

    def test_trpo(self):
        assert TrpoAgent(TrpoConfig()).parameter_counts()["table"] == 1225

    def test_rainbow(self):
        head = DuelingHeadSpec(value=[128, 128, 25], advantage=[128, 128, 200])
        assert count_params([4, 128], head) == 62689
        assert RainbowAgent(RainbowConfig()).parameter_counts()["table"] == 62689

    def test_sac(self):
        counts = SacAgent(SacConfig()).parameter_counts()
        assert counts["table"] == 276512
        assert counts["optimized"] == 207384

    def test_noise_scales_are_not_counted(self):
        assert DenseNet([4, 8], noisy=[True]).num_params() == DenseNet([4, 8]).num_params()


class TestDistributions:
    def test_entropy_closed_forms(self):
        assert entropy(np.full(8, 1 / 8)) == pytest.approx(math.log(8))
        assert entropy(np.eye(8)[2]) == 0.0
        assert entropy(np.array([0.5, 0.5, 0, 0, 0, 0, 0, 0])) == pytest.approx(math.log(2))

    def test_kl_identical_is_zero(self, rng):
        p = rng.dirichlet(np.ones(8))
        assert kl_categorical(p, p) == pytest.approx(0.0, abs=1e-15)

    def test_kl_one_hot_against_uniform(self):
        assert kl_categorical(np.eye(8)[0], np.full(8, 1 / 8)) == pytest.approx(math.log(8), abs=1e-9)

    def test_kl_matches_summation(self, rng):
        p, q = rng.dirichlet(np.ones(8)), rng.dirichlet(np.ones(8))
        expected = sum(pi * math.log(pi / qi) for pi, qi in zip(p, q))
        assert kl_categorical(p, q) == pytest.approx(expected, rel=1e-12)
