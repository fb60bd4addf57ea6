import struct

import numpy as np
import pytest

from models.agent_models import AgentKind
from services.agents import create_agent
from services.checkpoint_service import (
    MAGIC,
    decode_checkpoint,
    encode_checkpoint,
    load_agent,
    load_checkpoint,
    save_agent,
    save_checkpoint,
)
from services.training_service import FINAL_CHECKPOINT, train_run
from utils.errors import CheckpointError, CheckpointIntegrityError, CheckpointVersionError, ContractViolation


def _arrays():
    return {
        "b": np.arange(6, dtype=np.float64).reshape(2, 3),
        "a": np.array([1, -2, 3], dtype=np.int64),
        "empty": np.zeros((0, 4)),
    }


class TestContainer:
    def test_decode_restores_arrays_and_meta(self):
        meta = {"kind": "ppo", "nested": {"x": [1, 2.5]}}
        decoded_meta, arrays = decode_checkpoint(encode_checkpoint(meta, _arrays()))
        assert decoded_meta == meta
        for name, value in _arrays().items():
            np.testing.assert_array_equal(arrays[name], value)
            assert arrays[name].dtype == value.dtype

    def test_encoding_ignores_insertion_order(self):
        forward = encode_checkpoint({"k": 1}, _arrays())
        backward = encode_checkpoint({"k": 1}, dict(reversed(list(_arrays().items()))))
        assert forward == backward

    def test_corrupted_byte(self):
        raw = bytearray(encode_checkpoint({"k": 1}, _arrays()))
        raw[len(raw) // 2] ^= 0xFF
        with pytest.raises(CheckpointIntegrityError):
            decode_checkpoint(bytes(raw))

    def test_truncated(self):
        raw = encode_checkpoint({"k": 1}, _arrays())
        with pytest.raises(CheckpointIntegrityError):
            decode_checkpoint(raw[:-5])
        with pytest.raises(CheckpointIntegrityError):
            decode_checkpoint(raw[:10])

    def test_bad_magic(self):
        raw = bytearray(encode_checkpoint({}, {}))
        raw[:8] = b"NOTACKPT"
        with pytest.raises(CheckpointIntegrityError):
            decode_checkpoint(bytes(raw))

    def test_version_mismatch(self):
        raw = bytearray(encode_checkpoint({}, _arrays()))
        struct.pack_into("<I", raw, len(MAGIC), 99)
        with pytest.raises(CheckpointVersionError):
            decode_checkpoint(bytes(raw))

    def test_missing_file(self, tmp_path):
        with pytest.raises(CheckpointError):
            load_checkpoint(tmp_path / "missing.ckpt")

    def test_atomic_save_leaves_no_temporary(self, tmp_path):
        path = save_checkpoint({"k": 1}, _arrays(), tmp_path / "x.ckpt")
        assert path.exists()
        assert list(tmp_path.iterdir()) == [path]


class TestAgentCheckpoints:
    @pytest.mark.parametrize("kind", list(AgentKind))
    def test_save_load_save_is_byte_identical(self, kind, small_config, tmp_path, rng):
        agent = create_agent(kind, small_config.agent_config(kind), seed=3)
        obs = rng.uniform(size=4)
        for t in range(30):
            next_obs = rng.uniform(size=4)
            agent.observe(obs, agent.select_action(obs), float(rng.uniform(-0.6, 1.0)), next_obs, t == 29)
            obs = next_obs
        agent.end_episode()
        first = save_agent(agent, tmp_path / "first.ckpt", {"returns": [1.0]})
        restored, harness = load_agent(first)
        second = save_agent(restored, tmp_path / "second.ckpt", harness)
        assert first.read_bytes() == second.read_bytes()
        probe = rng.uniform(size=4)
        assert restored.greedy_action(probe) == agent.greedy_action(probe)
        assert restored.select_action(probe) == agent.select_action(probe)


class TestResume:
    @pytest.mark.parametrize("kind", [AgentKind.PPO, AgentKind.RAINBOW])
    def test_two_plus_two_equals_four(self, kind, small_config, tmp_path):
        partial = train_run(kind, small_config, seed=5, episodes=2, out_dir=tmp_path / "partial", evaluate=False)
        resumed = train_run(
            kind, small_config, seed=5, episodes=4, out_dir=tmp_path / "resumed",
            resume_from=partial.final_checkpoint, evaluate=False,
        )
        straight = train_run(kind, small_config, seed=5, episodes=4, out_dir=tmp_path / "straight", evaluate=False)
        assert resumed.returns == straight.returns
        a = (tmp_path / "resumed" / FINAL_CHECKPOINT).read_bytes()
        b = (tmp_path / "straight" / FINAL_CHECKPOINT).read_bytes()
        assert a == b

    def test_resume_rejects_other_seed(self, small_config, tmp_path):
        partial = train_run("ppo", small_config, seed=1, episodes=1, out_dir=tmp_path, evaluate=False)
        with pytest.raises(ContractViolation):
            train_run("ppo", small_config, seed=2, episodes=2, resume_from=partial.final_checkpoint, evaluate=False)
