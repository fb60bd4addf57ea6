"""
Fixtures compartidas: configuraciones reducidas (episodios cortos, memorias
pequeñas) para que los entrenamientos de prueba terminen en segundos.
"""

import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent))

from config.run_config import RunConfig, parse_config

FIXTURES = Path(__file__).resolve().parent / "tests" / "fixtures"


def small_config_data() -> dict:
    return {
        "environment": {"sim_time_s": 3.0},
        "episodes": 3,
        "seeds": [0, 1],
        "ppo": {"minibatch": 16, "epochs": 2},
        "trpo": {"critic_minibatch": 16, "critic_epochs": 2},
        "sac": {"warmup_steps": 10, "batch_size": 8, "replay_capacity": 500, "hidden_sizes": [16, 16]},
        "rainbow": {
            "warmup_steps": 10, "batch_size": 8, "replay_capacity": 500, "sync_period": 5,
            "beta_anneal_steps": 100, "trunk_width": 16, "stream_width": 16,
        },
        "evaluation": {"episodes": 1, "final_window": 2},
        "decision_map": {"distance_bins": 4, "bearing_bins": 8},
    }


@pytest.fixture
def default_config() -> RunConfig:
    return RunConfig()


@pytest.fixture
def small_config() -> RunConfig:
    """Episodios de 30 pasos y redes/memorias reducidas"""
    return parse_config(small_config_data())


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES
