"""
Entrenamientos completos de los cuatro agentes en el escenario 1 y
comprobación de la estructura de las estrategias aprendidas, del orden de
estabilidad, de la complejidad muestral y de la robustez en el escenario 2.

La escala se reduce con variables de entorno:
    HANDOVER_ACCEPTANCE_EPISODES (300), HANDOVER_ACCEPTANCE_SEEDS (5),
    HANDOVER_ACCEPTANCE_GRID_EPISODES (50)
"""

import math
import os

import numpy as np
import pytest

from config.run_config import RunConfig
from models.agent_models import AgentKind
from services.grid_service import best_models, grid_search, train_seeds
from services.metrics_service import mean_metrics, sample_complexity
from services.robustness_service import robustness_eval

EPISODES = int(os.getenv("HANDOVER_ACCEPTANCE_EPISODES", "300"))
SEEDS = list(range(int(os.getenv("HANDOVER_ACCEPTANCE_SEEDS", "5"))))
GRID_EPISODES = int(os.getenv("HANDOVER_ACCEPTANCE_GRID_EPISODES", "50"))

pytestmark = pytest.mark.slow


@pytest.fixture(scope="module")
def trained(tmp_path_factory):
    """{agente: (ejecuciones por semilla, curva agregada)} con la configuración por defecto"""
    config = RunConfig().with_overrides(episodes=EPISODES)
    root = tmp_path_factory.mktemp("acceptance")
    results = {}
    for kind in AgentKind:
        runs, curve = train_seeds(kind, config, seeds=SEEDS, out_dir=root / kind.value)
        assert not any(r.failed for r in runs), kind.value
        results[kind] = (runs, curve)
    return results


def _metrics(trained, kind):
    runs, _ = trained[kind]
    return mean_metrics([r.metrics for r in runs])


@pytest.mark.parametrize("kind", list(AgentKind))
def test_learned_policy_relies_on_headlight_without_redundancy(trained, kind):
    metrics = _metrics(trained, kind)
    assert metrics.reliability >= 90.0
    assert metrics.no_redundancy >= 95.0
    assert metrics.taillight_rate <= 2.0
    assert metrics.headlight_rate >= 50.0
    assert metrics.headlight_rate > metrics.action_shares[2]


def test_switch_count_ordering(trained):
    switches = {kind: np.mean([r.metrics.switch_count for r in trained[kind][0]]) for kind in AgentKind}
    assert switches[AgentKind.PPO] <= switches[AgentKind.TRPO]
    assert switches[AgentKind.TRPO] <= max(switches[AgentKind.SAC], switches[AgentKind.RAINBOW])


def test_off_policy_agents_need_fewer_episodes(trained):
    def episodes_needed(kind):
        runs, curve = trained[kind]
        mean_returns = curve.mean if curve is not None else runs[0].returns
        reached = sample_complexity(mean_returns, kind.value).episodes_to_fraction
        return math.inf if reached is None else reached

    on_policy = min(episodes_needed(AgentKind.PPO), episodes_needed(AgentKind.TRPO))
    for kind in (AgentKind.SAC, AgentKind.RAINBOW):
        assert episodes_needed(kind) <= on_policy, kind.value
        assert episodes_needed(kind) < 100, kind.value


def test_second_best_model_generalizes_at_least_as_well(tmp_path):
    config = RunConfig().with_overrides(episodes=GRID_EPISODES)
    checkpoints = {}
    for kind in AgentKind:
        ranking = grid_search(kind, config, seeds=SEEDS[:1], out_dir=tmp_path / kind.value)
        checkpoints[kind.value] = best_models(ranking)

    rows = robustness_eval(checkpoints, config, out_dir=tmp_path)
    assert all(r.status == "ok" for r in rows)
    by_agent = {(r.agent, r.model): r.reliability_test for r in rows}
    holds = sum(1 for kind in AgentKind if by_agent[(kind.value, "2nd")] >= by_agent[(kind.value, "1st")])
    assert holds >= 3
