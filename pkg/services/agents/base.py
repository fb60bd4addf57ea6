"""
Base común de los agentes: política voraz, registro de diagnósticos y
empaquetado de estado para checkpoints.
"""

import logging
from typing import Any

import numpy as np

from models.agent_models import AgentConfig, AgentKind
from services.nn import AdamState, DenseNet
from utils.rng import STREAM_AGENT, make_rng, restore_rng, rng_state

logger = logging.getLogger(__name__)


class BaseAgent:
    """
    Ciclo de vida de un agente en el arnés:
    select_action → observe (por paso) → end_episode (por episodio).
    """
    kind: AgentKind

    def __init__(self, config: AgentConfig, seed: int = 0):
        self.config = config
        self.seed = int(seed)
        self.rng = make_rng(self.seed, STREAM_AGENT)
        self.total_steps = 0
        self.updates = 0
        self.diagnostics: list[dict] = []

    # -------------------------------------------------------------------------
    # Interfaz
    # -------------------------------------------------------------------------

    def select_action(self, obs: np.ndarray) -> int:
        """Acción de entrenamiento (con exploración), índice 0..7"""
        raise NotImplementedError

    def greedy_action(self, obs: np.ndarray) -> int:
        """Acción voraz para evaluación, índice 0..7"""
        raise NotImplementedError

    def observe(self, obs: np.ndarray, action: int, reward: float, next_obs: np.ndarray, done: bool) -> None:
        self.total_steps += 1

    def end_episode(self) -> None:
        pass

    def networks(self) -> dict[str, DenseNet]:
        raise NotImplementedError

    def optimizers(self) -> dict[str, AdamState]:
        return {}

    def parameter_counts(self) -> dict[str, int]:
        """Parámetros optimizados y contabilidad de la tabla de complejidad"""
        trainable = sum(net.num_params() for name, net in self.networks().items() if not name.startswith("target"))
        return {"optimized": trainable, "table": trainable}

    def log_update(self, **values: Any) -> None:
        record = {"update": self.updates, "step": self.total_steps, **values}
        self.diagnostics.append(record)
        logger.debug(f"[{self.kind.value}] update {self.updates}: {values}")

    # -------------------------------------------------------------------------
    # Estado para checkpoints
    # -------------------------------------------------------------------------

    def extra_state(self) -> tuple[dict, dict[str, np.ndarray]]:
        """Estado propio de cada agente (buffers, contadores)"""
        return {}, {}

    def load_extra_state(self, meta: dict, arrays: dict[str, np.ndarray]) -> None:
        pass

    def state(self) -> tuple[dict, dict[str, np.ndarray]]:
        """(metadatos JSON, arrays con nombre) que restauran el agente bit a bit"""
        arrays: dict[str, np.ndarray] = {}
        nets_meta = {}
        for name, net in self.networks().items():
            nets_meta[name] = {"spec": net.spec(), "noise_rng": rng_state(net.noise_rng), "training": net.training}
            for i, p in enumerate(net.parameters()):
                arrays[f"net.{name}.{i}"] = p
        optim_meta = {}
        for name, opt in self.optimizers().items():
            optim_meta[name] = opt.meta()
            for key, value in opt.arrays().items():
                arrays[f"opt.{name}.{key}"] = value
        extra_meta, extra_arrays = self.extra_state()
        for key, value in extra_arrays.items():
            arrays[f"extra.{key}"] = value
        meta = {
            "kind": self.kind.value,
            "seed": self.seed,
            "config": self.config.model_dump(mode="json"),
            "rng": rng_state(self.rng),
            "total_steps": self.total_steps,
            "updates": self.updates,
            "diagnostics": self.diagnostics,
            "networks": nets_meta,
            "optimizers": optim_meta,
            "extra": extra_meta,
        }
        return meta, arrays

    def load_state(self, meta: dict, arrays: dict[str, np.ndarray]) -> None:
        self.rng = restore_rng(meta["rng"])
        self.total_steps = meta["total_steps"]
        self.updates = meta["updates"]
        self.diagnostics = list(meta.get("diagnostics", []))
        for name, net in self.networks().items():
            net_meta = meta["networks"][name]
            for i, p in enumerate(net.parameters()):
                p[...] = arrays[f"net.{name}.{i}"]
            net.noise_rng = restore_rng(net_meta["noise_rng"])
            net.training = net_meta["training"]
            net.touch()
        optimizers = self.optimizers()
        for name, opt_meta in meta["optimizers"].items():
            prefix = f"opt.{name}."
            restored = AdamState.restore(opt_meta, {k[len(prefix):]: v for k, v in arrays.items() if k.startswith(prefix)})
            opt = optimizers[name]
            opt.t = restored.t
            for target, source in zip(opt.m + opt.v, restored.m + restored.v):
                target[...] = source
        self.load_extra_state(meta["extra"], {k[len("extra."):]: v for k, v in arrays.items() if k.startswith("extra.")})


def net_seed(seed: int, index: int) -> int:
    """Semilla de inicialización de la red index-ésima de un agente"""
    return int(seed) * 1000 + index
