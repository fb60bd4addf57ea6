"""
Optimizador Adam con corrección de sesgo y actualización suave de redes objetivo.
"""

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from services.nn.core import DenseNet
from utils.errors import ContractViolation, TrainingDivergedError


@dataclass
class AdamState:
    """Momentos por parámetro, contador de pasos e hiperparámetros"""
    lr: float
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    t: int = 0
    m: list = field(default_factory=list)
    v: list = field(default_factory=list)

    @classmethod
    def for_params(cls, params: Sequence[np.ndarray], lr: float, **hyper) -> "AdamState":
        return cls(lr=lr, m=[np.zeros_like(p) for p in params], v=[np.zeros_like(p) for p in params], **hyper)

    def arrays(self) -> dict[str, np.ndarray]:
        out = {}
        for i, (m, v) in enumerate(zip(self.m, self.v)):
            out[f"m.{i}"] = m
            out[f"v.{i}"] = v
        return out

    def meta(self) -> dict:
        return {"lr": self.lr, "beta1": self.beta1, "beta2": self.beta2, "eps": self.eps, "t": self.t, "n": len(self.m)}

    @classmethod
    def restore(cls, meta: dict, arrays: dict[str, np.ndarray]) -> "AdamState":
        n = meta["n"]
        return cls(
            lr=meta["lr"], beta1=meta["beta1"], beta2=meta["beta2"], eps=meta["eps"], t=meta["t"],
            m=[arrays[f"m.{i}"].copy() for i in range(n)],
            v=[arrays[f"v.{i}"].copy() for i in range(n)],
        )


def adam_step(
    params: Sequence[np.ndarray],
    grads: Sequence[np.ndarray],
    state: AdamState,
    layer_of: Optional[Sequence[int]] = None,
) -> Sequence[np.ndarray]:
    """
    Actualización Adam in situ.
    
    Args:
        params: Parámetros (se modifican in situ)
        grads: Gradientes alineados con params
        state: Estado del optimizador
        layer_of: Índice de capa de cada parámetro, para el diagnóstico
    
    Returns:
        Los mismos arrays de params, actualizados
    
    Raises:
        ContractViolation: Formas incompatibles
        TrainingDivergedError: Gradiente con NaN/Inf (indica la capa)
    """
    if len(params) != len(grads) or len(params) != len(state.m):
        raise ContractViolation("params, grads y el estado de Adam no están alineados")
    for i, (p, g) in enumerate(zip(params, grads)):
        if p.shape != g.shape or p.shape != state.m[i].shape:
            raise ContractViolation(f"Forma incompatible en el parámetro {i}: {p.shape} vs {g.shape}")
        if not np.all(np.isfinite(g)):
            layer = layer_of[i] if layer_of is not None else i // 2
            raise TrainingDivergedError(f"Gradiente no finito en la capa {layer}", {"layer": layer, "param": i})

    state.t += 1
    correction1 = 1.0 - state.beta1 ** state.t
    correction2 = 1.0 - state.beta2 ** state.t
    for p, g, m, v in zip(params, grads, state.m, state.v):
        m *= state.beta1
        m += (1.0 - state.beta1) * g
        v *= state.beta2
        v += (1.0 - state.beta2) * g * g
        p -= state.lr * (m / correction1) / (np.sqrt(v / correction2) + state.eps)
    return params


def apply_gradients(net: DenseNet, grads: Sequence[np.ndarray], state: AdamState) -> None:
    """Paso de Adam sobre una red (invalida sus cintas)"""
    adam_step(net.parameters(), grads, state, net.param_layer_index())
    net.touch()


def soft_update(target: DenseNet, online: DenseNet, tau: float) -> DenseNet:
    """
    target <- (1 - tau) target + tau online, elemento a elemento.
    
    Raises:
        ContractViolation: Redes de formas distintas
    """
    t_params, o_params = target.parameters(), online.parameters()
    if len(t_params) != len(o_params) or any(a.shape != b.shape for a, b in zip(t_params, o_params)):
        raise ContractViolation("soft_update: formas de red distintas")
    for t, o in zip(t_params, o_params):
        t *= 1.0 - tau
        t += tau * o
    target.touch()
    return target


def hard_update(target: DenseNet, online: DenseNet) -> DenseNet:
    """Copia exacta de parámetros"""
    for t, o in zip(target.parameters(), online.parameters()):
        t[...] = o
    target.touch()
    return target
