"""
Servicio de métricas
Métricas de episodio a partir de trazas, agregación de curvas de aprendizaje
con intervalos de confianza t de Student y complejidad muestral.
"""

import logging
import math
from typing import Optional, Sequence

import numpy as np
import pandas as pd
from scipy import stats

from models.env_models import Action, Trace
from models.harness_models import LearningCurve, Metrics, SampleComplexity
from models.link_models import LinkKind
from utils.errors import ContractViolation

logger = logging.getLogger(__name__)

VLC_LINKS = (LinkKind.VLC_HEADLIGHT, LinkKind.VLC_TAILLIGHT)


def compute_metrics(trace: Trace) -> Metrics:
    """
    Métricas de un episodio completo.
    
    La fiabilidad es la tasa de entrega sobre todos los pasos: un paso con a1
    no envía la baliza y cuenta como no entregado.
    
    Raises:
        ContractViolation: Traza vacía
    """
    n = len(trace)
    if n == 0:
        raise ContractViolation("compute_metrics sobre una traza vacía")
    actions = trace.actions
    delivered = sum(
        1 for t in trace
        if t.action is not Action.A1 and bool(t.info.get("success", False))
    )
    vlc = sum(1 for a in actions if any(a.uses(k) for k in VLC_LINKS))
    headlight = sum(1 for a in actions if a.uses(LinkKind.VLC_HEADLIGHT))
    single = sum(1 for a in actions if len(a.links) <= 1)
    taillight = sum(1 for a in actions if a.uses(LinkKind.VLC_TAILLIGHT))
    rewards = [t.reward for t in trace]
    airtime = [float(t.info.get("airtime_ms", 0.0)) for t in trace]
    counts = {int(a): 0 for a in Action}
    for a in actions:
        counts[int(a)] += 1

    return Metrics(
        steps=n,
        reliability=100.0 * delivered / n,
        vlc_utilization=100.0 * vlc / n,
        headlight_rate=100.0 * headlight / n,
        no_redundancy=100.0 * single / n,
        taillight_rate=100.0 * taillight / n,
        switch_count=switch_count(actions),
        mean_return=float(sum(rewards) / n),
        total_return=float(sum(rewards)),
        mean_airtime_ms=float(sum(airtime) / n),
        action_shares={k: 100.0 * v / n for k, v in counts.items()},
    )


def switch_count(actions: Sequence[Action]) -> int:
    """#{t : a_t != a_(t-1)}"""
    return sum(1 for prev, cur in zip(actions[:-1], actions[1:]) if prev != cur)


def mean_metrics(items: Sequence[Metrics]) -> Metrics:
    """Promedio campo a campo de varias evaluaciones"""
    if not items:
        raise ContractViolation("mean_metrics sin evaluaciones")
    if len(items) == 1:
        return items[0]
    frame = pd.DataFrame([m.model_dump(exclude={"action_shares"}) for m in items])
    means = frame.mean().to_dict()
    shares = {k: float(np.mean([m.action_shares[k] for m in items])) for k in items[0].action_shares}
    return Metrics(
        **{k: float(v) for k, v in means.items() if k not in ("steps", "switch_count")},
        steps=int(items[0].steps),
        switch_count=int(round(means["switch_count"])),
        action_shares=shares,
    )

# =============================================================================
# CURVAS DE APRENDIZAJE
# =============================================================================

def aggregate_curves(runs: Sequence[Sequence[float]], seeds: Optional[Sequence[int]] = None, confidence: float = 0.95) -> LearningCurve:
    """
    Media por episodio e semiancho del intervalo t de Student (gl = n - 1).
    
    Args:
        runs: Retornos por episodio de cada semilla (misma longitud)
        seeds: Semillas de cada ejecución (por defecto 0..n-1)
    
    Raises:
        ContractViolation: Menos de 2 ejecuciones o longitudes distintas
    """
    if len(runs) < 2:
        raise ContractViolation(f"Se requieren al menos 2 ejecuciones (recibidas {len(runs)})")
    lengths = {len(r) for r in runs}
    if len(lengths) != 1:
        raise ContractViolation(f"Ejecuciones de longitudes distintas: {sorted(lengths)}")
    data = np.asarray(runs, dtype=np.float64)
    n = data.shape[0]
    mean = data.mean(axis=0)
    sem = data.std(axis=0, ddof=1) / math.sqrt(n)
    half_width = stats.t.ppf(0.5 + confidence / 2.0, df=n - 1) * sem
    return LearningCurve(
        seeds=list(seeds) if seeds is not None else list(range(n)),
        returns=data.tolist(),
        mean=mean.tolist(),
        half_width=np.maximum(half_width, 0.0).tolist(),
    )


def curve_frame(curve: LearningCurve) -> pd.DataFrame:
    """Tabla episodio / semillas / media / semiancho para curve.csv"""
    frame = pd.DataFrame({"episode": np.arange(1, curve.episodes + 1)})
    for seed, returns in zip(curve.seeds, curve.returns):
        frame[f"seed_{seed}"] = returns
    frame["mean"] = curve.mean
    frame["ci_half_width"] = curve.half_width
    return frame


def sample_complexity(mean_returns: Sequence[float], agent: str, fraction: float = 0.9, smoothing: int = 10) -> SampleComplexity:
    """
    Episodios hasta alcanzar start + fraction·(final - start) de la curva
    suavizada (media móvil de `smoothing` episodios).
    
    Sin mejora (final <= start) no hay umbral que alcanzar: episodes_to_fraction es None.
    """
    if len(mean_returns) == 0:
        raise ContractViolation("Curva vacía")
    smoothed = pd.Series(mean_returns, dtype=float).rolling(smoothing, min_periods=1).mean().to_numpy()
    start, final = smoothed[0], smoothed[-1]
    reached = None
    if final > start:
        threshold = start + fraction * (final - start)
        reached = int(np.argmax(smoothed >= threshold)) + 1
    return SampleComplexity(agent=agent, fraction=fraction, episodes_to_fraction=reached, final_return=float(final))
