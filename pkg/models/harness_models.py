from typing import Optional

from pydantic import BaseModel, Field

# =============================================================================
# MÉTRICAS Y CURVAS
# =============================================================================

class Metrics(BaseModel):
    """Métricas de un episodio evaluado (porcentajes en [0, 100])"""
    steps: int
    reliability: float = Field(ge=0, le=100)
    vlc_utilization: float = Field(ge=0, le=100)
    headlight_rate: float = Field(ge=0, le=100)
    no_redundancy: float = Field(ge=0, le=100)
    taillight_rate: float = Field(ge=0, le=100)
    switch_count: int = Field(ge=0)
    mean_return: float
    total_return: float
    mean_airtime_ms: float = Field(ge=0)
    action_shares: dict[int, float]


class LearningCurve(BaseModel):
    """Retornos por episodio y semilla, con media e IC al 95 %"""
    seeds: list[int]
    returns: list[list[float]]
    mean: list[float]
    half_width: list[float]

    @property
    def episodes(self) -> int:
        return len(self.mean)


class SampleComplexity(BaseModel):
    """Episodios necesarios para alcanzar una fracción de la mejora final"""
    agent: str
    fraction: float
    episodes_to_fraction: Optional[int]
    final_return: float

# =============================================================================
# MAPAS DE DECISIÓN
# =============================================================================

class OverlapCell(BaseModel):
    """Celda donde visitas cercanas de la trayectoria produjeron acciones distintas"""
    distance: float
    bearing: float
    actions: dict[int, int]


class DecisionMap(BaseModel):
    """Acción voraz por celda (distancia, rumbo)"""
    distances: list[float]
    bearings: list[float]
    actions: list[list[int]]  # [i_distance][j_bearing]
    overlap: list[OverlapCell] = []

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.distances), len(self.bearings)

# =============================================================================
# RESULTADOS DEL ARNÉS
# =============================================================================

class RunArtifacts(BaseModel):
    """Resultado de train_run"""
    agent: str
    seed: int
    episodes: int
    returns: list[float]
    failed: bool = False
    failure: Optional[str] = None
    diagnostics: dict = {}
    metrics: Optional[Metrics] = None
    best_checkpoint: Optional[str] = None
    final_checkpoint: Optional[str] = None

    def final_window_score(self, window: int = 20) -> float:
        tail = self.returns[-window:]
        return sum(tail) / len(tail) if tail else float("-inf")


class GridCellResult(BaseModel):
    """Una celda de la rejilla de hiperparámetros"""
    rank: int = 0
    cell_id: int
    params: dict
    score: Optional[float]
    seeds_ok: int
    seeds_failed: int
    checkpoint: Optional[str] = None


class RobustnessRow(BaseModel):
    """Fila del informe de robustez"""
    agent: str
    model: str  # "1st" | "2nd"
    checkpoint: Optional[str]
    status: str  # "ok" | "absent"
    reliability_train: Optional[float] = None
    reliability_test: Optional[float] = None
    gap: Optional[float] = None
