"""
Esquema de configuración de una ejecución (RunConfig).

El archivo es JSON; un archivo vacío equivale a todos los valores por defecto
(escenario 1, 10 Hz, 400 s, hiperparámetros en negrita de la rejilla).
Las claves desconocidas se rechazan nombrando la clave.
"""

import json
import logging
from pathlib import Path

from pydantic import BaseModel, ConfigDict, Field, PositiveInt, ValidationError, field_validator, model_validator

from models.agent_models import AgentKind, PpoConfig, RainbowConfig, SacConfig, TrpoConfig, AGENT_CONFIGS
from models.env_models import CostTable
from models.link_models import ChannelConfig
from utils.errors import ConfigurationError

logger = logging.getLogger(__name__)

# =============================================================================
# SECCIONES
# =============================================================================

class TrackConfig(BaseModel):
    """Geometría del serpentín cerrado"""
    model_config = ConfigDict(extra="forbid", frozen=True)

    segment_length: float = Field(200.0, description="Longitud de cada recta (m)")
    hairpin_radius: float = Field(15.0, description="Radio de las horquillas (m)")
    hairpin_counts: dict[int, int] = Field(default_factory=lambda: {1: 3, 2: 9})
    resolution: float = Field(0.5, description="Paso de muestreo de la polilínea (m)")
    max_curvature: float = Field(0.2, description="Curvatura máxima admitida (1/m)")


class MobilityConfig(BaseModel):
    """Par líder-seguidor"""
    model_config = ConfigDict(extra="forbid", frozen=True)

    speed_min_kmh: float = Field(30.0, gt=0)
    speed_max_kmh: float = Field(40.0, gt=0)
    speed_noise: float = Field(0.1, ge=0, description="Desviación del paseo aleatorio por paso (m/s)")
    start_gap: float = Field(20.0, gt=0)
    min_gap: float = Field(5.0, ge=0)
    max_gap: float = Field(60.0, gt=0)

    @model_validator(mode="after")
    def _check_ranges(self):
        if self.speed_min_kmh > self.speed_max_kmh:
            raise ValueError("speed_min_kmh debe ser <= speed_max_kmh")
        if self.min_gap >= self.max_gap:
            raise ValueError("min_gap debe ser menor que max_gap")
        if not self.min_gap <= self.start_gap <= self.max_gap:
            raise ValueError("start_gap debe estar en [min_gap, max_gap]")
        return self


class EnvironmentConfig(BaseModel):
    """MDP: horizonte, alcance de normalización y parámetros de paquete"""
    model_config = ConfigDict(extra="forbid", frozen=True)

    max_range: float = Field(1000.0, gt=0, description="R para normalizar X, Y (m)")
    beacon_hz: float = Field(10.0, gt=0)
    sim_time_s: float = Field(400.0, gt=0)
    packet_bytes: PositiveInt = 1024
    bitrate_dsrc: float = Field(6e6, gt=0)
    bitrate_vlc: float = Field(1e6, gt=0)
    frozen_mobility: bool = Field(False, description="Congela la geometría (pruebas tipo bandido)")

    @property
    def dt(self) -> float:
        return 1.0 / self.beacon_hz

    @property
    def horizon(self) -> int:
        return int(round(self.sim_time_s * self.beacon_hz))


class EvaluationConfig(BaseModel):
    """Evaluación voraz tras el entrenamiento"""
    model_config = ConfigDict(extra="forbid", frozen=True)

    seed: int = 10_000
    episodes: PositiveInt = 1
    final_window: PositiveInt = 20


class DecisionMapConfig(BaseModel):
    """Rejilla (distancia, rumbo) del mapa de decisión"""
    model_config = ConfigDict(extra="forbid", frozen=True)

    distance_max: float = Field(100.0, gt=0)
    distance_bins: PositiveInt = 50
    bearing_bins: PositiveInt = 72


class RunConfig(BaseModel):
    """Configuración completa de una ejecución"""
    model_config = ConfigDict(extra="forbid", frozen=True)

    scenario: int = 1
    track: TrackConfig = Field(default_factory=TrackConfig)
    mobility: MobilityConfig = Field(default_factory=MobilityConfig)
    environment: EnvironmentConfig = Field(default_factory=EnvironmentConfig)
    channels: ChannelConfig = Field(default_factory=ChannelConfig)
    costs: CostTable = Field(default_factory=CostTable)
    agent: AgentKind = AgentKind.PPO
    ppo: PpoConfig = Field(default_factory=PpoConfig)
    trpo: TrpoConfig = Field(default_factory=TrpoConfig)
    sac: SacConfig = Field(default_factory=SacConfig)
    rainbow: RainbowConfig = Field(default_factory=RainbowConfig)
    seeds: list[int] = Field(default_factory=lambda: [0, 1, 2, 3, 4])
    episodes: PositiveInt = 300
    evaluation: EvaluationConfig = Field(default_factory=EvaluationConfig)
    decision_map: DecisionMapConfig = Field(default_factory=DecisionMapConfig)
    output_dir: str = "runs"

    @field_validator("scenario")
    @classmethod
    def _check_scenario(cls, value: int) -> int:
        if value not in (1, 2):
            raise ValueError("scenario debe ser 1 o 2")
        return value

    @field_validator("seeds")
    @classmethod
    def _check_seeds(cls, value: list[int]) -> list[int]:
        if not value:
            raise ValueError("seeds no puede estar vacío")
        if len(set(value)) != len(value):
            raise ValueError("seeds contiene duplicados")
        return value

    def agent_config(self, kind: AgentKind | None = None):
        """Sección de hiperparámetros del agente indicado (o del configurado)"""
        kind = AgentKind(kind or self.agent)
        return getattr(self, kind.value)

    def with_agent_params(self, kind: AgentKind, params: dict) -> "RunConfig":
        """Copia con hiperparámetros sustituidos (celdas de grid search)"""
        kind = AgentKind(kind)
        section = AGENT_CONFIGS[kind].model_validate({**self.agent_config(kind).model_dump(), **params})
        return self.model_copy(update={"agent": kind, kind.value: section})

    def with_overrides(
        self,
        scenario: int | None = None,
        episodes: int | None = None,
        seed: int | None = None,
        agent: AgentKind | str | None = None,
        eval_seed: int | None = None,
        eval_episodes: int | None = None,
    ) -> "RunConfig":
        """
        Copia validada con las opciones de línea de comandos incorporadas, de
        modo que el eco en config.json reproduce la ejecución.
        None deja el valor de la configuración.
        """
        data = self.model_dump(mode="json")
        if scenario is not None:
            data["scenario"] = scenario
        if episodes is not None:
            data["episodes"] = episodes
        if seed is not None:
            data["seeds"] = [seed]
        if agent is not None:
            data["agent"] = AgentKind(agent).value
        if eval_seed is not None:
            data["evaluation"]["seed"] = eval_seed
        if eval_episodes is not None:
            data["evaluation"]["episodes"] = eval_episodes
        return parse_config(data)

    def to_json(self) -> str:
        """Serialización determinista (claves ordenadas) para el eco en el directorio de salida"""
        return json.dumps(self.model_dump(mode="json"), indent=2, sort_keys=True) + "\n"

# =============================================================================
# CARGA
# =============================================================================

def _format_validation_error(error: ValidationError) -> str:
    parts = []
    for item in error.errors():
        key = ".".join(str(p) for p in item["loc"]) or "<raíz>"
        if item["type"] == "extra_forbidden":
            parts.append(f"clave desconocida '{key}'")
        else:
            parts.append(f"'{key}': {item['msg']}")
    return "; ".join(parts)


def parse_config(data: dict) -> RunConfig:
    """Valida un diccionario ya parseado"""
    try:
        return RunConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigurationError(f"Configuración inválida: {_format_validation_error(e)}") from e


def load_config(path: str | Path | None) -> RunConfig:
    """
    Carga, valida y completa con valores por defecto un archivo de configuración.
    
    Args:
        path: Ruta al archivo JSON (None → valores por defecto)
    
    Returns:
        RunConfig: Configuración resuelta
    
    Raises:
        ConfigurationError: Error de sintaxis (con línea/columna) o de esquema (con la clave)
    """
    if path is None:
        return RunConfig()
    path = Path(path)
    if not path.exists():
        raise ConfigurationError(f"No existe el archivo de configuración: {path}")
    text = path.read_text(encoding="utf-8")
    if not text.strip():
        logger.info(f"Configuración vacía en {path}: usando valores por defecto")
        return RunConfig()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigurationError(f"{path}: error de sintaxis en línea {e.lineno}, columna {e.colno}: {e.msg}") from e
    if not isinstance(data, dict):
        raise ConfigurationError(f"{path}: la raíz debe ser un objeto JSON")
    return parse_config(data)


def echo_config(config: RunConfig, out_dir: str | Path) -> Path:
    """Escribe la configuración resuelta en out_dir/config.json"""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    target = out_dir / "config.json"
    target.write_text(config.to_json(), encoding="utf-8")
    return target
