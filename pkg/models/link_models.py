import enum
import math

from pydantic import BaseModel, ConfigDict, Field, model_validator

# =============================================================================
# TIPOS DE ENLACE
# =============================================================================

class LinkKind(str, enum.Enum):
    """Tecnologías de enlace disponibles en cada vehículo"""
    DSRC = "dsrc"
    VLC_HEADLIGHT = "headlight"
    VLC_TAILLIGHT = "taillight"


# =============================================================================
# CONFIGURACIÓN DE CANALES (pydantic)
# =============================================================================

class DsrcConfig(BaseModel):
    """Modelo logístico de éxito DSRC (omnidireccional)"""
    model_config = ConfigDict(extra="forbid", frozen=True)

    range_50: float = Field(350.0, gt=0, description="Distancia (m) con 50 % de éxito")
    steepness: float = Field(0.02, gt=0, description="Pendiente del logístico (1/m)")
    max_range: float = Field(1000.0, gt=0, description="Alcance máximo R (m); éxito 0 más allá")
    clamp: tuple[float, float] = Field((0.0, 1.0), description="Recorte [min, max] de la probabilidad")


class BeamConfig(BaseModel):
    """Haz VLC paramétrico asimétrico (faro delantero o piloto trasero)"""
    model_config = ConfigDict(extra="forbid", frozen=True)

    max_range: float = Field(60.0, gt=0, description="Alcance (m) donde el término radial llega a 0")
    half_angle_left: float = Field(math.radians(25.0), gt=0, lt=math.pi)
    half_angle_right: float = Field(math.radians(15.0), gt=0, lt=math.pi)
    taper: float = Field(math.radians(5.0), ge=0, description="Ancho del borde coseno fuera del haz (rad)")
    rolloff: float = Field(2.0, gt=0, description="Exponente radial")
    rx_fov: float = Field(math.radians(60.0), gt=0, le=math.pi, description="Semiángulo de visión del receptor")
    clamp: tuple[float, float] = Field((0.0, 1.0), description="Recorte [min, max] de la probabilidad")


def _default_taillight() -> BeamConfig:
    return BeamConfig(
        max_range=40.0,
        half_angle_left=math.radians(30.0),
        half_angle_right=math.radians(25.0),
    )


class ChannelConfig(BaseModel):
    """Parámetros de los tres modelos de enlace"""
    model_config = ConfigDict(extra="forbid", frozen=True)

    dsrc: DsrcConfig = Field(default_factory=DsrcConfig)
    headlight: BeamConfig = Field(default_factory=BeamConfig)
    taillight: BeamConfig = Field(default_factory=_default_taillight)

    @model_validator(mode="after")
    def _check_clamps(self):
        for name in ("dsrc", "headlight", "taillight"):
            lo, hi = getattr(self, name).clamp
            if not (0.0 <= lo <= hi <= 1.0):
                raise ValueError(f"{name}.clamp debe cumplir 0 <= min <= max <= 1")
        return self
