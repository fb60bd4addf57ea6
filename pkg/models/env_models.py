from dataclasses import dataclass, field
import enum

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field

from models.link_models import LinkKind

# =============================================================================
# ESPACIO DE ACCIONES
# =============================================================================

class Action(enum.IntEnum):
    """Las 8 combinaciones de enlaces a1..a8"""
    A1 = 1  # sin transmisión
    A2 = 2  # DSRC
    A3 = 3  # faro delantero
    A4 = 4  # DSRC + faro
    A5 = 5  # piloto trasero
    A6 = 6  # DSRC + piloto
    A7 = 7  # piloto + faro
    A8 = 8  # los tres

    @property
    def links(self) -> frozenset:
        return ACTION_LINKS[self]

    @property
    def index(self) -> int:
        """Índice 0..7 usado por las redes"""
        return int(self) - 1

    @classmethod
    def from_index(cls, index: int) -> "Action":
        return cls(int(index) + 1)

    def uses(self, kind: LinkKind) -> bool:
        return kind in ACTION_LINKS[self]


ACTION_LINKS = {
    Action.A1: frozenset(),
    Action.A2: frozenset({LinkKind.DSRC}),
    Action.A3: frozenset({LinkKind.VLC_HEADLIGHT}),
    Action.A4: frozenset({LinkKind.DSRC, LinkKind.VLC_HEADLIGHT}),
    Action.A5: frozenset({LinkKind.VLC_TAILLIGHT}),
    Action.A6: frozenset({LinkKind.DSRC, LinkKind.VLC_TAILLIGHT}),
    Action.A7: frozenset({LinkKind.VLC_TAILLIGHT, LinkKind.VLC_HEADLIGHT}),
    Action.A8: frozenset({LinkKind.DSRC, LinkKind.VLC_HEADLIGHT, LinkKind.VLC_TAILLIGHT}),
}

N_ACTIONS = len(Action)
OBS_DIM = 4

# =============================================================================
# COSTES
# =============================================================================

class CostTable(BaseModel):
    """Coste C(a) por enlace; el coste de una acción es la suma de sus enlaces"""
    model_config = ConfigDict(extra="forbid", frozen=True)

    dsrc: float = Field(0.4, ge=0)
    headlight: float = Field(0.1, ge=0)
    taillight: float = Field(0.1, ge=0)

    def link_cost(self, kind: LinkKind) -> float:
        return {
            LinkKind.DSRC: self.dsrc,
            LinkKind.VLC_HEADLIGHT: self.headlight,
            LinkKind.VLC_TAILLIGHT: self.taillight,
        }[kind]

# =============================================================================
# OBSERVACIONES Y TRANSICIONES
# =============================================================================

@dataclass(frozen=True)
class Observation:
    """Estado s = [X, Y, cos(phi), sin(phi)]"""
    X: float
    Y: float
    cos_phi: float
    sin_phi: float

    def to_array(self) -> np.ndarray:
        return np.array([self.X, self.Y, self.cos_phi, self.sin_phi], dtype=np.float64)

    @classmethod
    def from_array(cls, values) -> "Observation":
        x, y, c, s = (float(v) for v in values)
        return cls(x, y, c, s)


@dataclass(frozen=True)
class Transition:
    """Registro (s, a, r, s', done, info) de un paso"""
    obs: Observation
    action: Action
    reward: float
    next_obs: Observation
    done: bool
    info: dict = field(default_factory=dict)


TRACE_COLUMNS = [
    "step", "X", "Y", "cos_phi", "sin_phi", "action_id", "reward",
    "success", "p_dsrc", "p_head", "p_tail", "distance",
]


@dataclass
class Trace:
    """Secuencia completa de transiciones de un episodio"""
    transitions: list[Transition] = field(default_factory=list)

    def append(self, transition: Transition) -> None:
        self.transitions.append(transition)

    def __len__(self) -> int:
        return len(self.transitions)

    def __iter__(self):
        return iter(self.transitions)

    @property
    def actions(self) -> list[Action]:
        return [t.action for t in self.transitions]

    def to_frame(self) -> pd.DataFrame:
        """Tabla con las columnas fijas de trace.csv"""
        rows = []
        for t in self.transitions:
            info = t.info
            rows.append({
                "step": info.get("step", len(rows)),
                "X": t.obs.X,
                "Y": t.obs.Y,
                "cos_phi": t.obs.cos_phi,
                "sin_phi": t.obs.sin_phi,
                "action_id": int(t.action),
                "reward": t.reward,
                "success": int(bool(info.get("success", False))),
                "p_dsrc": info.get("p_dsrc", 0.0),
                "p_head": info.get("p_head", 0.0),
                "p_tail": info.get("p_tail", 0.0),
                "distance": info.get("distance", 0.0),
            })
        return pd.DataFrame(rows, columns=TRACE_COLUMNS)

    @classmethod
    def from_frame(cls, frame: pd.DataFrame) -> "Trace":
        """Reconstruye una traza desde trace.csv (next_obs no se persiste)"""
        trace = cls()
        records = frame.to_dict("records")
        for i, row in enumerate(records):
            obs = Observation(row["X"], row["Y"], row["cos_phi"], row["sin_phi"])
            nxt = records[i + 1] if i + 1 < len(records) else row
            next_obs = Observation(nxt["X"], nxt["Y"], nxt["cos_phi"], nxt["sin_phi"])
            trace.append(Transition(
                obs=obs,
                action=Action(int(row["action_id"])),
                reward=float(row["reward"]),
                next_obs=next_obs,
                done=i == len(records) - 1,
                info={
                    "step": int(row["step"]),
                    "success": bool(row["success"]),
                    "p_dsrc": float(row["p_dsrc"]),
                    "p_head": float(row["p_head"]),
                    "p_tail": float(row["p_tail"]),
                    "distance": float(row["distance"]),
                },
            ))
        return trace
