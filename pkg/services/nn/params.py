"""
Conteo de parámetros entrenables (contabilidad de parámetros medios).
"""

from dataclasses import dataclass
from typing import Optional, Sequence


@dataclass(frozen=True)
class DuelingHeadSpec:
    """Cabeza dueling: el tronco compartido alimenta los flujos de valor y ventaja"""
    value: Sequence[int]
    advantage: Sequence[int]


def _dense_count(sizes: Sequence[int]) -> int:
    return sum(n_in * n_out + n_out for n_in, n_out in zip(sizes[:-1], sizes[1:]))


def count_params(spec: Sequence[int], head_spec: Optional[DuelingHeadSpec] = None) -> int:
    """
    Suma de (in·out + out) sobre las capas afines.
    
    Args:
        spec: Tamaños de la red (o del tronco compartido si hay head_spec)
        head_spec: Flujos dueling que parten de la salida del tronco
    
    Returns:
        int: Número de parámetros
    """
    total = _dense_count(spec)
    if head_spec is not None:
        total += _dense_count(head_spec.value) + _dense_count(head_spec.advantage)
    return total
