"""
Flujos aleatorios con semilla.

Todas las fuentes de azar del laboratorio pasan por aquí para que una misma
semilla reproduzca bit a bit las mismas trayectorias.
"""

import numpy as np

# Sub-flujos fijos derivados de la semilla de un episodio
STREAM_MOBILITY = 0
STREAM_CHANNEL = 1
STREAM_AGENT = 2


def make_rng(*keys: int) -> np.random.Generator:
    """
    Construye un generador PCG64 a partir de una tupla de enteros.
    
    Args:
        keys: Semilla y claves de sub-flujo (p. ej. semilla, episodio, STREAM_CHANNEL)
    
    Returns:
        np.random.Generator: Generador determinista
    """
    return np.random.default_rng(np.random.SeedSequence([int(k) for k in keys]))


def rng_state(rng: np.random.Generator) -> dict:
    """Estado serializable (JSON) del generador"""
    return rng.bit_generator.state


def restore_rng(state: dict) -> np.random.Generator:
    """Reconstruye un generador a partir de rng_state()"""
    rng = np.random.default_rng()
    rng.bit_generator.state = state
    return rng


def derive_seed(*keys: int) -> int:
    """Semilla entera de 32 bits derivada de (semilla, episodio, ...)"""
    return int(np.random.SeedSequence([int(k) for k in keys]).generate_state(1)[0])
