"""
Funciones sobre distribuciones categóricas (8 acciones o N átomos).
"""

import logging

import numpy as np
from scipy import special

logger = logging.getLogger(__name__)

KL_CLAMP = 1e-12


def softmax(logits: np.ndarray) -> np.ndarray:
    return special.softmax(logits, axis=-1)


def log_softmax(logits: np.ndarray) -> np.ndarray:
    return special.log_softmax(logits, axis=-1)


def entropy(probs: np.ndarray) -> np.ndarray:
    """-sum p log p sobre el último eje (0 log 0 = 0)"""
    return special.entr(np.asarray(probs, dtype=np.float64)).sum(axis=-1)


def entropy_logit_grad(probs: np.ndarray, log_probs: np.ndarray) -> np.ndarray:
    """dH/dlogits = -p (log p + H)"""
    h = -(probs * log_probs).sum(axis=-1, keepdims=True)
    return -probs * (log_probs + h)


def kl_categorical(p_old: np.ndarray, p_new: np.ndarray) -> np.ndarray:
    """
    KL(p_old || p_new) = sum p_old log(p_old / p_new) sobre el último eje.
    
    Las entradas nulas se recortan a 1e-12 con un diagnóstico en el log.
    """
    p_old = np.asarray(p_old, dtype=np.float64)
    p_new = np.asarray(p_new, dtype=np.float64)
    if np.any(p_old <= 0) or np.any(p_new <= 0):
        logger.warning(f"kl_categorical: probabilidades nulas recortadas a {KL_CLAMP}")
        p_old = np.maximum(p_old, KL_CLAMP)
        p_new = np.maximum(p_new, KL_CLAMP)
    return special.rel_entr(p_old, p_new).sum(axis=-1)
