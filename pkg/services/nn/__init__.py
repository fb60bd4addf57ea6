"""
Núcleo numérico mínimo para redes densas pequeñas (entradas de 4, salidas de 8)
"""

from .core import (
    Affine,
    NoisyAffine,
    DenseNet,
    Tape,
    forward,
    backward,
    jvp,
    get_flat,
    set_flat,
    flatten,
    unflatten,
)

from .optim import (
    AdamState,
    adam_step,
    apply_gradients,
    soft_update,
    hard_update,
)

from .params import count_params, DuelingHeadSpec

from .functional import softmax, log_softmax, entropy, kl_categorical

__all__ = [
    'Affine', 'NoisyAffine', 'DenseNet', 'Tape',
    'forward', 'backward', 'jvp',
    'get_flat', 'set_flat', 'flatten', 'unflatten',
    'AdamState', 'adam_step', 'apply_gradients', 'soft_update', 'hard_update',
    'count_params', 'DuelingHeadSpec',
    'softmax', 'log_softmax', 'entropy', 'kl_categorical',
]
