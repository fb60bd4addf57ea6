"""
Núcleo de redes densas
Paso hacia delante, gradientes en modo inverso (y productos Jacobiano-vector
en modo directo), capas ruidosas y acceso plano a parámetros.
"""

from dataclasses import dataclass
import copy
import math
from typing import NamedTuple, Optional, Sequence

import numpy as np

from utils.errors import ContractViolation

ACTIVATIONS = ("relu", "tanh", "identity")

# =============================================================================
# CAPAS
# =============================================================================

class Affine:
    """Capa afín y = W x + b con inicialización uniforme escalada por fan-in"""
    noisy = False

    def __init__(self, n_in: int, n_out: int, rng: np.random.Generator):
        bound = 1.0 / math.sqrt(n_in)
        self.weight = rng.uniform(-bound, bound, size=(n_out, n_in))
        self.bias = rng.uniform(-bound, bound, size=n_out)

    @property
    def shape(self) -> tuple[int, int]:
        return self.weight.shape

    def parameters(self) -> list[np.ndarray]:
        return [self.weight, self.bias]

    def mean_parameter_count(self) -> int:
        return self.weight.size + self.bias.size

    def sample_noise(self, rng: Optional[np.random.Generator]):
        return None

    def effective(self, noise) -> tuple[np.ndarray, np.ndarray]:
        return self.weight, self.bias

    def param_grads(self, x: np.ndarray, dz: np.ndarray, noise) -> list[np.ndarray]:
        return [dz.T @ x, dz.sum(axis=0)]

    def tangent(self, tangents: Sequence[np.ndarray], noise) -> tuple[np.ndarray, np.ndarray]:
        return tangents[0], tangents[1]


class NoisyAffine:
    """
    Capa afín con ruido gaussiano factorizado en los pesos.
    En evaluación (noise=None) es exactamente la capa de medias.
    """
    noisy = True

    def __init__(self, n_in: int, n_out: int, rng: np.random.Generator, sigma0: float = 0.5):
        bound = 1.0 / math.sqrt(n_in)
        self.weight_mu = rng.uniform(-bound, bound, size=(n_out, n_in))
        self.bias_mu = rng.uniform(-bound, bound, size=n_out)
        self.weight_sigma = np.full((n_out, n_in), sigma0 / math.sqrt(n_in))
        self.bias_sigma = np.full(n_out, sigma0 / math.sqrt(n_in))

    @property
    def shape(self) -> tuple[int, int]:
        return self.weight_mu.shape

    def parameters(self) -> list[np.ndarray]:
        return [self.weight_mu, self.bias_mu, self.weight_sigma, self.bias_sigma]

    def mean_parameter_count(self) -> int:
        return self.weight_mu.size + self.bias_mu.size

    def sample_noise(self, rng: Optional[np.random.Generator]):
        if rng is None:
            return None
        n_out, n_in = self.shape
        f = lambda e: np.sign(e) * np.sqrt(np.abs(e))
        eps_in = f(rng.standard_normal(n_in))
        eps_out = f(rng.standard_normal(n_out))
        return np.outer(eps_out, eps_in), eps_out

    def effective(self, noise) -> tuple[np.ndarray, np.ndarray]:
        if noise is None:
            return self.weight_mu, self.bias_mu
        eps_w, eps_b = noise
        return self.weight_mu + self.weight_sigma * eps_w, self.bias_mu + self.bias_sigma * eps_b

    def param_grads(self, x: np.ndarray, dz: np.ndarray, noise) -> list[np.ndarray]:
        d_weight = dz.T @ x
        d_bias = dz.sum(axis=0)
        if noise is None:
            return [d_weight, d_bias, np.zeros_like(d_weight), np.zeros_like(d_bias)]
        eps_w, eps_b = noise
        return [d_weight, d_bias, d_weight * eps_w, d_bias * eps_b]

    def tangent(self, tangents: Sequence[np.ndarray], noise) -> tuple[np.ndarray, np.ndarray]:
        if noise is None:
            return tangents[0], tangents[1]
        eps_w, eps_b = noise
        return tangents[0] + tangents[2] * eps_w, tangents[1] + tangents[3] * eps_b

# =============================================================================
# ACTIVACIONES
# =============================================================================

def _activate(kind: str, z: np.ndarray) -> np.ndarray:
    if kind == "relu":
        return np.maximum(z, 0.0)
    if kind == "tanh":
        return np.tanh(z)
    return z


def _activation_grad(kind: str, z: np.ndarray) -> np.ndarray:
    if kind == "relu":
        return (z > 0).astype(z.dtype)
    if kind == "tanh":
        return 1.0 - np.tanh(z) ** 2
    return np.ones_like(z)

# =============================================================================
# RED DENSA
# =============================================================================

@dataclass
class Tape:
    """Activaciones cacheadas por forward() y suficientes para backward()"""
    net_id: int
    version: int
    inputs: list[np.ndarray]
    preacts: list[np.ndarray]
    noise: list
    squeeze: bool


class Backward(NamedTuple):
    params: list[np.ndarray]
    inputs: np.ndarray


class DenseNet:
    """
    Perceptrón multicapa de capas afines con etiquetas de activación.
    
    Args:
        layer_sizes: Tamaños, p. ej. [4, 64, 64, 8]
        activations: Una etiqueta por capa afín (relu ocultas, identity salida por defecto)
        noisy: Capas NoisyAffine (una bandera por capa)
        seed: Semilla de inicialización
        sigma0: Escala inicial del ruido de las capas ruidosas
    """

    def __init__(
        self,
        layer_sizes: Sequence[int],
        activations: Optional[Sequence[str]] = None,
        noisy: Optional[Sequence[bool]] = None,
        seed: int = 0,
        sigma0: float = 0.5,
    ):
        layer_sizes = [int(n) for n in layer_sizes]
        if len(layer_sizes) < 2 or min(layer_sizes) < 1:
            raise ContractViolation(f"Tamaños de capa inválidos: {layer_sizes}")
        n_layers = len(layer_sizes) - 1
        activations = list(activations) if activations is not None else ["relu"] * (n_layers - 1) + ["identity"]
        noisy = list(noisy) if noisy is not None else [False] * n_layers
        if len(activations) != n_layers or len(noisy) != n_layers:
            raise ContractViolation("Se requiere una activación y una bandera de ruido por capa")
        for kind in activations:
            if kind not in ACTIVATIONS:
                raise ContractViolation(f"Activación desconocida: {kind}")

        self.layer_sizes = layer_sizes
        self.activations = activations
        self.noisy_flags = [bool(f) for f in noisy]
        self.seed = int(seed)
        self.sigma0 = float(sigma0)
        init_rng = np.random.default_rng(self.seed)
        self.layers = [
            NoisyAffine(n_in, n_out, init_rng, sigma0) if is_noisy else Affine(n_in, n_out, init_rng)
            for n_in, n_out, is_noisy in zip(layer_sizes[:-1], layer_sizes[1:], self.noisy_flags)
        ]
        # Flujo propio para el ruido de las capas ruidosas
        self.noise_rng = np.random.default_rng([self.seed, 1])
        self.training = True
        self.version = 0

    # -------------------------------------------------------------------------
    # Parámetros
    # -------------------------------------------------------------------------

    def parameters(self) -> list[np.ndarray]:
        return [p for layer in self.layers for p in layer.parameters()]

    def param_layer_index(self) -> list[int]:
        """Índice de capa de cada array de parameters()"""
        return [i for i, layer in enumerate(self.layers) for _ in layer.parameters()]

    def num_params(self) -> int:
        """Número de parámetros medios (el ruido no cuenta)"""
        return sum(layer.mean_parameter_count() for layer in self.layers)

    def touch(self) -> None:
        """Invalida las cintas existentes tras modificar parámetros"""
        self.version += 1

    def clone(self) -> "DenseNet":
        other = copy.deepcopy(self)
        other.version = 0
        return other

    def eval(self) -> "DenseNet":
        self.training = False
        return self

    def train(self) -> "DenseNet":
        self.training = True
        return self

    def spec(self) -> dict:
        return {
            "layer_sizes": self.layer_sizes,
            "activations": self.activations,
            "noisy": self.noisy_flags,
            "seed": self.seed,
            "sigma0": self.sigma0,
        }

    # -------------------------------------------------------------------------
    # Cálculo
    # -------------------------------------------------------------------------

    def forward(self, x: np.ndarray) -> tuple[np.ndarray, Tape]:
        return forward(self, x)

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return forward(self, x)[0]


def forward(net: DenseNet, x: np.ndarray) -> tuple[np.ndarray, Tape]:
    """
    Composición afín + activación.
    
    Args:
        net: Red
        x: Vector (in,) o lote (B, in)
    
    Returns:
        tuple: (salida, cinta)
    
    Raises:
        ContractViolation: Dimensión de entrada incorrecta
    """
    x = np.asarray(x, dtype=np.float64)
    squeeze = x.ndim == 1
    h = x[None, :] if squeeze else x
    if h.ndim != 2 or h.shape[1] != net.layer_sizes[0]:
        raise ContractViolation(f"Entrada de forma {x.shape}; se esperaba (*, {net.layer_sizes[0]})")
    inputs, preacts, noises = [], [], []
    noise_rng = net.noise_rng if net.training else None
    for layer, kind in zip(net.layers, net.activations):
        noise = layer.sample_noise(noise_rng)
        weight, bias = layer.effective(noise)
        z = h @ weight.T + bias
        inputs.append(h)
        preacts.append(z)
        noises.append(noise)
        h = _activate(kind, z)
    tape = Tape(id(net), net.version, inputs, preacts, noises, squeeze)
    return (h[0] if squeeze else h), tape


def _check_tape(net: DenseNet, tape: Tape) -> None:
    if tape.net_id != id(net) or tape.version != net.version:
        raise ContractViolation("Cinta obsoleta: la red cambió desde el forward")


def backward(net: DenseNet, tape: Tape, output_grad: np.ndarray) -> Backward:
    """
    Gradientes exactos en modo inverso de la pérdida escalar cuyo gradiente
    respecto a la salida es output_grad (sumados sobre el lote).
    
    Returns:
        Backward: (gradientes alineados con parameters(), gradiente de la entrada)
    """
    _check_tape(net, tape)
    grad = np.asarray(output_grad, dtype=np.float64)
    grad = grad[None, :] if tape.squeeze else grad
    param_grads: list[list[np.ndarray]] = []
    for layer, kind, x, z, noise in reversed(list(zip(net.layers, net.activations, tape.inputs, tape.preacts, tape.noise))):
        dz = grad * _activation_grad(kind, z)
        param_grads.append(layer.param_grads(x, dz, noise))
        weight, _ = layer.effective(noise)
        grad = dz @ weight
    flat = [g for grads in reversed(param_grads) for g in grads]
    return Backward(flat, grad[0] if tape.squeeze else grad)


def jvp(net: DenseNet, tape: Tape, tangents: Sequence[np.ndarray]) -> np.ndarray:
    """
    Producto Jacobiano-vector en modo directo: derivada direccional de la
    salida respecto a los parámetros en la dirección tangents.
    """
    _check_tape(net, tape)
    offset = 0
    d_h = None
    for layer, kind, x, z, noise in zip(net.layers, net.activations, tape.inputs, tape.preacts, tape.noise):
        n = len(layer.parameters())
        d_weight, d_bias = layer.tangent(tangents[offset:offset + n], noise)
        offset += n
        d_z = x @ d_weight.T + d_bias
        if d_h is not None:
            weight, _ = layer.effective(noise)
            d_z = d_z + d_h @ weight.T
        d_h = d_z * _activation_grad(kind, z)
    return d_h[0] if tape.squeeze else d_h

# =============================================================================
# VISTAS PLANAS
# =============================================================================

def get_flat(net: DenseNet) -> np.ndarray:
    return np.concatenate([p.ravel() for p in net.parameters()])


def set_flat(net: DenseNet, flat: np.ndarray) -> None:
    offset = 0
    for p in net.parameters():
        p[...] = flat[offset:offset + p.size].reshape(p.shape)
        offset += p.size
    if offset != flat.size:
        raise ContractViolation(f"Vector plano de tamaño {flat.size}; se esperaban {offset}")
    net.touch()


def flatten(arrays: Sequence[np.ndarray]) -> np.ndarray:
    return np.concatenate([a.ravel() for a in arrays])


def unflatten(flat: np.ndarray, like: Sequence[np.ndarray]) -> list[np.ndarray]:
    out, offset = [], 0
    for a in like:
        out.append(flat[offset:offset + a.size].reshape(a.shape))
        offset += a.size
    return out
