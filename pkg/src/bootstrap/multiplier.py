"""
Multiplicadores dependientes: ξ_t = 1 + Σ_{j<ℓ} w_j Z_{t-j}, Z iid N(0,1), pesos triangulares con Σ w_j² = 1.

E(ξ) = Var(ξ) = 1 y ξ_t, ξ_s son independientes si |t - s| >= ℓ.
"""
from dataclasses import dataclass

import numpy as np

from src.utils.utils_stats import make_rng


def default_block_length(T: int) -> int:
    return max(1, int(np.floor(T ** (1.0 / 3.0))))


def triangular_weights(block_length: int) -> np.ndarray:
    j = np.arange(block_length)
    w = 1.0 - j / block_length
    return w / np.sqrt(np.sum(w * w))


@dataclass(frozen=True, eq=False)
class MultiplierStream:
    values: np.ndarray
    block_length: int

    @property
    def T(self) -> int:
        return self.values.size


def gen_multipliers(T: int, block_length: int, seed: int, *stream: int) -> MultiplierStream:
    if not 1 <= block_length < max(T, 2):
        raise ValueError(f"ℓ_T fuera de rango: ℓ={block_length}, T={T}")
    rng = make_rng(seed, *stream)
    w = triangular_weights(block_length)
    z = rng.standard_normal(T + block_length - 1)
    # ξ_t usa Z_t, Z_{t-1}, ..., Z_{t-ℓ+1}
    xi = 1.0 + np.convolve(z, w, mode="valid")
    return MultiplierStream(xi, block_length)


def unit_multipliers(T: int) -> MultiplierStream:
    return MultiplierStream(np.ones(T), 1)
