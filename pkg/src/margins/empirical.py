"""
Margen empírico reescalado: G(x) = #{X_t <= x} / (T + 1).

Admite pesos por observación (réplicas bootstrap semiparamétricas): G(x) = Σ ξ_t 1{X_t <= x} / (T + 1).
"""
from dataclasses import dataclass
from typing import Any, Optional

import numpy as np

from src.utils.errors import MarginError


@dataclass(frozen=True, eq=False)
class EmpiricalMargin:
    sample: np.ndarray
    weights: Optional[np.ndarray] = None

    def __post_init__(self):
        x = np.asarray(self.sample, dtype=float)
        if x.ndim != 1 or x.size == 0:
            raise MarginError("El margen empírico requiere una muestra univariada no vacía")
        if not np.all(np.isfinite(x)):
            raise MarginError("La muestra contiene valores no finitos")
        order = np.argsort(x, kind="stable")
        object.__setattr__(self, "sample", x[order])
        if self.weights is not None:
            w = np.asarray(self.weights, dtype=float)
            if w.shape != x.shape:
                raise MarginError(f"Pesos de forma {w.shape} para una muestra de forma {x.shape}")
            object.__setattr__(self, "weights", w[order])

    @property
    def size(self) -> int:
        return self.sample.size

    @property
    def n_params(self) -> int:
        return 0

    def cdf(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        counts = np.searchsorted(self.sample, x, side="right")
        if self.weights is None:
            return counts / (self.size + 1.0)
        # Con pesos negativos la suma acumulada puede decrecer: se fuerza monotonía
        cumulative = np.maximum.accumulate(np.concatenate([[0.0], np.cumsum(self.weights)]))
        return cumulative[counts] / (self.size + 1.0)

    def ppf(self, u: np.ndarray) -> np.ndarray:
        """
        Interpolación lineal entre estadísticos de orden en la grilla i/(T+1), plana fuera del rango.
        No usa los pesos: las réplicas bootstrap solo ponderan la PIT.
        """
        grid = np.arange(1, self.size + 1) / (self.size + 1.0)
        return np.interp(np.asarray(u, dtype=float), grid, self.sample)

    def to_dict(self) -> dict[str, Any]:
        return {"type": "empirical", "sample": self.sample.tolist()}
