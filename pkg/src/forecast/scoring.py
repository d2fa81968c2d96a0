"""
Funcionales predictivos y reglas de puntaje sobre muestras de Monte-Carlo.
"""
import logging
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.stats import gaussian_kde

from src.utils.errors import CopulaDomainError

logger = logging.getLogger(__name__)

# medida -> α del VaR (None para CRPS / logS)
MEASURES = {"crps": None, "logs": None, "var95": 0.05, "var99": 0.01}


@dataclass(frozen=True)
class Functional:
    kind: str = "mean"
    alpha: Optional[float] = None

    def __post_init__(self):
        if self.kind not in ("mean", "quantile"):
            raise ValueError(f"Funcional desconocido: {self.kind}")
        if self.kind == "quantile" and not (self.alpha is not None and 0.0 < self.alpha < 1.0):
            raise CopulaDomainError(f"El nivel del cuantil debe estar en (0,1): {self.alpha}")

    @property
    def name(self) -> str:
        return "mean" if self.kind == "mean" else f"quantile_{self.alpha:g}"

    @classmethod
    def parse(cls, text: str) -> "Functional":
        """'mean' o 'quantile:0.05' (también 'q0.05')."""
        text = text.strip().lower()
        if text == "mean":
            return cls("mean")
        if text.startswith("quantile:"):
            return cls("quantile", float(text.split(":", 1)[1]))
        if text.startswith("q"):
            return cls("quantile", float(text[1:]))
        raise ValueError(f"Funcional no reconocido: {text}")


def predict_functional(sample: np.ndarray, functional: Functional):
    """Media muestral o cuantil empírico de la muestra (por columna si es una matriz)."""
    x = np.asarray(sample, dtype=float)
    if x.size == 0:
        raise ValueError("Muestra vacía")
    if functional.kind == "mean":
        return x.mean(axis=0)
    return np.quantile(x, functional.alpha, axis=0)


def contract_portfolio(simulations: np.ndarray, weights: np.ndarray, d: int) -> np.ndarray:
    """Retorno acumulado Σ_pasos w'X_paso de cada réplica de una matriz N×(k·d)."""
    sims = np.asarray(simulations, dtype=float)
    w = np.asarray(weights, dtype=float)
    if w.shape != (d,):
        raise ValueError(f"Se esperaban {d} pesos, forma {w.shape}")
    steps = sims.shape[1] // d
    return sims.reshape(sims.shape[0], steps, d) @ w @ np.ones(steps)


# ==========================================
# Reglas de puntaje
# ==========================================

def crps_sample(sample: np.ndarray, y: float) -> float:
    """CRPS en forma de energía: mean|X_i - y| - (1/2N²) ΣΣ|X_i - X_j|."""
    x = np.sort(np.asarray(sample, dtype=float).ravel())
    n = x.size
    if n == 0:
        raise ValueError("Muestra vacía")
    misfit = np.mean(np.abs(x - y))
    # ΣΣ|X_i - X_j| = 2 Σ (2i - N - 1) X_(i) con la muestra ordenada
    i = np.arange(1, n + 1)
    spread = 2.0 * np.sum((2 * i - n - 1) * x)
    return float(misfit - spread / (2.0 * n * n))


def log_score(sample: np.ndarray, y: float) -> float:
    """Log-score negativo con densidad por núcleo gaussiano (ancho de banda de Silverman)."""
    x = np.asarray(sample, dtype=float).ravel()
    if x.size == 0:
        raise ValueError("Muestra vacía")
    if x.size < 2 or np.std(x) == 0.0:
        logger.warning("⚠️ Muestra degenerada para el KDE: log-score infinito")
        return float("inf")
    density = float(gaussian_kde(x, bw_method="silverman")(np.atleast_1d(y))[0])
    return float(-np.log(density)) if density > 0 else float("inf")


def check_loss(q: float, y: float, alpha: float) -> float:
    """ρ_α(y - q) con ρ_α(u) = u(α - 1{u<0})."""
    u = y - q
    return float(u * (alpha - (1.0 if u < 0 else 0.0)))


def score_one(sample: np.ndarray, y: float, measure: str) -> float:
    if measure == "crps":
        return crps_sample(sample, y)
    if measure == "logs":
        return log_score(sample, y)
    if measure in MEASURES:
        alpha = MEASURES[measure]
        return check_loss(float(np.quantile(sample, alpha)), y, alpha)
    raise ValueError(f"Medida desconocida: {measure}. Opciones: {list(MEASURES)}")


def score_matrix(
    samples: Sequence[np.ndarray], realized: Sequence[float], measures: Sequence[str]
) -> dict[str, np.ndarray]:
    """Puntajes por observación (una muestra de Monte-Carlo por valor realizado)."""
    if len(samples) != len(realized):
        raise ValueError(f"{len(samples)} muestras para {len(realized)} valores realizados")
    return {m: np.array([score_one(s, y, m) for s, y in zip(samples, realized)]) for m in measures}


def score_forecasts(
    samples: Sequence[np.ndarray], realized: Sequence[float], measures: Sequence[str] = tuple(MEASURES)
) -> dict[str, float]:
    """Promedio de cada medida sobre las observaciones."""
    return {m: float(np.mean(v)) for m, v in score_matrix(samples, realized, measures).items()}
