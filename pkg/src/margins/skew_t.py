"""
Margen skew-t de Fernández–Steel: t de Student con escalas distintas a cada lado de la moda.

    f(x) = 2 / (γ + 1/γ) · g(z/γ) / σ   si z >= 0
    f(x) = 2 / (γ + 1/γ) · g(z·γ) / σ   si z < 0,     z = (x - μ)/σ,  g = densidad t_ν
"""
import logging
from dataclasses import dataclass
from typing import Any

import numpy as np
from scipy import special
from scipy.optimize import minimize

from src.utils.errors import MarginError

logger = logging.getLogger(__name__)

NORMAL_NU = 1e4  # ν usado para el respaldo normal


@dataclass(frozen=True)
class SkewTParams:
    mu: float
    sigma: float
    nu: float
    gamma: float = 1.0

    def __post_init__(self):
        if not (self.sigma > 0 and self.nu > 2 and self.gamma > 0):
            raise MarginError(f"Parámetros skew-t inválidos: {self}")

    @property
    def n_params(self) -> int:
        return 4

    def as_vector(self) -> np.ndarray:
        return np.array([self.mu, self.sigma, self.nu, self.gamma])

    @classmethod
    def from_vector(cls, values) -> "SkewTParams":
        mu, sigma, nu, gamma = (float(x) for x in values)
        return cls(mu, max(sigma, 1e-12), max(nu, 2.0 + 1e-6), max(gamma, 1e-6))

    def logpdf(self, x: np.ndarray) -> np.ndarray:
        z = (np.asarray(x, dtype=float) - self.mu) / self.sigma
        g = self.gamma
        scaled = np.where(z >= 0, z / g, z * g)
        log_t = (
            special.gammaln((self.nu + 1) / 2) - special.gammaln(self.nu / 2)
            - 0.5 * np.log(self.nu * np.pi)
            - (self.nu + 1) / 2 * np.log1p(scaled * scaled / self.nu)
        )
        return np.log(2.0 / (g + 1.0 / g)) + log_t - np.log(self.sigma)

    def cdf(self, x: np.ndarray) -> np.ndarray:
        z = (np.asarray(x, dtype=float) - self.mu) / self.sigma
        g2 = self.gamma ** 2
        left = 2.0 / (g2 + 1.0) * special.stdtr(self.nu, z * self.gamma)
        right = 1.0 / (g2 + 1.0) + 2.0 * g2 / (g2 + 1.0) * (special.stdtr(self.nu, z / self.gamma) - 0.5)
        return np.where(z < 0, left, right)

    def ppf(self, u: np.ndarray) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        g, g2 = self.gamma, self.gamma ** 2
        split = 1.0 / (1.0 + g2)
        left = special.stdtrit(self.nu, np.minimum(u, split) * (1.0 + g2) / 2.0) / g
        right = g * special.stdtrit(
            self.nu, 0.5 + (np.maximum(u, split) - split) * (1.0 + g2) / (2.0 * g2)
        )
        return self.mu + self.sigma * np.where(u < split, left, right)

    def to_dict(self) -> dict[str, Any]:
        return {"type": "skew_t", "parameters": {"mu": self.mu, "sigma": self.sigma, "nu": self.nu, "gamma": self.gamma}}


def _unpack(theta: np.ndarray) -> SkewTParams:
    mu, log_sigma, log_nu2, log_gamma = theta
    return SkewTParams(mu, float(np.exp(log_sigma)), 2.0 + float(np.exp(log_nu2)), float(np.exp(log_gamma)))


def _pack(params: SkewTParams) -> np.ndarray:
    return np.array([params.mu, np.log(params.sigma), np.log(params.nu - 2.0), np.log(params.gamma)])


def _neg_loglik(theta: np.ndarray, x: np.ndarray, fixed_gamma: bool) -> float:
    if fixed_gamma:
        theta = np.append(theta, 0.0)
    if not np.all(np.isfinite(theta)) or abs(theta[1]) > 50 or abs(theta[2]) > 20 or abs(theta[3]) > 5:
        return np.inf
    value = -np.sum(_unpack(theta).logpdf(x))
    return value if np.isfinite(value) else np.inf


def _moment_start(x: np.ndarray) -> SkewTParams:
    std = float(np.std(x))
    excess = float(np.mean(((x - x.mean()) / std) ** 4) - 3.0)
    nu = 4.0 + 6.0 / excess if excess > 0.2 else 30.0
    return SkewTParams(float(np.mean(x)), std * np.sqrt((nu - 2.0) / nu), min(nu, 50.0), 1.0)


def fit_margin_mle(series: np.ndarray) -> SkewTParams:
    """
    Ajusta un skew-t por máxima verosimilitud (Nelder-Mead sobre μ, log σ, log(ν-2), log γ).

    Args:
        series: Serie univariada finita, al menos 30 observaciones.
    Returns:
        SkewTParams. Si el optimizador falla se recurre a una t simétrica y luego a la normal.
    """
    x = np.asarray(series, dtype=float)
    if x.size < 30:
        raise MarginError(f"Se requieren al menos 30 observaciones, hay {x.size}")
    if not np.all(np.isfinite(x)):
        raise MarginError("La serie contiene valores no finitos")
    if np.std(x) <= 0:
        raise MarginError("Serie constante: escala degenerada")

    start = _moment_start(x)
    start_value = _neg_loglik(_pack(start), x, fixed_gamma=False)
    options = {"maxiter": 4000, "xatol": 1e-7, "fatol": 1e-9}

    res = minimize(_neg_loglik, _pack(start), args=(x, False), method="Nelder-Mead", options=options)
    if res.success and np.isfinite(res.fun) and res.fun <= start_value:
        return _unpack(res.x)

    logger.warning(f"⚠️ Ajuste skew-t sin convergencia ({res.message}); se intenta t simétrica")
    res = minimize(_neg_loglik, _pack(start)[:3], args=(x, True), method="Nelder-Mead", options=options)
    if res.success and np.isfinite(res.fun) and res.fun <= start_value:
        return _unpack(np.append(res.x, 0.0))

    logger.warning("⚠️ Ajuste t simétrico sin convergencia; se usa la normal")
    return SkewTParams(float(np.mean(x)), float(np.std(x)), NORMAL_NU, 1.0)
