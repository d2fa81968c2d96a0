"""
Ajuste de márgenes por columna y transformaciones entre escala de datos y escala de cópula.
"""
import logging
from typing import Any, Sequence, Union

import numpy as np

from src.copulas.bicop import clamp
from src.margins.empirical import EmpiricalMargin
from src.margins.skew_t import SkewTParams, fit_margin_mle
from src.utils.errors import MarginError

logger = logging.getLogger(__name__)

Margin = Union[SkewTParams, EmpiricalMargin]

PARAMETRIC = "parametric"
EMPIRICAL = "empirical"
MODES = (PARAMETRIC, EMPIRICAL)


def normalize_mode(mode: str) -> str:
    """Acepta los alias de la línea de comandos (par / semipar)."""
    aliases = {"par": PARAMETRIC, "parametric": PARAMETRIC, "semipar": EMPIRICAL, "empirical": EMPIRICAL}
    try:
        return aliases[mode]
    except KeyError as e:
        raise ValueError(f"Modo de margen desconocido: {mode}. Opciones: par, semipar") from e


def fit_margins(data: np.ndarray, mode: str = PARAMETRIC) -> list[Margin]:
    """Ajusta un margen por columna de la matriz T×d."""
    mode = normalize_mode(mode)
    x = np.asarray(data, dtype=float)
    if x.ndim != 2:
        raise MarginError(f"Se esperaba una matriz T×d, forma {x.shape}")
    margins: list[Margin] = []
    for j in range(x.shape[1]):
        if mode == PARAMETRIC:
            margin = fit_margin_mle(x[:, j])
            logger.info(
                f"Margen {j + 1}: skew-t μ={margin.mu:.4g} σ={margin.sigma:.4g} ν={margin.nu:.3g} γ={margin.gamma:.3g}"
            )
        else:
            margin = EmpiricalMargin(x[:, j])
        margins.append(margin)
    return margins


def pit(series: np.ndarray, margin: Margin) -> np.ndarray:
    """Transformada integral de probabilidad, recortada a (0,1)."""
    return clamp(margin.cdf(series))


def quantile(margin: Margin, u: np.ndarray) -> np.ndarray:
    return margin.ppf(clamp(u))


def pseudo_observations(data: np.ndarray, margins: Sequence[Margin]) -> np.ndarray:
    x = np.asarray(data, dtype=float)
    if x.ndim == 1:
        x = x[None, :]
    if x.shape[1] != len(margins):
        raise MarginError(f"{x.shape[1]} columnas para {len(margins)} márgenes")
    return np.column_stack([pit(x[:, j], m) for j, m in enumerate(margins)])


def to_data_scale(u: np.ndarray, margins: Sequence[Margin]) -> np.ndarray:
    """Aplica el cuantil de cada margen columna a columna (columnas cíclicas en bloques de d)."""
    u = np.asarray(u, dtype=float)
    d = len(margins)
    out = np.empty_like(u)
    for c in range(u.shape[1]):
        out[:, c] = quantile(margins[c % d], u[:, c])
    return out


def margin_from_dict(payload: dict[str, Any]) -> Margin:
    kind = payload.get("type")
    if kind == "skew_t":
        p = payload["parameters"]
        return SkewTParams(float(p["mu"]), float(p["sigma"]), float(p["nu"]), float(p["gamma"]))
    if kind == "empirical":
        return EmpiricalMargin(np.asarray(payload["sample"], dtype=float))
    raise MarginError(f"Tipo de margen desconocido en JSON: {kind}")
