"""
Backtest de ventana móvil: reajuste periódico, pronóstico condicional de cada fila y puntaje
sobre portafolios aleatorios, con errores estándar de Newey-West.
"""
import logging
from dataclasses import dataclass, field, fields
from typing import Any, Optional

import numpy as np
import pandas as pd

from src.config import settings
from src.estimation.model import PseudoSample, SVineModel
from src.estimation.selection import select_structure
from src.estimation.sequential import fit_sequential
from src.forecast.scoring import MEASURES, contract_portfolio, score_one
from src.forecast.simulation import simulate_conditional
from src.margins.transform import fit_margins, normalize_mode
from src.utils.errors import SVineError
from src.utils.utils_stats import make_rng, newey_west_se

logger = logging.getLogger(__name__)

HORIZONS = {"day": 1, "week": settings.WEEK_STEPS}


@dataclass(frozen=True)
class BacktestConfig:
    window: int = settings.BACKTEST_WINDOW
    stride: int = settings.BACKTEST_STRIDE
    horizon: str = "day"
    n_sims: int = 1000
    measures: tuple[str, ...] = tuple(MEASURES)
    n_portfolios: int = settings.N_PORTFOLIOS
    weight_range: tuple[float, float] = settings.PORTFOLIO_WEIGHT_RANGE
    markov_order: int = 1
    mode: str = "par"
    families: Optional[tuple[str, ...]] = None
    kind: str = "svine"
    seed: int = settings.DEFAULT_SEED
    baseline: bool = True
    hac_lags: int = settings.HAC_LAGS

    def __post_init__(self):
        if self.stride < 1:
            raise ValueError(f"stride debe ser >= 1: {self.stride}")
        if self.horizon not in HORIZONS:
            raise ValueError(f"Horizonte desconocido: {self.horizon}. Opciones: {list(HORIZONS)}")
        if self.n_portfolios < 1:
            raise ValueError("Se requiere al menos un portafolio")
        unknown = [m for m in self.measures if m not in MEASURES]
        if unknown:
            raise ValueError(f"Medidas desconocidas: {unknown}")

    @property
    def steps(self) -> int:
        return HORIZONS[self.horizon]

    @classmethod
    def from_dict(cls, payload: dict[str, Any], **overrides) -> "BacktestConfig":
        if not isinstance(payload, dict):
            raise ValueError(f"La configuración debe ser un objeto JSON, se recibió {type(payload).__name__}")
        unknown = sorted(set(payload) - {f.name for f in fields(cls)})
        if unknown:
            raise ValueError(f"Claves de configuración desconocidas: {unknown}")
        values = {**payload, **{k: v for k, v in overrides.items() if v is not None}}
        for key in ("measures", "weight_range", "families"):
            if values.get(key) is not None:
                values[key] = tuple(values[key])
        return cls(**values)


@dataclass(frozen=True, eq=False)
class BacktestResult:
    table: pd.DataFrame
    scores: dict[str, dict[str, np.ndarray]] = field(default_factory=dict)


def generate_portfolio_weights(
    n: int, d: int, low: float, high: float, rng: np.random.Generator
) -> np.ndarray:
    """n filas de pesos: los primeros d-1 uniformes en [low, high], el último completa la suma 1."""
    if n < 1:
        raise ValueError("Se requiere al menos un portafolio")
    w = np.empty((n, d))
    w[:, : d - 1] = rng.uniform(low, high, size=(n, d - 1))
    w[:, d - 1] = 1.0 - w[:, : d - 1].sum(axis=1)
    return w


def realized_portfolio(data: np.ndarray, t: int, steps: int, weights: np.ndarray) -> np.ndarray:
    """Retorno acumulado de las filas t..t+steps-1 para cada portafolio (filas de `weights`)."""
    return weights @ data[t : t + steps].sum(axis=0)


def _fit_window(train: np.ndarray, config: BacktestConfig) -> SVineModel:
    mode = normalize_mode(config.mode)
    margins = fit_margins(train, mode)
    u = PseudoSample.from_data(train, margins, mode)
    spec = select_structure(u, config.markov_order, config.families, config.kind)
    return fit_sequential(u, spec, config.families, margins)


def backtest(data: np.ndarray, config: BacktestConfig) -> BacktestResult:
    """
    Evalúa pronósticos de ventana móvil. Cada `stride` filas se reajusta el modelo sobre las `window`
    filas previas; en cada fila se simula el horizonte y se puntúa el retorno de cada portafolio.

    Returns:
        BacktestResult con una tabla (model, measure, mean, se, n) y los puntajes por fila.
    """
    x = np.asarray(data, dtype=float)
    T, d = x.shape
    steps = config.steps
    if config.window >= T or config.window + steps > T:
        raise ValueError(f"Ventana agotada: T={T}, window={config.window}, horizonte={steps}")

    rng = make_rng(config.seed, 0)
    weights = generate_portfolio_weights(config.n_portfolios, d, *config.weight_range, rng)
    models = ["svine"] + (["independence"] if config.baseline else [])
    per_row: dict[str, dict[str, list[float]]] = {m: {s: [] for s in config.measures} for m in models}

    last_row = T - steps
    previous: Optional[SVineModel] = None
    for start in range(config.window, last_row + 1, config.stride):
        train = x[start - config.window : start]
        logger.info(f"🔁 Reajuste con filas [{start - config.window}, {start})")
        try:
            fitted = _fit_window(train, config)
        except SVineError as e:
            if previous is None:
                raise
            logger.error(f"❌ Reajuste en la fila {start} falló: {e}. Se conserva el modelo anterior")
            fitted = previous
        previous = fitted
        candidates = {"svine": fitted, "independence": fitted.independence_copy()}
        p = fitted.p
        for t in range(start, min(start + config.stride, last_row + 1)):
            history = x[t - p : t]
            realized = realized_portfolio(x, t, steps, weights)
            for name in models:
                sims = simulate_conditional(candidates[name], history, steps, config.n_sims, seed=config.seed + t)
                for measure in config.measures:
                    values = [
                        score_one(contract_portfolio(sims, w, d), y, measure) for w, y in zip(weights, realized)
                    ]
                    per_row[name][measure].append(float(np.mean(values)))

    rows = []
    scores: dict[str, dict[str, np.ndarray]] = {}
    for name in models:
        scores[name] = {m: np.asarray(v) for m, v in per_row[name].items()}
        for measure, values in scores[name].items():
            rows.append(
                {
                    "model": name,
                    "measure": measure,
                    "mean": float(np.mean(values)),
                    "se": newey_west_se(values, config.hac_lags),
                    "n": int(values.size),
                }
            )
    table = pd.DataFrame(rows)
    logger.info(f"✅ Backtest terminado: {len(per_row['svine'][config.measures[0]])} filas evaluadas")
    return BacktestResult(table, scores)
