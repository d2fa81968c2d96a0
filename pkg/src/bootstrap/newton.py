"""
Bootstrap de multiplicadores con un paso de Newton-Raphson aproximado:

    θ̃ = θ̂ - Ĵ⁻¹ · T⁻¹ Σ_t ξ_t φ_t

Los scores φ_t y el Jacobiano Ĵ se calculan una vez por diferencias centrales; las réplicas no
reajustan ninguna cópula.
"""
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
import pandas as pd
from joblib import Parallel, delayed

from src.bootstrap.multiplier import MultiplierStream, default_block_length, gen_multipliers
from src.config import settings
from src.copulas.bicop import BivariateCopula
from src.copulas.families import Family, param_bounds
from src.estimation.model import MARGIN_BOUNDS, PseudoSample, SVineModel, window_values
from src.estimation.recursion import HCache
from src.forecast.simulation import ForecastRequest, ForecastResult, evaluate_functionals, simulate_conditional
from src.margins.empirical import EmpiricalMargin
from src.margins.skew_t import SkewTParams
from src.margins.transform import PARAMETRIC, Margin, pseudo_observations

logger = logging.getLogger(__name__)


def _step(value: float) -> float:
    return max(settings.FD_REL_STEP, settings.FD_REL_STEP * abs(value))


def _central(fun, value: float, lo: float, hi: float) -> np.ndarray:
    """Derivada por diferencias centrales, recortando los puntos al dominio [lo, hi]."""
    h = _step(value)
    plus, minus = min(value + h, hi), max(value - h, lo)
    return (fun(plus) - fun(minus)) / (plus - minus)


# ==========================================
# Scores
# ==========================================

def _pseudo_values(model: SVineModel, sample: PseudoSample) -> np.ndarray:
    """En modo paramétrico las pseudo-observaciones dependen de η: se recalculan desde los datos."""
    if model.mode == PARAMETRIC and sample.raw is not None and model.margins:
        return pseudo_observations(sample.raw, model.margins)
    return sample.values


def _margin_scores(margin: SkewTParams, x: np.ndarray) -> list[np.ndarray]:
    base = margin.as_vector()
    columns = []
    for i, (lo, hi) in enumerate(MARGIN_BOUNDS):
        def logf(value, i=i):
            vec = base.copy()
            vec[i] = value
            return SkewTParams.from_vector(vec).logpdf(x)
        columns.append(_central(logf, base[i], lo, hi))
    return columns


def _copula_scores(cop: BivariateCopula, x_a: np.ndarray, x_b: np.ndarray) -> list[np.ndarray]:
    columns = []
    for i, (lo, hi) in enumerate(param_bounds(cop.family)):
        def logc(value, i=i):
            params = list(cop.params)
            # Frank no admite θ = 0
            params[i] = value if value != 0.0 or cop.family is not Family.FRANK else 1e-8
            return cop.with_params(params).logpdf(x_a, x_b)
        columns.append(_central(logc, cop.params[i], lo, hi))
    return columns


def score_rows(model: SVineModel, sample: PseudoSample, values: Optional[np.ndarray] = None) -> np.ndarray:
    """
    Matriz T×P de contribuciones al score en el orden de model.parameter_names().

    Las filas de una clase con rezago s corresponden a sus instancias τ = 0..T-1-s; el resto es cero.
    """
    u = _pseudo_values(model, sample) if values is None else values
    T = u.shape[0]
    columns: list[np.ndarray] = []
    for j, margin in enumerate(model.margins):
        if isinstance(margin, SkewTParams):
            x = sample.raw[:, j] if sample.raw is not None else margin.ppf(u[:, j])
            columns += _margin_scores(margin, x)

    resolver = model.resolver()
    caches: dict[int, HCache] = {}
    for c in model.classes:
        cop = model.copulas[c.key]
        if cop.is_independence:
            continue
        if c.lag >= T:
            columns += [np.zeros(T)] * cop.n_params
            continue
        if c.lag not in caches:
            caches[c.lag] = HCache(window_values(u, c.lag), resolver)
        x_a, x_b = caches[c.lag].pair(c.representative)
        for col in _copula_scores(cop, x_a, x_b):
            padded = np.zeros(T)
            padded[: col.size] = col
            columns.append(padded)
    return np.column_stack(columns) if columns else np.zeros((T, 0))


@dataclass(frozen=True, eq=False)
class ScoreJacobian:
    phi: np.ndarray
    jacobian: np.ndarray
    names: list[str]
    regularized: bool = False

    @property
    def T(self) -> int:
        return self.phi.shape[0]

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        if rhs.size == 0:
            return rhs
        return np.linalg.solve(self.jacobian, rhs)


def score_and_jacobian(model: SVineModel, sample: PseudoSample) -> ScoreJacobian:
    """
    Scores por tiempo y Ĵ = T⁻¹ Σ_t ∇φ_t por diferencias centrales anidadas sobre todo (η, θ).
    Si Ĵ es singular se regulariza con λ = 1e-6·traza/dim y se marca.
    """
    phi = score_rows(model, sample)
    theta = model.parameter_vector()
    bounds = model.parameter_bounds()
    P = theta.size
    J = np.zeros((P, P))
    for i in range(P):
        lo, hi = bounds[i]

        def mean_phi(value, i=i):
            vec = theta.copy()
            vec[i] = value
            return score_rows(model.with_parameters(vec), sample).mean(axis=0)

        J[:, i] = _central(mean_phi, theta[i], lo, hi)

    regularized = False
    if P and (not np.all(np.isfinite(J)) or np.linalg.matrix_rank(J) < P or np.linalg.cond(J) > 1e12):
        lam = 1e-6 * abs(np.trace(J)) / P or 1e-6
        J = np.nan_to_num(J) + lam * np.eye(P)
        regularized = True
        logger.warning(f"⚠️ Jacobiano singular: se regulariza con λ={lam:.3g}")
    return ScoreJacobian(phi, J, model.parameter_names(), regularized)


# ==========================================
# Réplicas
# ==========================================

@dataclass(frozen=True, eq=False)
class BootstrapReplicate:
    index: int
    params: np.ndarray
    margins: Optional[tuple[Margin, ...]] = None
    seed: Optional[int] = None

    def apply(self, model: SVineModel) -> SVineModel:
        return model.with_parameters(self.params, self.margins)


def _weighted_margins(raw: np.ndarray, xi: np.ndarray) -> tuple[EmpiricalMargin, ...]:
    return tuple(EmpiricalMargin(raw[:, j], xi) for j in range(raw.shape[1]))


def _replicate(
    r: int,
    model: SVineModel,
    sample: PseudoSample,
    sj: ScoreJacobian,
    theta: np.ndarray,
    multipliers: MultiplierStream,
    seed: int,
) -> BootstrapReplicate:
    xi = multipliers.values
    if model.mode == PARAMETRIC:
        phi = sj.phi
        margins = None
    else:
        raw = sample.raw if sample.raw is not None else sample.values
        margins = _weighted_margins(raw, xi)
        phi = score_rows(model, sample, pseudo_observations(raw, margins))
    update = sj.solve((xi[:, None] * phi).mean(axis=0))
    return BootstrapReplicate(r, theta - update, margins, seed)


def bootstrap_params(
    model: SVineModel,
    sample: PseudoSample,
    R: int,
    block_length: Optional[int] = None,
    seed: int = settings.DEFAULT_SEED,
    score_jacobian: Optional[ScoreJacobian] = None,
    n_jobs: Optional[int] = None,
) -> list[BootstrapReplicate]:
    """
    R réplicas del vector de parámetros (η, θ en modo paramétrico; θ en modo semiparamétrico,
    con márgenes empíricos ponderados por ξ). La réplica r usa el flujo aleatorio (seed, r).
    """
    if R <= 0:
        return []
    T = sample.T
    block_length = block_length or default_block_length(T)
    sj = score_jacobian or score_and_jacobian(model, sample)
    theta = model.parameter_vector()
    logger.info(f"Bootstrap: R={R}, ℓ={block_length}, P={theta.size}, modo={model.mode}")
    return Parallel(n_jobs=n_jobs or settings.N_JOBS, prefer="threads")(
        delayed(_replicate)(r, model, sample, sj, theta, gen_multipliers(T, block_length, seed, r), seed)
        for r in range(R)
    )


def bootstrap_forecast(
    model: SVineModel,
    sample: PseudoSample,
    request: ForecastRequest,
    R: int,
    block_length: Optional[int] = None,
    seed: int = settings.DEFAULT_SEED,
    levels: Sequence[float] = (0.5, 0.9),
    replicates: Optional[list[BootstrapReplicate]] = None,
) -> ForecastResult:
    """
    Bandas para los funcionales pedidos: cada réplica simula desde el modelo perturbado con la misma
    historia, y las bandas son cuantiles empíricos de los valores replicados.
    """
    sims = simulate_conditional(model, request.history, request.horizon, request.n_sims, request.seed)
    estimates = evaluate_functionals(sims, request.functionals, request.weights, model.d)
    replicates = replicates if replicates is not None else bootstrap_params(model, sample, R, block_length, seed)
    if not replicates:
        return ForecastResult(sims, estimates)

    values: dict[str, list[np.ndarray]] = {f.name: [] for f in request.functionals}
    for rep in replicates:
        rep_seed = int(np.random.SeedSequence([seed, rep.index]).generate_state(1)[0])
        rep_sims = simulate_conditional(rep.apply(model), request.history, request.horizon, request.n_sims, rep_seed)
        for name, value in evaluate_functionals(rep_sims, request.functionals, request.weights, model.d).items():
            values[name].append(value)

    bands = {}
    for name, reps in values.items():
        stacked = np.asarray(reps)
        bands[name] = {
            float(level): (
                np.quantile(stacked, (1.0 - level) / 2.0, axis=0),
                np.quantile(stacked, (1.0 + level) / 2.0, axis=0),
            )
            for level in levels
        }
    return ForecastResult(sims, estimates, bands)


def replicates_frame(replicates: Sequence[BootstrapReplicate], names: Sequence[str]) -> pd.DataFrame:
    rows = np.array([rep.params for rep in replicates]).reshape(len(replicates), len(names))
    return pd.DataFrame(rows, columns=list(names))


def export_replicates(replicates: Sequence[BootstrapReplicate], names: Sequence[str], path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    replicates_frame(replicates, names).to_csv(path, index=False)
    logger.info(f"💾 Réplicas bootstrap guardadas en {path}")
    return path
