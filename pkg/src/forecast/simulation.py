"""
Simulación de un S-vine ajustado por inversión de Rosenblatt sobre la ventana de p+1 tiempos.

Cada paso sortea d uniformes nuevas condicionando sólo en los últimos p tiempos; los h-valores de
la historia se trasladan de un paso al siguiente en lugar de recalcularse.
"""
import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from joblib import Parallel, delayed

from src.config import settings
from src.copulas.bicop import BivariateCopula
from src.estimation.model import SVineModel
from src.estimation.recursion import HCache, Resolver, invert_chain, peel_order, resolve_chain
from src.forecast.scoring import Functional, contract_portfolio, predict_functional
from src.margins.transform import pseudo_observations, to_data_scale
from src.utils.errors import NumericalError
from src.utils.utils_stats import make_rng
from src.vines.graph import Vertex, VineEdge

logger = logging.getLogger(__name__)

Chain = tuple[tuple[VineEdge, BivariateCopula], ...]


@dataclass(frozen=True)
class SamplingPlan:
    """Orden de muestreo de la ventana y cadena de aristas de cada vértice."""
    order: tuple[tuple[Vertex, Chain], ...]
    p: int
    d: int

    @property
    def step(self) -> tuple[tuple[Vertex, Chain], ...]:
        """Los d vértices del último tiempo, que son los que se sortean en cada paso."""
        return self.order[-self.d :]

    @classmethod
    def from_model(cls, model: SVineModel, resolver: Optional[Resolver] = None) -> "SamplingPlan":
        window = model.window
        resolver = resolver or model.resolver()
        peeled = peel_order(window.vertices, window.levels)
        order = tuple((v, tuple(resolve_chain(chain, resolver))) for v, chain in peeled)
        last = model.p + 1
        if any(v.time != last for v, _ in order[-model.d :]):
            raise NumericalError(
                "El orden de muestreo no deja el último tiempo al final",
                {"order": [str(v) for v, _ in order]},
            )
        return cls(order, model.p, model.d)


def _draw(cache: HCache, entries, rng: np.random.Generator, n: int) -> None:
    for vertex, chain in entries:
        invert_chain(cache, vertex, list(chain), rng.uniform(size=n))


def _advance(plan: SamplingPlan, cache: HCache, rng: np.random.Generator, n: int) -> tuple[np.ndarray, HCache]:
    """Sortea el tiempo p+1 y devuelve sus valores (n×d) junto con la caché trasladada un paso."""
    _draw(cache, plan.step, rng, n)
    last = plan.p + 1
    row = np.column_stack([cache.value(Vertex(last, j)) for j in range(1, plan.d + 1)])
    return row, cache.shifted(-1, keep_from=2)


def _simulate_block(
    plan: SamplingPlan,
    resolver: Resolver,
    history_u: np.ndarray,
    steps: int,
    rng: np.random.Generator,
    n: int,
) -> np.ndarray:
    p, d = plan.p, plan.d
    values = {Vertex(t, j): np.full(n, history_u[t - 1, j - 1]) for t in range(1, p + 1) for j in range(1, d + 1)}
    cache = HCache(values, resolver)
    rows = []
    for _ in range(steps):
        row, cache = _advance(plan, cache, rng, n)
        rows.append(row)
    return np.hstack(rows)


def simulate_unconditional(model: SVineModel, T_out: int, seed: int = settings.DEFAULT_SEED) -> np.ndarray:
    """
    Una trayectoria de largo T_out: la primera ventana se sortea completa y luego se avanza paso a paso.

    Returns:
        Matriz T_out×d en escala de datos (escala de cópula si el modelo no tiene márgenes).
    """
    if T_out < 1:
        raise ValueError(f"T_out debe ser >= 1: {T_out}")
    resolver = model.resolver()
    plan = SamplingPlan.from_model(model, resolver)
    rng = make_rng(seed, 0)
    p, d = plan.p, plan.d

    cache = HCache({}, resolver)
    _draw(cache, plan.order[: -d], rng, 1)
    rows = [np.column_stack([cache.value(Vertex(t, j)) for j in range(1, d + 1)]) for t in range(1, p + 1)]
    while len(rows) < T_out:
        row, cache = _advance(plan, cache, rng, 1)
        rows.append(row)
    u = np.vstack(rows[:T_out])
    return to_data_scale(u, model.margins) if model.margins else u


def simulate_conditional(
    model: SVineModel,
    history: np.ndarray,
    k: int,
    N: int,
    seed: int = settings.DEFAULT_SEED,
    n_jobs: Optional[int] = None,
    copula_scale: bool = False,
) -> np.ndarray:
    """
    N trayectorias independientes de (X_t, ..., X_{t+k-1}) dada la historia de los últimos p tiempos.

    Args:
        history: Matriz p×d en escala de datos (en escala de cópula si copula_scale=True).
        k: Horizonte (pasos).
        N: Réplicas. Se simulan por bloques de settings.SIM_BLOCK_SIZE, cada uno con el flujo (seed, bloque).
    Returns:
        Matriz N×(k·d), columnas ordenadas por paso y luego variable.
    """
    if k < 1 or N < 1:
        raise ValueError(f"Se requiere k >= 1 y N >= 1: k={k}, N={N}")
    p, d = model.p, model.d
    history = np.asarray(history, dtype=float).reshape(-1, d) if p > 0 else np.empty((0, d))
    if history.shape != (p, d):
        raise ValueError(f"La historia debe tener {p} filas y {d} columnas, forma {history.shape}")
    if copula_scale or not model.margins:
        history_u = history
    else:
        history_u = pseudo_observations(history, model.margins)

    resolver = model.resolver()
    plan = SamplingPlan.from_model(model, resolver)
    # La unidad de réplica es el bloque de tamaño fijo: su flujo sale de (seed, índice de bloque),
    # así que el resultado no depende de n_jobs ni del orden de los hilos.
    block = settings.SIM_BLOCK_SIZE
    sizes = [min(block, N - start) for start in range(0, N, block)]
    blocks = Parallel(n_jobs=n_jobs or settings.N_JOBS, prefer="threads")(
        delayed(_simulate_block)(plan, resolver, history_u, k, make_rng(seed, b), n) for b, n in enumerate(sizes)
    )
    u = np.vstack(blocks)
    if copula_scale or not model.margins:
        return u
    return to_data_scale(u, model.margins)


# ==========================================
# Pronóstico
# ==========================================

@dataclass(frozen=True, eq=False)
class ForecastRequest:
    history: np.ndarray
    horizon: int = 1
    n_sims: int = 1000
    functionals: tuple[Functional, ...] = (Functional("mean"),)
    seed: int = settings.DEFAULT_SEED
    weights: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.horizon < 1 or self.n_sims < 1:
            raise ValueError(f"Horizonte y N deben ser >= 1: {self.horizon}, {self.n_sims}")


@dataclass(frozen=True, eq=False)
class ForecastResult:
    simulations: np.ndarray
    estimates: dict[str, np.ndarray]
    bands: dict[str, dict[float, tuple[np.ndarray, np.ndarray]]] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "n_sims": int(self.simulations.shape[0]),
            "functionals": {k: np.asarray(v).tolist() for k, v in self.estimates.items()},
            "bands": {
                name: {str(level): [np.asarray(lo).tolist(), np.asarray(hi).tolist()] for level, (lo, hi) in b.items()}
                for name, b in self.bands.items()
            },
        }


def evaluate_functionals(
    simulations: np.ndarray, functionals: Sequence[Functional], weights: Optional[np.ndarray], d: int
) -> dict[str, np.ndarray]:
    """Con pesos, funcionales del retorno acumulado del portafolio; sin pesos, por columna."""
    sample = contract_portfolio(simulations, weights, d) if weights is not None else simulations
    return {f.name: np.asarray(predict_functional(sample, f)) for f in functionals}


def forecast(model: SVineModel, request: ForecastRequest) -> ForecastResult:
    sims = simulate_conditional(model, request.history, request.horizon, request.n_sims, request.seed)
    estimates = evaluate_functionals(sims, request.functionals, request.weights, model.d)
    return ForecastResult(sims, estimates)
