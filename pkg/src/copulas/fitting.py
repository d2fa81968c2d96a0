"""
Ajuste de cópulas bivariadas por máxima verosimilitud ponderada y selección de familia por AIC.
"""
import logging
import threading
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.stats import kendalltau

from src.config import settings
from src.copulas.bicop import BivariateCopula, FitInfo, clamp, tau_to_param
from src.copulas.families import Family, FamilyTag, param_bounds
from src.utils.errors import CopulaDomainError, NumericalError

logger = logging.getLogger(__name__)

_fit_lock = threading.Lock()
_fit_calls = 0


def pair_fit_count() -> int:
    """Cantidad de llamadas a fit_pair en el proceso."""
    return _fit_calls


def _count_fit() -> None:
    global _fit_calls
    with _fit_lock:
        _fit_calls += 1


def effective_size(weights: np.ndarray) -> float:
    total = float(np.sum(weights))
    squares = float(np.sum(weights ** 2))
    return total * total / squares if squares > 0 else 0.0


def sample_tau(u: np.ndarray, v: np.ndarray) -> float:
    tau = kendalltau(u, v).statistic
    return 0.0 if not np.isfinite(tau) else float(tau)


def _neg_loglik(tag: FamilyTag, params: tuple[float, ...], u, v, w) -> float:
    try:
        value = BivariateCopula(tag, params).loglik(u, v, w)
    except CopulaDomainError:
        return np.inf
    return -value if np.isfinite(value) else np.inf


def _clip_to_bounds(tag: FamilyTag, params: tuple[float, ...]) -> tuple[float, ...]:
    out = []
    for value, (lo, hi) in zip(params, param_bounds(tag.family)):
        out.append(float(np.clip(value, lo, hi)))
    if tag.family is Family.FRANK and abs(out[0]) < 1e-6:
        out[0] = 1e-6
    return tuple(out)


def _optimize_scalar(fun, bounds: tuple[float, float]) -> tuple[float, float]:
    res = minimize_scalar(fun, bounds=bounds, method="bounded", options={"xatol": 1e-8})
    return float(res.x), float(res.fun)


def _fit_student_t(tag: FamilyTag, u, v, w) -> tuple[tuple[float, float], float]:
    """Perfila ν sobre la grilla y luego pule (ρ, ν) por descenso coordenado."""
    (rho_lo, rho_hi), (nu_lo, nu_hi) = param_bounds(Family.STUDENT_T)
    best = (np.inf, 0.0, settings.STUDENT_T_NU_GRID[0])
    for nu in settings.STUDENT_T_NU_GRID:
        rho, value = _optimize_scalar(lambda r: _neg_loglik(tag, (r, nu), u, v, w), (rho_lo, rho_hi))
        if value < best[0]:
            best = (value, rho, nu)

    value, rho, nu = best
    for _ in range(20):
        nu, _ = _optimize_scalar(lambda n: _neg_loglik(tag, (rho, n), u, v, w), (nu_lo, nu_hi))
        rho, new_value = _optimize_scalar(lambda r: _neg_loglik(tag, (r, nu), u, v, w), (rho_lo, rho_hi))
        if value - new_value < 1e-9:
            value = min(value, new_value)
            break
        value = new_value
    return (rho, nu), value


def fit_pair(
    u: np.ndarray,
    v: np.ndarray,
    tag: FamilyTag,
    weights: Optional[np.ndarray] = None,
) -> BivariateCopula:
    """
    Ajusta una familia a pares (u, v) maximizando la log-verosimilitud ponderada.

    Args:
        u, v: Pseudo-observaciones en (0,1).
        tag: Familia y rotación a ajustar.
        weights: Pesos por par (por defecto 1).
    Returns:
        BivariateCopula con `fit_info` (loglik, n efectivo, convergencia).
    """
    u, v = clamp(u), clamp(v)
    w = np.ones_like(u) if weights is None else np.asarray(weights, dtype=float)
    n_eff = effective_size(w)
    if n_eff < settings.MIN_PAIR_OBS:
        raise CopulaDomainError(f"Datos insuficientes para ajustar {tag.label}: n efectivo = {n_eff:.1f}")
    _count_fit()

    if tag.family is Family.INDEPENDENCE:
        return BivariateCopula(tag, (), FitInfo(0.0, n_eff))

    mask = w > 0
    start = _clip_to_bounds(tag, tau_to_param(tag, sample_tau(u[mask], v[mask])))
    start_value = _neg_loglik(tag, start, u, v, w)

    try:
        if tag.family is Family.STUDENT_T:
            params, value = _fit_student_t(tag, u, v, w)
        else:
            (bounds,) = param_bounds(tag.family)
            theta, value = _optimize_scalar(lambda th: _neg_loglik(tag, (th,), u, v, w), bounds)
            params = _clip_to_bounds(tag, (theta,))
        converged = bool(np.isfinite(value) and value <= start_value)
    except (ValueError, FloatingPointError, NumericalError) as e:
        logger.warning(f"Optimizador falló para {tag.label}: {e}")
        converged = False

    if not converged:
        logger.warning(f"⚠️ {tag.label}: se usa la inversión de tau como estimación (sin convergencia)")
        params, value = start, start_value
        if not np.isfinite(value):
            raise CopulaDomainError(f"Log-verosimilitud no finita para {tag.label} en {start}")

    return BivariateCopula(tag, tuple(params), FitInfo(-value, n_eff, converged, start))


def aic_of(cop: BivariateCopula) -> float:
    ll = cop.fit_info.loglik if cop.fit_info is not None else 0.0
    return -2.0 * ll + 2.0 * cop.n_params


def select_family(
    u: np.ndarray,
    v: np.ndarray,
    candidates: Sequence[FamilyTag],
    weights: Optional[np.ndarray] = None,
) -> BivariateCopula:
    """
    Ajusta cada candidata y devuelve la de menor AIC.

    Las rotaciones de Clayton/Gumbel cuyo signo contradice el tau muestral se omiten.
    Empates: menos parámetros, luego orden fijo de familias.
    """
    if not candidates:
        raise ValueError("La lista de familias candidatas está vacía")
    u, v = clamp(u), clamp(v)
    tau = sample_tau(u, v)

    fitted: list[tuple[float, tuple, BivariateCopula]] = []
    for tag in candidates:
        if tag.family.rotatable and tag.negative_dependence != (tau < 0):
            continue
        try:
            cop = fit_pair(u, v, tag, weights)
        except (CopulaDomainError, NumericalError) as e:
            logger.warning(f"Candidata {tag.label} excluida: {e}")
            continue
        fitted.append((aic_of(cop), tag.sort_key, cop))

    if not fitted:
        logger.warning("Ninguna candidata pudo ajustarse; se asigna Independence")
        return BivariateCopula.independence()
    return min(fitted, key=lambda item: (item[0], item[1]))[2]
