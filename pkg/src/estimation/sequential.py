"""
Estimación secuencial (árbol por árbol) de un S-vine con parámetros compartidos por traslación.

Cada clase de aristas se ajusta sobre la concatenación de todas sus instancias trasladadas dentro
de la muestra; los argumentos de la cópula salen de h-funciones de árboles anteriores ya ajustados.
"""
import logging
from typing import Optional, Sequence

import numpy as np
from joblib import Parallel, delayed

from src.config import settings
from src.copulas.bicop import BivariateCopula
from src.copulas.families import FamilyTag, expand_menu
from src.copulas.fitting import fit_pair, select_family
from src.estimation.model import ClassDiagnostics, PseudoSample, SVineModel, window_values
from src.estimation.recursion import ClassResolver, HCache
from src.margins.transform import EMPIRICAL, Margin
from src.utils.errors import CopulaDomainError, NumericalError
from src.vines.stationary import EdgeClass, SVineSpec, distinct_classes, svine_window

logger = logging.getLogger(__name__)


def _as_values(u) -> np.ndarray:
    return u.values if isinstance(u, PseudoSample) else np.atleast_2d(np.asarray(u, dtype=float))


def _fit_class(cls: EdgeClass, inputs: Optional[tuple], menu: Sequence[FamilyTag]) -> BivariateCopula:
    if inputs is None:
        return BivariateCopula.independence()
    x_a, x_b = inputs[0], inputs[1]
    try:
        if len(menu) == 1:
            return fit_pair(x_a, x_b, menu[0])
        return select_family(x_a, x_b, menu)
    except (CopulaDomainError, NumericalError) as e:
        logger.warning(f"⚠️ Clase {cls.key}: {e}. Se asigna Independence")
        return BivariateCopula.independence()


def fit_sequential(
    u,
    spec: SVineSpec,
    family_menu: Optional[Sequence[str]] = None,
    margins: Sequence[Margin] = (),
    n_jobs: Optional[int] = None,
) -> SVineModel:
    """
    Ajusta las cópulas del S-vine nivel por nivel.

    Args:
        u: PseudoSample o matriz T×d en (0,1).
        spec: Estructura (sección cruzada, permutaciones, orden de Markov p).
        family_menu: Nombres de familias ("gaussian", "clayton_90", ...). Por defecto settings.DEFAULT_FAMILIES.
        margins: Márgenes ajustados que se guardan en el modelo.
        n_jobs: Hilos para ajustar en paralelo las clases de un mismo nivel.
    Returns:
        SVineModel con una cópula por clase de traslación y diagnósticos por clase.
    """
    values = _as_values(u)
    T, d = values.shape
    mode = u.mode if isinstance(u, PseudoSample) else EMPIRICAL
    if d != spec.d:
        raise ValueError(f"La muestra tiene d={d} columnas y la estructura d={spec.d}")
    p = spec.markov_order
    if T <= (p + 1) * d + 10:
        logger.warning(f"⚠️ Muestra corta para p={p}, d={d}: T={T} (se recomienda T > {(p + 1) * d + 10})")

    menu = expand_menu(family_menu or settings.DEFAULT_FAMILIES)
    n_jobs = n_jobs or settings.N_JOBS
    window = svine_window(spec)
    classes = distinct_classes(window)

    copulas: dict[str, BivariateCopula] = {}
    resolver = ClassResolver(window.edges(), copulas)
    caches = {s: HCache(window_values(values, s), resolver) for s in range(min(p, T - 1) + 1)}
    diagnostics: dict[str, ClassDiagnostics] = {}

    levels = sorted({c.level for c in classes})
    logger.info(f"Ajuste secuencial: T={T}, d={d}, p={p}, {len(classes)} clases en {len(levels)} árboles")
    for k in levels:
        batch = [c for c in classes if c.level == k]
        inputs = []
        for c in batch:
            if c.lag not in caches:
                inputs.append(None)
                continue
            cache = caches[c.lag]
            before = cache.clamped
            x_a, x_b = cache.pair(c.representative)
            source = cache.inputs_level(c.representative)
            if source >= k:
                raise AssertionError(f"La clase {c.key} consume valores del árbol {source} >= {k}")
            inputs.append((x_a, x_b, cache.clamped - before, source))

        fitted = Parallel(n_jobs=n_jobs, prefer="threads")(
            delayed(_fit_class)(c, inp, menu) for c, inp in zip(batch, inputs)
        )
        for c, inp, cop in zip(batch, inputs, fitted):
            copulas[c.key] = cop
            n = 0 if inp is None else inp[0].size
            ll = 0.0 if inp is None else cop.loglik(inp[0], inp[1])
            diagnostics[c.key] = ClassDiagnostics(
                key=c.key,
                level=c.level,
                lag=c.lag,
                n=n,
                loglik=ll,
                family=cop.tag.label,
                clamped=0 if inp is None else inp[2],
                source_level=0 if inp is None else inp[3],
            )
        logger.info(f"Árbol {k}: {len(batch)} clases ajustadas")

    model = SVineModel(spec, copulas, tuple(margins), mode, diagnostics, T)
    logger.info(f"✅ Ajuste completo. loglik={sum(dg.loglik for dg in diagnostics.values()):.4f}")
    return model


def class_logliks(model: SVineModel, u) -> dict[str, np.ndarray]:
    """Log-densidades por instancia de cada clase (instancia τ = fila τ de la ventana)."""
    values = _as_values(u)
    T = values.shape[0]
    resolver = model.resolver()
    caches: dict[int, HCache] = {}
    out: dict[str, np.ndarray] = {}
    for c in model.classes:
        cop = model.copulas[c.key]
        if c.lag >= T:
            out[c.key] = np.zeros(0)
            continue
        if cop.is_independence:
            out[c.key] = np.zeros(T - c.lag)
            continue
        if c.lag not in caches:
            caches[c.lag] = HCache(window_values(values, c.lag), resolver)
        x_a, x_b = caches[c.lag].pair(c.representative)
        out[c.key] = cop.logpdf(x_a, x_b)
    return out


def loglik(model: SVineModel, u) -> float:
    """Log-verosimilitud conjunta de la cópula: cada clase cuenta una vez por instancia trasladada."""
    return float(sum(np.sum(v) for v in class_logliks(model, u).values()))


def aic(model: SVineModel, u) -> float:
    """-2·loglik + 2·(parámetros de cópula + parámetros de márgenes paramétricos)."""
    n_params = model.n_copula_params + model.n_margin_params
    return -2.0 * loglik(model, u) + 2.0 * n_params
