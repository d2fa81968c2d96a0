"""
Modelo S-vine ajustado: especificación, una cópula por clase de traslación, márgenes y diagnósticos.
"""
import logging
from dataclasses import asdict, dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Any, Optional, Sequence

import numpy as np

from src.copulas.bicop import BivariateCopula
from src.copulas.families import Family, param_bounds
from src.estimation.recursion import ClassResolver, HCache
from src.margins.skew_t import SkewTParams
from src.margins.transform import EMPIRICAL, PARAMETRIC, Margin, margin_from_dict, pseudo_observations
from src.utils.errors import MarginError, StructureError
from src.utils.utils_io import read_json, write_json
from src.vines.graph import Vertex, VineEdge, VineStructure
from src.vines.stationary import EdgeClass, SVineSpec, distinct_classes, svine_window

logger = logging.getLogger(__name__)

_PARAM_NAMES = {
    Family.GAUSSIAN: ("rho",),
    Family.STUDENT_T: ("rho", "nu"),
    Family.CLAYTON: ("theta",),
    Family.GUMBEL: ("theta",),
    Family.FRANK: ("theta",),
}
_MARGIN_NAMES = ("mu", "sigma", "nu", "gamma")
MARGIN_BOUNDS = ((-np.inf, np.inf), (1e-12, np.inf), (2.0 + 1e-6, np.inf), (1e-6, np.inf))


@dataclass(frozen=True, eq=False)
class PseudoSample:
    """Matriz T×d en (0,1) más los datos originales (necesarios para el bootstrap)."""
    values: np.ndarray
    mode: str = EMPIRICAL
    raw: Optional[np.ndarray] = None

    def __post_init__(self):
        u = np.atleast_2d(np.asarray(self.values, dtype=float))
        if not np.all((u > 0.0) & (u < 1.0)):
            raise ValueError("Las pseudo-observaciones deben estar en (0,1)")
        object.__setattr__(self, "values", u)

    @property
    def T(self) -> int:
        return self.values.shape[0]

    @property
    def d(self) -> int:
        return self.values.shape[1]

    @classmethod
    def from_data(cls, data: np.ndarray, margins: Sequence[Margin], mode: str) -> "PseudoSample":
        x = np.asarray(data, dtype=float)
        return cls(pseudo_observations(x, margins), mode, x)


def window_values(u: np.ndarray, span: int) -> dict[Vertex, np.ndarray]:
    """
    Valores por vértice de las T - span instancias de una ventana de ancho span + 1:
    el vértice (t, j) de la instancia τ es la fila τ + t - 1.
    """
    T, d = u.shape
    n = T - span
    return {Vertex(t, j): u[t - 1 : t - 1 + n, j - 1] for t in range(1, span + 2) for j in range(1, d + 1)}


@dataclass(frozen=True)
class ClassDiagnostics:
    key: str
    level: int
    lag: int
    n: int
    loglik: float
    family: str
    clamped: int = 0
    source_level: int = 0

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


@dataclass(frozen=True, eq=False)
class SVineModel:
    spec: SVineSpec
    copulas: dict[str, BivariateCopula]
    margins: tuple[Margin, ...] = ()
    mode: str = EMPIRICAL
    diagnostics: dict[str, ClassDiagnostics] = field(default_factory=dict)
    n_obs: int = 0

    def __post_init__(self):
        object.__setattr__(self, "margins", tuple(self.margins))
        missing = [c.key for c in self.classes if c.key not in self.copulas]
        if missing:
            raise StructureError(f"Clases sin cópula asignada: {missing}")
        if self.margins and len(self.margins) != self.spec.d:
            raise MarginError(f"{len(self.margins)} márgenes para d={self.spec.d}")

    @property
    def d(self) -> int:
        return self.spec.d

    @property
    def p(self) -> int:
        return self.spec.markov_order

    @cached_property
    def window(self) -> VineStructure:
        return svine_window(self.spec)

    @cached_property
    def classes(self) -> list[EdgeClass]:
        return distinct_classes(self.window)

    def copula_for(self, edge: VineEdge) -> BivariateCopula:
        """Cópula de cualquier arista del S-vine; las de alcance > p son Independence."""
        if edge.span > self.p:
            return BivariateCopula.independence()
        return self.copulas[edge.canonical().key]

    def resolver(self) -> ClassResolver:
        return ClassResolver(self.window.edges(), self.copulas)

    def cache(self, u: np.ndarray, span: int) -> HCache:
        return HCache(window_values(u, span), self.resolver())

    # --- Parámetros ---

    @property
    def n_copula_params(self) -> int:
        return sum(cop.n_params for cop in self.copulas.values())

    @property
    def n_margin_params(self) -> int:
        return sum(4 for m in self.margins if isinstance(m, SkewTParams))

    def parameter_names(self) -> list[str]:
        names = []
        for j, m in enumerate(self.margins, start=1):
            if isinstance(m, SkewTParams):
                names += [f"eta[{j}].{n}" for n in _MARGIN_NAMES]
        for c in self.classes:
            cop = self.copulas[c.key]
            names += [f"theta[{c.key}].{n}" for n in _PARAM_NAMES.get(cop.family, ())]
        return names

    def parameter_vector(self) -> np.ndarray:
        parts = [m.as_vector() for m in self.margins if isinstance(m, SkewTParams)]
        parts += [np.asarray(self.copulas[c.key].params, dtype=float) for c in self.classes]
        return np.concatenate(parts) if parts else np.empty(0)

    def parameter_bounds(self) -> list[tuple[float, float]]:
        bounds: list[tuple[float, float]] = []
        for m in self.margins:
            if isinstance(m, SkewTParams):
                bounds += list(MARGIN_BOUNDS)
        for c in self.classes:
            cop = self.copulas[c.key]
            if not cop.is_independence:
                bounds += list(param_bounds(cop.family))
        return bounds

    def with_parameters(self, vector: np.ndarray, margins: Optional[Sequence[Margin]] = None) -> "SVineModel":
        """Copia del modelo con el vector (η, θ) dado; los valores se recortan al dominio de cada familia."""
        vector = np.asarray(vector, dtype=float)
        pos = 0
        new_margins: list[Margin] = []
        for m in self.margins:
            if isinstance(m, SkewTParams):
                new_margins.append(SkewTParams.from_vector(vector[pos : pos + 4]))
                pos += 4
            else:
                new_margins.append(m)
        if margins is not None:
            new_margins = list(margins)
        copulas = {}
        for c in self.classes:
            cop = self.copulas[c.key]
            k = cop.n_params
            values = vector[pos : pos + k]
            pos += k
            if k:
                values = [float(np.clip(x, lo, hi)) for x, (lo, hi) in zip(values, param_bounds(cop.family))]
                if cop.family is Family.FRANK and values[0] == 0.0:
                    values[0] = 1e-6
            copulas[c.key] = cop.with_params(values)
        if pos != vector.size:
            raise ValueError(f"Vector de {vector.size} parámetros para un modelo con {pos}")
        return SVineModel(self.spec, copulas, tuple(new_margins), self.mode, {}, self.n_obs)

    def independence_copy(self) -> "SVineModel":
        """Mismo soporte y márgenes, todas las clases Independence."""
        copulas = {c.key: BivariateCopula.independence() for c in self.classes}
        return SVineModel(self.spec, copulas, self.margins, self.mode, {}, self.n_obs)

    # --- Serialización ---

    def to_dict(self, **metadata) -> dict[str, Any]:
        return {
            "spec": self.spec.to_dict(),
            "mode": self.mode,
            "copulas": {c.key: self.copulas[c.key].to_dict() for c in self.classes},
            "margins": [m.to_dict() for m in self.margins],
            "fit": {
                "T": self.n_obs,
                "diagnostics": {k: v.to_dict() for k, v in self.diagnostics.items()},
                **metadata,
            },
        }

    @classmethod
    def from_dict(cls, payload: dict[str, Any]) -> "SVineModel":
        try:
            spec = SVineSpec.from_dict(payload["spec"])
            copulas = {k: BivariateCopula.from_dict(v) for k, v in payload["copulas"].items()}
            margins = tuple(margin_from_dict(m) for m in payload.get("margins", []))
            fit = payload.get("fit", {})
            diagnostics = {k: ClassDiagnostics(**v) for k, v in fit.get("diagnostics", {}).items()}
            mode = payload.get("mode", EMPIRICAL)
        except (KeyError, TypeError) as e:
            raise StructureError(f"Modelo JSON mal formado: {e}") from e
        if mode not in (PARAMETRIC, EMPIRICAL):
            raise StructureError(f"Modo de margen desconocido en el modelo: {mode}")
        return cls(spec, copulas, margins, mode, diagnostics, int(fit.get("T", 0)))


def save_model(model: SVineModel, path: Path, **metadata) -> Path:
    path = write_json(model.to_dict(**metadata), path)
    logger.info(f"💾 Modelo guardado en {path}")
    return path


def load_model(path: Path) -> SVineModel:
    return SVineModel.from_dict(read_json(path))
