"""
Cópulas bivariadas paramétricas: densidad, CDF, h-funciones, inversas y vínculo con el tau de Kendall.

Convenciones:
    - Todas las funciones se definen primero para la familia base (rotación 0) y las rotaciones
      se obtienen reflejando argumentos: 90° -> c(1-u, v), 180° -> c(1-u, 1-v), 270° -> c(u, 1-v).
    - hfunc(u, v, direction): `u` es el valor condicionado y `v` el condicionante.
      direction=2 -> v es el segundo argumento de la cópula, h = dC(u, v)/dv.
      direction=1 -> v es el primer argumento de la cópula,  h = dC(v, u)/dv.
    - Las entradas se recortan a [CLAMP_EPS, 1 - CLAMP_EPS] antes de evaluar.
"""
import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Optional

import numpy as np
from scipy import integrate, special
from scipy.optimize import bisect
from scipy.optimize.elementwise import find_root

from src.config import settings
from src.copulas.families import Family, FamilyTag
from src.utils.errors import CopulaDomainError, NumericalError

logger = logging.getLogger(__name__)

ArrayLike = float | np.ndarray


def clamp(u: ArrayLike) -> np.ndarray:
    eps = settings.CLAMP_EPS
    return np.clip(np.asarray(u, dtype=float), eps, 1.0 - eps)


# ==========================================
# Familias base (rotación 0)
# ==========================================

def _gauss_logpdf(u, v, rho):
    x, y = special.ndtri(u), special.ndtri(v)
    r2 = 1.0 - rho * rho
    return -0.5 * np.log(r2) - (rho * rho * (x * x + y * y) - 2.0 * rho * x * y) / (2.0 * r2)


def _gauss_h2(u, v, rho):
    x, y = special.ndtri(u), special.ndtri(v)
    return special.ndtr((x - rho * y) / np.sqrt(1.0 - rho * rho))


def _gauss_hinv2(w, v, rho):
    y = special.ndtri(v)
    return special.ndtr(special.ndtri(w) * np.sqrt(1.0 - rho * rho) + rho * y)


def _gauss_cdf(u, v, rho):
    def scalar(uu, vv):
        x, y = special.ndtri(uu), special.ndtri(vv)
        s = np.sqrt(1.0 - rho * rho)
        integrand = lambda z: special.ndtr((x - rho * z) / s) * np.exp(-0.5 * z * z) / np.sqrt(2.0 * np.pi)
        return integrate.quad(integrand, -np.inf, y, epsabs=1e-14, epsrel=1e-12, limit=200)[0]

    return np.vectorize(scalar, otypes=[float])(u, v)


def _t_logpdf(u, v, rho, nu):
    x, y = special.stdtrit(nu, u), special.stdtrit(nu, v)
    r2 = 1.0 - rho * rho
    const = (
        special.gammaln((nu + 2.0) / 2.0) + special.gammaln(nu / 2.0)
        - 2.0 * special.gammaln((nu + 1.0) / 2.0) - 0.5 * np.log(r2)
    )
    quad_form = (x * x + y * y - 2.0 * rho * x * y) / (nu * r2)
    return (
        const
        - (nu + 2.0) / 2.0 * np.log1p(quad_form)
        + (nu + 1.0) / 2.0 * (np.log1p(x * x / nu) + np.log1p(y * y / nu))
    )


def _t_h2(u, v, rho, nu):
    x, y = special.stdtrit(nu, u), special.stdtrit(nu, v)
    scale = np.sqrt((nu + y * y) * (1.0 - rho * rho) / (nu + 1.0))
    return special.stdtr(nu + 1.0, (x - rho * y) / scale)


def _t_hinv2(w, v, rho, nu):
    y = special.stdtrit(nu, v)
    scale = np.sqrt((nu + y * y) * (1.0 - rho * rho) / (nu + 1.0))
    return special.stdtr(nu, special.stdtrit(nu + 1.0, w) * scale + rho * y)


def _t_cdf(u, v, rho, nu):
    log_norm = special.gammaln((nu + 1.0) / 2.0) - special.gammaln(nu / 2.0) - 0.5 * np.log(nu * np.pi)

    def scalar(uu, vv):
        x, y = special.stdtrit(nu, uu), special.stdtrit(nu, vv)

        def integrand(z):
            scale = np.sqrt((nu + z * z) * (1.0 - rho * rho) / (nu + 1.0))
            dens = np.exp(log_norm - (nu + 1.0) / 2.0 * np.log1p(z * z / nu))
            return special.stdtr(nu + 1.0, (x - rho * z) / scale) * dens

        return integrate.quad(integrand, -np.inf, y, epsabs=1e-14, epsrel=1e-12, limit=200)[0]

    return np.vectorize(scalar, otypes=[float])(u, v)


def _clayton_logpdf(u, v, theta):
    s = u ** -theta + v ** -theta - 1.0
    return np.log1p(theta) + (-1.0 - theta) * (np.log(u) + np.log(v)) + (-1.0 / theta - 2.0) * np.log(s)


def _clayton_h2(u, v, theta):
    s = u ** -theta + v ** -theta - 1.0
    return np.exp((-theta - 1.0) * np.log(v) + (-1.0 / theta - 1.0) * np.log(s))


def _clayton_hinv2(w, v, theta):
    inner = (w * v ** (theta + 1.0)) ** (-theta / (1.0 + theta)) + 1.0 - v ** -theta
    return inner ** (-1.0 / theta)


def _clayton_cdf(u, v, theta):
    return (u ** -theta + v ** -theta - 1.0) ** (-1.0 / theta)


def _gumbel_a(u, v, theta):
    return (-np.log(u)) ** theta + (-np.log(v)) ** theta


def _gumbel_logpdf(u, v, theta):
    lu, lv = -np.log(u), -np.log(v)
    a = lu ** theta + lv ** theta
    a_inv = a ** (1.0 / theta)
    return (
        -a_inv - np.log(u) - np.log(v)
        + (theta - 1.0) * (np.log(lu) + np.log(lv))
        + (2.0 / theta - 2.0) * np.log(a)
        + np.log1p((theta - 1.0) / a_inv)
    )


def _gumbel_h2(u, v, theta):
    lv = -np.log(v)
    a = _gumbel_a(u, v, theta)
    return np.exp(-(a ** (1.0 / theta)) + (1.0 / theta - 1.0) * np.log(a) + (theta - 1.0) * np.log(lv) + lv)


def _gumbel_hinv2(w, v, theta):
    eps = settings.CLAMP_EPS
    w, v = np.broadcast_arrays(np.asarray(w, dtype=float), np.asarray(v, dtype=float))
    lo, hi = np.full(w.shape, eps), np.full(w.shape, 1.0 - eps)
    res = find_root(
        lambda x, ww, vv: _gumbel_h2(x, vv, theta) - ww,
        (lo, hi),
        args=(w, v),
        tolerances={"xatol": settings.HINV_XATOL, "xrtol": 4 * np.finfo(float).eps},
    )
    failed = ~np.asarray(res.success)
    if np.any(failed):
        # Objetivos en los extremos del intervalo no tienen cambio de signo: se asignan al borde
        at_edge = failed & ((w <= _gumbel_h2(lo, v, theta)) | (w >= _gumbel_h2(hi, v, theta)))
        if np.any(failed & ~at_edge):
            idx = np.flatnonzero(failed & ~at_edge)
            raise NumericalError(
                f"hinv Gumbel sin convergencia en {idx.size} puntos",
                {"family": "gumbel", "theta": theta, "w": w.ravel()[idx[:5]].tolist(), "v": v.ravel()[idx[:5]].tolist()},
            )
        x = np.where(failed, np.where(w <= 0.5, lo, hi), res.x)
        return x
    return np.asarray(res.x)


def _gumbel_cdf(u, v, theta):
    return np.exp(-(_gumbel_a(u, v, theta) ** (1.0 / theta)))


def _frank_logpdf(u, v, theta):
    denom = np.expm1(-theta) + np.expm1(-theta * u) * np.expm1(-theta * v)
    return np.log(theta * -np.expm1(-theta)) - theta * (u + v) - 2.0 * np.log(np.abs(denom))


def _frank_h2(u, v, theta):
    eu, ev = np.expm1(-theta * u), np.expm1(-theta * v)
    return np.exp(-theta * v) * eu / (np.expm1(-theta) + eu * ev)


def _frank_hinv2(w, v, theta):
    ev = np.expm1(-theta * v)
    a = w * np.expm1(-theta) / (np.exp(-theta * v) - w * ev)
    return -np.log1p(a) / theta


def _frank_cdf(u, v, theta):
    return -np.log1p(np.expm1(-theta * u) * np.expm1(-theta * v) / np.expm1(-theta)) / theta


def debye1(theta: float) -> float:
    """Función de Debye de orden 1: (1/θ) ∫_0^θ t / (e^t - 1) dt."""
    if abs(theta) < 1e-12:
        return 1.0
    value, _ = integrate.quad(lambda t: t / np.expm1(t) if t != 0 else 1.0, 0.0, theta, epsabs=1e-13)
    return value / theta


def _frank_tau(theta: float) -> float:
    if abs(theta) < 1e-10:
        return 0.0
    return 1.0 - 4.0 / theta * (1.0 - debye1(theta))


_BASE: dict[Family, dict[str, Callable]] = {
    Family.GAUSSIAN: {"logpdf": _gauss_logpdf, "h2": _gauss_h2, "hinv2": _gauss_hinv2, "cdf": _gauss_cdf},
    Family.STUDENT_T: {"logpdf": _t_logpdf, "h2": _t_h2, "hinv2": _t_hinv2, "cdf": _t_cdf},
    Family.CLAYTON: {"logpdf": _clayton_logpdf, "h2": _clayton_h2, "hinv2": _clayton_hinv2, "cdf": _clayton_cdf},
    Family.GUMBEL: {"logpdf": _gumbel_logpdf, "h2": _gumbel_h2, "hinv2": _gumbel_hinv2, "cdf": _gumbel_cdf},
    Family.FRANK: {"logpdf": _frank_logpdf, "h2": _frank_h2, "hinv2": _frank_hinv2, "cdf": _frank_cdf},
}


def tau_to_param(tag: FamilyTag, tau: float) -> tuple[float, ...]:
    """
    Inversión del tau de Kendall (punto de partida del ajuste).
    El tau recibido está en la escala de la cópula rotada.
    """
    family = tag.family
    base_tau = -tau if tag.negative_dependence else tau
    if family is Family.INDEPENDENCE:
        return ()
    if family in (Family.GAUSSIAN, Family.STUDENT_T):
        rho = float(np.clip(np.sin(np.pi * tau / 2.0), -0.95, 0.95))
        return (rho,) if family is Family.GAUSSIAN else (rho, 6.0)
    if family is Family.CLAYTON:
        base_tau = min(max(base_tau, 1e-3), 0.9)
        return (2.0 * base_tau / (1.0 - base_tau),)
    if family is Family.GUMBEL:
        base_tau = min(max(base_tau, 0.0), 0.9)
        return (1.0 / (1.0 - base_tau),)
    # Frank: bisección sobre kendall_tau, sin forma cerrada
    base_tau = float(np.clip(base_tau, -0.9, 0.9))
    if abs(base_tau) < 1e-6:
        return (1e-3 if base_tau >= 0 else -1e-3,)
    lo, hi = (1e-6, 50.0) if base_tau > 0 else (-50.0, -1e-6)
    return (bisect(lambda th: _frank_tau(th) - base_tau, lo, hi, xtol=1e-10),)


# ==========================================
# Cópula bivariada
# ==========================================

@dataclass(frozen=True)
class FitInfo:
    loglik: float
    n_eff: float
    converged: bool = True
    start: tuple[float, ...] = ()


@dataclass(frozen=True)
class BivariateCopula:
    """Instancia de una familia con parámetros fijos. Inmutable y segura entre hilos."""
    tag: FamilyTag
    params: tuple[float, ...] = ()
    fit_info: Optional[FitInfo] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "params", tuple(float(p) for p in self.params))
        self._check_domain()

    # --- Dominio ---

    def _check_domain(self) -> None:
        fam, p = self.tag.family, self.params
        if len(p) != fam.n_params:
            raise CopulaDomainError(f"{fam.value} espera {fam.n_params} parámetros, recibió {len(p)}")
        if not all(np.isfinite(p)):
            raise CopulaDomainError(f"Parámetros no finitos para {fam.value}: {p}")
        ok = {
            Family.INDEPENDENCE: lambda: True,
            Family.GAUSSIAN: lambda: -1.0 < p[0] < 1.0,
            Family.STUDENT_T: lambda: -1.0 < p[0] < 1.0 and p[1] > 2.0,
            Family.CLAYTON: lambda: p[0] > 0.0,
            Family.GUMBEL: lambda: p[0] >= 1.0,
            Family.FRANK: lambda: p[0] != 0.0,
        }[fam]()
        if not ok:
            raise CopulaDomainError(f"Parámetros fuera de dominio para {self.tag.label}: {p}")

    @property
    def family(self) -> Family:
        return self.tag.family

    @property
    def rotation(self) -> int:
        return self.tag.rotation

    @property
    def n_params(self) -> int:
        return self.tag.n_params

    @property
    def is_independence(self) -> bool:
        return self.family is Family.INDEPENDENCE

    def with_params(self, params) -> "BivariateCopula":
        return BivariateCopula(self.tag, tuple(params))

    # --- Evaluación ---

    def logpdf(self, u: ArrayLike, v: ArrayLike) -> np.ndarray:
        u, v = clamp(u), clamp(v)
        if self.is_independence:
            return np.zeros(np.broadcast(u, v).shape)
        base = _BASE[self.family]["logpdf"]
        uu, vv = {
            0: (u, v),
            90: (1.0 - u, v),
            180: (1.0 - u, 1.0 - v),
            270: (u, 1.0 - v),
        }[self.rotation]
        return base(uu, vv, *self.params)

    def pdf(self, u: ArrayLike, v: ArrayLike) -> np.ndarray:
        return np.exp(self.logpdf(u, v))

    def cdf(self, u: ArrayLike, v: ArrayLike) -> np.ndarray:
        u, v = clamp(u), clamp(v)
        if self.is_independence:
            return u * v
        base = lambda a, b: _BASE[self.family]["cdf"](a, b, *self.params)
        if self.rotation == 90:
            return v - base(1.0 - u, v)
        if self.rotation == 180:
            return u + v - 1.0 + base(1.0 - u, 1.0 - v)
        if self.rotation == 270:
            return u - base(u, 1.0 - v)
        return base(u, v)

    def hfunc(self, u: ArrayLike, v: ArrayLike, direction: int = 2) -> np.ndarray:
        """Distribución condicional del argumento `u` dado el argumento `v`."""
        u, v = clamp(u), clamp(v)
        if direction not in (1, 2):
            raise ValueError(f"direction debe ser 1 o 2: {direction}")
        if self.is_independence:
            return np.broadcast_to(u, np.broadcast(u, v).shape).copy()
        h2 = lambda a, b: _BASE[self.family]["h2"](a, b, *self.params)
        rot = self.rotation
        if rot == 0:
            out = h2(u, v)
        elif rot == 180:
            out = 1.0 - h2(1.0 - u, 1.0 - v)
        elif rot == 90:
            out = 1.0 - h2(1.0 - u, v) if direction == 2 else h2(u, 1.0 - v)
        else:
            out = h2(u, 1.0 - v) if direction == 2 else 1.0 - h2(1.0 - u, v)
        return clamp(out)

    def hinv(self, w: ArrayLike, v: ArrayLike, direction: int = 2) -> np.ndarray:
        """Inversa de hfunc en el argumento condicionado."""
        w, v = clamp(w), clamp(v)
        if direction not in (1, 2):
            raise ValueError(f"direction debe ser 1 o 2: {direction}")
        if self.is_independence:
            return np.broadcast_to(w, np.broadcast(w, v).shape).copy()
        inv = lambda a, b: _BASE[self.family]["hinv2"](a, b, *self.params)
        rot = self.rotation
        if rot == 0:
            out = inv(w, v)
        elif rot == 180:
            out = 1.0 - inv(1.0 - w, 1.0 - v)
        elif rot == 90:
            out = 1.0 - inv(1.0 - w, v) if direction == 2 else inv(w, 1.0 - v)
        else:
            out = inv(w, 1.0 - v) if direction == 2 else 1.0 - inv(1.0 - w, v)
        return clamp(out)

    def kendall_tau(self) -> float:
        fam, p = self.family, self.params
        if fam is Family.INDEPENDENCE:
            return 0.0
        if fam in (Family.GAUSSIAN, Family.STUDENT_T):
            return float(2.0 / np.pi * np.arcsin(p[0]))
        if fam is Family.CLAYTON:
            tau = p[0] / (p[0] + 2.0)
        elif fam is Family.GUMBEL:
            tau = 1.0 - 1.0 / p[0]
        else:
            return _frank_tau(p[0])
        return float(-tau if self.tag.negative_dependence else tau)

    def loglik(self, u: ArrayLike, v: ArrayLike, weights: Optional[np.ndarray] = None) -> float:
        values = self.logpdf(u, v)
        if weights is None:
            return float(np.sum(values))
        return float(np.sum(np.asarray(weights, dtype=float) * values))

    def simulate(self, n: int, rng: np.random.Generator) -> np.ndarray:
        """n pares (u, v) por inversión de la h-función."""
        v = rng.uniform(size=n)
        w = rng.uniform(size=n)
        return np.column_stack([self.hinv(w, v, direction=2), v])

    # --- Serialización ---

    def to_dict(self) -> dict[str, Any]:
        return {"family": self.family.value, "rotation": self.rotation, "parameters": list(self.params)}

    @classmethod
    def from_dict(cls, payload: dict[str, Any]) -> "BivariateCopula":
        try:
            tag = FamilyTag(Family(payload["family"]), int(payload.get("rotation", 0)))
            return cls(tag, tuple(payload.get("parameters", ())))
        except KeyError as e:
            raise CopulaDomainError(f"JSON de cópula incompleto: falta {e}") from e

    @classmethod
    def independence(cls) -> "BivariateCopula":
        return cls(FamilyTag(Family.INDEPENDENCE))
