"""
Recursión de h-funciones sobre un vine (valores condicionales C_{v|D}(u_v | u_D)).

Las entradas se memorizan por (vértice, conjunto condicionante) y guardan el nivel del árbol
del que provienen, para verificar que el árbol k sólo consume cópulas de árboles < k.
"""
import logging
from typing import Callable, Iterable, Mapping

import numpy as np

from src.config import settings
from src.copulas.bicop import BivariateCopula
from src.utils.errors import EdgeLookupError, NumericalError
from src.vines.graph import Vertex, VineEdge

logger = logging.getLogger(__name__)

CacheKey = tuple[Vertex, frozenset[Vertex]]
Resolver = Callable[[frozenset[Vertex]], tuple[VineEdge, BivariateCopula]]


class ClassResolver:
    """
    Encuentra la arista con una unión dada y su cópula compartida por traslación.

    Las aristas se indexan por su unión canónica (tiempo mínimo 1); la cópula se busca por la clave
    de la arista canónica en `copulas`, que puede seguir llenándose mientras se ajusta el modelo.
    """

    def __init__(self, edges: Iterable[VineEdge], copulas: Mapping[str, BivariateCopula]):
        self._canonical = {}
        for edge in edges:
            canon = edge.canonical()
            self._canonical[canon.union] = canon
        self._copulas = copulas

    def add(self, edge: VineEdge) -> None:
        canon = edge.canonical()
        self._canonical[canon.union] = canon

    def __call__(self, union: frozenset[Vertex]) -> tuple[VineEdge, BivariateCopula]:
        offset = min(v.time for v in union) - 1
        canon_union = frozenset(v.shift(-offset) for v in union)
        try:
            canon = self._canonical[canon_union]
        except KeyError as e:
            raise EdgeLookupError(f"No hay arista con unión {sorted(union)}") from e
        try:
            copula = self._copulas[canon.key]
        except KeyError as e:
            raise EdgeLookupError(f"La clase {canon.key} todavía no tiene cópula asignada") from e
        return canon.shift(offset), copula


class HCache:
    """
    Valores condicionales vectorizados sobre instancias (filas) de una ventana.

    Args:
        values: Pseudo-observaciones por vértice, todas con la misma forma.
        resolve: Función unión -> (arista, cópula).
    """

    def __init__(self, values: Mapping[Vertex, np.ndarray], resolve: Resolver):
        self._values = {v: np.asarray(x, dtype=float) for v, x in values.items()}
        self._resolve = resolve
        self._memo: dict[CacheKey, np.ndarray] = {}
        self._source: dict[CacheKey, int] = {}
        self.clamped = 0

    def __contains__(self, vertex: Vertex) -> bool:
        return vertex in self._values

    def set_value(self, vertex: Vertex, value: np.ndarray) -> None:
        self._values[vertex] = np.asarray(value, dtype=float)

    def store(self, vertex: Vertex, conditioning: frozenset[Vertex], value: np.ndarray, level: int) -> None:
        """Registra un valor condicional ya conocido (p. ej. producido al invertir h-funciones)."""
        key = (vertex, frozenset(conditioning))
        if not key[1]:
            self.set_value(vertex, value)
            return
        self._memo[key] = np.asarray(value, dtype=float)
        self._source[key] = level

    def value(self, vertex: Vertex) -> np.ndarray:
        try:
            return self._values[vertex]
        except KeyError as e:
            raise EdgeLookupError(f"Sin pseudo-observaciones para el vértice {vertex}") from e

    def h(self, vertex: Vertex, conditioning: frozenset[Vertex]) -> np.ndarray:
        """C_{v|D}(u_v | u_D) con D = `conditioning`."""
        conditioning = frozenset(conditioning)
        if not conditioning:
            return self.value(vertex)
        key = (vertex, conditioning)
        if key in self._memo:
            return self._memo[key]

        edge, copula = self._resolve(conditioning | {vertex})
        partner = edge.partner(vertex)
        x_v = self.h(vertex, edge.conditioning)
        x_p = self.h(partner, edge.conditioning)
        if vertex == edge.conditioned[0]:
            out = copula.hfunc(x_v, x_p, direction=2)
        else:
            out = copula.hfunc(x_v, x_p, direction=1)

        eps = settings.CLAMP_EPS
        self.clamped += int(np.count_nonzero((out <= eps) | (out >= 1.0 - eps)))
        self._memo[key] = out
        self._source[key] = edge.level
        return out

    def source_level(self, vertex: Vertex, conditioning: frozenset[Vertex]) -> int:
        """Nivel del árbol que produjo el valor (0 para pseudo-observaciones)."""
        conditioning = frozenset(conditioning)
        if not conditioning:
            return 0
        self.h(vertex, conditioning)
        return self._source[(vertex, conditioning)]

    def pair(self, edge: VineEdge) -> tuple[np.ndarray, np.ndarray]:
        """Argumentos (u_a|D, u_b|D) de la cópula de la arista (a, b | D)."""
        a, b = edge.conditioned
        return self.h(a, edge.conditioning), self.h(b, edge.conditioning)

    def inputs_level(self, edge: VineEdge) -> int:
        a, b = edge.conditioned
        return max(self.source_level(a, edge.conditioning), self.source_level(b, edge.conditioning))

    def shifted(self, tau: int, keep_from: int) -> "HCache":
        """
        Nueva caché con vértices y entradas de tiempo >= keep_from trasladados en tau.
        Se usa para avanzar la ventana de simulación un paso sin recalcular la historia.
        """
        moved = HCache(
            {v.shift(tau): x for v, x in self._values.items() if v.time >= keep_from}, self._resolve
        )
        for (v, cond), x in self._memo.items():
            if v.time >= keep_from and all(c.time >= keep_from for c in cond):
                key = (v.shift(tau), frozenset(c.shift(tau) for c in cond))
                moved._memo[key] = x
                moved._source[key] = self._source[(v, cond)]
        return moved


def invert_chain(
    cache: HCache,
    vertex: Vertex,
    chain: list[tuple[VineEdge, BivariateCopula]],
    w: np.ndarray,
) -> np.ndarray:
    """
    Inversa de Rosenblatt para un vértice: recorre su cadena de aristas del árbol más alto al
    primero, invirtiendo h-funciones. Los valores intermedios quedan guardados en la caché.
    """
    current = np.asarray(w, dtype=float)
    for edge, copula in reversed(chain):
        partner = edge.partner(vertex)
        given = cache.h(partner, edge.conditioning)
        direction = 2 if vertex == edge.conditioned[0] else 1
        try:
            current = copula.hinv(current, given, direction=direction)
        except NumericalError as e:
            raise NumericalError(
                f"Falla al invertir la h-función de la arista {edge.key}: {e}",
                {**e.diagnostics, "edge": edge.key},
            ) from e
        cache.store(vertex, edge.conditioning, current, edge.level)
    cache.set_value(vertex, current)
    return current


def peel_order(
    vertices: Iterable[Vertex], levels: Iterable[Iterable[VineEdge]]
) -> list[tuple[Vertex, list[VineEdge]]]:
    """
    Orden de muestreo de un vine: se retira repetidamente el vértice condicionado mayor de la arista
    del árbol superior junto con su cadena (una arista por árbol con el vértice en el par condicionado).

    Returns:
        Lista (vértice, cadena) en orden de muestreo; cadena[k-1] es la arista del árbol k.
    """
    remaining = set(vertices)
    current = [list(level) for level in levels]
    peeled: list[tuple[Vertex, list[VineEdge]]] = []
    while remaining:
        n = len(remaining)
        if n == 1:
            peeled.append((remaining.pop(), []))
            break
        top = current[n - 2]
        if len(top) != 1:
            raise EdgeLookupError(f"El árbol {n - 1} tiene {len(top)} aristas; se esperaba una")
        x = max(top[0].conditioned)
        chain = []
        for k in range(n - 1):
            hits = [e for e in current[k] if x in e.conditioned]
            if len(hits) != 1:
                raise EdgeLookupError(f"El vértice {x} aparece condicionado en {len(hits)} aristas del árbol {k + 1}")
            chain.append(hits[0])
            current[k] = [e for e in current[k] if e is not hits[0]]
        remaining.remove(x)
        current = current[: n - 2]
        peeled.append((x, chain))
    peeled.reverse()
    return peeled


def resolve_chain(chain: list[VineEdge], resolve: Resolver) -> list[tuple[VineEdge, BivariateCopula]]:
    return [resolve(e.union) for e in chain]
