"""
Álgebra de estructuras R-vine sobre vértices (tiempo, variable).

Cada arista se guarda con su etiqueta (a, b | D). Los nodos del árbol k+1 son las aristas del
árbol k y se identifican por su unión completa, que es única dentro de un vine.
"""
import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Iterable, Iterator, NamedTuple, Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from src.utils.errors import EdgeLookupError, StructureError

logger = logging.getLogger(__name__)


class Vertex(NamedTuple):
    time: int
    var: int

    def shift(self, tau: int) -> "Vertex":
        return Vertex(self.time + tau, self.var)

    def __str__(self) -> str:
        return f"({self.time},{self.var})"


def as_vertex(value: Sequence[int]) -> Vertex:
    time, var = value
    return Vertex(int(time), int(var))


@dataclass(frozen=True)
class VineEdge:
    """
    Arista (a, b | D). El par condicionado se guarda ordenado: (tiempo menor, tiempo mayor),
    empates por índice de variable.
    """
    conditioned: tuple[Vertex, Vertex]
    conditioning: frozenset[Vertex] = field(default_factory=frozenset)

    def __post_init__(self):
        a, b = (as_vertex(x) for x in self.conditioned)
        cond = frozenset(as_vertex(x) for x in self.conditioning)
        if a == b:
            raise StructureError(f"Arista con extremos iguales: {a}")
        if a in cond or b in cond:
            raise StructureError(f"El conjunto condicionado se superpone con el condicionante: {a}, {b} | {sorted(cond)}")
        object.__setattr__(self, "conditioned", tuple(sorted((a, b))))
        object.__setattr__(self, "conditioning", cond)

    @property
    def level(self) -> int:
        return len(self.conditioning) + 1

    @cached_property
    def union(self) -> frozenset[Vertex]:
        return self.conditioning | frozenset(self.conditioned)

    @property
    def endpoints(self) -> tuple[frozenset[Vertex], frozenset[Vertex]]:
        """Uniones completas de los dos nodos del árbol anterior que une la arista."""
        a, b = self.conditioned
        return self.conditioning | {a}, self.conditioning | {b}

    @cached_property
    def min_time(self) -> int:
        return min(v.time for v in self.union)

    @cached_property
    def max_time(self) -> int:
        return max(v.time for v in self.union)

    @property
    def span(self) -> int:
        return self.max_time - self.min_time

    def shift(self, tau: int) -> "VineEdge":
        if tau == 0:
            return self
        return VineEdge(
            tuple(v.shift(tau) for v in self.conditioned),
            frozenset(v.shift(tau) for v in self.conditioning),
        )

    def canonical(self) -> "VineEdge":
        """Traslación con tiempo mínimo 1."""
        return self.shift(1 - self.min_time)

    def partner(self, vertex: Vertex) -> Vertex:
        a, b = self.conditioned
        if vertex == a:
            return b
        if vertex == b:
            return a
        raise EdgeLookupError(f"{vertex} no está en el conjunto condicionado de {self.key}")

    @property
    def sort_key(self) -> tuple:
        return (self.min_time, self.level, self.conditioned, tuple(sorted(self.conditioning)))

    @property
    def key(self) -> str:
        a, b = self.conditioned
        head = f"{a}-{b}"
        if not self.conditioning:
            return head
        return head + "|" + ",".join(str(v) for v in sorted(self.conditioning))

    def to_dict(self) -> dict[str, Any]:
        return {
            "conditioned": [list(v) for v in self.conditioned],
            "conditioning": [list(v) for v in sorted(self.conditioning)],
        }

    @classmethod
    def from_dict(cls, payload: dict[str, Any]) -> "VineEdge":
        try:
            return cls(
                tuple(as_vertex(v) for v in payload["conditioned"]),
                frozenset(as_vertex(v) for v in payload.get("conditioning", [])),
            )
        except (KeyError, TypeError, ValueError) as e:
            raise StructureError(f"Arista mal formada en JSON: {payload}") from e

    def __str__(self) -> str:
        return self.key


def edge_between(lower1: frozenset[Vertex], lower2: frozenset[Vertex]) -> VineEdge:
    """Arista que une dos nodos dados por sus uniones completas (D = U1 ∩ U2)."""
    common = lower1 & lower2
    a, b = lower1 - common, lower2 - common
    if len(a) != 1 or len(b) != 1:
        raise StructureError(
            f"Los nodos {sorted(lower1)} y {sorted(lower2)} no difieren en exactamente un vértice"
        )
    return VineEdge((next(iter(a)), next(iter(b))), common)


def components(nodes: Sequence[Any], pairs: Iterable[tuple[Any, Any]]) -> np.ndarray:
    """Etiquetas de componente conexa de un grafo no dirigido pequeño."""
    index = {node: i for i, node in enumerate(nodes)}
    rows, cols = [], []
    for x, y in pairs:
        rows.append(index[x])
        cols.append(index[y])
    n = len(nodes)
    graph = coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n))
    _, labels = connected_components(graph, directed=False)
    return labels


@dataclass(frozen=True)
class VineStructure:
    """Secuencia de árboles E_1..E_{n-1}. También representa restricciones que pueden no ser vines."""
    vertices: frozenset[Vertex]
    levels: tuple[tuple[VineEdge, ...], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "vertices", frozenset(as_vertex(v) for v in self.vertices))
        trimmed = [tuple(sorted(level, key=lambda e: e.sort_key)) for level in self.levels]
        while trimmed and not trimmed[-1]:
            trimmed.pop()
        object.__setattr__(self, "levels", tuple(trimmed))

    @property
    def d_total(self) -> int:
        return len(self.vertices)

    @cached_property
    def variables(self) -> tuple[int, ...]:
        return tuple(sorted({v.var for v in self.vertices}))

    @cached_property
    def times(self) -> tuple[int, ...]:
        return tuple(sorted({v.time for v in self.vertices}))

    @property
    def n_edges(self) -> int:
        return sum(len(level) for level in self.levels)

    def edges(self) -> Iterator[VineEdge]:
        for level in self.levels:
            yield from level

    def level(self, k: int) -> tuple[VineEdge, ...]:
        """Aristas del árbol k (1-indexado); vacío si no existe."""
        return self.levels[k - 1] if 1 <= k <= len(self.levels) else ()

    @cached_property
    def edge_by_union(self) -> dict[frozenset[Vertex], VineEdge]:
        return {e.union: e for e in self.edges()}

    @cached_property
    def _edge_set(self) -> frozenset[VineEdge]:
        return frozenset(self.edges())

    def __contains__(self, edge: VineEdge) -> bool:
        return edge in self._edge_set

    def find(self, union: Iterable[Vertex]) -> VineEdge:
        try:
            return self.edge_by_union[frozenset(union)]
        except KeyError as e:
            raise EdgeLookupError(f"No hay arista con unión {sorted(union)}") from e

    def shift(self, tau: int) -> "VineStructure":
        return VineStructure(
            frozenset(v.shift(tau) for v in self.vertices),
            tuple(tuple(e.shift(tau) for e in level) for level in self.levels),
        )

    # --- Validación ---

    def violations(self) -> list[str]:
        """Lista de violaciones de la definición de R-vine (vacía si es un vine)."""
        problems: list[str] = []
        n = len(self.vertices)
        if n == 0:
            return ["sin vértices"]
        if len(self.levels) > max(n - 1, 0):
            problems.append(f"{len(self.levels)} niveles para {n} vértices")
        nodes: list[frozenset[Vertex]] = [frozenset([v]) for v in sorted(self.vertices)]
        lower: dict[frozenset[Vertex], VineEdge] = {}
        for k in range(1, n):
            edges = self.level(k)
            if len(edges) != len(nodes) - 1:
                problems.append(f"árbol {k}: {len(edges)} aristas para {len(nodes)} nodos")
                break
            unions = [e.union for e in edges]
            if len(set(unions)) != len(unions):
                problems.append(f"árbol {k}: uniones completas repetidas")
                break
            node_set = set(nodes)
            pairs = []
            for e in edges:
                left, right = e.endpoints
                if left not in node_set or right not in node_set:
                    problems.append(f"árbol {k}: la arista {e.key} une nodos inexistentes")
                    continue
                if k >= 2 and not set(lower[left].endpoints) & set(lower[right].endpoints):
                    problems.append(f"árbol {k}: la arista {e.key} viola la condición de proximidad")
                pairs.append((left, right))
            if problems:
                break
            if len(np.unique(components(nodes, pairs))) != 1:
                problems.append(f"árbol {k}: no es conexo")
                break
            lower = {e.union: e for e in edges}
            nodes = unions
        return problems

    def is_vine(self) -> bool:
        return not self.violations()

    # --- Serialización ---

    def to_dict(self) -> dict[str, Any]:
        return {
            "vertices": [list(v) for v in sorted(self.vertices)],
            "trees": [[e.to_dict() for e in level] for level in self.levels],
        }

    @classmethod
    def from_dict(cls, payload: dict[str, Any]) -> "VineStructure":
        try:
            trees = payload["trees"]
            edges = [[VineEdge.from_dict(e) for e in level] for level in trees]
            if "vertices" in payload:
                vertices = frozenset(as_vertex(v) for v in payload["vertices"])
            else:
                vertices = frozenset(v for level in edges for e in level for v in e.union)
        except (KeyError, TypeError) as e:
            raise StructureError(f"Estructura JSON mal formada: {e}") from e
        return cls(vertices, tuple(tuple(level) for level in edges))


# ==========================================
# Operaciones sobre estructuras
# ==========================================

def complete_union(structure: VineStructure, edge: VineEdge) -> frozenset[Vertex]:
    """Vértices del primer árbol alcanzables desde la arista."""
    if edge not in structure:
        raise EdgeLookupError(f"La arista {edge.key} no pertenece a la estructura")
    return edge.union


def label_edges(vertices: Iterable[Sequence[int]], trees: Sequence[Sequence[tuple]]) -> VineStructure:
    """
    Calcula etiquetas (a, b | D) a partir de la secuencia de árboles sin etiquetar.

    Args:
        vertices: Vértices del primer árbol.
        trees: trees[0] son pares de vértices; trees[k] (k >= 1) son pares de índices
            de aristas del árbol anterior.
    Returns:
        VineStructure etiquetada.
    """
    vertex_set = frozenset(as_vertex(v) for v in vertices)
    levels: list[tuple[VineEdge, ...]] = []
    previous: list[VineEdge] = []
    for k, pairs in enumerate(trees, start=1):
        current = []
        for x, y in pairs:
            if k == 1:
                a, b = as_vertex(x), as_vertex(y)
                if a not in vertex_set or b not in vertex_set:
                    raise StructureError(f"árbol 1: vértice desconocido en {a}-{b}")
                current.append(VineEdge((a, b)))
                continue
            try:
                e1, e2 = previous[x], previous[y]
            except IndexError as e:
                raise StructureError(f"árbol {k}: índice de arista inexistente ({x}, {y})") from e
            if not set(e1.endpoints) & set(e2.endpoints):
                raise StructureError(
                    f"árbol {k}: violación de proximidad al unir {e1.key} con {e2.key}"
                )
            current.append(edge_between(e1.union, e2.union))
        levels.append(tuple(current))
        previous = current
    return VineStructure(vertex_set, tuple(levels))


def restrict(vine: VineStructure, t: int, m: int) -> VineStructure:
    """Elimina todo vértice/arista cuya unión completa tenga tiempos fuera de [t, t+m]."""
    times = vine.times
    if not times:
        raise IndexError("Estructura vacía")
    first, last = times[0], times[-1]
    if not (first <= t <= last) or not (0 <= m <= last - t):
        raise IndexError(f"Ventana fuera de rango: t={t}, m={m}, tiempos {first}..{last}")
    lo, hi = t, t + m
    vertices = frozenset(v for v in vine.vertices if lo <= v.time <= hi)
    levels = tuple(
        tuple(e for e in level if e.min_time >= lo and e.max_time <= hi)
        for level in vine.levels[: max(len(vertices) - 1, 0)]
    )
    return VineStructure(vertices, levels)


def is_translation(g1: VineStructure, g2: VineStructure) -> bool:
    """True si un único desplazamiento temporal lleva g1 biyectivamente sobre g2."""
    if not g1.vertices or not g2.vertices:
        return g1.vertices == g2.vertices
    tau = g2.times[0] - g1.times[0]
    if g1.shift(tau).vertices != g2.vertices or len(g1.levels) != len(g2.levels):
        return False
    return all(
        {e.shift(tau) for e in l1} == set(l2) for l1, l2 in zip(g1.levels, g2.levels)
    )
