"""
Vines estacionarios (S-vines): permutaciones compatibles, construcción explícita, verificación
de estacionariedad, clases de traslación y truncamiento de Markov.
"""
import logging
from dataclasses import dataclass
from functools import cached_property
from itertools import combinations
from typing import Any, Optional, Sequence

from src.config import settings
from src.vines.graph import (
    Vertex,
    VineEdge,
    VineStructure,
    components,
    edge_between,
    is_translation,
    restrict,
)
from src.utils.errors import StructureError

logger = logging.getLogger(__name__)


# ==========================================
# Permutaciones compatibles
# ==========================================

def label_index(cs: VineStructure) -> set[tuple[frozenset[int], frozenset[int]]]:
    return {
        (frozenset(v.var for v in e.conditioned), frozenset(v.var for v in e.conditioning))
        for e in cs.edges()
    }


def extends_prefix(index, prefix: Sequence[int], candidate: int) -> bool:
    """¿Existe una arista ({candidate, i_r} | prefix \\ i_r) para algún i_r del prefijo?"""
    if not prefix:
        return True
    rest = frozenset(prefix)
    return any((frozenset((candidate, r)), rest - {r}) in index for r in prefix)


def is_compatible(cs: VineStructure, perm: Sequence[int]) -> bool:
    perm = tuple(int(i) for i in perm)
    if sorted(perm) != list(cs.variables):
        return False
    index = label_index(cs)
    return all(extends_prefix(index, perm[:k], perm[k]) for k in range(1, len(perm)))


def enumerate_compatible(cs: VineStructure, first: Optional[int] = None) -> list[tuple[int, ...]]:
    """Todas las permutaciones compatibles (opcionalmente con i_1 fijo), por búsqueda en profundidad."""
    d = len(cs.variables)
    if d > settings.MAX_ENUM_DIM:
        raise StructureError(
            f"Enumeración exhaustiva limitada a d <= {settings.MAX_ENUM_DIM} (d={d}); "
            "verifique permutaciones individuales con is_compatible"
        )
    index = label_index(cs)
    variables = cs.variables
    starts = [first] if first is not None else list(variables)
    found: list[tuple[int, ...]] = []

    def extend(prefix: list[int]) -> None:
        if len(prefix) == d:
            found.append(tuple(prefix))
            return
        for j in variables:
            if j not in prefix and extends_prefix(index, prefix, j):
                extend(prefix + [j])

    for s in starts:
        extend([s])
    return found


def tvine_permutation(cs: VineStructure, first: int) -> tuple[int, ...]:
    """Completa una permutación desde i_1 eligiendo siempre el menor índice compatible."""
    index = label_index(cs)
    perm = [first]
    while len(perm) < len(cs.variables):
        perm.append(next(j for j in cs.variables if j not in perm and extends_prefix(index, perm, j)))
    return tuple(perm)


# ==========================================
# Especificación S-vine
# ==========================================

@dataclass(frozen=True)
class SVineSpec:
    cross_section: VineStructure
    in_perm: tuple[int, ...]
    out_perm: tuple[int, ...]
    markov_order: int = 1

    def __post_init__(self):
        cs = self.cross_section
        if len(cs.times) != 1:
            raise StructureError(f"La sección cruzada debe tener un único tiempo: {cs.times}")
        if cs.times[0] != 1:
            object.__setattr__(self, "cross_section", cs.shift(1 - cs.times[0]))
        object.__setattr__(self, "in_perm", tuple(int(i) for i in self.in_perm))
        object.__setattr__(self, "out_perm", tuple(int(j) for j in self.out_perm))
        if self.markov_order < 0:
            raise StructureError(f"Orden de Markov negativo: {self.markov_order}")
        if not self.cross_section.is_vine():
            raise StructureError(f"La sección cruzada no es un vine: {self.cross_section.violations()}")
        for name, perm in (("in_perm", self.in_perm), ("out_perm", self.out_perm)):
            if not is_compatible(self.cross_section, perm):
                raise StructureError(f"{name}={perm} no es compatible con la sección cruzada")

    @property
    def d(self) -> int:
        return len(self.cross_section.variables)

    def to_dict(self) -> dict[str, Any]:
        return {
            "d": self.d,
            "markov_order": self.markov_order,
            "cross_section": [[e.to_dict() for e in level] for level in self.cross_section.levels],
            "in_perm": list(self.in_perm),
            "out_perm": list(self.out_perm),
        }

    @classmethod
    def from_dict(cls, payload: dict[str, Any]) -> "SVineSpec":
        try:
            d = int(payload["d"])
            levels = tuple(
                tuple(VineEdge.from_dict(e) for e in level) for level in payload["cross_section"]
            )
            cs = VineStructure(frozenset(Vertex(1, j) for j in range(1, d + 1)), levels)
            return cls(cs, tuple(payload["in_perm"]), tuple(payload["out_perm"]), int(payload.get("markov_order", 1)))
        except (KeyError, TypeError, ValueError) as e:
            if isinstance(e, StructureError):
                raise
            raise StructureError(f"Especificación S-vine mal formada: {e}") from e


# ==========================================
# Construcción
# ==========================================

def cross_edges(in_perm: Sequence[int], out_perm: Sequence[int], k: int, t: int) -> list[VineEdge]:
    """Aristas entre t y t+1 del árbol k (k <= d), r = 1..k."""
    edges = []
    for r in range(1, k + 1):
        a = Vertex(t, in_perm[k - r])
        b = Vertex(t + 1, out_perm[r - 1])
        cond = {Vertex(t, in_perm[s]) for s in range(k - r)} | {Vertex(t + 1, out_perm[s]) for s in range(r - 1)}
        edges.append(VineEdge((a, b), frozenset(cond)))
    return edges


def _continue_level(previous: Sequence[VineEdge], k: int, d: int, T: int) -> list[VineEdge]:
    """
    Árbol k > d: para cada ancho de ventana s se agregan las aristas de alcance exactamente s
    que completan el bosque de la ventana [1, 1+s]; luego se trasladan a todo t.
    """
    edges: set[VineEdge] = set()
    for s in range(T):
        if k > (s + 1) * d - 1:
            continue
        nodes = [n for n in previous if n.max_time <= 1 + s]
        inside = [e for e in edges if e.max_time <= 1 + s]
        by_union = {n.union: n for n in nodes}
        labels = components(
            [n.union for n in nodes], [e.endpoints for e in inside if all(x in by_union for x in e.endpoints)]
        )
        label_of = {n.union: labels[i] for i, n in enumerate(nodes)}
        n_comp = len(set(labels.tolist()))
        if n_comp == 1:
            continue

        candidates = []
        for x, y in combinations(nodes, 2):
            if label_of[x.union] == label_of[y.union]:
                continue
            if not set(x.endpoints) & set(y.endpoints):
                continue
            union = x.union | y.union
            if min(v.time for v in union) != 1 or max(v.time for v in union) != 1 + s:
                continue
            candidates.append(edge_between(x.union, y.union))

        candidates.sort(key=lambda e: (e.conditioned[1].time - e.conditioned[0].time, e.sort_key))
        merged = components(
            [n.union for n in nodes],
            [e.endpoints for e in inside] + [c.endpoints for c in candidates],
        )
        if len(candidates) != n_comp - 1 or len(set(merged.tolist())) != 1:
            raise AssertionError(
                f"Continuación no única en el árbol {k}, ventana de ancho {s}: "
                f"{len(candidates)} candidatas para {n_comp} componentes"
            )
        for c in candidates:
            edges.update(c.shift(tau) for tau in range(T - s))
    return sorted(edges, key=lambda e: e.sort_key)


def build_svine(spec: SVineSpec, T: int) -> VineStructure:
    """
    Construye el S-vine sobre T×d vértices.

    Los árboles 1..d se obtienen de la sección cruzada trasladada y de las aristas cruzadas
    explícitas; los árboles superiores son la única continuación consistente con la proximidad.
    """
    if T < 1:
        raise ValueError(f"T debe ser >= 1: {T}")
    d = spec.d
    vertices = frozenset(Vertex(t, j) for t in range(1, T + 1) for j in spec.cross_section.variables)
    n_levels = T * d - 1
    levels: list[list[VineEdge]] = []
    for k in range(1, min(d, n_levels) + 1):
        edges = [e.shift(t - 1) for t in range(1, T + 1) for e in spec.cross_section.level(k)]
        for t in range(1, T):
            edges.extend(cross_edges(spec.in_perm, spec.out_perm, k, t))
        levels.append(edges)
    for k in range(d + 1, n_levels + 1):
        levels.append(_continue_level(levels[-1], k, d, T))
    return VineStructure(vertices, tuple(tuple(level) for level in levels))


def svine_window(spec: SVineSpec) -> VineStructure:
    """Vine de la ventana de p+1 tiempos, suficiente para un modelo Markov(p)."""
    return build_svine(spec, spec.markov_order + 1)


# ==========================================
# Verificación
# ==========================================

@dataclass(frozen=True)
class StationarityReport:
    stationary: bool
    window: Optional[tuple[int, int]] = None
    reason: str = ""

    def __bool__(self) -> bool:
        return self.stationary


def is_stationary_vine(vine: VineStructure) -> StationarityReport:
    """Recorre las ventanas (t, m) y devuelve la primera que viola la condición de estacionariedad."""
    times = vine.times
    if not times:
        return StationarityReport(False, None, "estructura vacía")
    first, T = times[0], len(times)
    if times != tuple(range(first, first + T)):
        return StationarityReport(False, None, f"tiempos no contiguos: {times}")
    for m in range(T):
        reference = restrict(vine, first, m)
        if not reference.is_vine():
            return StationarityReport(False, (first, m), "; ".join(reference.violations()))
        for t in range(first + 1, first + T - m):
            window = restrict(vine, t, m)
            if not window.is_vine():
                return StationarityReport(False, (t, m), "; ".join(window.violations()))
            if not is_translation(reference, window):
                return StationarityReport(False, (t, m), "no es una traslación de la ventana inicial")
    return StationarityReport(True)


# ==========================================
# Clases de traslación
# ==========================================

@dataclass(frozen=True)
class EdgeClass:
    representative: VineEdge

    @cached_property
    def lag(self) -> int:
        return self.representative.span

    @property
    def level(self) -> int:
        return self.representative.level

    @property
    def key(self) -> str:
        return self.representative.key

    @property
    def sort_key(self) -> tuple:
        return (self.level, self.lag, self.representative.sort_key)

    @classmethod
    def of(cls, edge: VineEdge) -> "EdgeClass":
        return cls(edge.canonical())


def edge_classes(vine: VineStructure) -> dict[VineEdge, EdgeClass]:
    return {e: EdgeClass.of(e) for e in vine.edges()}


def distinct_classes(vine: VineStructure) -> list[EdgeClass]:
    return sorted(set(edge_classes(vine).values()), key=lambda c: c.sort_key)


def markov_truncate(vine: VineStructure, p: int) -> set[EdgeClass]:
    """Clases con alcance temporal > p: se les asigna la cópula de independencia."""
    return {c for c in edge_classes(vine).values() if c.lag > p}


def count_distinct_copulas(T: int, d: int, mode: str = "stationary", p: Optional[int] = None) -> int:
    """Cantidad de pares-cópula distintos según el modo: general, stationary o markov (con p)."""
    if T < 1 or d < 1:
        raise ValueError(f"T y d deben ser positivos: T={T}, d={d}")
    if mode == "general":
        return T * d * (T * d - 1) // 2
    if mode == "stationary":
        return (T - 1) * d * d + d * (d - 1) // 2
    if mode == "markov":
        if p is None or not 0 <= p <= T - 1:
            raise ValueError(f"markov requiere 0 <= p <= T-1: p={p}")
        return p * d * d + d * (d - 1) // 2
    raise ValueError(f"Modo desconocido: {mode}")

