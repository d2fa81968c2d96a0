"""
Selección de estructura S-vine por reglas codiciosas sobre |τ de Kendall|.

- Sección cruzada: árbol generador máximo nivel por nivel (estilo Dissmann) con pares del mismo
  tiempo agrupados sobre t.
- Permutaciones: i_1, j_1 maximizan |τ| entre (t, i_1) y (t+1, j_1); cada índice siguiente es el
  compatible que maximiza |τ| de la nueva arista cruzada, con empates por menor índice.
"""
import logging
from typing import Optional, Sequence

import numpy as np

from src.config import settings
from src.copulas.bicop import BivariateCopula
from src.copulas.families import FamilyTag, expand_menu
from src.copulas.fitting import fit_pair, sample_tau, select_family
from src.estimation.model import PseudoSample, window_values
from src.estimation.recursion import ClassResolver, HCache
from src.utils.errors import CopulaDomainError, NumericalError
from src.vines.builders import admissible_pairs, d_vine, spanning_tree
from src.vines.graph import Vertex, VineEdge, VineStructure, edge_between
from src.vines.stationary import (
    SVineSpec,
    cross_edges,
    extends_prefix,
    label_index,
    tvine_permutation,
)

logger = logging.getLogger(__name__)

KINDS = ("svine", "mvine", "dvine", "tvine")


def _fit_edge(x_a: np.ndarray, x_b: np.ndarray, menu: Sequence[FamilyTag]) -> BivariateCopula:
    try:
        if len(menu) == 1:
            return fit_pair(x_a, x_b, menu[0])
        return select_family(x_a, x_b, menu)
    except (CopulaDomainError, NumericalError) as e:
        logger.warning(f"⚠️ Selección: {e}. Se usa Independence para propagar h-valores")
        return BivariateCopula.independence()


class _Workbench:
    """Cópulas provisorias para propagar h-valores durante la selección."""

    def __init__(self, values: np.ndarray, menu: Sequence[FamilyTag]):
        self.values = values
        self.menu = menu
        self.copulas: dict[str, BivariateCopula] = {}
        self.resolver = ClassResolver((), self.copulas)
        self.caches = {s: HCache(window_values(values, s), self.resolver) for s in (0, 1) if s < values.shape[0]}

    def tau(self, edge: VineEdge) -> float:
        x_a, x_b = self.caches[edge.span].pair(edge)
        return abs(sample_tau(x_a, x_b))

    def add(self, edge: VineEdge) -> None:
        self.resolver.add(edge)
        x_a, x_b = self.caches[edge.span].pair(edge)
        self.copulas[edge.canonical().key] = _fit_edge(x_a, x_b, self.menu)


def _argmax(candidates: Sequence, score):
    """Máximo por puntaje; empates por el primer candidato (orden creciente de índice)."""
    best, best_score = None, -np.inf
    for c in candidates:
        s = score(c)
        if s > best_score + 1e-12:
            best, best_score = c, s
    return best


# ==========================================
# Sección cruzada
# ==========================================

def dissmann_cross_section(bench: _Workbench, variables: Sequence[int]) -> VineStructure:
    """Árbol generador de |τ| máximo en cada nivel; cada arista se ajusta antes de pasar al siguiente."""
    vertices = [Vertex(1, j) for j in variables]
    n = len(vertices)
    if n == 1:
        return VineStructure(frozenset(vertices))
    candidates = [VineEdge((vertices[i], vertices[j])) for i in range(n) for j in range(i + 1, n)]
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    weights = [bench.tau(e) for e in candidates]
    chosen = spanning_tree(n, pairs, weights)
    current = [VineEdge((vertices[i], vertices[j])) for i, j in chosen]
    levels = [tuple(current)]
    for e in current:
        bench.add(e)

    for k in range(2, n):
        pairs = admissible_pairs(current)
        candidates = [edge_between(current[i].union, current[j].union) for i, j in pairs]
        weights = [bench.tau(e) for e in candidates]
        chosen = spanning_tree(len(current), pairs, weights)
        current = [edge_between(current[i].union, current[j].union) for i, j in chosen]
        for e in current:
            bench.add(e)
        levels.append(tuple(current))
        logger.info(f"Sección cruzada, árbol {k}: {[e.key for e in current]}")
    return VineStructure(frozenset(vertices), tuple(levels))


def greedy_path(values: np.ndarray) -> list[int]:
    """Orden de camino D-vine: parte del par de mayor |τ| y extiende por el extremo más fuerte."""
    d = values.shape[1]
    if d == 1:
        return [1]
    tau = np.eye(d)
    for i in range(d):
        for j in range(i + 1, d):
            tau[i, j] = tau[j, i] = abs(sample_tau(values[:, i], values[:, j]))
    pairs = [(i, j) for i in range(d) for j in range(i + 1, d)]
    a, b = _argmax(pairs, lambda p: tau[p])
    path = [a, b]
    while len(path) < d:
        rest = [j for j in range(d) if j not in path]
        options = [(0, j) for j in rest] + [(1, j) for j in rest]
        end, j = _argmax(options, lambda o: tau[path[0] if o[0] == 0 else path[-1], o[1]])
        if end == 0:
            path.insert(0, j)
        else:
            path.append(j)
    return [j + 1 for j in path]


# ==========================================
# Permutaciones
# ==========================================

def _first_link(bench: _Workbench, variables: Sequence[int]) -> tuple[int, int]:
    options = [(a, b) for a in variables for b in variables]
    return _argmax(options, lambda ab: bench.tau(VineEdge((Vertex(1, ab[0]), Vertex(2, ab[1])))))


def greedy_permutations(bench: _Workbench, cs: VineStructure) -> tuple[tuple[int, ...], tuple[int, ...]]:
    variables = cs.variables
    d = len(variables)
    index = label_index(cs)
    a, b = _first_link(bench, variables)
    in_perm, out_perm = [a], [b]
    bench.add(VineEdge((Vertex(1, a), Vertex(2, b))))

    for k in range(2, d + 1):
        in_options = [i for i in variables if i not in in_perm and extends_prefix(index, in_perm, i)]
        out_options = [j for j in variables if j not in out_perm and extends_prefix(index, out_perm, j)]
        head_in = frozenset(Vertex(1, i) for i in in_perm)
        head_out = frozenset(Vertex(2, j) for j in out_perm)
        i_next = _argmax(in_options, lambda i: bench.tau(VineEdge((Vertex(1, i), Vertex(2, out_perm[0])), head_in)))
        j_next = _argmax(out_options, lambda j: bench.tau(VineEdge((Vertex(1, in_perm[0]), Vertex(2, j)), head_out)))
        in_perm.append(i_next)
        out_perm.append(j_next)
        if k < d:
            for e in cross_edges(in_perm, out_perm, k, 1):
                bench.add(e)
    return tuple(in_perm), tuple(out_perm)


def select_structure(
    u,
    p: int = 1,
    family_menu: Optional[Sequence[str]] = None,
    kind: str = "svine",
) -> SVineSpec:
    """
    Elige sección cruzada y permutaciones de entrada/salida a partir de la muestra.

    Args:
        u: PseudoSample o matriz T×d en (0,1).
        p: Orden de Markov de la especificación devuelta.
        family_menu: Familias para las cópulas provisorias que propagan h-valores.
        kind: "svine" (codicioso), "mvine" (camino, in = out), "dvine" (camino, in = reverso de out)
            o "tvine" (i_1/j_1 codiciosos, luego menores índices compatibles).
    """
    if kind not in KINDS:
        raise ValueError(f"Tipo de estructura desconocido: {kind}. Opciones: {KINDS}")
    values = u.values if isinstance(u, PseudoSample) else np.atleast_2d(np.asarray(u, dtype=float))
    d = values.shape[1]
    variables = tuple(range(1, d + 1))
    if d == 1:
        return SVineSpec(VineStructure(frozenset([Vertex(1, 1)])), (1,), (1,), p)

    bench = _Workbench(values, expand_menu(family_menu or settings.DEFAULT_FAMILIES))
    if kind in ("mvine", "dvine"):
        order = greedy_path(values)
        cs = d_vine(order)
        forward, backward = tuple(order), tuple(reversed(order))
        if kind == "mvine":
            options = [(forward, forward), (backward, backward)]
        else:
            options = [(backward, forward), (forward, backward)]
        in_perm, out_perm = _argmax(
            options, lambda o: bench.tau(VineEdge((Vertex(1, o[0][0]), Vertex(2, o[1][0]))))
        )
    else:
        cs = dissmann_cross_section(bench, variables)
        if kind == "tvine":
            a, b = _first_link(bench, variables)
            in_perm, out_perm = tvine_permutation(cs, a), tvine_permutation(cs, b)
        else:
            in_perm, out_perm = greedy_permutations(bench, cs)

    spec = SVineSpec(cs, in_perm, out_perm, p)
    logger.info(f"Estructura seleccionada ({kind}): in={spec.in_perm}, out={spec.out_perm}")
    return spec
