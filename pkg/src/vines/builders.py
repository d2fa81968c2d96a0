"""Constructores de vines de sección cruzada (un único tiempo)."""
from itertools import combinations
from typing import Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import minimum_spanning_tree

from src.vines.graph import Vertex, VineEdge, VineStructure, edge_between, label_edges


def d_vine(order: Sequence[int], time: int = 1) -> VineStructure:
    """D-vine (camino) sobre las variables en el orden dado."""
    vertices = [Vertex(time, j) for j in order]
    n = len(vertices)
    trees = [[(vertices[i], vertices[i + 1]) for i in range(n - 1)]]
    trees += [[(i, i + 1) for i in range(n - k)] for k in range(2, n)]
    return label_edges(vertices, trees)


def c_vine(order: Sequence[int], time: int = 1) -> VineStructure:
    """C-vine (estrella) con raíces sucesivas order[0], order[1], ..."""
    vertices = [Vertex(time, j) for j in order]
    n = len(vertices)
    trees = [[(vertices[0], vertices[i]) for i in range(1, n)]]
    trees += [[(0, i) for i in range(1, n - k + 1)] for k in range(2, n)]
    return label_edges(vertices, trees)


def spanning_tree(n: int, pairs: Sequence[tuple[int, int]], weights: Sequence[float]) -> list[tuple[int, int]]:
    """Árbol generador de peso máximo sobre los pares candidatos (grafo conexo)."""
    if n <= 1:
        return []
    w = np.asarray(weights, dtype=float)
    # csgraph ignora pesos nulos: se minimiza (max + 1 - w) > 0
    cost = w.max() + 1.0 - w
    rows = [p[0] for p in pairs]
    cols = [p[1] for p in pairs]
    graph = coo_matrix((cost, (rows, cols)), shape=(n, n)).tocsr()
    tree = minimum_spanning_tree(graph).tocoo()
    return sorted((min(i, j), max(i, j)) for i, j in zip(tree.row, tree.col))


def admissible_pairs(edges: Sequence[VineEdge]) -> list[tuple[int, int]]:
    """Pares de aristas que comparten un nodo (condición de proximidad)."""
    return [
        (i, j)
        for i, j in combinations(range(len(edges)), 2)
        if set(edges[i].endpoints) & set(edges[j].endpoints)
    ]


def random_rvine(variables: Sequence[int], rng: np.random.Generator, time: int = 1) -> VineStructure:
    """R-vine aleatorio: cada árbol es un árbol generador aleatorio del grafo admisible."""
    vertices = [Vertex(time, j) for j in variables]
    n = len(vertices)
    pairs = list(combinations(range(n), 2))
    chosen = spanning_tree(n, pairs, rng.uniform(size=len(pairs)))
    current = [VineEdge((vertices[i], vertices[j])) for i, j in chosen]
    levels = [tuple(current)]
    for _ in range(2, n):
        pairs = admissible_pairs(current)
        chosen = spanning_tree(len(current), pairs, rng.uniform(size=len(pairs)))
        current = [edge_between(current[i].union, current[j].union) for i, j in chosen]
        levels.append(tuple(current))
    return VineStructure(frozenset(vertices), tuple(levels))
