import numpy as np
import pytest

from src.vines.builders import c_vine, d_vine, random_rvine
from src.vines.graph import (
    Vertex,
    VineEdge,
    VineStructure,
    complete_union,
    is_translation,
    label_edges,
    restrict,
)
from src.utils.errors import EdgeLookupError, StructureError


def V(t, j):
    return Vertex(t, j)


def edge(a, b, *cond):
    return VineEdge((V(1, a), V(1, b)), frozenset(V(1, c) for c in cond))


@pytest.fixture
def dvine5():
    return d_vine([1, 2, 3, 4, 5])


# --- Etiquetas ---

def test_dvine_labels(dvine5):
    assert edge(1, 3, 2) in dvine5.level(2)
    assert dvine5.level(4) == (edge(1, 5, 2, 3, 4),)
    assert all(not e.conditioning for e in dvine5.level(1))


@pytest.mark.parametrize("e, expected", [
    (edge(1, 3, 2), {1, 2, 3}),
    (edge(2, 3), {2, 3}),
    (edge(1, 5, 2, 3, 4), {1, 2, 3, 4, 5}),
])
def test_complete_union(dvine5, e, expected):
    assert {v.var for v in complete_union(dvine5, e)} == expected


def test_complete_union_unknown_edge(dvine5):
    with pytest.raises(EdgeLookupError):
        complete_union(dvine5, edge(1, 4))


def test_label_edges_from_unlabeled_trees():
    vertices = [(1, j) for j in range(1, 5)]
    trees = [
        [((1, 1), (1, 2)), ((1, 2), (1, 3)), ((1, 3), (1, 4))],
        [(0, 1), (1, 2)],
        [(0, 1)],
    ]
    vine = label_edges(vertices, trees)
    assert vine.level(2) == (edge(1, 3, 2), edge(2, 4, 3))
    assert vine.level(3) == (edge(1, 4, 2, 3),)
    assert vine.is_vine()


def test_label_edges_rejects_proximity_violation():
    vertices = [(1, j) for j in range(1, 5)]
    trees = [[((1, 1), (1, 2)), ((1, 2), (1, 3)), ((1, 3), (1, 4))], [(0, 2)]]
    with pytest.raises(StructureError):
        label_edges(vertices, trees)


def test_edge_orders_conditioned_pair():
    e = VineEdge((V(2, 1), V(1, 2)))
    assert e.conditioned == (V(1, 2), V(2, 1))
    assert e.canonical() == e
    assert e.shift(3).canonical() == e
    assert e.span == 1


def test_edge_rejects_overlap():
    with pytest.raises(StructureError):
        VineEdge((V(1, 1), V(1, 2)), frozenset([V(1, 1)]))


# --- Validación ---

@pytest.mark.parametrize("builder", [d_vine, c_vine])
def test_builders_produce_vines(builder):
    assert builder([3, 1, 4, 2]).is_vine()


def test_random_rvine_is_vine():
    vine = random_rvine(range(1, 7), np.random.default_rng(12))
    assert vine.is_vine()
    assert vine.n_edges == 15


def test_violations_detect_disconnected_tree():
    vertices = frozenset(V(1, j) for j in range(1, 5))
    broken = VineStructure(vertices, ((edge(1, 2), edge(2, 3), edge(1, 3)),))
    assert not broken.is_vine()
    assert any("conexo" in p for p in broken.violations())


def test_structure_dict_round_trip(dvine5):
    assert VineStructure.from_dict(dvine5.to_dict()) == dvine5


def test_structure_from_dict_malformed():
    with pytest.raises(StructureError):
        VineStructure.from_dict({"vertices": [[1, 1]]})


# --- Restricción y traslación ---

def test_restrict_full_window_is_identity(dvine5):
    assert restrict(dvine5, 1, 0) == dvine5


def test_restrict_out_of_range():
    with pytest.raises(IndexError):
        restrict(d_vine([1, 2]), 1, 3)


def test_translation_of_itself(dvine5):
    assert is_translation(dvine5, dvine5)
    assert is_translation(dvine5, dvine5.shift(4))
    assert not is_translation(dvine5, d_vine([2, 1, 3, 4, 5]).shift(1))
