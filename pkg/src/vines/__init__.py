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
from src.vines.stationary import (
    EdgeClass,
    SVineSpec,
    StationarityReport,
    build_svine,
    count_distinct_copulas,
    distinct_classes,
    edge_classes,
    enumerate_compatible,
    is_compatible,
    is_stationary_vine,
    markov_truncate,
    svine_window,
    tvine_permutation,
)
