from dataclasses import dataclass
from itertools import combinations
from typing import Dict, List, Set, Tuple

import numpy as np

from errors import ValidationError

from .geo_graph import GeoGraph, KSet

# k-set enumeration grows as C(V, k); beyond this the hierarchy is test-scale only
max_nodes_for_kset = 64


def neighbourhood(s: KSet, graph: GeoGraph) -> Tuple[Set[KSet], Set[KSet]]:
    """
    Split N(s) = {t : |s ∩ t| = k - 1} into local and global parts

    ``t`` is local when every swapped-out node ``u ∈ s \\ t`` is joined by an
    edge to every swapped-in node ``v ∈ t \\ s``. With one node swapped per
    neighbour this is a single edge test.

    Parameters
    ----------
    s : KSet
        The k-set whose neighbourhood is wanted
    graph : GeoGraph
        The underlying node graph

    Returns
    -------
    Tuple[Set[KSet], Set[KSet]]
    (N_L(s), N_G(s)), disjoint, union equal to N(s)
    """
    n = graph.node_count
    if any(m < 0 or m >= n for m in s.members):
        raise ValidationError(f"k-set {s.members} has ids outside [0, {n})")

    members = set(s.members)
    outside = [v for v in range(n) if v not in members]

    local: Set[KSet] = set()
    global_: Set[KSet] = set()

    for u in s.members:
        kept = members - {u}
        for v in outside:
            t = KSet(tuple(kept | {v}))
            if graph.has_edge(u, v):
                local.add(t)
            else:
                global_.add(t)

    return local, global_


def global_mean_trick(graph: GeoGraph, layer_features: np.ndarray) -> np.ndarray:
    """
    Mean of the features over each node's global neighbourhood, for k = 1

    For a single node the global set is everything except itself and its
    face neighbours, so the mean is
    ``(total - local_sum - self) / (V - deg - 1)``, which costs O(V + E).
    Nodes with an empty global set get a zero vector.

    Parameters
    ----------
    graph : GeoGraph
    layer_features : np.ndarray
        (V, d) features of the current layer

    Returns
    -------
    np.ndarray
    (V, d) global aggregates
    """
    h = np.asarray(layer_features, dtype=np.float64)
    if h.shape[0] != graph.node_count:
        raise ValidationError("layer_features must have one row per node")

    src, dst = graph.directed_edges()
    local_sum = np.zeros_like(h)
    np.add.at(local_sum, dst, h[src])

    total = h.sum(axis=0, keepdims=True)
    count = graph.node_count - graph.degree - 1

    aggregate = np.zeros_like(h)
    has_global = count > 0
    aggregate[has_global] = (total - local_sum - h)[has_global] / count[
        has_global, None
    ]

    return aggregate


@dataclass(frozen=True, eq=False)
class KSetIndex:
    """
    All k-sets of a graph with their local and global neighbour pairs

    Pairs are stored as (source, target) row indices so aggregation is a
    gather followed by a scatter-add.
    """

    k: int
    members: np.ndarray
    local_pairs: np.ndarray
    global_pairs: np.ndarray

    @property
    def size(self) -> int:
        return self.members.shape[0]


def build_kset_index(graph: GeoGraph, k: int) -> KSetIndex:
    """
    Enumerate [V^k] and the neighbourhood of every k-set

    k = 1 is cheap; k >= 2 is limited to small graphs.
    """
    if k < 1:
        raise ValidationError(f"k must be >= 1, got {k}")
    if k > 1 and graph.node_count > max_nodes_for_kset:
        raise ValidationError(
            f"k={k} needs at most {max_nodes_for_kset} nodes, "
            + f"graph has {graph.node_count}"
        )

    ksets = [KSet(c) for c in combinations(range(graph.node_count), k)]
    position: Dict[Tuple[int, ...], int] = {s.members: i for i, s in enumerate(ksets)}

    local_pairs: List[Tuple[int, int]] = []
    global_pairs: List[Tuple[int, int]] = []
    for target, s in enumerate(ksets):
        local, global_ = neighbourhood(s, graph)
        local_pairs.extend((position[t.members], target) for t in local)
        global_pairs.extend((position[t.members], target) for t in global_)

    def as_pairs(pairs: List[Tuple[int, int]]) -> np.ndarray:
        array = np.asarray(sorted(pairs), dtype=np.int64).reshape(-1, 2)
        return array

    return KSetIndex(
        k=k,
        members=np.asarray([s.members for s in ksets], dtype=np.int64),
        local_pairs=as_pairs(local_pairs),
        global_pairs=as_pairs(global_pairs),
    )
