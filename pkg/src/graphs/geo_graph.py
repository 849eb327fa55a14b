from dataclasses import dataclass, replace
from functools import cached_property
from typing import List, Sequence, Tuple

import numpy as np
import scipy.sparse as sp

from errors import ValidationError


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.ascontiguousarray(array)
    array.setflags(write=False)

    return array


@dataclass(frozen=True, eq=False)
class GeoGraph:
    """
    Unstructured graph of active grid cells

    Attributes
    ----------
    node_features : np.ndarray
        (node_count, f) feature matrix
    edges : np.ndarray
        (E, 2) unordered node pairs, ``u < v``, sorted lexicographically
    node_origin : np.ndarray
        (node_count, 3) source cell index (i, j, k) of each node
    """

    node_features: np.ndarray
    edges: np.ndarray
    node_origin: np.ndarray

    def __post_init__(self):
        features = np.asarray(self.node_features, dtype=np.float64)
        if features.ndim != 2:
            raise ValidationError("node_features must be a (nodes, channels) matrix")

        edges = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        origin = np.asarray(self.node_origin, dtype=np.int64).reshape(-1, 3)

        n = features.shape[0]
        if origin.shape[0] != n:
            raise ValidationError("node_origin must have one row per node")

        if edges.size:
            if np.any(edges[:, 0] >= edges[:, 1]):
                raise ValidationError("edges must be (u, v) with u < v, no self-loops")
            if edges.max() >= n:
                raise ValidationError("edge endpoint out of range")
            order = np.lexsort((edges[:, 1], edges[:, 0]))
            edges = edges[order]
            if np.any(np.all(np.diff(edges, axis=0) == 0, axis=1)):
                raise ValidationError("duplicate edge")

        if np.unique(origin, axis=0).shape[0] != n:
            raise ValidationError("node_origin values must be unique")

        object.__setattr__(self, "node_features", _frozen(features))
        object.__setattr__(self, "edges", _frozen(edges))
        object.__setattr__(self, "node_origin", _frozen(origin))

    @property
    def node_count(self) -> int:
        return self.node_features.shape[0]

    @property
    def feature_count(self) -> int:
        return self.node_features.shape[1]

    @cached_property
    def adjacency(self) -> sp.csr_matrix:
        n = self.node_count
        u, v = self.edges[:, 0], self.edges[:, 1]
        data = np.ones(2 * u.size)
        matrix = sp.coo_matrix(
            (data, (np.concatenate([u, v]), np.concatenate([v, u]))), shape=(n, n)
        )

        return matrix.tocsr()

    @cached_property
    def degree(self) -> np.ndarray:
        return np.diff(self.adjacency.indptr)

    def neighbours(self, node: int) -> np.ndarray:
        csr = self.adjacency
        return csr.indices[csr.indptr[node] : csr.indptr[node + 1]]

    def has_edge(self, u: int, v: int) -> bool:
        if u == v:
            return False
        return bool(np.any(self.neighbours(u) == v))

    def directed_edges(self) -> Tuple[np.ndarray, np.ndarray]:
        """
        Both directions of every edge, as (source, target) index arrays
        """
        u, v = self.edges[:, 0], self.edges[:, 1]

        return np.concatenate([u, v]), np.concatenate([v, u])

    def with_features(self, features: np.ndarray) -> "GeoGraph":
        """
        Same topology, new node features
        """
        features = np.asarray(features, dtype=np.float64)
        if features.shape[0] != self.node_count:
            raise ValidationError(
                f"expected {self.node_count} feature rows, got {features.shape[0]}"
            )

        return replace(self, node_features=features)

    def permuted(self, order: Sequence[int]) -> "GeoGraph":
        """
        Relabel nodes so that new node ``n`` is old node ``order[n]``
        """
        order = np.asarray(order, dtype=np.int64)
        inverse = np.empty_like(order)
        inverse[order] = np.arange(order.size)

        edges = inverse[self.edges]
        edges = np.sort(edges, axis=1)

        return GeoGraph(
            node_features=self.node_features[order],
            edges=edges,
            node_origin=self.node_origin[order],
        )


@dataclass(frozen=True)
class KSet:
    """
    A sorted set of ``k`` distinct node ids
    """

    members: Tuple[int, ...]

    def __post_init__(self):
        members = tuple(sorted(int(m) for m in self.members))
        if len(members) == 0:
            raise ValidationError("a k-set needs at least one member")
        if len(set(members)) != len(members):
            raise ValidationError("k-set members must be distinct")
        object.__setattr__(self, "members", members)

    @property
    def k(self) -> int:
        return len(self.members)


def cell_index(dims: Tuple[int, int, int], i: int, j: int, k: int) -> int:
    """
    Row-major (C order) flat index of cell (i, j, k) on an (nx, ny, nz) grid
    """
    _, ny, nz = dims
    return (i * ny + j) * nz + k


def build_grid_graph(
    dims: Tuple[int, int, int], active_mask: np.ndarray, features: np.ndarray
) -> GeoGraph:
    """
    One node per active cell, 6-connectivity between active face neighbours

    Parameters
    ----------
    dims : Tuple[int, int, int]
        (nx, ny, nz)
    active_mask : np.ndarray
        Per-cell booleans, flat in C order or shaped ``dims``
    features : np.ndarray
        Per-cell feature vectors, shaped (cells, f) or ``dims + (f,)``

    Returns
    -------
    GeoGraph
    """
    nx, ny, nz = (int(d) for d in dims)
    if min(nx, ny, nz) <= 0:
        raise ValidationError(f"grid dims must be positive, got {dims}")

    n_cells = nx * ny * nz
    active = np.asarray(active_mask, dtype=bool).reshape(-1)
    if active.size != n_cells:
        raise ValidationError(
            f"active_mask has {active.size} cells, expected {n_cells}"
        )

    features = np.asarray(features, dtype=np.float64).reshape(n_cells, -1)

    if not active.any():
        raise ValidationError("empty graph: no active cells")

    node_of_cell = np.full(n_cells, -1, dtype=np.int64)
    node_of_cell[active] = np.arange(int(active.sum()))
    node_grid = node_of_cell.reshape(nx, ny, nz)

    pairs: List[np.ndarray] = []
    for axis in range(3):
        lo = [slice(None)] * 3
        hi = [slice(None)] * 3
        lo[axis] = slice(0, -1)
        hi[axis] = slice(1, None)
        a = node_grid[tuple(lo)].reshape(-1)
        b = node_grid[tuple(hi)].reshape(-1)
        keep = (a >= 0) & (b >= 0)
        pairs.append(np.stack([a[keep], b[keep]], axis=1))

    edges = np.concatenate(pairs, axis=0)
    edges = np.sort(edges, axis=1)

    ii, jj, kk = np.unravel_index(np.flatnonzero(active), (nx, ny, nz))

    return GeoGraph(
        node_features=features[active],
        edges=edges,
        node_origin=np.stack([ii, jj, kk], axis=1),
    )


def graph_to_grid(
    graph: GeoGraph, dims: Tuple[int, int, int], fill: float = 0.0
) -> np.ndarray:
    """
    Scatter node features back onto a ``dims + (f,)`` grid
    """
    grid = np.full(tuple(dims) + (graph.feature_count,), fill, dtype=np.float64)
    i, j, k = graph.node_origin.T
    grid[i, j, k] = graph.node_features

    return grid
