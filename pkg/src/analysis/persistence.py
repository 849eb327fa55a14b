"""
Persistent homology of latent point clouds

H0 comes straight from the Euclidean minimum spanning tree: in the
Vietoris-Rips filtration every component is born at 0 and dies at the
length of the MST edge that merges it. H1 is computed on a farthest-point
subsample with a truncated Rips complex.
"""
import logging
from dataclasses import dataclass
from typing import List, Optional, Tuple

import gudhi
import numpy as np
import pandas as pd
from scipy.sparse.csgraph import minimum_spanning_tree
from scipy.spatial.distance import pdist, squareform

from errors import ValidationError
from utils.rng import RngSeed

logger = logging.getLogger(__name__)

# coincident points would give zero-weight edges, which sparse MSTs drop
min_distance = 1e-12


@dataclass(frozen=True)
class PersistenceDiagram:
    dimension: int
    pairs: np.ndarray

    def __post_init__(self):
        if self.dimension not in (0, 1):
            raise ValidationError(f"unsupported homology dimension {self.dimension}")
        if len(self.pairs) and np.any(self.pairs[:, 1] < self.pairs[:, 0]):
            raise ValidationError("persistence pairs must die after they are born")

    @property
    def lifetimes(self) -> np.ndarray:
        if not len(self.pairs):
            return np.zeros(0)
        return self.pairs[:, 1] - self.pairs[:, 0]

    def finite(self) -> np.ndarray:
        return self.pairs[np.isfinite(self.pairs[:, 1])]

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {
                "dimension": self.dimension,
                "birth": self.pairs[:, 0] if len(self.pairs) else [],
                "death": self.pairs[:, 1] if len(self.pairs) else [],
            }
        )


def mst_edges(codes: np.ndarray) -> np.ndarray:
    """
    (n - 1, 3) rows of (i, j, length), shortest first
    """
    distances = squareform(np.maximum(pdist(codes), min_distance))
    tree = minimum_spanning_tree(distances).tocoo()
    edges = np.stack([tree.row, tree.col, tree.data], axis=1)

    return edges[np.argsort(edges[:, 2], kind="stable")]


def h0_diagram(codes: np.ndarray) -> PersistenceDiagram:
    codes = np.atleast_2d(np.asarray(codes, dtype=np.float64))
    deaths = mst_edges(codes)[:, 2] if len(codes) > 1 else np.zeros(0)
    deaths = np.append(deaths, np.inf)

    return PersistenceDiagram(0, np.stack([np.zeros_like(deaths), deaths], axis=1))


def farthest_point_subsample(
    codes: np.ndarray, count: int, start: int = 0
) -> np.ndarray:
    """
    Indices of a max-min subsample, greedy from ``start``
    """
    if count >= len(codes):
        return np.arange(len(codes))

    chosen = [start]
    nearest = np.linalg.norm(codes - codes[start], axis=1)
    for _ in range(count - 1):
        index = int(np.argmax(nearest))
        chosen.append(index)
        nearest = np.minimum(nearest, np.linalg.norm(codes - codes[index], axis=1))

    return np.array(chosen)


def h1_diagram(codes: np.ndarray, threshold: float) -> PersistenceDiagram:
    """
    H1 of the Rips complex truncated at ``threshold``; classes still alive
    at the threshold are reported as dying there
    """
    if len(codes) < 4:
        raise ValidationError("H1 needs a subsample of at least 4 points")

    rips = gudhi.RipsComplex(points=codes, max_edge_length=threshold)
    tree = rips.create_simplex_tree(max_dimension=2)
    tree.compute_persistence(homology_coeff_field=2)
    intervals = np.asarray(
        tree.persistence_intervals_in_dimension(1), dtype=np.float64
    ).reshape(-1, 2)

    intervals[:, 1] = np.minimum(intervals[:, 1], threshold)
    intervals = intervals[intervals[:, 1] > intervals[:, 0]]

    order = np.argsort(intervals[:, 0], kind="stable")

    return PersistenceDiagram(1, intervals[order])


def persistence(
    codes: np.ndarray,
    max_dim: int = 1,
    subsample: int = 200,
    seed: Optional[int] = 0,
) -> List[PersistenceDiagram]:
    """
    H0 (and H1) persistence diagrams of a point cloud

    Parameters
    ----------
    codes : np.ndarray
        (n, m) finite latent codes
    max_dim : int
        0 or 1
    subsample : int
        Farthest-point subsample size for H1
    seed : Optional[int]
        Picks the subsample's starting point; None starts at index 0

    Returns
    -------
    List[PersistenceDiagram]
    One diagram per dimension, H0 first
    """
    codes = np.atleast_2d(np.asarray(codes, dtype=np.float64))
    if not np.all(np.isfinite(codes)):
        raise ValidationError("latent codes must be finite")
    if max_dim not in (0, 1):
        raise ValidationError(f"max_dim must be 0 or 1, got {max_dim}")

    h0 = h0_diagram(codes)
    diagrams = [h0]
    if max_dim == 0:
        return diagrams

    start = 0
    if seed is not None:
        start = int(RngSeed(seed).child("subsample").generator().integers(len(codes)))
    index = farthest_point_subsample(codes, subsample, start)
    if len(index) < 4:
        raise ValidationError(
            f"H1 needs a subsample of at least 4 points, got {len(index)}"
        )

    finite = h0.finite()
    largest = float(np.max(finite[:, 1])) if len(finite) else 0.0
    threshold = 2.0 * largest

    logger.info(
        f"H1 on {len(index)} of {len(codes)} codes, threshold {threshold:.4g}",
        extra={"subsample": len(index), "threshold": threshold},
    )
    diagrams.append(h1_diagram(codes[index], threshold))

    return diagrams


def most_persistent(diagram: PersistenceDiagram, count: int = 5) -> np.ndarray:
    """
    The ``count`` longest-lived finite bars, longest first
    """
    finite = diagram.finite()
    order = np.argsort(-(finite[:, 1] - finite[:, 0]), kind="stable")

    return finite[order[:count]]


def h0_outliers(codes: np.ndarray, count: int = 5) -> List[Tuple[int, float]]:
    """
    Points that join the rest of the cloud last: (index, merge distance)
    pairs, where the merge distance is the shortest MST edge at the point
    """
    codes = np.atleast_2d(np.asarray(codes, dtype=np.float64))
    if len(codes) < 2:
        return []

    merge = np.full(len(codes), np.inf)
    for i, j, length in mst_edges(codes):
        merge[int(i)] = min(merge[int(i)], length)
        merge[int(j)] = min(merge[int(j)], length)

    order = np.argsort(-merge, kind="stable")[:count]

    return [(int(i), float(merge[i])) for i in order]
