import logging
from dataclasses import dataclass, field
from typing import List, Literal, Optional, Sequence

import numpy as np
import pandas as pd
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import dijkstra
from scipy.spatial import cKDTree

from errors import ValidationError
from geodata import Realisation
from model import GwaeCheckpoint, decode_realisation

from .metric import (
    LatentDecoder,
    MetricTensor,
    check_code,
    log_volume_of,
    metrics_at,
    segment_lengths,
)

logger = logging.getLogger(__name__)

PathMetric = Literal["euclidean", "geodesic"]

# zero-weight edges would vanish from the sparse graph
min_edge_weight = 1e-15


@dataclass(frozen=True)
class GeodesicConfig:
    """
    neighbours : int
        Euclidean nearest neighbours each graph node connects to
    chain_factor : int
        The straight chain between the endpoints has steps * chain_factor points
    steps : int
        Interpolation stations along a path
    """

    neighbours: int = 12
    chain_factor: int = 4
    steps: int = 10

    def __post_init__(self):
        if self.neighbours < 1:
            raise ValidationError("geodesic.neighbours must be >= 1")
        if self.chain_factor < 1:
            raise ValidationError("geodesic.chain_factor must be >= 1")
        if self.steps < 2:
            raise ValidationError("geodesic.steps must be >= 2")

    @property
    def chain_points(self) -> int:
        return self.steps * self.chain_factor


@dataclass(frozen=True)
class LatentPath:
    """
    A polyline in latent space with the metric it was built under

    ``segments`` holds the Riemannian length of every segment and
    ``log_volumes`` the log-volume at every point; both come from the
    metrics the path was measured with.
    """

    points: np.ndarray
    metric: PathMetric
    segments: np.ndarray
    log_volumes: np.ndarray

    def __post_init__(self):
        if self.points.ndim != 2 or len(self.points) < 1:
            raise ValidationError("a latent path needs at least one point")
        if len(self.segments) != len(self.points) - 1:
            raise ValidationError("one segment length per consecutive point pair")
        if np.any(self.segments < 0):
            raise ValidationError("segment lengths must be non-negative")

    @property
    def riemannian_length(self) -> float:
        return float(np.sum(self.segments))

    @property
    def euclidean_length(self) -> float:
        return float(np.sum(np.linalg.norm(np.diff(self.points, axis=0), axis=1)))


def _measured_path(
    points: np.ndarray, metrics: Sequence[MetricTensor], metric: PathMetric
) -> LatentPath:
    return LatentPath(
        points=points,
        metric=metric,
        segments=segment_lengths(points, metrics),
        log_volumes=np.array([log_volume_of(g) for g in metrics]),
    )


def straight_chain(z_a: np.ndarray, z_b: np.ndarray, count: int) -> np.ndarray:
    return np.linspace(z_a, z_b, count)


def straight_path(
    decoder: LatentDecoder,
    z_a: np.ndarray,
    z_b: np.ndarray,
    config: GeodesicConfig = GeodesicConfig(),
    threads: int = 1,
) -> LatentPath:
    """
    The Euclidean segment z_a -> z_b, discretized like the geodesic graph's
    chain so both lengths are measured the same way
    """
    z_a, z_b = check_code(decoder, z_a), check_code(decoder, z_b)
    if np.array_equal(z_a, z_b):
        points = z_a[None, :]
    else:
        points = straight_chain(z_a, z_b, config.chain_points)

    return _measured_path(points, metrics_at(decoder, points, threads), "euclidean")


def _edges(nodes: np.ndarray, neighbours: int, chain_count: int) -> np.ndarray:
    """
    Undirected (i, j), i < j: k nearest neighbours of every node plus
    consecutive chain links
    """
    k = min(neighbours + 1, len(nodes))
    _, nearest = cKDTree(nodes).query(nodes, k=k)
    nearest = np.asarray(nearest).reshape(len(nodes), k)

    source = np.repeat(np.arange(len(nodes)), k)
    target = nearest.reshape(-1)

    chain = np.arange(chain_count - 1)
    source = np.concatenate([source, chain])
    target = np.concatenate([target, chain + 1])

    pairs = np.sort(np.stack([source, target], axis=1), axis=1)
    pairs = pairs[pairs[:, 0] != pairs[:, 1]]

    return np.unique(pairs, axis=0)


def geodesic(
    decoder: LatentDecoder,
    z_a: np.ndarray,
    z_b: np.ndarray,
    anchors: Optional[np.ndarray] = None,
    config: GeodesicConfig = GeodesicConfig(),
    threads: int = 1,
) -> LatentPath:
    """
    Shortest path between two codes on a discretized latent graph

    Parameters
    ----------
    decoder : LatentDecoder
    z_a, z_b : np.ndarray
        Endpoints, length m
    anchors : Optional[np.ndarray]
        (n, m) extra graph nodes, normally the encoded training means
    config : GeodesicConfig
    threads : int
        Processes for the per-node metric evaluations

    Returns
    -------
    LatentPath
    Never longer than the straight chain, which is always part of the graph
    """
    z_a, z_b = check_code(decoder, z_a), check_code(decoder, z_b)
    if np.array_equal(z_a, z_b):
        return _measured_path(z_a[None, :], metrics_at(decoder, z_a), "geodesic")

    chain = straight_chain(z_a, z_b, config.chain_points)
    nodes = chain
    if anchors is not None and len(anchors):
        anchors = np.atleast_2d(np.asarray(anchors, dtype=np.float64))
        if anchors.shape[1] != decoder.latent_dim:
            raise ValidationError(
                f"anchors have {anchors.shape[1]} coordinates, "
                + f"expected {decoder.latent_dim}"
            )
        nodes = np.vstack([chain, anchors])

    metrics = metrics_at(decoder, nodes, threads)
    pairs = _edges(nodes, config.neighbours, len(chain))

    weights = np.empty(len(pairs))
    for e, (i, j) in enumerate(pairs):
        weights[e] = segment_lengths(nodes[[i, j]], [metrics[i], metrics[j]])[0]
    weights = np.maximum(weights, min_edge_weight)

    graph = coo_matrix(
        (weights, (pairs[:, 0], pairs[:, 1])), shape=(len(nodes), len(nodes))
    ).tocsr()

    target = len(chain) - 1
    distances, predecessors = dijkstra(
        graph, directed=False, indices=0, return_predecessors=True
    )
    assert np.isfinite(distances[target]), "endpoints are linked by the chain"

    order = [target]
    while order[-1] != 0:
        order.append(int(predecessors[order[-1]]))
    order.reverse()

    logger.debug(
        f"geodesic over {len(nodes)} nodes and {len(pairs)} edges, "
        + f"{len(order)} points",
        extra={"nodes": len(nodes), "edges": len(pairs)},
    )

    return _measured_path(nodes[order], [metrics[i] for i in order], "geodesic")


# region interpolation


def arc_stations(path: LatentPath, steps: int) -> np.ndarray:
    """
    ``steps`` points at equal arc length along the path, endpoints included

    Arc length is Riemannian for geodesic paths and Euclidean otherwise.
    """
    if steps < 2:
        raise ValidationError("interpolation needs at least 2 steps")

    points = path.points
    if len(points) == 1:
        return np.repeat(points, steps, axis=0)

    if path.metric == "geodesic":
        pieces = path.segments
    else:
        pieces = np.linalg.norm(np.diff(points, axis=0), axis=1)

    arc = np.concatenate([[0.0], np.cumsum(pieces)])
    if arc[-1] <= 0:
        return np.repeat(points[:1], steps, axis=0)

    stations = np.empty((steps, points.shape[1]))
    for s, target in enumerate(np.linspace(0.0, arc[-1], steps)):
        i = np.searchsorted(arc, target, side="right") - 1
        i = int(np.clip(i, 0, len(pieces) - 1))
        t = 0.0 if pieces[i] <= 0 else (target - arc[i]) / pieces[i]
        stations[s] = points[i] + np.clip(t, 0.0, 1.0) * (points[i + 1] - points[i])

    stations[0], stations[-1] = points[0], points[-1]

    return stations


@dataclass
class Interpolation:
    path: LatentPath
    stations: np.ndarray
    log_volumes: np.ndarray
    realisations: List[Realisation] = field(default_factory=list)

    def to_frame(self) -> pd.DataFrame:
        """
        station, z0..z{m-1}, log_volume
        """
        frame = pd.DataFrame(
            self.stations,
            columns=[f"z{i}" for i in range(self.stations.shape[1])],
        )
        frame.insert(0, "station", np.arange(len(self.stations)))
        frame["log_volume"] = self.log_volumes

        return frame


def interpolate_codes(
    decoder: LatentDecoder,
    z_a: np.ndarray,
    z_b: np.ndarray,
    metric: PathMetric = "geodesic",
    anchors: Optional[np.ndarray] = None,
    config: GeodesicConfig = GeodesicConfig(),
    threads: int = 1,
) -> Interpolation:
    """
    Stations along the Euclidean or geodesic path with their log-volumes
    """
    if metric == "geodesic":
        path = geodesic(decoder, z_a, z_b, anchors, config, threads)
    elif metric == "euclidean":
        path = straight_path(decoder, z_a, z_b, config, threads)
    else:
        raise ValidationError(f"unknown path metric {metric!r}")

    stations = arc_stations(path, config.steps)
    log_volumes = np.array(
        [log_volume_of(g) for g in metrics_at(decoder, stations, threads)]
    )

    return Interpolation(path, stations, log_volumes)


def interpolate(
    checkpoint: GwaeCheckpoint,
    z_a: np.ndarray,
    z_b: np.ndarray,
    steps: int = 10,
    metric: PathMetric = "geodesic",
    anchors: Optional[np.ndarray] = None,
    config: GeodesicConfig = GeodesicConfig(),
    threads: int = 1,
) -> Interpolation:
    """
    Decoded mean models at ``steps`` equal arc-length stations between
    two codes
    """
    config = GeodesicConfig(config.neighbours, config.chain_factor, steps)
    result = interpolate_codes(checkpoint, z_a, z_b, metric, anchors, config, threads)
    result.realisations = [decode_realisation(checkpoint, z) for z in result.stations]

    return result


# endregion
