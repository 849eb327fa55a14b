import logging
from dataclasses import dataclass
from typing import List, Optional, Protocol, Sequence, Tuple

import numpy as np

from autodiff import Tensor, ops
from errors import NumericalError, ValidationError
from utils.parallel import pool_map

logger = logging.getLogger(__name__)

# floor for the logdet regularization when the metric vanishes
min_jitter = 1e-12


class LatentDecoder(Protocol):
    """
    Anything that maps a batch of codes (copies, latent_dim) to per-entry
    (mean, log standard deviation) tensors, copies stacked along rows

    ``GwaeCheckpoint`` is the production implementation.
    """

    @property
    def latent_dim(self) -> int: ...

    def decode_tensor(self, z: Tensor) -> Tuple[Tensor, Tensor]: ...


@dataclass(frozen=True)
class MetricTensor:
    z: np.ndarray
    G: np.ndarray

    def __post_init__(self):
        if self.G.shape != (self.z.size, self.z.size):
            raise ValidationError(
                f"metric of shape {self.G.shape} does not match a code of length "
                + f"{self.z.size}"
            )

    @property
    def trace(self) -> float:
        return float(np.trace(self.G))

    def quadratic(self, delta: np.ndarray) -> float:
        return float(delta @ self.G @ delta)


def check_code(decoder: LatentDecoder, z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=np.float64).reshape(-1)
    if z.size != decoder.latent_dim:
        raise ValidationError(
            f"latent code must have length {decoder.latent_dim}, got {z.size}"
        )

    return z


def jacobians(decoder: LatentDecoder, z: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Jacobians of the decoder's mean and standard deviation heads at ``z``

    All m directional derivatives come out of one forward pass: the decoder
    sees m copies of ``z`` and copy i carries the unit tangent e_i.

    Returns
    -------
    Tuple[np.ndarray, np.ndarray]
    (J_mu, J_sigma), each (outputs, m) with outputs flattened over
    nodes and channels
    """
    z = check_code(decoder, z)
    m = z.size

    point = Tensor(np.tile(z, (m, 1)), tangent=np.eye(m))
    mu, log_sigma = decoder.decode_tensor(point)
    sigma = ops.exp(log_sigma)

    def columns(out: Tensor) -> np.ndarray:
        if out.tangent is None:
            return np.zeros((out.size // m, m))
        return out.tangent.reshape(m, -1).T

    j_mu, j_sigma = columns(mu), columns(sigma)
    if not (np.all(np.isfinite(j_mu)) and np.all(np.isfinite(j_sigma))):
        raise NumericalError(f"non-finite decoder Jacobian at z = {z.tolist()}")

    return j_mu, j_sigma


def pullback_metric(decoder: LatentDecoder, z: np.ndarray) -> MetricTensor:
    """
    G(z) = J_mu^T J_mu + J_sigma^T J_sigma
    """
    j_mu, j_sigma = jacobians(decoder, z)
    G = j_mu.T @ j_mu + j_sigma.T @ j_sigma

    return MetricTensor(np.asarray(z, dtype=np.float64).reshape(-1), 0.5 * (G + G.T))


def log_volume_of(metric: MetricTensor) -> float:
    m = metric.z.size
    jitter = max(1e-9 * metric.trace / m, min_jitter)
    eigenvalues = np.linalg.eigvalsh(metric.G + jitter * np.eye(m))

    # round-off can push the smallest eigenvalue of a singular G below zero
    eigenvalues = np.maximum(eigenvalues, jitter)

    return 0.5 * float(np.sum(np.log(eigenvalues)))


def log_volume(decoder: LatentDecoder, z: np.ndarray) -> float:
    """
    Half the log-determinant of the regularized metric; large where
    the decoder changes fast, i.e. away from the training data
    """
    return log_volume_of(pullback_metric(decoder, z))


# region batched evaluation

_worker_decoder: Optional[LatentDecoder] = None


def _init_worker(decoder: LatentDecoder):
    global _worker_decoder
    _worker_decoder = decoder


def _metric_in_worker(z: np.ndarray) -> MetricTensor:
    return pullback_metric(_worker_decoder, z)


def metrics_at(
    decoder: LatentDecoder, points: np.ndarray, threads: int = 1
) -> List[MetricTensor]:
    """
    Metric at each row of ``points``, in order
    """
    points = np.atleast_2d(np.asarray(points, dtype=np.float64))
    if threads == 1:
        return [pullback_metric(decoder, z) for z in points]

    return pool_map(
        _metric_in_worker,
        list(points),
        threads,
        initializer=_init_worker,
        initargs=(decoder,),
    )


# endregion


def segment_lengths(points: np.ndarray, metrics: Sequence[MetricTensor]) -> np.ndarray:
    """
    sqrt(d^T G_mid d) per polyline segment, G_mid the mean of the two
    endpoint metrics
    """
    points = np.asarray(points, dtype=np.float64)
    lengths = np.zeros(max(len(points) - 1, 0))
    for i in range(len(lengths)):
        delta = points[i + 1] - points[i]
        G = 0.5 * (metrics[i].G + metrics[i + 1].G)
        lengths[i] = np.sqrt(max(float(delta @ G @ delta), 0.0))

    return lengths


def riemannian_length(
    decoder: LatentDecoder, path: np.ndarray, threads: int = 1
) -> float:
    """
    Midpoint-metric quadrature of the Riemannian length of a polyline

    Parameters
    ----------
    decoder : LatentDecoder
    path : np.ndarray
        (points, m), consecutive points joined by straight segments
    threads : int

    Returns
    -------
    float
    0 for a single point
    """
    path = np.atleast_2d(np.asarray(path, dtype=np.float64))
    for z in path:
        check_code(decoder, z)
    if len(path) < 2:
        return 0.0

    return float(np.sum(segment_lengths(path, metrics_at(decoder, path, threads))))
