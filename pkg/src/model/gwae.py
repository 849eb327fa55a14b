from dataclasses import dataclass

import numpy as np

from autodiff import Tensor, ops
from errors import ValidationError
from geodata import Realisation, features_to_realisation
from graphs import GeoGraph

from .checkpoint import GwaeCheckpoint
from .network import build_plan, encoder_forward


@dataclass(frozen=True)
class LatentCode:
    mu: np.ndarray
    log_sigma: np.ndarray

    @property
    def sigma(self) -> np.ndarray:
        return np.exp(self.log_sigma)


@dataclass(frozen=True)
class DecoderOutput:
    """
    Per-node mean and log standard deviation, (nodes, f)
    """

    mu: np.ndarray
    log_sigma: np.ndarray

    @property
    def sigma(self) -> np.ndarray:
        return np.exp(self.log_sigma)


def encode(checkpoint: GwaeCheckpoint, graph: GeoGraph) -> LatentCode:
    """
    Posterior parameters for one graph

    The aggregation plan is built from the graph itself, so any node
    ordering of the template grid gives the same code.
    """
    if graph.node_count != checkpoint.node_count:
        raise ValidationError(
            f"graph has {graph.node_count} nodes, model expects {checkpoint.node_count}"
        )
    if graph.feature_count != checkpoint.architecture.feature_count:
        raise ValidationError(
            f"graph has {graph.feature_count} feature channels, "
            + f"model expects {checkpoint.architecture.feature_count}"
        )

    plan = build_plan(graph, checkpoint.architecture.k, 1)
    mu, log_sigma = encoder_forward(
        checkpoint.constants,
        checkpoint.architecture,
        plan,
        Tensor(graph.node_features),
    )

    return LatentCode(mu.data[0], log_sigma.data[0])


def encode_features(checkpoint: GwaeCheckpoint, features: np.ndarray) -> LatentCode:
    """
    Batch encode of template-ordered features (batch, nodes, f);
    codes come back as (batch, latent_dim)
    """
    features = np.asarray(features, dtype=np.float64)
    copies = features.shape[0]
    if features.shape[1:] != (
        checkpoint.node_count,
        checkpoint.architecture.feature_count,
    ):
        raise ValidationError(f"unexpected feature batch shape {features.shape}")

    mu, log_sigma = encoder_forward(
        checkpoint.constants,
        checkpoint.architecture,
        checkpoint.plan(copies),
        Tensor(features.reshape(-1, features.shape[2])),
    )

    return LatentCode(mu.data, log_sigma.data)


def reparameterize_tensor(mu: Tensor, log_sigma: Tensor, eps: np.ndarray) -> Tensor:
    return ops.add(mu, ops.mul(ops.exp(log_sigma), Tensor(eps)))


def reparameterize(code: LatentCode, rng: np.random.Generator) -> np.ndarray:
    """
    z = mu + sigma * eps, eps ~ N(0, I)
    """
    eps = rng.standard_normal(np.shape(code.mu))

    return reparameterize_tensor(Tensor(code.mu), Tensor(code.log_sigma), eps).data


def _as_batch(checkpoint: GwaeCheckpoint, z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=np.float64)
    if z.ndim == 1:
        z = z[None, :]
    if z.ndim != 2 or z.shape[1] != checkpoint.latent_dim:
        raise ValidationError(
            f"latent code must have length {checkpoint.latent_dim}, got {z.shape}"
        )

    return z


def decode(checkpoint: GwaeCheckpoint, z: np.ndarray) -> DecoderOutput:
    """
    Deterministic decoder output for one code
    """
    z = _as_batch(checkpoint, z)
    if z.shape[0] != 1:
        raise ValidationError("decode takes a single latent code")

    mu, log_sigma = checkpoint.decode_tensor(Tensor(z))

    return DecoderOutput(mu.data, log_sigma.data)


def decode_batch(checkpoint: GwaeCheckpoint, z: np.ndarray) -> DecoderOutput:
    """
    Decoder output for codes (batch, latent_dim), shaped (batch, nodes, f)
    """
    z = _as_batch(checkpoint, z)
    mu, log_sigma = checkpoint.decode_tensor(Tensor(z))
    shape = (z.shape[0], checkpoint.node_count, checkpoint.architecture.feature_count)

    return DecoderOutput(mu.data.reshape(shape), log_sigma.data.reshape(shape))


def decode_realisation(checkpoint: GwaeCheckpoint, z: np.ndarray) -> Realisation:
    """
    Decoded mean model on the checkpoint's grid, in physical units
    """
    output = decode(checkpoint, z)

    return features_to_realisation(output.mu, checkpoint.stats, checkpoint.template)
