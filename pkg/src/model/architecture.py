from dataclasses import dataclass
from typing import Dict, List, Tuple

import numpy as np

from errors import ValidationError

from .layers import GraphConvLayer


@dataclass
class ArchitectureConfig:
    latent_dim: int = 30
    encoder_channels: Tuple[int, ...] = (32, 64)
    decoder_channels: Tuple[int, ...] = (64, 32)
    # k-set order of the encoder hierarchy; 1 is plain node convolution
    k: int = 1
    feature_count: int = 2
    log_sigma_bounds: Tuple[float, float] = (-6.0, 2.0)

    def __post_init__(self):
        if self.latent_dim < 1:
            raise ValidationError("model.latent_dim must be >= 1")
        if not self.encoder_channels or not self.decoder_channels:
            raise ValidationError("model needs at least one encoder and decoder layer")
        if min(self.encoder_channels + self.decoder_channels) < 1:
            raise ValidationError("model channel widths must be >= 1")
        if self.k not in (1, 2):
            raise ValidationError(f"model.k must be 1 or 2, got {self.k}")
        lo, hi = self.log_sigma_bounds
        if lo >= hi:
            raise ValidationError("model.log_sigma_bounds must be increasing")

    # region layers

    def encoder_layers(self) -> List[GraphConvLayer]:
        widths = (self.feature_count,) + tuple(self.encoder_channels)

        return [
            GraphConvLayer(f"enc.{i}", widths[i], widths[i + 1])
            for i in range(len(widths) - 1)
        ]

    def set_layers(self) -> List[GraphConvLayer]:
        """
        One layer per k-set level above single nodes
        """
        width = self.encoder_channels[-1]

        return [
            GraphConvLayer(f"enc.set{level}", width, width)
            for level in range(2, self.k + 1)
        ]

    def decoder_layers(self) -> List[GraphConvLayer]:
        widths = (self.decoder_channels[0],) + tuple(self.decoder_channels)

        return [
            GraphConvLayer(f"dec.{i}", widths[i], widths[i + 1])
            for i in range(len(widths) - 1)
        ]

    # endregion

    def init_params(
        self, node_count: int, rng: np.random.Generator
    ) -> Dict[str, np.ndarray]:
        """
        Glorot-uniform weights, zero biases, small node embeddings
        """
        params: Dict[str, np.ndarray] = {}

        def dense(name: str, out_dim: int, in_dim: int):
            bound = np.sqrt(6.0 / (in_dim + out_dim))
            params[f"{name}.W"] = rng.uniform(-bound, bound, size=(out_dim, in_dim))
            params[f"{name}.b"] = np.zeros(out_dim)

        for layer in self.encoder_layers() + self.set_layers():
            params.update(layer.init_params(rng))

        pooled = self.encoder_channels[-1]
        dense("enc.mu", self.latent_dim, pooled)
        dense("enc.logsigma", self.latent_dim, pooled)

        seed_width = self.decoder_channels[0]
        dense("dec.lift", seed_width, self.latent_dim)
        params["dec.embed"] = 0.1 * rng.standard_normal((node_count, seed_width))

        for layer in self.decoder_layers():
            params.update(layer.init_params(rng))

        head = self.decoder_channels[-1]
        dense("dec.mu", self.feature_count, head)
        dense("dec.logsigma", self.feature_count, head)

        return params
