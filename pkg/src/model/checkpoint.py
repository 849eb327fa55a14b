from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Dict, List, Tuple

import numpy as np

from autodiff import Tensor
from geodata import NormalizationStats, Realisation
from graphs import GeoGraph, build_grid_graph

from .architecture import ArchitectureConfig
from .network import BatchPlan, build_plan, decoder_forward


@dataclass(eq=False)
class GwaeCheckpoint:
    """
    Trained weights plus everything needed to decode on their own:
    architecture, template grid, normalization stats

    ``loss_history`` holds one (recon, reg) pair per epoch.
    """

    architecture: ArchitectureConfig
    dims: Tuple[int, int, int]
    cell_size: Tuple[float, float, float]
    top_depth: float
    params: Dict[str, np.ndarray]
    stats: NormalizationStats
    config: Dict[str, Any] = field(default_factory=dict)
    loss_history: List[Tuple[float, float]] = field(default_factory=list)
    _plans: Dict[int, BatchPlan] = field(
        default_factory=dict, init=False, repr=False
    )

    @property
    def latent_dim(self) -> int:
        return self.architecture.latent_dim

    @property
    def node_count(self) -> int:
        return int(np.prod(self.dims))

    @cached_property
    def template_graph(self) -> GeoGraph:
        return build_grid_graph(
            self.dims,
            np.ones(self.dims, dtype=bool),
            np.zeros((self.node_count, self.architecture.feature_count)),
        )

    @cached_property
    def template(self) -> Realisation:
        return Realisation(
            dims=self.dims,
            cell_size=self.cell_size,
            top_depth=self.top_depth,
            porosity=np.full(self.dims, self.stats.porosity_mean),
            permeability=np.full(self.dims, 10.0**self.stats.log_perm_mean),
        )

    @cached_property
    def constants(self) -> Dict[str, Tensor]:
        return {name: Tensor(value) for name, value in self.params.items()}

    def plan(self, copies: int) -> BatchPlan:
        """
        Template aggregation structures for a batch, cached per batch size
        """
        if copies not in self._plans:
            self._plans[copies] = build_plan(
                self.template_graph, self.architecture.k, copies
            )

        return self._plans[copies]

    def decode_tensor(self, z: Tensor) -> Tuple[Tensor, Tensor]:
        """
        Decoder on a batch of codes (copies, latent_dim); forward-mode
        tangents on ``z`` propagate to both outputs
        """
        return decoder_forward(
            self.constants, self.architecture, self.plan(z.shape[0]), z
        )
