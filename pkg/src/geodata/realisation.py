import logging
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from config import Scenario, generator_retries, owc_depth, porosity_bounds
from errors import GenerationError, ValidationError

from .channels import (
    ChannelParams,
    rasterize_channels,
    sample_channel_params,
    sample_placements,
)
from .petrophysics import facies_porosity, poro_perm_transform

logger = logging.getLogger(__name__)


@dataclass
class GeneratorConfig:
    count: int = 5000
    dims: Tuple[int, int, int] = (16, 12, 10)
    cell_size: Tuple[float, float, float] = (100.0, 100.0, 6.0)
    # None puts the grid bottom on the oil-water contact
    top_depth: Optional[float] = None

    def __post_init__(self):
        if self.count < 0:
            raise ValidationError("dataset.count must be >= 0")
        if len(self.dims) != 3 or min(self.dims) <= 0:
            raise ValidationError(
                f"dataset.dims must be 3 positive ints, got {self.dims}"
            )
        if len(self.cell_size) != 3 or min(self.cell_size) <= 0:
            raise ValidationError("dataset.cell_size must be 3 positive lengths")

    @property
    def resolved_top_depth(self) -> float:
        if self.top_depth is not None:
            return float(self.top_depth)

        return owc_depth - self.dims[2] * self.cell_size[2]


@dataclass(eq=False)
class Realisation:
    """
    One porosity/permeability model on a regular grid

    Property arrays are shaped ``dims``. ``scenario``, ``params`` and
    ``facies`` are unknown (None) for decoded models.
    """

    dims: Tuple[int, int, int]
    cell_size: Tuple[float, float, float]
    top_depth: float
    porosity: np.ndarray
    permeability: np.ndarray
    scenario: Optional[Scenario] = None
    params: Optional[ChannelParams] = None
    seed: int = 0
    facies: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        self.dims = tuple(int(d) for d in self.dims)
        self.cell_size = tuple(float(d) for d in self.cell_size)
        self.porosity = np.asarray(self.porosity, dtype=np.float64).reshape(self.dims)
        self.permeability = np.asarray(self.permeability, dtype=np.float64).reshape(
            self.dims
        )
        if np.any(self.permeability <= 0):
            raise ValidationError("permeability must be > 0")

    @property
    def cell_count(self) -> int:
        return int(np.prod(self.dims))

    @property
    def log_permeability(self) -> np.ndarray:
        return np.log10(self.permeability)

    def cell_depths(self) -> np.ndarray:
        """
        Depth of every cell centre, shaped ``dims``
        """
        k = np.arange(self.dims[2])
        depth = self.top_depth + (k + 0.5) * self.cell_size[2]

        return np.broadcast_to(depth, self.dims).copy()

    def like(self, porosity: np.ndarray, permeability: np.ndarray) -> "Realisation":
        """
        Same grid, new properties, no generation metadata
        """
        return Realisation(
            dims=self.dims,
            cell_size=self.cell_size,
            top_depth=self.top_depth,
            porosity=porosity,
            permeability=permeability,
        )


def generate_realisation(
    scenario: Scenario,
    rng: np.random.Generator,
    dims: Tuple[int, int, int] = (16, 12, 10),
    cell_size: Tuple[float, float, float] = (100.0, 100.0, 6.0),
    top_depth: Optional[float] = None,
    params: Optional[ChannelParams] = None,
    seed: int = 0,
) -> Realisation:
    """
    Sample a channelised realisation of a scenario

    Channel geometry is resampled when a channel misses the grid; after
    ``generator_retries`` failed attempts a GenerationError is raised.

    Parameters
    ----------
    scenario : Scenario
    rng : np.random.Generator
    dims, cell_size : Tuple
        Grid shape and cell lengths (m)
    top_depth : Optional[float]
        Depth of the grid top; defaults to the OWC minus the grid height
    params : Optional[ChannelParams]
        Fixed geometry; sampled from the scenario ranges when omitted
    seed : int
        Recorded on the realisation for audit

    Returns
    -------
    Realisation
    """
    if top_depth is None:
        top_depth = owc_depth - dims[2] * cell_size[2]

    for attempt in range(generator_retries):
        channel_params = params or sample_channel_params(scenario, rng)
        placements = sample_placements(channel_params, dims, cell_size, top_depth, rng)
        facies = rasterize_channels(
            channel_params, placements, dims, cell_size, top_depth
        )

        bodies = np.unique(facies[facies > 0]).size
        if bodies == channel_params.n_channels:
            break

        logger.debug(
            "channel missed the grid, resampling",
            extra={"attempt": attempt, "scenario": scenario.value},
        )
    else:
        raise GenerationError(
            f"no valid {scenario.value} realisation after {generator_retries} attempts"
        )

    channel_mask = facies > 0
    porosity = np.clip(facies_porosity(channel_mask, rng), *porosity_bounds)
    permeability = poro_perm_transform(porosity, channel_mask, rng)

    return Realisation(
        dims=dims,
        cell_size=cell_size,
        top_depth=top_depth,
        porosity=porosity,
        permeability=permeability,
        scenario=scenario,
        params=channel_params,
        seed=seed,
        facies=facies,
    )
