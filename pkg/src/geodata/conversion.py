from dataclasses import asdict, dataclass
from typing import Dict, Iterable, Optional

import numpy as np

from config import permeability_bounds, porosity_bounds
from errors import ValidationError
from graphs import GeoGraph, build_grid_graph, graph_to_grid

from .realisation import Realisation

# feature channels, in order
feature_names = ("porosity", "log_permeability")


@dataclass(frozen=True)
class NormalizationStats:
    """
    Dataset mean/std of porosity and log10 permeability
    """

    porosity_mean: float
    porosity_std: float
    log_perm_mean: float
    log_perm_std: float

    def __post_init__(self):
        if self.porosity_std <= 0 or self.log_perm_std <= 0:
            raise ValidationError("normalization std must be > 0")

    def to_dict(self) -> Dict[str, float]:
        return asdict(self)

    @staticmethod
    def from_dict(data: Dict[str, float]) -> "NormalizationStats":
        return NormalizationStats(**{k: float(v) for k, v in data.items()})

    @staticmethod
    def from_realisations(realisations: Iterable[Realisation]) -> "NormalizationStats":
        porosity = []
        log_perm = []
        for r in realisations:
            porosity.append(r.porosity.ravel())
            log_perm.append(r.log_permeability.ravel())

        porosity = np.concatenate(porosity)
        log_perm = np.concatenate(log_perm)

        return NormalizationStats(
            porosity_mean=float(porosity.mean()),
            porosity_std=float(porosity.std()),
            log_perm_mean=float(log_perm.mean()),
            log_perm_std=float(log_perm.std()),
        )

    @property
    def mean(self) -> np.ndarray:
        return np.array([self.porosity_mean, self.log_perm_mean])

    @property
    def std(self) -> np.ndarray:
        return np.array([self.porosity_std, self.log_perm_std])

    def normalize(self, porosity: np.ndarray, log_perm: np.ndarray) -> np.ndarray:
        """
        Stack into (..., 2) normalized features
        """
        return (np.stack([porosity, log_perm], axis=-1) - self.mean) / self.std

    def denormalize(self, features: np.ndarray) -> np.ndarray:
        return np.asarray(features) * self.std + self.mean


def _require(stats: Optional[NormalizationStats]):
    if stats is None:
        raise ValidationError("normalization stats missing")


def realisation_to_graph(r: Realisation, stats: NormalizationStats) -> GeoGraph:
    """
    All cells active; node features are the normalized
    (porosity, log10 permeability) pair
    """
    _require(stats)
    features = stats.normalize(r.porosity, r.log_permeability)

    return build_grid_graph(r.dims, np.ones(r.dims, dtype=bool), features)


def features_to_realisation(
    features: np.ndarray, stats: NormalizationStats, template: Realisation
) -> Realisation:
    """
    Inverse of the normalization for a (cells, 2) feature matrix in C order

    Porosity and permeability are clamped to their physical bounds.
    """
    _require(stats)
    physical = stats.denormalize(features).reshape(template.dims + (2,))
    porosity = np.clip(physical[..., 0], *porosity_bounds)
    permeability = np.clip(10.0 ** physical[..., 1], *permeability_bounds)

    return template.like(porosity, permeability)


def graph_to_realisation(
    graph: GeoGraph, stats: NormalizationStats, template: Realisation
) -> Realisation:
    _require(stats)
    if graph.feature_count != len(feature_names):
        raise ValidationError(
            f"expected {len(feature_names)} feature channels, got {graph.feature_count}"
        )

    grid = graph_to_grid(graph, template.dims)

    return features_to_realisation(grid.reshape(-1, 2), stats, template)
