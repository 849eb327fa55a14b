import math
from dataclasses import astuple, dataclass
from typing import List, Sequence, Tuple

import numpy as np
from scipy import ndimage
from scipy.spatial import cKDTree

from config import Scenario, channel_counts, channel_orientation, channel_ranges
from errors import ValidationError

# face neighbours only
six_connectivity = ndimage.generate_binary_structure(3, 1)


@dataclass(frozen=True)
class ChannelParams:
    """
    Geometry shared by every channel of one realisation

    Lengths are in meters, orientation in degrees clockwise from +y.
    """

    n_channels: int
    width: float
    thickness: float
    wavelength: float
    amplitude: float
    orientation: float

    def __post_init__(self):
        if self.n_channels not in (1, 2):
            raise ValidationError(f"n_channels must be 1 or 2, got {self.n_channels}")
        if min(self.width, self.thickness, self.wavelength) <= 0:
            raise ValidationError("channel width, thickness and wavelength must be > 0")
        if self.amplitude < 0:
            raise ValidationError("channel amplitude must be >= 0")

    def as_array(self) -> np.ndarray:
        return np.asarray(astuple(self), dtype=np.float64)

    @staticmethod
    def from_array(values: Sequence[float]) -> "ChannelParams":
        n, width, thickness, wavelength, amplitude, orientation = (
            float(v) for v in values
        )

        return ChannelParams(
            int(round(n)), width, thickness, wavelength, amplitude, orientation
        )

    def within(self, scenario: Scenario) -> bool:
        """
        Whether every value lies in the scenario's parameter ranges
        """
        if self.n_channels != channel_counts[scenario]:
            return False
        if self.orientation != channel_orientation[scenario]:
            return False

        return all(
            lo <= getattr(self, name) <= hi
            for name, (lo, hi) in channel_ranges[scenario].items()
        )


@dataclass(frozen=True)
class ChannelPlacement:
    """
    Where one channel sits: lateral offset of its axis from the grid
    centre (m), phase of the sinusoid (rad) and depth of its centre (m)
    """

    offset: float
    phase: float
    level: float


def sample_channel_params(
    scenario: Scenario, rng: np.random.Generator
) -> ChannelParams:
    ranges = channel_ranges[scenario]

    return ChannelParams(
        n_channels=channel_counts[scenario],
        orientation=channel_orientation[scenario],
        **{name: float(rng.uniform(lo, hi)) for name, (lo, hi) in ranges.items()},
    )


def grid_extent(
    dims: Tuple[int, int, int], cell_size: Tuple[float, float, float]
) -> Tuple[float, float]:
    return dims[0] * cell_size[0], dims[1] * cell_size[1]


def _axes(orientation: float) -> Tuple[np.ndarray, np.ndarray]:
    theta = math.radians(orientation)
    along = np.array([math.sin(theta), math.cos(theta)])
    lateral = np.array([math.cos(theta), -math.sin(theta)])

    return along, lateral


def lateral_span(
    dims: Tuple[int, int, int],
    cell_size: Tuple[float, float, float],
    orientation: float,
) -> float:
    """
    Width of the grid measured across the channel direction
    """
    lx, ly = grid_extent(dims, cell_size)
    _, lateral = _axes(orientation)

    return abs(lx * lateral[0]) + abs(ly * lateral[1])


def sample_placements(
    params: ChannelParams,
    dims: Tuple[int, int, int],
    cell_size: Tuple[float, float, float],
    top_depth: float,
    rng: np.random.Generator,
) -> List[ChannelPlacement]:
    """
    Random axis offset, phase and stratigraphic level per channel

    Channels of one realisation get different phases and levels at least
    one layer apart.
    """
    span = lateral_span(dims, cell_size, params.orientation)
    dz = cell_size[2]
    half = 0.5 * min(params.thickness, dims[2] * dz)
    lo, hi = top_depth + half, top_depth + dims[2] * dz - half

    placements: List[ChannelPlacement] = []
    phase = float(rng.uniform(0.0, 2 * math.pi))
    for _ in range(params.n_channels):
        level = float(rng.uniform(lo, hi))
        for _ in range(100):
            if all(abs(level - p.level) >= dz for p in placements):
                break
            level = float(rng.uniform(lo, hi))

        placements.append(
            ChannelPlacement(
                offset=float(rng.uniform(-0.25, 0.25) * span),
                phase=phase,
                level=level,
            )
        )
        phase = (phase + rng.uniform(0.25 * math.pi, 1.75 * math.pi)) % (2 * math.pi)

    return placements


def centerline(
    params: ChannelParams,
    placement: ChannelPlacement,
    dims: Tuple[int, int, int],
    cell_size: Tuple[float, float, float],
    spacing: float,
) -> np.ndarray:
    """
    Densely sampled (x, y) points of the sinusoidal channel axis,
    long enough to cross the whole grid
    """
    lx, ly = grid_extent(dims, cell_size)
    along, lateral = _axes(params.orientation)
    centre = np.array([0.5 * lx, 0.5 * ly])

    half_length = 0.5 * math.hypot(lx, ly) + params.width
    s = np.arange(-half_length, half_length + spacing, spacing)
    t = placement.offset + params.amplitude * np.sin(
        2 * math.pi * s / params.wavelength + placement.phase
    )

    return centre + s[:, None] * along + t[:, None] * lateral


def cell_centres(
    dims: Tuple[int, int, int], cell_size: Tuple[float, float, float], top_depth: float
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    x, y and depth of every cell centre, each shaped ``dims``
    """
    axes = [(np.arange(n) + 0.5) * d for n, d in zip(dims, cell_size)]
    axes[2] = axes[2] + top_depth

    return tuple(np.meshgrid(*axes, indexing="ij"))


def largest_component(mask: np.ndarray) -> np.ndarray:
    labels, count = ndimage.label(mask, structure=six_connectivity)
    if count <= 1:
        return mask.copy()

    sizes = np.bincount(labels.ravel())
    sizes[0] = 0

    return labels == int(np.argmax(sizes))


def rasterize_channels(
    params: ChannelParams,
    placements: Sequence[ChannelPlacement],
    dims: Tuple[int, int, int],
    cell_size: Tuple[float, float, float],
    top_depth: float,
) -> np.ndarray:
    """
    Label channel cells on the grid

    A cell belongs to a channel when its centre lies within half the width
    (horizontally, perpendicular to the axis) and half the thickness
    (vertically) of the channel. Each channel keeps only its largest
    6-connected body; cells claimed by an earlier channel stay with it.

    Returns
    -------
    np.ndarray
    int8 labels shaped ``dims``: 0 for background, c + 1 for channel c
    """
    x, y, depth = cell_centres(dims, cell_size, top_depth)
    xy = np.stack([x[:, :, 0].ravel(), y[:, :, 0].ravel()], axis=1)
    spacing = 0.1 * min(cell_size[0], cell_size[1])

    facies = np.zeros(dims, dtype=np.int8)
    for c, placement in enumerate(placements):
        tree = cKDTree(centerline(params, placement, dims, cell_size, spacing))
        distance, _ = tree.query(xy)
        in_plan = (distance <= 0.5 * params.width).reshape(dims[0], dims[1], 1)
        in_section = np.abs(depth - placement.level) <= 0.5 * params.thickness

        mask = in_plan & in_section & (facies == 0)
        if not mask.any():
            continue
        facies[largest_component(mask)] = c + 1

    return facies
