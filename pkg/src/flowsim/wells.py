import math
from dataclasses import dataclass
from enum import Enum
from typing import List, Tuple

from errors import ValidationError

from .fluids import FluidProps


class WellKind(Enum):
    PRODUCER = "producer"
    INJECTOR = "injector"


@dataclass(frozen=True)
class WellSpec:
    """
    A vertical well perforated over layers ``k_range[0] .. k_range[1] - 1``,
    controlled by bottom-hole pressure (bar)
    """

    name: str
    kind: WellKind
    i: int
    j: int
    k_range: Tuple[int, int]
    pressure: float

    def validate(self, dims: Tuple[int, int, int]):
        nx, ny, nz = dims
        if not (0 <= self.i < nx and 0 <= self.j < ny):
            raise ValidationError(f"well {self.name} column outside the grid")
        k0, k1 = self.k_range
        if not (0 <= k0 < k1 <= nz):
            raise ValidationError(f"well {self.name} perforations outside the grid")


def place_wells(
    dims: Tuple[int, int, int], fluids: FluidProps = FluidProps()
) -> List[WellSpec]:
    """
    Line drive: producers P1-P3 on the middle row, injectors I1-I3 and
    I4-I6 on two flanking rows, each line at thirds of y

    Parameters
    ----------
    dims : Tuple[int, int, int]
        (nx, ny, nz), needs nx >= 8 and ny >= 3

    Returns
    -------
    List[WellSpec]
    Nine wells, perforated over every layer
    """
    nx, ny, nz = dims
    if nx < 8 or ny < 3:
        raise ValidationError(
            f"grid {dims} too small for the line drive (nx >= 8, ny >= 3)"
        )

    columns = [int((t + 0.5) * ny / 3) for t in range(3)]
    lines = [
        ("P", 0, WellKind.PRODUCER, nx // 2, fluids.producer_pressure),
        ("I", 0, WellKind.INJECTOR, 2, fluids.injector_pressure),
        ("I", 3, WellKind.INJECTOR, nx - 3, fluids.injector_pressure),
    ]

    return [
        WellSpec(
            name=f"{prefix}{first + t + 1}",
            kind=kind,
            i=i,
            j=j,
            k_range=(0, nz),
            pressure=pressure,
        )
        for prefix, first, kind, i, pressure in lines
        for t, j in enumerate(columns)
    ]


def peaceman_radius(dx: float, dy: float) -> float:
    """
    Equivalent radius for isotropic permeability
    """
    return 0.14 * math.sqrt(dx**2 + dy**2)


def well_index_factor(
    cell_size: Tuple[float, float, float], well_radius: float
) -> float:
    """
    Geometric part of the Peaceman well index, 2 pi dz / ln(r_eq / r_w);
    multiply by permeability (m^2) for the index
    """
    dx, dy, dz = cell_size
    r_eq = peaceman_radius(dx, dy)
    if r_eq <= well_radius:
        raise ValidationError("well radius must be smaller than the Peaceman radius")

    return 2 * math.pi * dz / math.log(r_eq / well_radius)
