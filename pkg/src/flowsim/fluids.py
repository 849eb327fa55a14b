from dataclasses import dataclass
from typing import Tuple

import numpy as np

from config import owc_depth, pc_ref as default_pc_ref
from errors import ValidationError
from geodata import Realisation

# region units

millidarcy = 9.869233e-16  # m^2
centipoise = 1e-3  # Pa * s
bar = 1e5  # Pa
day = 86_400.0  # s
gravity = 9.80665  # m / s^2

# endregion


@dataclass
class FluidProps:
    """
    Oil/water properties and pressure controls, in field units
    (cP, kg/m^3, bar, m)
    """

    water_viscosity: float = 0.40
    oil_viscosity: float = 3.3
    water_density: float = 1020.0
    oil_density: float = 875.0
    initial_pressure: float = 240.0
    producer_pressure: float = 45.0
    injector_pressure: float = 330.0
    owc: float = owc_depth

    def __post_init__(self):
        values = (
            self.water_viscosity,
            self.oil_viscosity,
            self.water_density,
            self.oil_density,
            self.initial_pressure,
            self.producer_pressure,
            self.injector_pressure,
            self.owc,
        )
        if min(values) <= 0:
            raise ValidationError("flow.fluids values must all be positive")
        if not (
            self.injector_pressure > self.initial_pressure > self.producer_pressure
        ):
            raise ValidationError(
                "flow.fluids needs injector_pressure > initial_pressure "
                + "> producer_pressure"
            )


@dataclass(frozen=True)
class SatFunctions:
    """
    Per-cell saturation endpoints and Corey exponents

    Arrays are flat, in C order over the grid.
    """

    swl: np.ndarray
    swcr: np.ndarray
    swatinit: np.ndarray
    sowcr: np.ndarray
    swu: np.ndarray
    water_exponent: float = 2.0
    oil_exponent: float = 2.0

    def water_kr(self, sw: np.ndarray) -> np.ndarray:
        span = np.maximum(self.swu - self.swcr, 1e-12)
        normalized = np.clip((sw - self.swcr) / span, 0.0, 1.0)

        return normalized**self.water_exponent

    def oil_kr(self, sw: np.ndarray) -> np.ndarray:
        span = np.maximum(1.0 - self.swl - self.sowcr, 1e-12)
        normalized = np.clip((1.0 - sw - self.sowcr) / span, 0.0, 1.0)

        return normalized**self.oil_exponent


def connate_water(permeability: np.ndarray) -> np.ndarray:
    """
    SWL from permeability in mD, clamped to [0.02, 0.60]
    """
    return np.clip(-0.048 * np.log(permeability) + 0.5, 0.02, 0.60)


def leverett_j(
    height: np.ndarray,
    permeability: np.ndarray,
    porosity: np.ndarray,
    fluids: FluidProps,
    pc_ref: float = default_pc_ref,
) -> np.ndarray:
    """
    J = (drho * g * h / Pc_ref) * sqrt(k / phi), with h the height above
    the OWC in m and k in mD
    """
    delta_rho = fluids.water_density - fluids.oil_density
    capillary = delta_rho * gravity * height / pc_ref

    return capillary * np.sqrt(permeability / np.maximum(porosity, 1e-12))


def hydrostatic_pressure(depth: np.ndarray, fluids: FluidProps) -> np.ndarray:
    """
    Pressure in Pa, equal to the initial pressure at the OWC;
    oil gradient above the contact, water gradient below
    """
    density = np.where(depth < fluids.owc, fluids.oil_density, fluids.water_density)

    return fluids.initial_pressure * bar + density * gravity * (depth - fluids.owc)


def init_state(
    r: Realisation,
    fluids: FluidProps,
    pc_ref: float = default_pc_ref,
    exponents: Tuple[float, float] = (2.0, 2.0),
) -> Tuple[SatFunctions, np.ndarray, np.ndarray]:
    """
    Saturation endpoints, initial pressure and water saturation

    Parameters
    ----------
    r : Realisation
    fluids : FluidProps
    pc_ref : float
        Leverett J scale
    exponents : Tuple[float, float]
        Corey exponents (water, oil)

    Returns
    -------
    Tuple[SatFunctions, np.ndarray, np.ndarray]
    (endpoints, pressure in Pa, water saturation), flat in C order
    """
    permeability = r.permeability.ravel()
    if np.any(permeability <= 0):
        raise ValidationError("permeability must be > 0 to initialise saturations")

    porosity = r.porosity.ravel()
    depth = r.cell_depths().ravel()

    swl = connate_water(permeability)
    swcr = 1.1 * swl

    j = leverett_j(fluids.owc - depth, permeability, porosity, fluids, pc_ref)
    swatinit = np.ones_like(j)
    above = j > 0
    swatinit[above] = np.clip(-0.18 * np.log(j[above]) + 0.57, swl[above], 1.0)

    full = swatinit >= 1.0
    sowcr = np.where(full, 0.0, 0.25)
    swu = np.where(full, 1.0, 1.0 - sowcr)
    swatinit = np.clip(swatinit, swcr, swu)

    sat = SatFunctions(
        swl=swl,
        swcr=swcr,
        swatinit=swatinit,
        sowcr=sowcr,
        swu=swu,
        water_exponent=exponents[0],
        oil_exponent=exponents[1],
    )

    return sat, hydrostatic_pressure(depth, fluids), swatinit.copy()
