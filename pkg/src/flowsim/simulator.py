import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
import scipy.sparse as sp

from config import horizon_days, max_substeps, pc_ref, report_steps, well_radius
from errors import NumericalError, ValidationError
from geodata import Realisation

from .fluids import FluidProps, bar, centipoise, day, init_state, millidarcy
from .rates import RateSeries
from .solver import linear_solver
from .wells import WellKind, WellSpec, place_wells, well_index_factor

logger = logging.getLogger(__name__)


@dataclass
class SimulationConfig:
    fluids: FluidProps = field(default_factory=FluidProps)
    horizon_days: float = horizon_days
    report_steps: int = report_steps
    water_exponent: float = 2.0
    oil_exponent: float = 2.0
    pc_ref: float = pc_ref
    well_radius: float = well_radius
    cfl: float = 0.9
    max_substeps: int = max_substeps

    def __post_init__(self):
        if self.report_steps < 1:
            raise ValidationError("flow.report_steps must be >= 1")
        if self.horizon_days <= 0:
            raise ValidationError("flow.horizon_days must be > 0")
        if not 0 < self.cfl <= 1:
            raise ValidationError("flow.cfl must be in (0, 1]")

    @property
    def report_days(self) -> float:
        return self.horizon_days / self.report_steps


def _faces(
    dims: Tuple[int, int, int],
    cell_size: Tuple[float, float, float],
    permeability: np.ndarray,
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Face neighbour pairs (a, b) in C order with harmonic transmissibility
    in m^3 (divide by viscosity for flow)
    """
    index = np.arange(int(np.prod(dims))).reshape(dims)
    dx, dy, dz = cell_size
    geometry = ((dx, dy * dz), (dy, dx * dz), (dz, dx * dy))

    a_list, b_list, t_list = [], [], []
    for axis, (length, area) in enumerate(geometry):
        a = np.take(index, np.arange(dims[axis] - 1), axis=axis).ravel()
        b = np.take(index, np.arange(1, dims[axis]), axis=axis).ravel()
        ka, kb = permeability[a], permeability[b]
        a_list.append(a)
        b_list.append(b)
        t_list.append(area / length * 2 * ka * kb / (ka + kb))

    return np.concatenate(a_list), np.concatenate(b_list), np.concatenate(t_list)


class FlowSimulator:
    """
    Incompressible oil/water IMPES simulator on a regular grid

    Each report step solves the pressure equation once, with total
    mobility taken upstream of the previous pressure field, then moves
    water explicitly with upwind fractional flow in CFL-limited sub-steps.
    Wells are pressure controlled; flow has no gravity or capillarity.
    """

    def __init__(
        self,
        realisation: Realisation,
        wells: Optional[Sequence[WellSpec]] = None,
        config: SimulationConfig = SimulationConfig(),
        saturation: Optional[np.ndarray] = None,
    ):
        self.realisation = realisation
        self.config = config
        self.wells: List[WellSpec] = list(
            place_wells(realisation.dims, config.fluids) if wells is None else wells
        )
        if not self.wells:
            raise ValidationError("simulation needs at least one well")
        for well in self.wells:
            well.validate(realisation.dims)

        fluids = config.fluids
        self.sat, self.pressure, initial = init_state(
            realisation,
            fluids,
            config.pc_ref,
            (config.water_exponent, config.oil_exponent),
        )

        n = realisation.cell_count
        if saturation is None:
            self.saturation = initial
        else:
            self.saturation = np.asarray(saturation, dtype=np.float64).ravel().copy()
            if self.saturation.size != n:
                raise ValidationError(f"saturation needs {n} values")

        self._water_viscosity = fluids.water_viscosity * centipoise
        self._oil_viscosity = fluids.oil_viscosity * centipoise

        permeability = realisation.permeability.ravel() * millidarcy
        dx, dy, dz = realisation.cell_size
        self.pore_volume = realisation.porosity.ravel() * dx * dy * dz

        self._a, self._b, self._transmissibility = _faces(
            realisation.dims, realisation.cell_size, permeability
        )

        factor = well_index_factor(realisation.cell_size, config.well_radius)
        nx, ny, nz = realisation.dims
        cells, owners = [], []
        for w, well in enumerate(self.wells):
            for k in range(*well.k_range):
                cells.append((well.i * ny + well.j) * nz + k)
                owners.append(w)

        self._perf_cell = np.asarray(cells, dtype=np.int64)
        self._perf_well = np.asarray(owners, dtype=np.int64)
        self._perf_index = factor * permeability[self._perf_cell]
        self._well_pressure = np.array([w.pressure * bar for w in self.wells])
        self._sign = np.array(
            [1.0 if w.kind == WellKind.PRODUCER else -1.0 for w in self.wells]
        )

        self._max_slope = self._fractional_flow_slope()
        self._face_flux: Optional[np.ndarray] = None
        self._perf_rate: Optional[np.ndarray] = None

    # region fluid model

    def mobilities(self, sw: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        return (
            self.sat.water_kr(sw) / self._water_viscosity,
            self.sat.oil_kr(sw) / self._oil_viscosity,
        )

    def fractional_flow(self, sw: np.ndarray) -> np.ndarray:
        water, oil = self.mobilities(sw)
        return water / (water + oil)

    def _fractional_flow_slope(self, samples: int = 65) -> np.ndarray:
        """
        Largest |df_w/dS| per cell, sampled between SWCR and SWU
        """
        span = self.sat.swu - self.sat.swcr
        previous = self.fractional_flow(self.sat.swcr)
        slope = np.zeros_like(span)
        for t in np.linspace(0.0, 1.0, samples)[1:]:
            current = self.fractional_flow(self.sat.swcr + t * span)
            ds = span / (samples - 1)
            slope = np.maximum(
                slope,
                np.divide(
                    np.abs(current - previous),
                    ds,
                    out=np.zeros_like(ds),
                    where=ds > 0,
                ),
            )
            previous = current

        return slope

    # endregion

    @property
    def pressure_bar(self) -> np.ndarray:
        return self.pressure.reshape(self.realisation.dims) / bar

    def solve_pressure(self):
        """
        Implicit pressure solve for the current saturations
        """
        n = self.realisation.cell_count
        a, b = self._a, self._b

        water, oil = self.mobilities(self.saturation)
        total = water + oil

        if self._face_flux is None:
            face_mobility = 0.5 * (total[a] + total[b])
        else:
            upstream = np.where(self.pressure[a] >= self.pressure[b], a, b)
            face_mobility = total[upstream]

        face = self._transmissibility * face_mobility
        perf = self._perf_index * total[self._perf_cell]

        rows = np.concatenate([a, b, a, b, self._perf_cell])
        cols = np.concatenate([b, a, a, b, self._perf_cell])
        values = np.concatenate([-face, -face, face, face, perf])
        matrix = sp.coo_matrix((values, (rows, cols)), shape=(n, n)).tocsr()

        rhs = np.bincount(
            self._perf_cell,
            weights=perf * self._well_pressure[self._perf_well],
            minlength=n,
        )

        self.pressure = linear_solver(matrix, rhs, x0=self.pressure)
        self._face_flux = face * (self.pressure[a] - self.pressure[b])
        self._perf_rate = perf * (
            self.pressure[self._perf_cell] - self._well_pressure[self._perf_well]
        )

    def advance(self, dt: float) -> Tuple[np.ndarray, np.ndarray]:
        """
        Explicit water transport over ``dt`` seconds with the current fluxes

        Returns
        -------
        Tuple[np.ndarray, np.ndarray]
        Oil and water volumes (m^3) per well over the interval; injected
        water counts positive for injectors
        """
        if self._face_flux is None:
            self.solve_pressure()

        n = self.realisation.cell_count
        n_wells = len(self.wells)
        a, b = self._a, self._b
        flux = self._face_flux
        upstream = np.where(flux >= 0, a, b)

        produced = np.maximum(self._perf_rate, 0.0)
        injected = np.maximum(-self._perf_rate, 0.0)

        outflow = (
            np.bincount(a, weights=np.maximum(flux, 0.0), minlength=n)
            + np.bincount(b, weights=np.maximum(-flux, 0.0), minlength=n)
            + np.bincount(self._perf_cell, weights=produced, minlength=n)
        )
        speed = float(np.max(self._max_slope * outflow / self.pore_volume))

        substeps = max(1, math.ceil(dt * speed / self.config.cfl))
        if substeps > self.config.max_substeps:
            raise NumericalError(
                f"transport needs {substeps} sub-steps, "
                + f"cap is {self.config.max_substeps}"
            )
        h = dt / substeps

        oil = np.zeros(n_wells)
        water = np.zeros(n_wells)
        lower, upper = self.sat.swl, self.sat.swu
        for _ in range(substeps):
            fw = self.fractional_flow(self.saturation)
            water_flux = fw[upstream] * flux
            divergence = np.bincount(a, weights=water_flux, minlength=n) - np.bincount(
                b, weights=water_flux, minlength=n
            )

            perf_fw = fw[self._perf_cell]
            perf_water = produced * perf_fw - injected
            source = -np.bincount(self._perf_cell, weights=perf_water, minlength=n)

            self.saturation = np.clip(
                self.saturation + h * (source - divergence) / self.pore_volume,
                lower,
                upper,
            )

            oil += h * np.bincount(
                self._perf_well, weights=produced * (1 - perf_fw), minlength=n_wells
            )
            water += h * np.bincount(
                self._perf_well, weights=perf_water, minlength=n_wells
            )

        if not np.all(np.isfinite(self.saturation)):
            raise NumericalError("non-finite saturation")

        return oil, water * self._sign

    def run(self, n_steps: Optional[int] = None) -> RateSeries:
        """
        Simulate ``n_steps`` report steps (default: the configured count)
        """
        n_steps = self.config.report_steps if n_steps is None else n_steps
        step_days = self.config.report_days

        oil = np.zeros((len(self.wells), n_steps))
        water = np.zeros_like(oil)
        for s in range(n_steps):
            self.solve_pressure()
            oil_volume, water_volume = self.advance(step_days * day)
            oil[:, s] = oil_volume / step_days
            water[:, s] = water_volume / step_days

        bhp = np.repeat(self._well_pressure[:, None] / bar, n_steps, axis=1)

        return RateSeries(
            wells=tuple(w.name for w in self.wells),
            kinds=tuple(w.kind for w in self.wells),
            days=step_days * np.arange(1, n_steps + 1),
            oil_rate=oil,
            water_rate=water,
            bhp=bhp,
        )


def simulate(
    r: Realisation,
    config: SimulationConfig = SimulationConfig(),
    wells: Optional[Sequence[WellSpec]] = None,
    n_steps: Optional[int] = None,
) -> RateSeries:
    return FlowSimulator(r, wells, config).run(n_steps)
