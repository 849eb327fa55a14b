from .fluids import FluidProps, SatFunctions, connate_water, init_state
from .rates import RateSeries
from .simulator import FlowSimulator, SimulationConfig, simulate
from .solver import linear_solver
from .wells import WellKind, WellSpec, place_wells
