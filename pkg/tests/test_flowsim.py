import numpy as np
import pytest
import scipy.sparse as sp

from errors import ValidationError
from flowsim import (
    FlowSimulator,
    FluidProps,
    RateSeries,
    SimulationConfig,
    WellKind,
    WellSpec,
    connate_water,
    init_state,
    linear_solver,
    place_wells,
    simulate,
)
from flowsim.fluids import day, hydrostatic_pressure
from geodata import GeneratorConfig, Realisation, generate_realisations


def layered(
    dims, porosity, permeability, top_depth=2000.0, cell=(100.0, 100.0, 10.0)
):
    return Realisation(
        dims=dims,
        cell_size=cell,
        top_depth=top_depth,
        porosity=np.ones(dims) * porosity,
        permeability=np.ones(dims) * permeability,
    )


# region fluids


def test_connate_water_formula():
    assert connate_water(np.array([100.0]))[0] == pytest.approx(0.2790, abs=1e-4)
    assert connate_water(np.array([1e9]))[0] == 0.02


def test_water_zone_endpoints():
    # the whole grid sits below the oil-water contact
    r = layered((2, 2, 2), 0.2, 100.0, top_depth=2470.0)

    sat, _, sw = init_state(r, FluidProps())

    np.testing.assert_array_equal(sat.swatinit, 1.0)
    np.testing.assert_array_equal(sat.sowcr, 0.0)
    np.testing.assert_array_equal(sat.swu, 1.0)
    np.testing.assert_array_equal(sw, 1.0)


def test_oil_zone_endpoints_are_ordered():
    r = layered((2, 2, 3), 0.2, 50.0, top_depth=2300.0)

    sat, _, _ = init_state(r, FluidProps())

    assert np.all(sat.swl <= sat.swcr)
    assert np.all(sat.swcr <= sat.swatinit)
    assert np.all(sat.swatinit <= sat.swu)
    assert np.all(sat.swatinit < 1.0)


def test_pressure_at_the_contact():
    fluids = FluidProps()

    pressure = hydrostatic_pressure(np.array([fluids.owc]), fluids)

    assert pressure[0] / 1e5 == pytest.approx(240.0)


def test_fluid_validation():
    with pytest.raises(ValidationError):
        FluidProps(injector_pressure=100.0)
    with pytest.raises(ValidationError):
        FluidProps(oil_viscosity=0.0)


# endregion

# region wells


def test_line_drive_on_the_full_grid():
    wells = place_wells((16, 12, 10))

    assert len(wells) == 9
    by_prefix = {}
    for w in wells:
        by_prefix.setdefault(w.name[0], set()).add(w.i)
    assert by_prefix == {"P": {8}, "I": {2, 13}}
    assert len({(w.i, w.j) for w in wells}) == 9
    assert all(w.k_range == (0, 10) for w in wells)
    assert {w.kind for w in wells if w.name.startswith("I")} == {WellKind.INJECTOR}


def test_small_grids_are_rejected():
    with pytest.raises(ValidationError, match="too small"):
        place_wells((7, 3, 2))


# endregion

# region solver


def test_identity_system():
    b = np.arange(1.0, 6.0)

    np.testing.assert_allclose(linear_solver(sp.identity(5), b), b)


def test_laplacian_matches_dense_solve():
    n = 40
    A = sp.diags([-np.ones(n - 1), 2.5 * np.ones(n), -np.ones(n - 1)], [-1, 0, 1])
    b = np.sin(np.linspace(0, 3, n))

    x = linear_solver(A, b, rtol=1e-12)

    np.testing.assert_allclose(x, np.linalg.solve(A.toarray(), b), atol=1e-8)


def test_random_spd_matches_dense_solve():
    rng = np.random.default_rng(2)
    M = rng.normal(size=(20, 20))
    A = M @ M.T + 20 * np.eye(20)
    b = rng.normal(size=20)

    x = linear_solver(sp.csr_matrix(A), b, rtol=1e-12)

    np.testing.assert_allclose(x, np.linalg.solve(A, b), atol=1e-8)


def test_zero_rhs():
    np.testing.assert_array_equal(linear_solver(sp.identity(3), np.zeros(3)), 0.0)


# endregion

# region simulation


def test_single_phase_pressure_is_linear():
    r = layered((10, 1, 1), 0.2, 100.0, top_depth=2470.0)
    fluids = FluidProps(water_viscosity=1.0, oil_viscosity=1.0)
    wells = [
        WellSpec("I1", WellKind.INJECTOR, 0, 0, (0, 1), fluids.injector_pressure),
        WellSpec("P1", WellKind.PRODUCER, 9, 0, (0, 1), fluids.producer_pressure),
    ]
    simulator = FlowSimulator(
        r, wells, SimulationConfig(fluids=fluids), saturation=np.ones(10)
    )

    simulator.solve_pressure()
    drops = -np.diff(simulator.pressure_bar.ravel())

    assert np.all(drops > 0)
    np.testing.assert_allclose(drops, drops.mean(), rtol=0.01)


def test_injection_balances_production(realisations):
    config = SimulationConfig(report_steps=6, horizon_days=720.0)

    rates = simulate(realisations[0], config)

    injectors = [n for n, k in zip(rates.wells, rates.kinds) if k == WellKind.INJECTOR]
    producers = [n for n, k in zip(rates.wells, rates.kinds) if k == WellKind.PRODUCER]
    injected = sum(rates.well(n)["water_rate"] for n in injectors)
    produced = sum(
        rates.well(n)["oil_rate"] + rates.well(n)["water_rate"] for n in producers
    )
    np.testing.assert_allclose(injected, produced, rtol=1e-3)
    assert np.all(produced > 0)


def water_balance_errors(r: Realisation, config: SimulationConfig) -> np.ndarray:
    """
    Per report step: |storage change - (injected - produced water)| over the
    injected volume; saturations are checked against their endpoints on the way
    """
    simulator = FlowSimulator(r, config=config)
    injector = np.array([w.kind == WellKind.INJECTOR for w in simulator.wells])
    lower, upper = simulator.sat.swl, simulator.sat.swu

    errors = []
    for _ in range(config.report_steps):
        stored = np.sum(simulator.saturation * simulator.pore_volume)
        simulator.solve_pressure()
        _, water = simulator.advance(config.report_days * day)
        change = np.sum(simulator.saturation * simulator.pore_volume) - stored

        injected = water[injector].sum()
        errors.append(abs(change - (injected - water[~injector].sum())) / injected)

        assert np.all(simulator.saturation >= lower - 1e-9)
        assert np.all(simulator.saturation <= upper + 1e-9)

    return np.array(errors)


def test_water_balance_includes_storage(realisations):
    config = SimulationConfig(report_steps=6, horizon_days=720.0)

    for r in realisations:
        assert water_balance_errors(r, config).max() < 1e-3


@pytest.mark.slow
def test_water_balance_on_random_realisations():
    generator = GeneratorConfig(count=50, dims=(8, 6, 4), cell_size=(200, 200, 15))

    for r in generate_realisations(generator, seed=3, threads=0):
        errors = water_balance_errors(r, SimulationConfig())
        assert errors.shape == (60,)
        assert errors.max() < 1e-3


def breakthrough_step(rates: RateSeries, threshold: float = 0.1) -> int:
    producers = [n for n, k in zip(rates.wells, rates.kinds) if k == WellKind.PRODUCER]
    cut = np.max([rates.water_cut(n) for n in producers], axis=0)
    above = np.flatnonzero(cut > threshold)

    return int(above[0]) if above.size else rates.n_steps


def test_connected_channel_breaks_through_first():
    dims = (12, 6, 2)
    config = SimulationConfig(report_steps=30, horizon_days=1500.0)

    # row j = 3 joins the middle injector of each line to P2
    across = np.zeros(dims, bool)
    across[:, 3, :] = True
    # a column parallel to the producer line, between the lines
    parallel = np.zeros(dims, bool)
    parallel[4, :, :] = True

    def run(channel):
        r = layered(dims, np.where(channel, 0.25, 0.05), np.where(channel, 1000.0, 1.0))
        return simulate(r, config)

    connected = breakthrough_step(run(across))

    assert connected < config.report_steps
    assert connected < breakthrough_step(run(parallel))


def test_rate_table_order():
    r = layered((8, 3, 2), 0.2, 100.0)

    frame = simulate(r, SimulationConfig(report_steps=2, horizon_days=100.0)).to_frame()

    assert list(frame["well"].unique()) == sorted(frame["well"].unique())
    assert list(frame["step"][:2]) == [1, 2]
    assert len(frame) == 18


def test_frame_round_trip_keeps_rates():
    r = layered((8, 3, 2), 0.2, 100.0)
    rates = simulate(r, SimulationConfig(report_steps=3, horizon_days=90.0))
    kinds = dict(zip(rates.wells, rates.kinds))

    back = RateSeries.from_frame(rates.to_frame(), kinds)

    for name in rates.wells:
        np.testing.assert_array_equal(
            back.well(name)["oil_rate"], rates.well(name)["oil_rate"]
        )


# endregion
