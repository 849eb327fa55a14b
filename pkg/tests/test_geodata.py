import numpy as np
import pytest
from scipy import ndimage

from config import (
    Scenario,
    background_porosity,
    channel_porosity,
    channel_ranges,
    permeability_bounds,
    porosity_bounds,
)
from errors import ValidationError
from geodata import (
    ChannelParams,
    ChannelPlacement,
    GeneratorConfig,
    NormalizationStats,
    generate_dataset,
    generate_realisation,
    generate_realisations,
    graph_to_realisation,
    load_dataset,
    poro_perm_transform,
    rasterize_channels,
    realisation_to_graph,
    sample_channel_params,
    scenario_of_index,
)
from geodata.channels import six_connectivity
from utils.rng import RngSeed

desk_dims = (8, 6, 4)
desk_cells = (200.0, 200.0, 15.0)


def generator(label: str) -> np.random.Generator:
    return RngSeed(7).child(label).generator()


# region channel parameters


@pytest.mark.parametrize("scenario", list(Scenario))
def test_channel_params_stay_in_their_ranges(scenario):
    rng = generator(scenario.value)

    for _ in range(50):
        params = sample_channel_params(scenario, rng)
        assert params.within(scenario)


def test_scenario_settings():
    single = sample_channel_params(Scenario.SINGLE, generator("s"))
    double = sample_channel_params(Scenario.DOUBLE, generator("d"))

    assert single.n_channels == 1 and single.orientation == 90.0
    assert 300.0 <= single.width <= 500.0
    assert 1000.0 <= single.wavelength <= 2000.0
    assert double.n_channels == 2 and double.orientation == 120.0
    assert 500.0 <= double.amplitude <= 900.0


def test_channel_params_round_trip_through_arrays():
    params = sample_channel_params(Scenario.DOUBLE, generator("a"))

    assert ChannelParams.from_array(params.as_array()) == params


def test_channel_params_validation():
    with pytest.raises(ValidationError):
        ChannelParams(3, 300.0, 10.0, 1000.0, 0.0, 90.0)
    with pytest.raises(ValidationError):
        ChannelParams(1, 300.0, 10.0, 1000.0, -1.0, 90.0)


def test_zero_amplitude_channel_is_straight():
    params = ChannelParams(1, 300.0, 15.0, 1500.0, 0.0, 90.0)
    placement = ChannelPlacement(offset=0.0, phase=1.0, level=2430.0)

    facies = rasterize_channels(params, [placement], desk_dims, desk_cells, 2400.0)

    # an east-west band: every x column holds the same rows
    in_plan = facies.any(axis=2)
    assert in_plan.any()
    assert np.all(in_plan == in_plan[:1])


# endregion

# region realisations


def test_double_realisation_has_two_bodies():
    r = generate_realisation(
        Scenario.DOUBLE, generator("double"), dims=desk_dims, cell_size=desk_cells
    )

    assert set(np.unique(r.facies[r.facies > 0])) == {1, 2}
    for label in (1, 2):
        _, count = ndimage.label(r.facies == label, structure=six_connectivity)
        assert count == 1


@pytest.mark.parametrize("scenario", list(Scenario))
def test_channel_porosity_exceeds_background(scenario):
    r = generate_realisation(
        scenario, generator(f"facies-{scenario.value}"), desk_dims, desk_cells
    )
    channel = r.facies > 0

    assert r.porosity[channel].min() > r.porosity[~channel].max()
    assert r.porosity.min() >= porosity_bounds[0]
    assert r.porosity.max() <= porosity_bounds[1]
    assert np.all(r.permeability > 0)
    assert r.params.within(scenario)


def test_single_channel_volume_matches_the_tube():
    dims, cells = (24, 16, 10), (100.0, 100.0, 5.0)
    params = ChannelParams(1, 300.0, 10.0, 1500.0, 0.0, 90.0)
    placement = ChannelPlacement(offset=50.0, phase=0.0, level=2430.0)

    facies = rasterize_channels(params, [placement], dims, cells, 2400.0)

    # straight channel along x: width x thickness x grid length
    tube = params.width * params.thickness * dims[0] * cells[0]
    cell_volume = np.prod(cells)
    assert np.sum(facies > 0) == pytest.approx(tube / cell_volume, rel=0.2)


def test_default_top_depth_puts_the_base_on_the_contact():
    config = GeneratorConfig()

    assert config.resolved_top_depth == pytest.approx(2400.0)


def test_generator_config_validation():
    with pytest.raises(ValidationError):
        GeneratorConfig(dims=(0, 1, 1))
    with pytest.raises(ValidationError):
        GeneratorConfig(count=-1)


# endregion

# region poro-perm


def test_noise_free_transform_is_log_linear():
    rng = np.random.default_rng(0)
    porosity = rng.uniform(0.18, 0.30, size=500)
    mask = np.ones(500, bool)

    permeability = poro_perm_transform(
        porosity, mask, rng, channel_coefficients=(1.0, 10.0, 0.0)
    )

    np.testing.assert_allclose(np.log10(permeability), 1.0 + 10.0 * porosity)


def test_transform_is_a_cloud():
    porosity = np.full(100, 0.05)
    mask = np.zeros(100, bool)

    first = poro_perm_transform(porosity, mask, np.random.default_rng(1))
    second = poro_perm_transform(porosity, mask, np.random.default_rng(2))

    assert not np.array_equal(first, second)
    assert first.min() >= permeability_bounds[0]
    assert first.max() <= permeability_bounds[1]


@pytest.mark.parametrize(
    "porosity_range, channel, lowest",
    [(channel_porosity, True, 0.6), (background_porosity, False, 0.3)],
)
def test_facies_correlation(porosity_range, channel, lowest):
    rng = np.random.default_rng(3)
    porosity = rng.uniform(*porosity_range, size=1000)
    mask = np.full(1000, channel)

    log_perm = np.log10(poro_perm_transform(porosity, mask, rng))

    assert lowest <= np.corrcoef(porosity, log_perm)[0, 1] <= 0.99


# endregion

# region graphs and datasets


def test_graph_round_trip(realisations, stats):
    rng = np.random.default_rng(4)
    # inside the physical bounds, so the inverse does not clamp
    r = realisations[0].like(
        rng.uniform(0.03, 0.29, size=(8, 3, 3)), 10.0 ** rng.uniform(-1, 3, (8, 3, 3))
    )

    graph = realisation_to_graph(r, stats)
    back = graph_to_realisation(graph, stats, r)

    assert graph.node_count == r.cell_count
    np.testing.assert_allclose(back.porosity, r.porosity, rtol=0, atol=1e-12)
    np.testing.assert_allclose(
        np.log10(back.permeability), r.log_permeability, rtol=0, atol=1e-12
    )


def test_conversion_needs_stats(realisations):
    with pytest.raises(ValidationError, match="stats"):
        realisation_to_graph(realisations[0], None)


def test_scenarios_alternate():
    assert [scenario_of_index(i) for i in range(4)] == [
        Scenario.SINGLE,
        Scenario.DOUBLE,
        Scenario.SINGLE,
        Scenario.DOUBLE,
    ]


def test_two_records_split_across_scenarios(tmp_path):
    config = GeneratorConfig(count=2, dims=desk_dims, cell_size=desk_cells)

    manifest = generate_dataset(config, 5, tmp_path, "hash")

    assert manifest.counts == {Scenario.SINGLE.value: 1, Scenario.DOUBLE.value: 1}


def test_dataset_is_deterministic(tmp_path):
    config = GeneratorConfig(count=4, dims=desk_dims, cell_size=desk_cells)

    generate_dataset(config, 11, tmp_path / "a", "hash")
    generate_dataset(config, 11, tmp_path / "b", "hash", threads=2)

    first = (tmp_path / "a" / "dataset.gwds").read_bytes()
    assert first == (tmp_path / "b" / "dataset.gwds").read_bytes()


def test_manifest_stats_are_recomputable(dataset_dir):
    manifest, realisations = load_dataset(dataset_dir)
    recomputed = NormalizationStats.from_realisations(realisations)

    assert manifest.count == len(realisations)
    for name, value in manifest.stats.to_dict().items():
        assert getattr(recomputed, name) == pytest.approx(value, abs=1e-9)


def test_realisations_only_depend_on_their_index():
    config = GeneratorConfig(count=3, dims=desk_dims, cell_size=desk_cells)
    longer = GeneratorConfig(count=5, dims=desk_dims, cell_size=desk_cells)

    short = generate_realisations(config, 2)
    extended = generate_realisations(longer, 2)

    for a, b in zip(short, extended):
        np.testing.assert_array_equal(a.porosity, b.porosity)


def test_full_scale_default_count():
    assert GeneratorConfig().count == 5000
    assert set(channel_ranges) == set(Scenario)


# endregion
