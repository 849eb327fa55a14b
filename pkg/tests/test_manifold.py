import numpy as np
import pytest

from autodiff import Tensor, ops
from config import Scenario
from errors import NumericalError, ValidationError
from manifold import (
    GeodesicConfig,
    LatentPath,
    MetricTensor,
    arc_stations,
    geodesic,
    interpolate,
    interpolate_codes,
    log_volume,
    log_volume_of,
    metrics_at,
    pullback_metric,
    riemannian_length,
    straight_path,
)
from stages.common import encode_realisations

from conftest import LinearDecoder

small = GeodesicConfig(neighbours=4, chain_factor=2, steps=5)


class ExplodingDecoder(LinearDecoder):
    def decode_tensor(self, z):
        mu = ops.exp(ops.scale(ops.matmul(z, Tensor(self.A)), 1e4))
        return mu, Tensor(np.zeros(mu.shape))


def finite_difference_metric(decoder, z, h=1e-6):
    def heads(point):
        mu, log_sigma = decoder.decode_tensor(Tensor(point[None, :]))
        return np.concatenate([mu.data.ravel(), np.exp(log_sigma.data).ravel()])

    J = np.stack(
        [
            (heads(z + h * e) - heads(z - h * e)) / (2 * h)
            for e in np.eye(z.size)
        ],
        axis=1,
    )

    return J.T @ J


# region metric


def test_linear_decoder_metric(linear_decoder):
    z = np.array([0.3, -1.2, 0.7])

    metric = pullback_metric(linear_decoder, z)

    A = linear_decoder.A
    np.testing.assert_allclose(metric.G, A @ A.T, atol=1e-12)
    np.testing.assert_array_equal(metric.z, z)


def test_metric_matches_finite_differences(warped_decoder):
    rng = np.random.default_rng(3)
    for z in rng.normal(scale=0.5, size=(5, 2)):
        G = pullback_metric(warped_decoder, z).G
        expected = finite_difference_metric(warped_decoder, z)

        assert np.max(np.abs(G - expected)) < 1e-3 * np.max(np.abs(expected))


def test_metric_is_symmetric_and_psd(warped_decoder):
    for z in np.random.default_rng(4).normal(size=(100, 2)):
        metric = pullback_metric(warped_decoder, z)

        assert np.max(np.abs(metric.G - metric.G.T)) < 1e-10
        assert np.linalg.eigvalsh(metric.G).min() >= -1e-8 * metric.trace


def test_trained_metric_is_symmetric(checkpoint):
    metric = pullback_metric(checkpoint, np.array([0.2, -0.1, 0.4]))

    assert metric.G.shape == (3, 3)
    np.testing.assert_array_equal(metric.G, metric.G.T)
    assert np.linalg.eigvalsh(metric.G).min() >= -1e-8 * metric.trace


def test_metric_rejects_wrong_length(linear_decoder):
    with pytest.raises(ValidationError, match="length 3"):
        pullback_metric(linear_decoder, np.zeros(2))
    with pytest.raises(ValidationError):
        MetricTensor(np.zeros(2), np.eye(3))


def test_non_finite_decoder_is_reported():
    with pytest.raises(NumericalError):
        pullback_metric(ExplodingDecoder(np.ones((2, 2))), np.ones(2))


def test_identity_metric_has_zero_volume():
    assert log_volume(LinearDecoder(np.eye(3)), np.zeros(3)) == pytest.approx(
        0.0, abs=1e-8
    )


def test_scaled_identity_volume():
    value = log_volume(LinearDecoder(2 * np.eye(2)), np.array([0.5, 0.5]))

    assert value == pytest.approx(np.log(4.0), rel=1e-8)


def test_volume_ignores_latent_rotation(linear_decoder):
    angle = 0.7
    c, s = np.cos(angle), np.sin(angle)
    R = np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
    z = np.array([0.1, 0.2, 0.3])

    rotated = LinearDecoder(R @ linear_decoder.A)

    assert log_volume(rotated, z @ R.T) == pytest.approx(
        log_volume(linear_decoder, z), abs=1e-9
    )


def test_parallel_metrics_match_serial(checkpoint):
    points = np.random.default_rng(5).normal(size=(4, 3))

    serial = metrics_at(checkpoint, points, threads=1)
    parallel = metrics_at(checkpoint, points, threads=2)

    for a, b in zip(serial, parallel):
        np.testing.assert_array_equal(a.G, b.G)


# endregion

# region lengths


def test_single_point_has_no_length(warped_decoder):
    assert riemannian_length(warped_decoder, np.zeros((1, 2))) == 0.0


def test_identity_metric_length_is_euclidean():
    path = np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [1.0, 2.0, 2.0]])

    length = riemannian_length(LinearDecoder(np.eye(3)), path)

    assert length == pytest.approx(4.0)


def test_refinement_barely_changes_length(warped_decoder):
    a, b = np.array([0.2, -0.1]), np.array([0.25, -0.05])
    coarse = riemannian_length(warped_decoder, np.stack([a, b]))

    fine = riemannian_length(warped_decoder, np.stack([a, 0.5 * (a + b), b]))

    assert abs(fine - coarse) < 0.01 * coarse


# endregion

# region geodesics


def test_geodesic_between_equal_codes(warped_decoder):
    z = np.array([0.4, 0.1])

    path = geodesic(warped_decoder, z, z, config=small)

    assert len(path.points) == 1
    assert path.riemannian_length == 0.0


def test_constant_metric_geodesic_is_the_chain():
    decoder = LinearDecoder(np.eye(2))
    z_a, z_b = np.array([-1.0, 0.0]), np.array([1.0, 0.5])
    anchors = np.random.default_rng(0).normal(size=(30, 2))

    path = geodesic(decoder, z_a, z_b, anchors, small)
    chain = straight_path(decoder, z_a, z_b, small)

    assert path.riemannian_length == pytest.approx(chain.riemannian_length, abs=1e-9)
    assert path.riemannian_length == pytest.approx(np.linalg.norm(z_b - z_a))


def test_geodesic_never_beats_the_chain_backwards(warped_decoder):
    rng = np.random.default_rng(9)
    anchors = rng.normal(size=(40, 2))
    for _ in range(5):
        z_a, z_b = rng.normal(size=(2, 2))
        path = geodesic(warped_decoder, z_a, z_b, anchors, small)
        chain = straight_path(warped_decoder, z_a, z_b, small)

        assert path.riemannian_length <= chain.riemannian_length + 1e-12
        np.testing.assert_array_equal(path.points[0], z_a)
        np.testing.assert_array_equal(path.points[-1], z_b)
        assert path.metric == "geodesic"


def test_anchor_width_is_checked(warped_decoder):
    with pytest.raises(ValidationError, match="coordinates"):
        geodesic(warped_decoder, np.zeros(2), np.ones(2), np.zeros((3, 3)), small)


def test_path_validation():
    with pytest.raises(ValidationError):
        LatentPath(np.zeros((2, 2)), "euclidean", np.zeros(2), np.zeros(2))
    with pytest.raises(ValidationError):
        LatentPath(np.zeros((2, 2)), "euclidean", np.array([-1.0]), np.zeros(2))


def test_geodesic_config_validation():
    with pytest.raises(ValidationError):
        GeodesicConfig(steps=1)
    with pytest.raises(ValidationError):
        GeodesicConfig(neighbours=0)


# endregion

# region interpolation


def uneven_path(metric):
    return LatentPath(
        points=np.array([[0.0], [1.0], [3.0]]),
        metric=metric,
        segments=np.array([1.0, 1.0]),
        log_volumes=np.zeros(3),
    )


def test_geodesic_stations_follow_riemannian_arc():
    stations = arc_stations(uneven_path("geodesic"), 3)

    np.testing.assert_allclose(stations.ravel(), [0.0, 1.0, 3.0])


def test_euclidean_stations_follow_euclidean_arc():
    stations = arc_stations(uneven_path("euclidean"), 3)

    np.testing.assert_allclose(stations.ravel(), [0.0, 1.5, 3.0])


def test_two_steps_are_the_endpoints(warped_decoder):
    z_a, z_b = np.array([0.1, 0.2]), np.array([-0.3, 0.9])
    config = GeodesicConfig(neighbours=4, chain_factor=2, steps=2)

    result = interpolate_codes(warped_decoder, z_a, z_b, "geodesic", config=config)

    np.testing.assert_array_equal(result.stations, np.stack([z_a, z_b]))


def test_euclidean_stations_are_collinear(warped_decoder):
    z_a, z_b = np.array([0.1, 0.2]), np.array([-0.3, 0.9])

    result = interpolate_codes(warped_decoder, z_a, z_b, "euclidean", config=small)

    direction = (z_b - z_a) / np.linalg.norm(z_b - z_a)
    for station in result.stations:
        offset = station - z_a
        along = offset @ direction
        assert np.linalg.norm(offset - along * direction) < 1e-9
        assert -1e-9 <= along <= np.linalg.norm(z_b - z_a) + 1e-9
    assert len(result.log_volumes) == small.steps


def test_unknown_path_metric(warped_decoder):
    with pytest.raises(ValidationError, match="unknown path metric"):
        interpolate_codes(warped_decoder, np.zeros(2), np.ones(2), "manhattan")


def test_interpolation_decodes_every_station(checkpoint, realisations):
    codes = encode_realisations(checkpoint, realisations)

    result = interpolate(
        checkpoint, codes[0], codes[1], steps=4, anchors=codes, config=small
    )

    assert len(result.realisations) == 4
    assert all(r.dims == checkpoint.dims for r in result.realisations)
    frame = result.to_frame()
    assert list(frame.columns) == ["station", "z0", "z1", "z2", "log_volume"]
    assert list(frame["station"]) == [0, 1, 2, 3]


# endregion


# region desk model


@pytest.mark.slow
def test_volume_grows_away_from_the_data(desk_model):
    checkpoint, codes = desk_model.checkpoint, desk_model.codes
    median = np.median(
        [log_volume_of(g) for g in metrics_at(checkpoint, codes, threads=0)]
    )
    rng = np.random.default_rng(11)

    above = 0
    for _ in range(50):
        direction = rng.normal(size=codes.shape[1])
        far = codes[rng.integers(len(codes))] + 10.0 * direction / np.linalg.norm(
            direction
        )
        above += log_volume(checkpoint, far) > median

    assert above >= 40


@pytest.mark.slow
def test_geodesics_shorten_trained_paths(desk_model):
    checkpoint, codes = desk_model.checkpoint, desk_model.codes
    rng = np.random.default_rng(12)

    shorter = 0
    for _ in range(20):
        a, b = rng.choice(len(codes), size=2, replace=False)
        path = geodesic(checkpoint, codes[a], codes[b], codes, threads=0)
        chain = straight_path(checkpoint, codes[a], codes[b], threads=0)

        assert path.riemannian_length <= chain.riemannian_length * (1 + 1e-9)
        shorter += path.riemannian_length < chain.riemannian_length * (1 - 1e-6)

    assert shorter >= 6


@pytest.mark.slow
def test_geodesics_stay_in_dense_regions(desk_model):
    checkpoint, codes = desk_model.checkpoint, desk_model.codes
    scenarios = np.array([r.scenario for r in desk_model.realisations])
    single = np.flatnonzero(scenarios == Scenario.SINGLE)
    double = np.flatnonzero(scenarios == Scenario.DOUBLE)
    rng = np.random.default_rng(13)

    denser = 0
    for _ in range(20):
        z_a, z_b = codes[rng.choice(single)], codes[rng.choice(double)]
        along = {
            metric: interpolate_codes(
                checkpoint, z_a, z_b, metric, anchors=codes, threads=0
            ).log_volumes.mean()
            for metric in ("geodesic", "euclidean")
        }
        denser += along["geodesic"] <= along["euclidean"]

    assert denser >= 14


# endregion
