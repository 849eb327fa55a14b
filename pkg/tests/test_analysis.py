from itertools import combinations

import numpy as np
import pytest

from analysis import (
    AnalysisConfig,
    PersistenceDiagram,
    farthest_point_subsample,
    h0_diagram,
    h0_outliers,
    most_persistent,
    mst_edges,
    pca_back_project,
    pca_fit,
    pca_project,
    persistence,
    tsne,
)
from errors import ValidationError


def two_clusters(per_cluster=30, m=8, gap=20.0, seed=0):
    rng = np.random.default_rng(seed)
    shift = np.zeros(m)
    shift[0] = gap

    return np.vstack(
        [rng.normal(size=(per_cluster, m)), rng.normal(size=(per_cluster, m)) + shift]
    )


def kruskal_weights(points: np.ndarray) -> np.ndarray:
    n = len(points)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    edges = sorted(
        (np.linalg.norm(points[i] - points[j]), i, j)
        for i, j in combinations(range(n), 2)
    )
    weights = []
    for length, i, j in edges:
        a, b = find(i), find(j)
        if a != b:
            parent[a] = b
            weights.append(length)

    return np.array(weights)


# region PCA


def test_collinear_points_have_one_component():
    t = np.linspace(-1, 1, 9)
    codes = np.stack([t, 2 * t + 1], axis=1)

    model = pca_fit(codes)

    assert model.explained_ratio[0] == pytest.approx(1.0)
    assert model.explained_variance[1] < 1e-10


def test_variances_match_dense_eigensolve():
    codes = np.random.default_rng(0).normal(size=(10, 5))

    model = pca_fit(codes)

    expected = np.sort(np.linalg.eigvalsh(np.cov(codes.T)))[::-1]
    np.testing.assert_allclose(model.explained_variance, expected, atol=1e-8)
    assert model.explained_variance.sum() == pytest.approx(
        np.trace(np.cov(codes.T)), abs=1e-8
    )
    np.testing.assert_allclose(
        model.components @ model.components.T, np.eye(5), atol=1e-8
    )
    assert np.all(np.diff(model.explained_variance) <= 0)


def test_full_projection_round_trip():
    codes = np.random.default_rng(1).normal(size=(10, 5))
    model = pca_fit(codes)

    back = pca_back_project(model, pca_project(model, codes))

    np.testing.assert_allclose(back, codes, atol=1e-8)


def test_single_code_projection():
    codes = np.random.default_rng(2).normal(size=(6, 3))
    model = pca_fit(codes, 2)

    np.testing.assert_allclose(
        pca_project(model, codes[0]), pca_project(model, codes)[0]
    )


def test_pca_validation():
    with pytest.raises(ValidationError):
        pca_fit(np.zeros((1, 3)))
    with pytest.raises(ValidationError, match="n_components"):
        pca_fit(np.zeros((4, 3)), 4)
    with pytest.raises(ValidationError, match="finite"):
        pca_fit(np.array([[0.0, np.nan], [1.0, 2.0]]))
    with pytest.raises(ValidationError, match="coordinates"):
        pca_project(pca_fit(np.eye(3)), np.zeros(2))


# endregion

# region t-SNE


def test_tsne_separates_distant_clusters():
    codes = two_clusters()

    embedding = tsne(codes, perplexity=10.0, dims=2, iters=500, seed=0)

    first, second = embedding[:30], embedding[30:]
    spread = np.mean(
        [
            np.linalg.norm(first - first.mean(axis=0), axis=1).mean(),
            np.linalg.norm(second - second.mean(axis=0), axis=1).mean(),
        ]
    )
    gap = np.linalg.norm(first.mean(axis=0) - second.mean(axis=0))
    assert gap >= 5 * spread


def test_tsne_smallest_case():
    codes = np.random.default_rng(3).normal(size=(3, 4))

    embedding = tsne(codes, perplexity=1.0, dims=2, iters=250, seed=1)

    assert embedding.shape == (3, 2)
    assert np.all(np.isfinite(embedding))


def test_tsne_is_seeded():
    codes = np.random.default_rng(4).normal(size=(20, 4))

    a = tsne(codes, perplexity=5.0, dims=3, iters=250, seed=7)
    b = tsne(codes, perplexity=5.0, dims=3, iters=250, seed=7)

    np.testing.assert_array_equal(a, b)


def test_tsne_validation():
    codes = np.zeros((6, 3))
    with pytest.raises(ValidationError, match="perplexity"):
        tsne(codes, perplexity=3.0)
    with pytest.raises(ValidationError, match="dims"):
        tsne(codes, perplexity=1.0, dims=4)
    with pytest.raises(ValidationError, match="250"):
        tsne(codes, perplexity=1.0, iters=100)


# endregion

# region persistence


def test_collinear_h0():
    codes = np.array([[0.0, 0.0], [0.5, 0.0], [1.0, 0.0]])

    (h0,) = persistence(codes, max_dim=0)

    np.testing.assert_allclose(h0.pairs[:, 0], 0.0)
    np.testing.assert_allclose(h0.pairs[:2, 1], [0.5, 0.5])
    assert h0.pairs[2, 1] == np.inf


def test_square_has_one_ring():
    codes = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])

    _, h1 = persistence(codes, max_dim=1, seed=None)

    assert h1.dimension == 1
    assert len(h1.pairs) == 1
    np.testing.assert_allclose(h1.pairs[0], [1.0, np.sqrt(2.0)], atol=1e-9)


def test_separated_clusters_have_one_long_bar():
    codes = two_clusters(per_cluster=20, m=3, gap=30.0)

    deaths = np.sort(h0_diagram(codes).finite()[:, 1])

    assert deaths[-1] > 5 * deaths[-2]


def test_h0_matches_kruskal():
    codes = np.random.default_rng(5).normal(size=(40, 3))

    diagram = h0_diagram(codes)

    assert len(diagram.pairs) == len(codes)
    np.testing.assert_allclose(
        diagram.finite()[:, 1], kruskal_weights(codes), atol=1e-12
    )


def test_mst_edges_are_sorted():
    codes = np.random.default_rng(6).normal(size=(15, 2))

    edges = mst_edges(codes)

    assert edges.shape == (14, 3)
    assert np.all(np.diff(edges[:, 2]) >= 0)


def test_outlier_joins_last():
    codes = np.vstack([np.random.default_rng(7).normal(size=(20, 3)), [[40, 0, 0]]])

    outliers = h0_outliers(codes, count=2)

    assert outliers[0][0] == 20
    assert outliers[0][1] > outliers[1][1]


def test_most_persistent_orders_by_lifetime():
    diagram = PersistenceDiagram(
        1, np.array([[0.1, 0.3], [0.2, 1.0], [0.5, 0.6], [0.0, 0.4]])
    )

    top = most_persistent(diagram, 2)

    np.testing.assert_allclose(top, [[0.2, 1.0], [0.0, 0.4]])


def test_farthest_point_order():
    codes = np.array([[0.0], [1.0], [2.0], [10.0], [5.0]])

    np.testing.assert_array_equal(farthest_point_subsample(codes, 3), [0, 3, 4])
    assert len(farthest_point_subsample(codes, 10)) == 5


def test_persistence_frames():
    codes = np.random.default_rng(8).normal(size=(12, 3))

    frames = [d.to_frame() for d in persistence(codes, subsample=8, seed=3)]

    assert list(frames[0].columns) == ["dimension", "birth", "death"]
    assert set(frames[0]["dimension"]) == {0}
    assert len(frames[0]) == 12


def test_persistence_validation():
    with pytest.raises(ValidationError, match="max_dim"):
        persistence(np.zeros((5, 2)), max_dim=2)
    with pytest.raises(ValidationError, match="finite"):
        persistence(np.array([[np.inf, 0.0], [0.0, 0.0]]))
    with pytest.raises(ValidationError, match="at least 4"):
        persistence(np.random.default_rng(0).normal(size=(3, 2)), max_dim=1)
    with pytest.raises(ValidationError):
        PersistenceDiagram(0, np.array([[1.0, 0.5]]))


def test_analysis_config_validation():
    with pytest.raises(ValidationError):
        AnalysisConfig(tsne_dims=4)
    with pytest.raises(ValidationError):
        AnalysisConfig(subsample=3)


# endregion
