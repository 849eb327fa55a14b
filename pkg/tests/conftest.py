from typing import List, NamedTuple, Tuple

import numpy as np
import pytest

from analysis import AnalysisConfig
from autodiff import Tensor, ops
from config import configs_dir
from config.run_config import RunConfig, load_run_config
from flowsim import SimulationConfig
from geodata import (
    GeneratorConfig,
    NormalizationStats,
    Realisation,
    generate_dataset,
    generate_realisations,
)
from history_match import HistoryMatchConfig
from manifold import GeodesicConfig
from model import ArchitectureConfig, GwaeCheckpoint, TrainingConfig, train
from stages.common import encode_realisations

# smallest grid the line drive fits on; dz = 10 m puts a layer centre
# within half a channel thickness of any channel level
tiny_generator = GeneratorConfig(
    count=12, dims=(8, 3, 3), cell_size=(200.0, 200.0, 10.0)
)
tiny_architecture = ArchitectureConfig(
    latent_dim=3, encoder_channels=(4,), decoder_channels=(4,)
)
tiny_training = TrainingConfig(epochs=2, batch_size=4, learning_rate=0.01)
tiny_flow = SimulationConfig(report_steps=6, horizon_days=720.0)


class LinearDecoder:
    """
    mu = z A with a constant log standard deviation, so the metric is A A^T
    everywhere
    """

    def __init__(self, A: np.ndarray):
        self.A = np.asarray(A, dtype=np.float64)

    @property
    def latent_dim(self) -> int:
        return self.A.shape[0]

    def decode_tensor(self, z: Tensor) -> Tuple[Tensor, Tensor]:
        mu = ops.matmul(z, Tensor(self.A))
        return mu, Tensor(np.zeros(mu.shape))


class WarpedDecoder(LinearDecoder):
    """
    mu = tanh(z A), sigma = exp(0.5 z B); the metric varies with z
    """

    def __init__(self, A: np.ndarray, B: np.ndarray):
        super().__init__(A)
        self.B = np.asarray(B, dtype=np.float64)

    def decode_tensor(self, z: Tensor) -> Tuple[Tensor, Tensor]:
        mu = ops.tanh(ops.matmul(z, Tensor(self.A)))
        log_sigma = ops.scale(ops.matmul(z, Tensor(self.B)), 0.5)
        return mu, log_sigma


@pytest.fixture(scope="session")
def realisations():
    return generate_realisations(tiny_generator, seed=0)


@pytest.fixture(scope="session")
def stats(realisations) -> NormalizationStats:
    return NormalizationStats.from_realisations(realisations)


@pytest.fixture(scope="session")
def checkpoint(realisations, stats):
    return train(realisations, stats, tiny_architecture, tiny_training, seed=0)


@pytest.fixture(scope="session")
def dataset_dir(tmp_path_factory):
    out_dir = tmp_path_factory.mktemp("dataset")
    generate_dataset(tiny_generator, 0, out_dir, config_hash="test")

    return out_dir


@pytest.fixture(scope="session")
def run_config() -> RunConfig:
    return RunConfig(
        seed=0,
        threads=1,
        dataset=tiny_generator,
        model=tiny_architecture,
        training=tiny_training,
        flow=tiny_flow,
        hm=HistoryMatchConfig(popsize=4, iters=2, restarts=1),
        analysis=AnalysisConfig(
            perplexity=2.0,
            tsne_dims=2,
            tsne_iters=250,
            subsample=8,
            report_count=3,
            geodesic=GeodesicConfig(neighbours=4, chain_factor=2, steps=4),
        ),
    )


@pytest.fixture
def linear_decoder() -> LinearDecoder:
    return LinearDecoder(np.random.default_rng(0).normal(size=(3, 5)))


@pytest.fixture
def warped_decoder() -> WarpedDecoder:
    rng = np.random.default_rng(1)
    return WarpedDecoder(rng.normal(size=(2, 6)), rng.normal(size=(2, 6)))


# region desk scale


class DeskModel(NamedTuple):
    realisations: List[Realisation]
    stats: NormalizationStats
    checkpoint: GwaeCheckpoint
    codes: np.ndarray


@pytest.fixture(scope="session")
def desk_config() -> RunConfig:
    return load_run_config(configs_dir / "desk.json", environ={})


@pytest.fixture(scope="session")
def desk_model(desk_config) -> DeskModel:
    """
    The desk dataset and autoencoder, trained once per session
    """
    realisations = generate_realisations(
        desk_config.dataset, desk_config.seed, threads=0
    )
    stats = NormalizationStats.from_realisations(realisations)
    checkpoint = train(
        realisations,
        stats,
        desk_config.model,
        desk_config.training,
        seed=desk_config.seed,
    )

    return DeskModel(
        realisations, stats, checkpoint, encode_realisations(checkpoint, realisations)
    )


# endregion
