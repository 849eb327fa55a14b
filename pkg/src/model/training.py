import logging
from dataclasses import dataclass, replace
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from autodiff import AdamState, Tape, adam_step, backward
from errors import NumericalError, ValidationError
from geodata import NormalizationStats, Realisation
from utils.rng import RngSeed

from .architecture import ArchitectureConfig
from .checkpoint import GwaeCheckpoint
from .losses import wae_loss

logger = logging.getLogger(__name__)


@dataclass
class TrainingConfig:
    epochs: int = 100
    batch_size: int = 32
    learning_rate: float = 1e-3
    lam: float = 10.0
    beta1: float = 0.9
    beta2: float = 0.999

    def __post_init__(self):
        if self.epochs < 0:
            raise ValidationError("training.epochs must be >= 0")
        if self.batch_size < 2:
            raise ValidationError("training.batch_size must be >= 2 for the MMD term")
        if self.learning_rate <= 0:
            raise ValidationError("training.learning_rate must be > 0")
        if self.lam < 0:
            raise ValidationError("training.lam must be >= 0")


def dataset_features(
    realisations: Sequence[Realisation], stats: NormalizationStats
) -> np.ndarray:
    """
    (count, cells, 2) normalized features in C order
    """
    return np.stack(
        [
            stats.normalize(r.porosity, r.log_permeability).reshape(-1, 2)
            for r in realisations
        ]
    )


def batches(count: int, batch_size: int, rng: np.random.Generator) -> List[np.ndarray]:
    """
    A shuffled split into count // batch_size nearly equal batches, so no
    batch is smaller than ``batch_size`` (or than ``count`` when smaller)
    """
    order = rng.permutation(count)
    n_batches = max(1, count // batch_size)

    return np.array_split(order, n_batches)


def train(
    realisations: Sequence[Realisation],
    stats: NormalizationStats,
    architecture: ArchitectureConfig,
    config: TrainingConfig,
    seed: int,
    config_echo: Optional[Dict[str, Any]] = None,
) -> GwaeCheckpoint:
    """
    Mini-batch Adam on the WAE objective

    Parameters
    ----------
    realisations : Sequence[Realisation]
        Training set, all on one grid
    stats : NormalizationStats
    architecture : ArchitectureConfig
    config : TrainingConfig
    seed : int
        Drives initialization, shuffling and all sampling
    config_echo : Optional[Dict[str, Any]]
        Stored on the checkpoint as-is

    Returns
    -------
    GwaeCheckpoint
    Final weights with one (recon, reg) entry per epoch
    """
    if len(realisations) < 2:
        raise ValidationError("training needs at least 2 realisations")

    first = realisations[0]
    for index, r in enumerate(realisations):
        if r.dims != first.dims:
            raise ValidationError(
                f"realisation {index} is on grid {r.dims}, expected {first.dims}"
            )

    features = dataset_features(realisations, stats)

    root = RngSeed(seed).child("train")
    params = architecture.init_params(first.cell_count, root.child("init").generator())

    checkpoint = GwaeCheckpoint(
        architecture=architecture,
        dims=first.dims,
        cell_size=first.cell_size,
        top_depth=first.top_depth,
        params=params,
        stats=stats,
        config=dict(config_echo or {}),
    )

    state = AdamState()
    names = sorted(params)

    for epoch in range(config.epochs):
        epoch_rng = root.child("epoch", epoch).generator()
        recon_total = reg_total = 0.0

        split = batches(len(features), config.batch_size, epoch_rng)
        for b, index in enumerate(split):
            tape = Tape()
            variables = {name: tape.variable(params[name]) for name in names}

            try:
                total, recon, reg = wae_loss(
                    variables,
                    architecture,
                    checkpoint.plan(index.size),
                    features[index],
                    config.lam,
                    epoch_rng,
                )
                gradients = backward(tape, total)
            except NumericalError as error:
                raise NumericalError(
                    f"training diverged at epoch {epoch + 1}, batch {b + 1}: {error}"
                ) from error

            grads = {name: gradients[variables[name].index] for name in names}
            params = adam_step(
                params,
                grads,
                state,
                lr=config.learning_rate,
                beta1=config.beta1,
                beta2=config.beta2,
            )

            recon_total += recon.item() * index.size
            reg_total += reg.item() * index.size

        epoch_recon = recon_total / len(features)
        epoch_reg = reg_total / len(features)
        checkpoint.loss_history.append((epoch_recon, epoch_reg))

        logger.info(
            f"epoch {epoch + 1}/{config.epochs}",
            extra={"epoch": epoch + 1, "recon": epoch_recon, "reg": epoch_reg},
        )

    return replace(checkpoint, params=params)
