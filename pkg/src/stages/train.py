import logging
from pathlib import Path

import pandas as pd

from config import checkpoint_file_name
from config.run_config import RunConfig
from errors import ValidationError
from model import GwaeCheckpoint, train
from storage.checkpoint_file import write_checkpoint

from .common import load_dataset_dir, write_stage_manifest

logger = logging.getLogger(__name__)


def run_train(config: RunConfig, dataset_dir: Path, out_dir: Path) -> GwaeCheckpoint:
    """
    Train on a generated dataset and write the checkpoint with its
    per-epoch loss table
    """
    manifest, realisations = load_dataset_dir(dataset_dir)
    if realisations and realisations[0].dims != tuple(config.dataset.dims):
        raise ValidationError(
            f"dataset grid {realisations[0].dims} does not match "
            + f"dataset.dims {tuple(config.dataset.dims)}"
        )

    checkpoint = train(
        realisations,
        manifest.stats,
        config.model,
        config.training,
        config.seed,
        config_echo=config.settings(),
    )

    write_checkpoint(out_dir / checkpoint_file_name, checkpoint)
    pd.DataFrame(
        [
            (epoch + 1, recon, reg)
            for epoch, (recon, reg) in enumerate(checkpoint.loss_history)
        ],
        columns=["epoch", "recon", "reg"],
    ).to_csv(out_dir / "loss_history.csv", index=False)

    write_stage_manifest(
        out_dir,
        "train",
        config,
        dataset=str(dataset_dir),
        dataset_config_hash=manifest.config_hash,
        epochs=len(checkpoint.loss_history),
    )

    return checkpoint
