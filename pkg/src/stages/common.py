import logging
from pathlib import Path
from typing import Any, Dict, List, Sequence, Tuple

import numpy as np

from config import checkpoint_file_name, manifest_file_name
from config.run_config import RunConfig
from errors import ValidationError
from geodata import DatasetManifest, Realisation, load_dataset
from model import GwaeCheckpoint, dataset_features, encode_features
from storage import write_json
from storage.checkpoint_file import read_checkpoint

logger = logging.getLogger(__name__)

encode_batch_size = 64


def write_stage_manifest(
    out_dir: Path, stage: str, config: RunConfig, **details: Any
) -> Dict[str, Any]:
    """
    Enough to reproduce the directory: stage, config hash, seed, resolved
    config and stage inputs
    """
    manifest = {
        "stage": stage,
        "config_hash": config.hash,
        "seed": config.seed,
        "config": config.settings(),
        **details,
    }
    write_json(out_dir / manifest_file_name, manifest)

    return manifest


def resolve_checkpoint(path: Path) -> Path:
    """
    Accept either the checkpoint file or the train output directory
    """
    path = Path(path)
    if path.is_dir():
        path = path / checkpoint_file_name
    if not path.is_file():
        raise ValidationError(f"checkpoint not found: {path}")

    return path


def load_checkpoint(path: Path) -> GwaeCheckpoint:
    return read_checkpoint(resolve_checkpoint(path))


def load_dataset_dir(dataset_dir: Path) -> Tuple[DatasetManifest, List[Realisation]]:
    dataset_dir = Path(dataset_dir)
    if not dataset_dir.is_dir():
        raise ValidationError(f"dataset directory not found: {dataset_dir}")

    return load_dataset(dataset_dir)


def check_grid(checkpoint: GwaeCheckpoint, realisations: Sequence[Realisation]):
    for index, r in enumerate(realisations):
        if r.dims != checkpoint.dims:
            raise ValidationError(
                f"record {index} grid {r.dims} does not match the model grid "
                + f"{checkpoint.dims}"
            )


def encode_realisations(
    checkpoint: GwaeCheckpoint, realisations: Sequence[Realisation]
) -> np.ndarray:
    """
    Posterior means (count, latent_dim), in dataset order
    """
    check_grid(checkpoint, realisations)
    codes = []
    for start in range(0, len(realisations), encode_batch_size):
        chunk = realisations[start : start + encode_batch_size]
        features = dataset_features(chunk, checkpoint.stats)
        codes.append(encode_features(checkpoint, features).mu)

    if not codes:
        return np.zeros((0, checkpoint.latent_dim))

    return np.concatenate(codes, axis=0)


def record(realisations: Sequence[Realisation], index: int, option: str) -> Realisation:
    if not 0 <= index < len(realisations):
        raise ValidationError(
            f"{option} {index} is outside the dataset (0..{len(realisations) - 1})"
        )

    return realisations[index]
