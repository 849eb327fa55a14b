import logging
from pathlib import Path
from typing import Dict, Optional, Sequence

import numpy as np

from config import facies_porosity_cut
from config.run_config import RunConfig
from geodata import Realisation
from model import decode_realisation
from storage import write_dataset, write_json

from .common import (
    encode_realisations,
    load_checkpoint,
    load_dataset_dir,
    write_stage_manifest,
)

logger = logging.getLogger(__name__)


def _pooled(realisations: Sequence[Realisation]) -> Dict[str, np.ndarray]:
    return {
        "porosity": np.concatenate([r.porosity.ravel() for r in realisations]),
        "log_permeability": np.concatenate(
            [r.log_permeability.ravel() for r in realisations]
        ),
    }


def _correlation(porosity: np.ndarray, log_perm: np.ndarray) -> Optional[float]:
    if porosity.size < 2 or np.std(porosity) == 0 or np.std(log_perm) == 0:
        return None

    return float(np.corrcoef(porosity, log_perm)[0, 1])


def _statistics(pooled: Dict[str, np.ndarray]) -> Dict:
    channel = pooled["porosity"] >= facies_porosity_cut

    return {
        **{
            name: {"mean": float(np.mean(values)), "std": float(np.std(values))}
            for name, values in pooled.items()
        },
        "channel_fraction": float(np.mean(channel)),
        "poro_perm_correlation": _correlation(
            pooled["porosity"], pooled["log_permeability"]
        ),
        "channel_poro_perm_correlation": _correlation(
            pooled["porosity"][channel], pooled["log_permeability"][channel]
        ),
    }


def reconstruction_report(
    originals: Sequence[Realisation], reconstructions: Sequence[Realisation]
) -> Dict:
    """
    Per-property MSE plus the distribution and poro-perm relationship of
    both sets; channel cells are those above the facies porosity gap
    """
    original = _pooled(originals)
    reconstructed = _pooled(reconstructions)

    return {
        "count": len(originals),
        "mse": {
            name: float(np.mean(np.square(reconstructed[name] - original[name])))
            for name in original
        },
        "original": _statistics(original),
        "reconstructed": _statistics(reconstructed),
    }


def run_reconstruct(
    config: RunConfig,
    checkpoint_path: Path,
    dataset_dir: Path,
    out_dir: Path,
    count: Optional[int] = None,
) -> Dict:
    checkpoint = load_checkpoint(checkpoint_path)
    _, realisations = load_dataset_dir(dataset_dir)
    if count is not None:
        realisations = realisations[:count]

    codes = encode_realisations(checkpoint, realisations)
    reconstructions = [decode_realisation(checkpoint, z) for z in codes]

    report = reconstruction_report(realisations, reconstructions)
    write_json(out_dir / "reconstruct.json", report)
    write_dataset(out_dir / "reconstructed.gwds", reconstructions)

    logger.info(
        f"reconstructed {len(realisations)} realisations",
        extra={"mse": report["mse"]},
    )
    write_stage_manifest(
        out_dir,
        "reconstruct",
        config,
        checkpoint=str(checkpoint_path),
        dataset=str(dataset_dir),
        count=len(realisations),
    )

    return report
