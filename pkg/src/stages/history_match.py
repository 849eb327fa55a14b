import logging
from dataclasses import replace
from pathlib import Path
from typing import Dict, Tuple

import numpy as np

from config.run_config import RunConfig
from history_match import (
    HistoryMatchSummary,
    ReferenceCase,
    ablation_run,
    build_reference,
    history_match,
    reference_truth,
)
from model import GwaeCheckpoint
from storage import write_dataset

from .common import (
    encode_realisations,
    load_checkpoint,
    load_dataset_dir,
    write_stage_manifest,
)

logger = logging.getLogger(__name__)


def _prepare(
    config: RunConfig, checkpoint_path: Path, dataset_dir: Path, out_dir: Path
) -> Tuple[GwaeCheckpoint, ReferenceCase, np.ndarray, np.ndarray]:
    """
    Checkpoint, observable reference, training codes and the encoded truth

    The truth grid itself is only written out for audit and encoded for
    the PCA picture; the optimizer sees the reference case alone.
    """
    checkpoint = load_checkpoint(checkpoint_path)
    _, realisations = load_dataset_dir(dataset_dir)

    truth = reference_truth(config.hm, config.dataset, config.seed, realisations)
    write_dataset(out_dir / "reference.gwds", [truth])
    reference = build_reference(
        truth, config.flow, config.hm.observed_wells, truth_seed=truth.seed
    )
    reference_code = encode_realisations(checkpoint, [truth])[0]

    codes = encode_realisations(checkpoint, realisations)

    return checkpoint, reference, codes, reference_code


def run_history_match(
    config: RunConfig,
    checkpoint_path: Path,
    dataset_dir: Path,
    out_dir: Path,
    no_realism: bool = False,
) -> HistoryMatchSummary:
    """
    CMA-ES restarts against a hidden reference; ``no_realism`` zeroes the
    realism weight
    """
    hm = config.hm
    if no_realism:
        hm = replace(hm, weights=replace(hm.weights, realism=0.0))
        config = replace(config, hm=hm)

    checkpoint, reference, codes, reference_code = _prepare(
        config, checkpoint_path, dataset_dir, out_dir
    )
    summary = history_match(
        checkpoint,
        reference,
        hm,
        config.flow,
        codes,
        out_dir,
        config.seed,
        threads=config.threads,
        reference_code=reference_code,
    )

    write_stage_manifest(
        out_dir,
        "history-match",
        config,
        checkpoint=str(checkpoint_path),
        dataset=str(dataset_dir),
        truth_seed=reference.truth_seed,
        best_restart=summary.winner.restart,
        best_total=summary.winner.result.best_value,
    )

    return summary


def run_ablation(
    config: RunConfig, checkpoint_path: Path, dataset_dir: Path, out_dir: Path
) -> Dict[str, Dict]:
    checkpoint, reference, codes, reference_code = _prepare(
        config, checkpoint_path, dataset_dir, out_dir
    )
    report = ablation_run(
        checkpoint,
        reference,
        config.hm,
        config.flow,
        codes,
        out_dir,
        config.seed,
        threads=config.threads,
        reference_code=reference_code,
    )

    write_stage_manifest(
        out_dir,
        "ablation",
        config,
        checkpoint=str(checkpoint_path),
        dataset=str(dataset_dir),
        truth_seed=reference.truth_seed,
        log_volume={name: run["log_volume"] for name, run in report.items()},
    )

    return report
