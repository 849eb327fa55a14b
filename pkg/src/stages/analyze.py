import logging
from pathlib import Path
from typing import Dict

import numpy as np
import pandas as pd

from analysis import (
    h0_outliers,
    most_persistent,
    pca_fit,
    pca_project,
    persistence,
    tsne,
)
from config.run_config import RunConfig
from storage import write_json
from utils.rng import RngSeed

from .common import (
    encode_realisations,
    load_checkpoint,
    load_dataset_dir,
    write_stage_manifest,
)

logger = logging.getLogger(__name__)


def _labelled(
    values: np.ndarray, prefix: str, scenarios, start: int = 1
) -> pd.DataFrame:
    frame = pd.DataFrame(
        values, columns=[f"{prefix}{i + start}" for i in range(values.shape[1])]
    )
    frame.insert(0, "scenario", scenarios)
    frame.insert(0, "index", np.arange(len(values)))

    return frame


def run_analyze(
    config: RunConfig, checkpoint_path: Path, dataset_dir: Path, out_dir: Path
) -> Dict:
    """
    Latent codes of the dataset with PCA, t-SNE and persistence tables,
    each labelled by scenario
    """
    settings = config.analysis
    checkpoint = load_checkpoint(checkpoint_path)
    _, realisations = load_dataset_dir(dataset_dir)

    codes = encode_realisations(checkpoint, realisations)
    scenarios = [r.scenario.value if r.scenario else "" for r in realisations]
    root = RngSeed(config.seed).child("analyze")

    _labelled(codes, "z", scenarios, start=0).to_csv(
        out_dir / "codes.csv", index=False
    )

    components = min(settings.pca_components, *codes.shape)
    pca = pca_fit(codes, components)
    _labelled(pca_project(pca, codes), "pc", scenarios).to_csv(
        out_dir / "pca.csv", index=False
    )
    pd.DataFrame(
        {
            "component": np.arange(1, components + 1),
            "explained_variance": pca.explained_variance,
            "explained_ratio": pca.explained_ratio,
        }
    ).to_csv(out_dir / "pca_variance.csv", index=False)

    embedding = tsne(
        codes,
        perplexity=min(settings.perplexity, len(codes) / 3),
        dims=settings.tsne_dims,
        iters=settings.tsne_iters,
        seed=root.child("tsne").as_int(),
        learning_rate=settings.tsne_learning_rate,
    )
    _labelled(embedding, "tsne", scenarios).to_csv(out_dir / "tsne.csv", index=False)

    diagrams = persistence(
        codes,
        max_dim=settings.max_dim,
        subsample=settings.subsample,
        seed=root.child("persistence").as_int(),
    )
    pd.concat([d.to_frame() for d in diagrams], ignore_index=True).to_csv(
        out_dir / "persistence.csv", index=False
    )

    report = {
        "count": len(codes),
        "explained_ratio": pca.explained_ratio,
        "h0_outliers": [
            {"index": i, "merge_distance": d, "scenario": scenarios[i]}
            for i, d in h0_outliers(codes, settings.report_count)
        ],
        "most_persistent": {
            f"H{d.dimension}": most_persistent(d, settings.report_count)
            for d in diagrams
        },
    }
    write_json(out_dir / "analysis.json", report)

    logger.info(
        f"analysed {len(codes)} codes",
        extra={"count": len(codes), "diagrams": len(diagrams)},
    )
    write_stage_manifest(
        out_dir,
        "analyze",
        config,
        checkpoint=str(checkpoint_path),
        dataset=str(dataset_dir),
    )

    return report
