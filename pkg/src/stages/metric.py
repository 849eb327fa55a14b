import logging
from pathlib import Path
from typing import Dict, Optional, Sequence

import numpy as np
import pandas as pd

from config.run_config import RunConfig
from manifold import log_volume_of, metrics_at
from storage import write_json

from .common import (
    encode_realisations,
    load_checkpoint,
    load_dataset_dir,
    record,
    write_stage_manifest,
)

logger = logging.getLogger(__name__)


def run_metric(
    config: RunConfig,
    checkpoint_path: Path,
    dataset_dir: Path,
    out_dir: Path,
    indices: Optional[Sequence[int]] = None,
) -> Dict:
    """
    Pull-back metric at the codes of the chosen records and the
    log-volume over the whole dataset

    Writes ``metrics.csv`` (one row per metric entry), ``log_volume.csv``
    and a summary with the realism percentile.
    """
    checkpoint = load_checkpoint(checkpoint_path)
    _, realisations = load_dataset_dir(dataset_dir)
    indices = [0] if not indices else list(indices)
    for index in indices:
        record(realisations, index, "--index")

    codes = encode_realisations(checkpoint, realisations)
    metrics = metrics_at(checkpoint, codes, config.threads)
    volumes = np.array([log_volume_of(g) for g in metrics])

    rows = []
    for index in indices:
        G = metrics[index].G
        rows.extend(
            (index, a, b, float(G[a, b]))
            for a in range(G.shape[0])
            for b in range(G.shape[1])
        )
    pd.DataFrame(rows, columns=["index", "row", "col", "value"]).to_csv(
        out_dir / "metrics.csv", index=False
    )
    pd.DataFrame(
        {
            "index": np.arange(len(volumes)),
            "scenario": [
                r.scenario.value if r.scenario else "" for r in realisations
            ],
            "log_volume": volumes,
        }
    ).to_csv(out_dir / "log_volume.csv", index=False)

    summary = {
        "indices": indices,
        "eigenvalues": {
            str(i): np.linalg.eigvalsh(metrics[i].G).tolist() for i in indices
        },
        "log_volume": {str(i): float(volumes[i]) for i in indices},
        "realism_percentile": config.hm.realism_percentile,
        "realism_baseline": float(
            np.percentile(volumes, config.hm.realism_percentile)
        ),
    }
    write_json(out_dir / "metric.json", summary)

    logger.info(
        f"metric at {len(codes)} codes",
        extra={"baseline": summary["realism_baseline"]},
    )
    write_stage_manifest(
        out_dir,
        "metric",
        config,
        checkpoint=str(checkpoint_path),
        dataset=str(dataset_dir),
        indices=indices,
    )

    return summary
