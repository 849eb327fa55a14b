import logging
from pathlib import Path

from config.run_config import RunConfig
from manifold import Interpolation, PathMetric, interpolate
from storage import write_dataset

from .common import (
    encode_realisations,
    load_checkpoint,
    load_dataset_dir,
    record,
    write_stage_manifest,
)

logger = logging.getLogger(__name__)


def run_interpolate(
    config: RunConfig,
    checkpoint_path: Path,
    dataset_dir: Path,
    out_dir: Path,
    from_index: int,
    to_index: int,
    steps: int = 10,
    metric: PathMetric = "geodesic",
) -> Interpolation:
    """
    Decode ``steps`` stations between the codes of two dataset records;
    writes the path table and the decoded models
    """
    checkpoint = load_checkpoint(checkpoint_path)
    _, realisations = load_dataset_dir(dataset_dir)
    record(realisations, from_index, "--from")
    record(realisations, to_index, "--to")

    codes = encode_realisations(checkpoint, realisations)
    result = interpolate(
        checkpoint,
        codes[from_index],
        codes[to_index],
        steps=steps,
        metric=metric,
        anchors=codes,
        config=config.analysis.geodesic,
        threads=config.threads,
    )

    result.to_frame().to_csv(out_dir / "path.csv", index=False)
    write_dataset(out_dir / "interpolation.gwds", result.realisations)

    logger.info(
        f"{metric} path of Riemannian length {result.path.riemannian_length:.4f}",
        extra={
            "riemannian_length": result.path.riemannian_length,
            "euclidean_length": result.path.euclidean_length,
        },
    )
    write_stage_manifest(
        out_dir,
        "interpolate",
        config,
        checkpoint=str(checkpoint_path),
        dataset=str(dataset_dir),
        from_index=from_index,
        to_index=to_index,
        steps=steps,
        metric=metric,
        riemannian_length=result.path.riemannian_length,
        euclidean_length=result.path.euclidean_length,
    )

    return result
