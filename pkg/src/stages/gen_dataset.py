import logging
from pathlib import Path

from config.run_config import RunConfig
from geodata import DatasetManifest, generate_dataset
from storage import write_json
from utils.parallel import resolve_threads

logger = logging.getLogger(__name__)


def run_gen_dataset(config: RunConfig, out_dir: Path) -> DatasetManifest:
    """
    Writes the dataset file and its manifest (counts, normalization stats,
    config hash, seed)
    """
    manifest = generate_dataset(
        config.dataset,
        config.seed,
        out_dir,
        config.hash,
        threads=resolve_threads(config.threads),
    )
    write_json(out_dir / "config.json", config.settings())
    logger.info(
        f"generated {manifest.count} realisations",
        extra={"counts": manifest.counts},
    )

    return manifest
