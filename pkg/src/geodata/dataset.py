import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Tuple

import numpy as np

from config import Scenario, dataset_file_name, manifest_file_name
from errors import ValidationError
from utils.parallel import pool_map
from utils.rng import RngSeed

from .conversion import NormalizationStats
from .realisation import GeneratorConfig, Realisation, generate_realisation

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DatasetManifest:
    counts: Dict[str, int]
    stats: NormalizationStats
    config_hash: str
    seed: int
    dataset_file: str = dataset_file_name

    @property
    def count(self) -> int:
        return sum(self.counts.values())

    def to_dict(self) -> Dict:
        return {
            "counts": dict(self.counts),
            "stats": self.stats.to_dict(),
            "config_hash": self.config_hash,
            "seed": self.seed,
            "dataset_file": self.dataset_file,
        }

    @staticmethod
    def from_dict(data: Dict) -> "DatasetManifest":
        try:
            return DatasetManifest(
                counts={str(k): int(v) for k, v in data["counts"].items()},
                stats=NormalizationStats.from_dict(data["stats"]),
                config_hash=str(data["config_hash"]),
                seed=int(data["seed"]),
                dataset_file=str(data.get("dataset_file", dataset_file_name)),
            )
        except KeyError as error:
            raise ValidationError(f"dataset manifest is missing {error}") from error


def scenario_of_index(index: int) -> Scenario:
    """
    Scenarios alternate, so any even count is split evenly
    """
    scenarios = list(Scenario)
    return scenarios[index % len(scenarios)]


def _generate_one(args: Tuple[int, GeneratorConfig, int]) -> Realisation:
    index, config, seed = args
    rng_seed = RngSeed(seed).child("dataset", index)

    realisation = generate_realisation(
        scenario_of_index(index),
        rng_seed.generator(),
        dims=config.dims,
        cell_size=config.cell_size,
        top_depth=config.resolved_top_depth,
        seed=int(rng_seed.key()[0]),
    )

    # the dataset is stored as float32, keep memory identical to disk
    realisation.porosity = realisation.porosity.astype(np.float32).astype(np.float64)
    realisation.permeability = realisation.permeability.astype(np.float32).astype(
        np.float64
    )

    return realisation


def generate_realisations(
    config: GeneratorConfig, seed: int, threads: int = 1
) -> List[Realisation]:
    """
    Realisation ``i`` only depends on (seed, i), so results do not depend
    on the number of worker processes
    """
    logger.info(
        "generating realisations",
        extra={"count": config.count, "dims": list(config.dims), "seed": seed},
    )

    return pool_map(
        _generate_one, [(i, config, seed) for i in range(config.count)], threads
    )


def generate_dataset(
    config: GeneratorConfig,
    seed: int,
    out_dir: Path,
    config_hash: str,
    threads: int = 1,
) -> DatasetManifest:
    """
    Generate the prior ensemble and write the dataset file and its manifest

    Parameters
    ----------
    config : GeneratorConfig
    seed : int
        Master seed; every realisation gets its own derived stream
    out_dir : Path
    config_hash : str
        Hash of the resolved run config, recorded in the manifest
    threads : int

    Returns
    -------
    DatasetManifest
    """
    from storage.dataset_file import write_dataset
    from storage.manifest import write_json

    if config.count < 1:
        raise ValidationError("dataset.count must be >= 1 to write a dataset")

    realisations = generate_realisations(config, seed, threads)

    counts = {s.value: 0 for s in Scenario}
    for r in realisations:
        counts[r.scenario.value] += 1

    manifest = DatasetManifest(
        counts=counts,
        stats=NormalizationStats.from_realisations(realisations),
        config_hash=config_hash,
        seed=seed,
    )

    write_dataset(out_dir / dataset_file_name, realisations)
    write_json(out_dir / manifest_file_name, manifest.to_dict())

    logger.info("dataset written", extra={"counts": counts, "dir": str(out_dir)})

    return manifest


def load_dataset(dataset_dir: Path) -> Tuple[DatasetManifest, List[Realisation]]:
    from storage.dataset_file import read_dataset
    from storage.manifest import read_json

    manifest_path = dataset_dir / manifest_file_name
    if not manifest_path.exists():
        raise ValidationError(f"dataset manifest not found: {manifest_path}")

    manifest = DatasetManifest.from_dict(read_json(manifest_path))
    realisations = read_dataset(dataset_dir / manifest.dataset_file)

    if len(realisations) != manifest.count:
        raise ValidationError(
            f"{manifest_path}: manifest counts {manifest.count} realisations, "
            + f"file holds {len(realisations)}"
        )

    return manifest, realisations
