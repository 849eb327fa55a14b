import logging
from pathlib import Path
from typing import Optional

from config.run_config import RunConfig
from flowsim import RateSeries, place_wells, simulate

from .common import load_dataset_dir, record, write_stage_manifest

logger = logging.getLogger(__name__)


def run_simulate(
    config: RunConfig,
    dataset_dir: Path,
    out_dir: Path,
    index: int = 0,
    steps: Optional[int] = None,
) -> RateSeries:
    """
    Line-drive simulation of one dataset record, rates written as CSV
    """
    _, realisations = load_dataset_dir(dataset_dir)
    realisation = record(realisations, index, "--index")

    wells = place_wells(realisation.dims, config.flow.fluids)
    rates = simulate(realisation, config.flow, wells, steps)
    rates.to_frame().to_csv(out_dir / "rates.csv", index=False)

    logger.info(
        f"simulated record {index} over {rates.n_steps} report steps",
        extra={"index": index, "steps": rates.n_steps},
    )
    write_stage_manifest(
        out_dir,
        "simulate",
        config,
        dataset=str(dataset_dir),
        index=index,
        steps=rates.n_steps,
    )

    return rates
