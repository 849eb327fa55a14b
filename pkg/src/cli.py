import logging
import sys
from pathlib import Path
from typing import List, Optional, Tuple

import click

from config import log_file_name, results_dir
from config.run_config import RunConfig, load_run_config
from errors import GwaeError, NumericalError, ValidationError
from stages import (
    run_ablation,
    run_analyze,
    run_gen_dataset,
    run_history_match,
    run_interpolate,
    run_metric,
    run_reconstruct,
    run_simulate,
    run_train,
)
from utils.logs import setup_logging
from utils.output import ensure_dir

logger = logging.getLogger("cli")

exit_codes = {ValidationError: 2, NumericalError: 3}


def _start(
    stage: str,
    config_path: Optional[Path],
    threads: Optional[int],
    out_dir: Optional[Path],
) -> Tuple[RunConfig, Path]:
    out_dir = ensure_dir(Path(out_dir) if out_dir else results_dir / stage)
    setup_logging(out_dir / log_file_name)

    config = load_run_config(config_path, threads)
    logger.info(
        f"{stage} into {out_dir}",
        extra={"stage": stage, "seed": config.seed, "config_hash": config.hash},
    )

    return config, out_dir


def run_options(func):
    func = click.option(
        "--out",
        "out_dir",
        type=click.Path(file_okay=False, path_type=Path),
        default=None,
        help="Output directory, results/<subcommand> by default",
    )(func)
    func = click.option(
        "--threads",
        type=click.IntRange(min=0),
        default=None,
        help="Worker processes, 0 for one per CPU",
    )(func)
    func = click.option(
        "--config",
        "config_path",
        type=click.Path(dir_okay=False, path_type=Path),
        default=None,
        help="JSON run config, full-scale defaults when omitted",
    )(func)

    return func


dataset_option = click.option(
    "--dataset",
    "dataset_dir",
    type=click.Path(file_okay=False, path_type=Path),
    default=results_dir / "gen-dataset",
    show_default=True,
    help="gen-dataset output directory",
)
checkpoint_option = click.option(
    "--checkpoint",
    "checkpoint_path",
    type=click.Path(path_type=Path),
    default=results_dir / "train",
    show_default=True,
    help="Checkpoint file or train output directory",
)


@click.group()
def cli():
    """
    Graph Wasserstein autoencoder pipeline for latent-space history matching
    """


@cli.command("gen-dataset")
@run_options
def gen_dataset(config_path, threads, out_dir):
    """Generate the two-scenario geomodel dataset."""
    config, out_dir = _start("gen-dataset", config_path, threads, out_dir)
    run_gen_dataset(config, out_dir)


@cli.command()
@run_options
@dataset_option
def train(config_path, threads, out_dir, dataset_dir):
    """Train the autoencoder on a generated dataset."""
    config, out_dir = _start("train", config_path, threads, out_dir)
    run_train(config, dataset_dir, out_dir)


@cli.command()
@run_options
@dataset_option
@checkpoint_option
@click.option("--count", type=click.IntRange(min=1), default=None)
def reconstruct(config_path, threads, out_dir, dataset_dir, checkpoint_path, count):
    """Encode and decode dataset records, report the property statistics."""
    config, out_dir = _start("reconstruct", config_path, threads, out_dir)
    run_reconstruct(config, checkpoint_path, dataset_dir, out_dir, count)


@cli.command()
@run_options
@dataset_option
@checkpoint_option
@click.option("--from", "from_index", type=int, required=True)
@click.option("--to", "to_index", type=int, required=True)
@click.option("--steps", type=click.IntRange(min=2), default=10, show_default=True)
@click.option(
    "--metric",
    type=click.Choice(["euclidean", "geodesic"]),
    default="geodesic",
    show_default=True,
)
def interpolate(
    config_path,
    threads,
    out_dir,
    dataset_dir,
    checkpoint_path,
    from_index,
    to_index,
    steps,
    metric,
):
    """Decode a latent path between two dataset records."""
    config, out_dir = _start("interpolate", config_path, threads, out_dir)
    run_interpolate(
        config,
        checkpoint_path,
        dataset_dir,
        out_dir,
        from_index,
        to_index,
        steps,
        metric,
    )


@cli.command()
@run_options
@dataset_option
@checkpoint_option
def analyze(config_path, threads, out_dir, dataset_dir, checkpoint_path):
    """PCA, t-SNE and persistent homology of the latent codes."""
    config, out_dir = _start("analyze", config_path, threads, out_dir)
    run_analyze(config, checkpoint_path, dataset_dir, out_dir)


@cli.command()
@run_options
@dataset_option
@click.option("--index", type=int, default=0, show_default=True)
@click.option("--steps", type=click.IntRange(min=1), default=None)
def simulate(config_path, threads, out_dir, dataset_dir, index, steps):
    """Run the line-drive flow simulation on one dataset record."""
    config, out_dir = _start("simulate", config_path, threads, out_dir)
    run_simulate(config, dataset_dir, out_dir, index, steps)


@cli.command()
@run_options
@dataset_option
@checkpoint_option
@click.option("--index", "indices", type=int, multiple=True)
def metric(config_path, threads, out_dir, dataset_dir, checkpoint_path, indices):
    """Pull-back metric and log-volume at encoded dataset records."""
    config, out_dir = _start("metric", config_path, threads, out_dir)
    run_metric(config, checkpoint_path, dataset_dir, out_dir, indices)


@cli.command("history-match")
@run_options
@dataset_option
@checkpoint_option
@click.option(
    "--no-realism", is_flag=True, help="Same as setting hm.weights.realism to 0"
)
def history_match(
    config_path, threads, out_dir, dataset_dir, checkpoint_path, no_realism
):
    """CMA-ES search of the latent space against a hidden reference."""
    config, out_dir = _start("history-match", config_path, threads, out_dir)
    run_history_match(config, checkpoint_path, dataset_dir, out_dir, no_realism)


@cli.command()
@run_options
@dataset_option
@checkpoint_option
def ablation(config_path, threads, out_dir, dataset_dir, checkpoint_path):
    """History match with and without the realism term."""
    config, out_dir = _start("ablation", config_path, threads, out_dir)
    run_ablation(config, checkpoint_path, dataset_dir, out_dir)


def main(argv: Optional[List[str]] = None) -> int:
    """
    Run one subcommand and map failures to exit codes:
    2 for invalid input, 3 for numerical failures
    """
    try:
        result = cli.main(args=argv, prog_name="cli", standalone_mode=False)
    except click.exceptions.Abort:
        click.echo("Aborted!", err=True)
        return 1
    except click.ClickException as error:
        error.show()
        return error.exit_code
    except GwaeError as error:
        logger.error(f"{type(error).__name__}: {error}")
        for error_type, code in exit_codes.items():
            if isinstance(error, error_type):
                return code
        return 1

    # click returns the exit code of --help and friends
    return result if isinstance(result, int) else 0


if __name__ == "__main__":
    sys.exit(main())
