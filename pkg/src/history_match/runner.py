import logging
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from analysis import PcaModel, pca_fit, pca_project
from config import (
    Scenario,
    failure_penalty,
    observed_wells,
    realism_percentile,
)
from errors import ValidationError
from flowsim import RateSeries, SimulationConfig
from geodata import GeneratorConfig, Realisation, generate_realisation
from manifold import log_volume
from model import GwaeCheckpoint, decode_realisation
from storage import append_jsonl, write_dataset, write_json
from utils.output import ensure_dir
from utils.parallel import worker_pool
from utils.rng import RngSeed

from .cma_es import CmaResult, CmaState, GenerationRecord, cma_es
from .objective import (
    ObjectiveBreakdown,
    ObjectiveWeights,
    ReferenceCase,
    objective,
    realism_baseline,
    well_logs,
)

logger = logging.getLogger(__name__)


@dataclass
class HistoryMatchConfig:
    """
    popsize, iters, restarts, sigma0
        CMA-ES settings; every restart starts from the origin
    weights : ObjectiveWeights
    reference_scenario : str
        Scenario of the freshly generated hidden truth
    reference_index : Optional[int]
        Use this dataset record as the truth instead
    """

    popsize: int = 51
    iters: int = 100
    restarts: int = 4
    sigma0: float = 0.5
    weights: ObjectiveWeights = field(default_factory=ObjectiveWeights)
    reference_scenario: str = Scenario.SINGLE.value
    reference_index: Optional[int] = None
    observed_wells: Tuple[str, ...] = observed_wells
    realism_percentile: float = realism_percentile
    failure_penalty: float = failure_penalty

    def __post_init__(self):
        if self.popsize < 4:
            raise ValidationError("hm.popsize must be >= 4")
        if self.iters < 1:
            raise ValidationError("hm.iters must be >= 1")
        if self.restarts < 1:
            raise ValidationError("hm.restarts must be >= 1")
        if self.sigma0 <= 0:
            raise ValidationError("hm.sigma0 must be > 0")
        if not 0 <= self.realism_percentile <= 100:
            raise ValidationError("hm.realism_percentile must be in [0, 100]")
        if self.reference_scenario not in {s.value for s in Scenario}:
            raise ValidationError(
                f"hm.reference_scenario must be one of {[s.value for s in Scenario]}"
            )


def reference_truth(
    config: HistoryMatchConfig,
    generator: GeneratorConfig,
    seed: int,
    realisations: Optional[Sequence[Realisation]] = None,
) -> Realisation:
    """
    The hidden truth: a dataset record when ``reference_index`` is set,
    otherwise a fresh draw of ``reference_scenario``
    """
    if config.reference_index is not None:
        if realisations is None or not (
            0 <= config.reference_index < len(realisations)
        ):
            raise ValidationError(
                f"hm.reference_index {config.reference_index} is outside the dataset"
            )
        return realisations[config.reference_index]

    rng_seed = RngSeed(seed).child("reference")

    return generate_realisation(
        Scenario(config.reference_scenario),
        rng_seed.generator(),
        dims=generator.dims,
        cell_size=generator.cell_size,
        top_depth=generator.resolved_top_depth,
        seed=int(rng_seed.key()[0]),
    )


# region workers

_context: Optional[tuple] = None


def _init_worker(context: tuple):
    global _context
    _context = context


def _evaluate_member(
    z: np.ndarray,
) -> Tuple[ObjectiveBreakdown, Optional[RateSeries]]:
    checkpoint, reference, weights, baseline, flow, penalty = _context

    return objective(z, checkpoint, reference, weights, baseline, flow, penalty)


# endregion


@dataclass
class RestartResult:
    restart: int
    seed: int
    result: CmaResult
    realisation: Realisation
    initial: List[ObjectiveBreakdown] = field(default_factory=list)

    @property
    def best(self) -> ObjectiveBreakdown:
        return self.result.best

    def summary(self) -> Dict:
        return {
            "restart": self.restart,
            "seed": self.seed,
            "total": self.result.best_value,
            "breakdown": self.best.to_dict(),
            "best_z": self.result.best_z.tolist(),
            "evaluations": self.result.evaluations,
        }


@dataclass
class HistoryMatchSummary:
    baseline: float
    restarts: List[RestartResult]
    pca: Optional[PcaModel] = None

    @property
    def ranked(self) -> List[RestartResult]:
        return sorted(self.restarts, key=lambda r: (r.result.best_value, r.restart))

    @property
    def winner(self) -> RestartResult:
        return self.ranked[0]


def _rates_fan(members: Sequence[Tuple[int, RateSeries]]) -> pd.DataFrame:
    frames = []
    for member, rates in members:
        frame = rates.to_frame()
        frame.insert(0, "member", member)
        frames.append(frame)

    return pd.concat(frames, ignore_index=True) if frames else pd.DataFrame()


def _static_rows(
    source: str, logs: np.ndarray, names: Sequence[str]
) -> List[Tuple[str, str, int, float]]:
    return [
        (source, name, k, float(logs[w, k]))
        for w, name in enumerate(names)
        for k in range(logs.shape[1])
    ]


def _run_restart(
    restart: int,
    seed: int,
    checkpoint: GwaeCheckpoint,
    reference: ReferenceCase,
    config: HistoryMatchConfig,
    mapper,
    out_dir: Path,
    static_rows: list,
) -> RestartResult:
    restart_dir = ensure_dir(out_dir / f"restart_{restart}")
    generations_path = restart_dir / "generations.jsonl"
    generations_path.unlink(missing_ok=True)

    initial: List[Tuple[int, RateSeries]] = []
    initial_breakdowns: List[ObjectiveBreakdown] = []
    tracked = {"total": float("inf"), "rates": None}

    def evaluate(points: Sequence[np.ndarray]) -> List[ObjectiveBreakdown]:
        outcomes = mapper(_evaluate_member, list(points))
        if not initial_breakdowns:
            initial_breakdowns.extend(b for b, _ in outcomes)
            initial.extend((i, r) for i, (_, r) in enumerate(outcomes) if r is not None)
        for breakdown, rates in outcomes:
            if breakdown.total < tracked["total"]:
                tracked["total"], tracked["rates"] = breakdown.total, rates

        return [b for b, _ in outcomes]

    def on_generation(record: GenerationRecord, state: CmaState):
        append_jsonl(
            generations_path, {**record.to_dict(), "restart": restart, "seed": seed}
        )

    logger.info(
        f"restart {restart + 1}/{config.restarts}",
        extra={"restart": restart, "seed": seed},
    )
    result = cma_es(
        None,
        checkpoint.latent_dim,
        popsize=config.popsize,
        iters=config.iters,
        seed=seed,
        sigma0=config.sigma0,
        evaluate=evaluate,
        on_generation=on_generation,
    )

    best = decode_realisation(checkpoint, result.best_z)
    write_dataset(restart_dir / "best.gwds", [best])
    _rates_fan(initial).to_csv(restart_dir / "rates_initial.csv", index=False)
    if tracked["rates"] is not None:
        tracked["rates"].to_frame().to_csv(
            restart_dir / "rates_best.csv", index=False
        )

    for member, breakdown in enumerate(initial_breakdowns):
        decoded = decode_realisation(checkpoint, breakdown.z)
        static_rows.extend(
            _static_rows(
                f"r{restart}/initial_{member}",
                well_logs(decoded, reference.wells, reference.observed),
                reference.observed,
            )
        )
    static_rows.extend(
        _static_rows(
            f"r{restart}/best",
            well_logs(best, reference.wells, reference.observed),
            reference.observed,
        )
    )

    return RestartResult(restart, seed, result, best, initial_breakdowns)


def history_match(
    checkpoint: GwaeCheckpoint,
    reference: ReferenceCase,
    config: HistoryMatchConfig,
    flow: SimulationConfig,
    training_codes: np.ndarray,
    out_dir: Path,
    seed: int,
    threads: int = 1,
    reference_code: Optional[np.ndarray] = None,
    baseline: Optional[float] = None,
) -> HistoryMatchSummary:
    """
    Independent CMA-ES restarts in the latent space against one reference

    Parameters
    ----------
    checkpoint : GwaeCheckpoint
    reference : ReferenceCase
        Observed rates and well logs of the hidden truth
    config : HistoryMatchConfig
    flow : SimulationConfig
    training_codes : np.ndarray
        Encoded training means; set the realism baseline and the PCA frame
    out_dir : Path
    seed : int
        Each restart draws from its own child stream
    threads : int
        Worker processes for population evaluation
    reference_code : Optional[np.ndarray]
        Encoded truth, only placed on the PCA projection
    baseline : Optional[float]
        Precomputed realism baseline

    Returns
    -------
    HistoryMatchSummary
    """
    out_dir = ensure_dir(out_dir)
    training_codes = np.atleast_2d(np.asarray(training_codes, dtype=np.float64))

    if baseline is None:
        baseline = realism_baseline(
            checkpoint, training_codes, config.realism_percentile, threads
        )
    logger.info(f"realism baseline {baseline:.4f}", extra={"baseline": baseline})

    write_json(
        out_dir / "config.json",
        {"hm": config, "flow": flow, "seed": seed, "baseline": baseline},
    )
    reference.rates.to_frame().to_csv(out_dir / "rates_reference.csv", index=False)

    static_rows = _static_rows("reference", reference.static, reference.observed)
    context = (
        checkpoint,
        reference,
        config.weights,
        baseline,
        flow,
        config.failure_penalty,
    )

    restarts = []
    with worker_pool(threads, _init_worker, (context,)) as mapper:
        for r in range(config.restarts):
            restart_seed = RngSeed(seed).child("hm", "restart", r).as_int()
            restarts.append(
                _run_restart(
                    r,
                    restart_seed,
                    checkpoint,
                    reference,
                    config,
                    mapper,
                    out_dir,
                    static_rows,
                )
            )

    pd.DataFrame(
        static_rows, columns=["source", "well", "layer", "porosity"]
    ).to_csv(out_dir / "wells_static.csv", index=False)

    summary = HistoryMatchSummary(baseline, restarts)
    if len(training_codes) >= 2:
        summary.pca = pca_fit(training_codes, min(2, training_codes.shape[1]))
        _pca_table(summary, training_codes, reference_code).to_csv(
            out_dir / "pca.csv", index=False
        )

    write_json(
        out_dir / "summary.json",
        {
            "baseline": baseline,
            "best_restart": summary.winner.restart,
            "restarts": [r.summary() for r in summary.ranked],
        },
    )

    return summary


def _pca_table(
    summary: HistoryMatchSummary,
    training_codes: np.ndarray,
    reference_code: Optional[np.ndarray],
) -> pd.DataFrame:
    rows = []
    for i, point in enumerate(pca_project(summary.pca, training_codes)):
        rows.append(("training", str(i), *point))
    for r in summary.restarts:
        point = pca_project(summary.pca, r.result.best_z)
        rows.append(("restart", str(r.restart), *point))
    if reference_code is not None:
        rows.append(("reference", "truth", *pca_project(summary.pca, reference_code)))

    columns = [f"pc{i + 1}" for i in range(summary.pca.components.shape[0])]

    return pd.DataFrame(rows, columns=["kind", "label", *columns])


def ablation_run(
    checkpoint: GwaeCheckpoint,
    reference: ReferenceCase,
    config: HistoryMatchConfig,
    flow: SimulationConfig,
    training_codes: np.ndarray,
    out_dir: Path,
    seed: int,
    threads: int = 1,
    reference_code: Optional[np.ndarray] = None,
) -> Dict[str, Dict]:
    """
    The same history match with and without the realism term

    Both runs share seeds and the realism baseline; the realism loss is
    still computed and reported when its weight is zero.
    """
    if config.weights.flow == config.weights.static == 0:
        raise ValidationError(
            "ablation needs hm.weights.flow or hm.weights.static > 0, "
            + "the run without realism would have nothing to match"
        )

    out_dir = ensure_dir(out_dir)
    baseline = realism_baseline(
        checkpoint, training_codes, config.realism_percentile, threads
    )

    realism_weight = config.weights.realism or ObjectiveWeights().realism
    variants = {
        "with_realism": replace(
            config, weights=replace(config.weights, realism=realism_weight)
        ),
        "without_realism": replace(
            config, weights=replace(config.weights, realism=0.0)
        ),
    }

    report = {}
    for name, variant in variants.items():
        summary = history_match(
            checkpoint,
            reference,
            variant,
            flow,
            training_codes,
            out_dir / name,
            seed,
            threads,
            reference_code,
            baseline,
        )
        winner = summary.winner
        report[name] = {
            "weights": variant.weights,
            "best_z": winner.result.best_z,
            "pca": (
                pca_project(summary.pca, winner.result.best_z)
                if summary.pca is not None
                else None
            ),
            "log_volume": log_volume(checkpoint, winner.result.best_z),
            "breakdown": winner.best.to_dict(),
        }

    write_json(out_dir / "ablation.json", {"baseline": baseline, "runs": report})

    return report
