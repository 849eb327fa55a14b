import logging
from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence, Tuple

import numpy as np

from config import failure_penalty, observed_wells, realism_percentile
from errors import NumericalError, ValidationError
from flowsim import RateSeries, SimulationConfig, WellSpec, place_wells, simulate
from geodata import Realisation
from manifold import log_volume, log_volume_of, metrics_at
from model import GwaeCheckpoint, decode_realisation

logger = logging.getLogger(__name__)

rate_phases = ("oil_rate", "water_rate")

# reference series flatter than this carry no information
min_series_std = 1e-12


@dataclass(frozen=True)
class ObjectiveWeights:
    flow: float = 1.0
    static: float = 1.0
    realism: float = 0.1

    def __post_init__(self):
        if min(self.flow, self.static, self.realism) < 0:
            raise ValidationError("hm.weights must be >= 0")
        if self.flow == self.static == self.realism == 0:
            raise ValidationError("hm.weights must not all be zero")


@dataclass(frozen=True)
class ObjectiveBreakdown:
    """
    Weighted misfit of one latent code

    A failed evaluation (decoding or simulation raised) carries the
    components computed before the failure and ``total`` equal to the
    failure penalty.
    """

    z: np.ndarray
    loss_flow: float
    loss_static: float
    loss_realism: float
    total: float
    failed: bool = False
    log_volume: float = float("nan")

    def to_dict(self) -> Dict:
        return {
            "loss_flow": self.loss_flow,
            "loss_static": self.loss_static,
            "loss_realism": self.loss_realism,
            "total": self.total,
            "failed": self.failed,
            "log_volume": self.log_volume,
        }


@dataclass(frozen=True, eq=False)
class ReferenceCase:
    """
    What the optimizer may see of the hidden truth: its rates, the
    porosity log of every observed well column and the well layout

    ``static`` is shaped (observed wells, layers). ``truth_seed`` is kept
    for audit only.
    """

    rates: RateSeries
    wells: Tuple[WellSpec, ...]
    observed: Tuple[str, ...]
    static: np.ndarray
    truth_seed: int
    truth_scenario: Optional[str] = None
    flow_std: Dict[Tuple[str, str], float] = field(default_factory=dict)

    def columns(self) -> Dict[str, Tuple[int, int]]:
        by_name = {w.name: w for w in self.wells}

        return {name: (by_name[name].i, by_name[name].j) for name in self.observed}


def well_logs(
    realisation: Realisation, wells: Sequence[WellSpec], names: Sequence[str]
) -> np.ndarray:
    """
    Porosity down each named well column, (wells, layers)
    """
    by_name = {w.name: w for w in wells}
    missing = [name for name in names if name not in by_name]
    if missing:
        raise ValidationError(f"observed wells {missing} are not in the well layout")

    return np.stack(
        [realisation.porosity[by_name[n].i, by_name[n].j, :] for n in names]
    )


def build_reference(
    truth: Realisation,
    flow: SimulationConfig = SimulationConfig(),
    observed: Sequence[str] = observed_wells,
    truth_seed: int = 0,
) -> ReferenceCase:
    """
    Simulate the truth once and keep only the observable data
    """
    wells = tuple(place_wells(truth.dims, flow.fluids))
    rates = simulate(truth, flow, wells)

    flow_std = {}
    for w, name in enumerate(rates.wells):
        for phase in rate_phases:
            std = float(np.std(getattr(rates, phase)[w]))
            if std > min_series_std:
                flow_std[(name, phase)] = std

    return ReferenceCase(
        rates=rates,
        wells=wells,
        observed=tuple(observed),
        static=well_logs(truth, wells, observed),
        truth_seed=truth_seed,
        truth_scenario=truth.scenario.value if truth.scenario else None,
        flow_std=flow_std,
    )


def flow_misfit(rates: RateSeries, reference: ReferenceCase) -> float:
    """
    Mean squared rate mismatch, each (well, phase) series scaled by the
    reference series' standard deviation; flat reference series are skipped
    """
    residuals = []
    for (name, phase), std in sorted(reference.flow_std.items()):
        simulated = getattr(rates, phase)[rates.wells.index(name)]
        observed = getattr(reference.rates, phase)[reference.rates.wells.index(name)]
        residuals.append((simulated - observed) / std)

    if not residuals:
        return 0.0

    return float(np.mean(np.square(np.concatenate(residuals))))


def static_misfit(
    realisation: Realisation, reference: ReferenceCase, porosity_std: float
) -> float:
    """
    MSE of the well-column porosity, in normalized units
    """
    logs = well_logs(realisation, reference.wells, reference.observed)

    return float(np.mean(np.square((logs - reference.static) / porosity_std)))


def realism_baseline(
    checkpoint: GwaeCheckpoint,
    codes: np.ndarray,
    percentile: float = realism_percentile,
    threads: int = 1,
) -> float:
    """
    Percentile of the log-volume over encoded training codes
    """
    metrics = metrics_at(checkpoint, codes, threads)

    return float(np.percentile([log_volume_of(g) for g in metrics], percentile))


def objective(
    z: np.ndarray,
    checkpoint: GwaeCheckpoint,
    reference: ReferenceCase,
    weights: ObjectiveWeights,
    baseline: float,
    flow: SimulationConfig = SimulationConfig(),
    penalty: float = failure_penalty,
) -> Tuple[ObjectiveBreakdown, Optional[RateSeries]]:
    """
    Flow, static and realism misfit of one latent code

    Parameters
    ----------
    z : np.ndarray
        Latent code, length m
    checkpoint : GwaeCheckpoint
    reference : ReferenceCase
    weights : ObjectiveWeights
    baseline : float
        Log-volume above which the realism hinge starts
    flow : SimulationConfig
    penalty : float
        Total assigned to codes whose decoding or simulation fails

    Returns
    -------
    Tuple[ObjectiveBreakdown, Optional[RateSeries]]
    The breakdown and the simulated rates (None on failure)
    """
    z = np.asarray(z, dtype=np.float64).reshape(-1)
    if z.size != checkpoint.latent_dim:
        raise ValidationError(
            f"latent code must have length {checkpoint.latent_dim}, got {z.size}"
        )

    loss_static = loss_realism = 0.0
    volume = float("nan")
    try:
        realisation = decode_realisation(checkpoint, z)
        loss_static = static_misfit(
            realisation, reference, checkpoint.stats.porosity_std
        )

        volume = log_volume(checkpoint, z)
        loss_realism = max(0.0, volume - baseline)

        rates = simulate(realisation, flow, reference.wells)
        loss_flow = flow_misfit(rates, reference)
    except NumericalError as error:
        logger.warning(
            f"evaluation failed, assigning penalty {penalty:g}: {error}",
            extra={"penalty": penalty},
        )
        breakdown = ObjectiveBreakdown(
            z=z,
            loss_flow=0.0,
            loss_static=loss_static,
            loss_realism=loss_realism,
            total=penalty,
            failed=True,
            log_volume=volume,
        )
        return breakdown, None

    total = (
        weights.flow * loss_flow
        + weights.static * loss_static
        + weights.realism * loss_realism
    )
    breakdown = ObjectiveBreakdown(
        z=z,
        loss_flow=loss_flow,
        loss_static=loss_static,
        loss_realism=loss_realism,
        total=total,
        log_volume=volume,
    )

    return breakdown, rates
