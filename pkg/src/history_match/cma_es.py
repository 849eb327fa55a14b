import logging
from dataclasses import dataclass, field
from typing import Any, Callable, List, Optional, Sequence

import cma
import numpy as np

from errors import ValidationError

logger = logging.getLogger(__name__)

# relative eigenvalue floor below which the covariance counts as degenerate
covariance_floor = 1e-14


def value_of(result: Any) -> float:
    """
    Objective results are either plain numbers or carry a ``total``
    """
    return float(getattr(result, "total", result))


@dataclass(frozen=True)
class CmaState:
    """
    Snapshot of the strategy after a generation
    """

    mean: np.ndarray
    sigma: float
    C: np.ndarray
    p_sigma: np.ndarray
    p_c: np.ndarray
    generation: int

    @staticmethod
    def of(es: cma.CMAEvolutionStrategy) -> "CmaState":
        C = np.array(es.sm.C, dtype=np.float64, copy=True)
        p_sigma = getattr(es.adapt_sigma, "ps", None)

        return CmaState(
            mean=np.array(es.mean, dtype=np.float64, copy=True),
            sigma=float(es.sigma),
            C=0.5 * (C + C.T),
            p_sigma=np.zeros(es.N) if p_sigma is None else np.array(p_sigma),
            p_c=np.array(es.pc, dtype=np.float64, copy=True),
            generation=int(es.countiter),
        )

    @property
    def min_eigenvalue(self) -> float:
        return float(np.min(np.linalg.eigvalsh(self.C)))


@dataclass
class GenerationRecord:
    generation: int
    best: Any
    median: Any
    best_so_far: float
    sigma: float
    evaluations: int

    def to_dict(self) -> dict:
        def plain(result):
            return result.to_dict() if hasattr(result, "to_dict") else value_of(result)

        return {
            "generation": self.generation,
            "best": plain(self.best),
            "median": plain(self.median),
            "best_so_far": self.best_so_far,
            "sigma": self.sigma,
            "evaluations": self.evaluations,
        }


@dataclass
class CmaResult:
    best_z: np.ndarray
    best: Any
    history: List[GenerationRecord] = field(default_factory=list)
    evaluations: int = 0
    state: Optional[CmaState] = None

    @property
    def best_value(self) -> float:
        return value_of(self.best)


def _repair_covariance(es: cma.CMAEvolutionStrategy, state: CmaState):
    """
    Floor the covariance eigenvalues when round-off made them degenerate
    """
    eigenvalues, vectors = np.linalg.eigh(state.C)
    floor = covariance_floor * max(float(np.max(eigenvalues)), 1.0)
    if np.min(eigenvalues) > floor:
        return

    logger.warning(
        f"covariance lost positive definiteness at generation {state.generation}, "
        + f"flooring eigenvalues at {floor:.3g}",
        extra={"generation": state.generation, "min_eigenvalue": state.min_eigenvalue},
    )
    repaired = (vectors * np.maximum(eigenvalues, floor)) @ vectors.T
    es.sm.C = 0.5 * (repaired + repaired.T)
    es.sm.update_now(0)


def cma_es(
    f: Callable[[np.ndarray], Any],
    m: int,
    popsize: int = 51,
    iters: int = 100,
    seed: int = 1,
    sigma0: float = 0.5,
    mean0: Optional[np.ndarray] = None,
    evaluate: Optional[Callable[[Sequence[np.ndarray]], List[Any]]] = None,
    on_generation: Optional[Callable[[GenerationRecord, CmaState], None]] = None,
) -> CmaResult:
    """
    (mu/mu_w, lambda)-CMA-ES for exactly ``iters`` generations

    Parameters
    ----------
    f : Callable[[np.ndarray], Any]
        Objective of one point; returns a number or something with ``total``
    m : int
        Search dimension
    popsize : int
        Offspring per generation, at least 4
    iters : int
        Generations; the run never stops early, so it makes popsize * iters
        evaluations
    seed : int
        Positive integer; fixes every sampled population
    sigma0 : float
    mean0 : Optional[np.ndarray]
        Start mean, the origin by default
    evaluate : Optional[Callable]
        Evaluates a whole population at once (results in member order);
        defaults to mapping ``f``
    on_generation : Optional[Callable]
        Called after every generation

    Returns
    -------
    CmaResult
    Best-so-far point and per-generation history
    """
    if popsize < 4:
        raise ValidationError(f"popsize must be >= 4, got {popsize}")
    if iters < 1:
        raise ValidationError(f"iters must be >= 1, got {iters}")
    if sigma0 <= 0:
        raise ValidationError("sigma0 must be > 0")

    mean0 = np.zeros(m) if mean0 is None else np.asarray(mean0, dtype=np.float64)
    if mean0.shape != (m,):
        raise ValidationError(f"mean0 must have length {m}")

    if evaluate is None:

        def evaluate(points):
            return [f(z) for z in points]

    es = cma.CMAEvolutionStrategy(
        mean0,
        sigma0,
        {
            "popsize": popsize,
            "seed": seed,
            "maxiter": iters,
            "verbose": -9,
            "verb_disp": 0,
            "verb_log": 0,
            "CMA_diagonal": False,
        },
    )

    result = CmaResult(best_z=mean0.copy(), best=float("inf"))
    for generation in range(1, iters + 1):
        points = [np.asarray(x, dtype=np.float64) for x in es.ask()]
        outcomes = evaluate(points)
        values = [value_of(o) for o in outcomes]
        es.tell(points, values)
        result.evaluations += len(points)

        ranked = np.argsort(values, kind="stable")
        best = int(ranked[0])
        median = int(ranked[len(ranked) // 2])
        if values[best] < result.best_value:
            result.best_z = points[best].copy()
            result.best = outcomes[best]

        state = CmaState.of(es)
        _repair_covariance(es, state)

        record = GenerationRecord(
            generation=generation,
            best=outcomes[best],
            median=outcomes[median],
            best_so_far=result.best_value,
            sigma=state.sigma,
            evaluations=result.evaluations,
        )
        result.history.append(record)
        result.state = state

        logger.info(
            f"generation {generation}/{iters}: best {values[best]:.6g}, "
            + f"best so far {result.best_value:.6g}",
            extra={
                "generation": generation,
                "best": values[best],
                "median": values[median],
                "best_so_far": result.best_value,
                "sigma": state.sigma,
            },
        )
        if on_generation is not None:
            on_generation(record, state)

    return result
