from .cma_es import CmaResult, CmaState, GenerationRecord, cma_es
from .objective import (
    ObjectiveBreakdown,
    ObjectiveWeights,
    ReferenceCase,
    build_reference,
    flow_misfit,
    objective,
    realism_baseline,
    static_misfit,
    well_logs,
)
from .runner import (
    HistoryMatchConfig,
    HistoryMatchSummary,
    RestartResult,
    ablation_run,
    history_match,
    reference_truth,
)
