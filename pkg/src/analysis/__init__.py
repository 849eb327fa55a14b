from .analysis_config import AnalysisConfig
from .persistence import (
    PersistenceDiagram,
    farthest_point_subsample,
    h0_diagram,
    h0_outliers,
    h1_diagram,
    most_persistent,
    mst_edges,
    persistence,
)
from .projection import PcaModel, pca_back_project, pca_fit, pca_project, tsne
