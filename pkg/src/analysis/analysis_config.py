from dataclasses import dataclass, field

from errors import ValidationError
from manifold import GeodesicConfig


@dataclass
class AnalysisConfig:
    pca_components: int = 2
    perplexity: float = 30.0
    tsne_dims: int = 3
    tsne_iters: int = 1000
    tsne_learning_rate: float = 200.0
    max_dim: int = 1
    subsample: int = 200
    # bars and points listed in the analyze report
    report_count: int = 5
    geodesic: GeodesicConfig = field(default_factory=GeodesicConfig)

    def __post_init__(self):
        if self.pca_components < 1:
            raise ValidationError("analysis.pca_components must be >= 1")
        if self.tsne_dims not in (2, 3):
            raise ValidationError("analysis.tsne_dims must be 2 or 3")
        if self.perplexity <= 0:
            raise ValidationError("analysis.perplexity must be > 0")
        if self.max_dim not in (0, 1):
            raise ValidationError("analysis.max_dim must be 0 or 1")
        if self.subsample < 4:
            raise ValidationError("analysis.subsample must be >= 4")
