from .geodesic import (
    GeodesicConfig,
    Interpolation,
    LatentPath,
    PathMetric,
    arc_stations,
    geodesic,
    interpolate,
    interpolate_codes,
    straight_path,
)
from .metric import (
    LatentDecoder,
    MetricTensor,
    jacobians,
    log_volume,
    log_volume_of,
    metrics_at,
    pullback_metric,
    riemannian_length,
    segment_lengths,
)
