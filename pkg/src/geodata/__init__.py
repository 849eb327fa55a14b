from .channels import (
    ChannelParams,
    ChannelPlacement,
    rasterize_channels,
    sample_channel_params,
    sample_placements,
)
from .conversion import (
    NormalizationStats,
    feature_names,
    features_to_realisation,
    graph_to_realisation,
    realisation_to_graph,
)
from .dataset import (
    DatasetManifest,
    generate_dataset,
    generate_realisations,
    load_dataset,
    scenario_of_index,
)
from .petrophysics import facies_porosity, poro_perm_transform
from .realisation import GeneratorConfig, Realisation, generate_realisation
