from .geo_graph import GeoGraph, KSet, build_grid_graph, cell_index, graph_to_grid
from .neighbourhood import (
    KSetIndex,
    build_kset_index,
    global_mean_trick,
    neighbourhood,
)
