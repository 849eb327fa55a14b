from dataclasses import dataclass
from typing import Mapping, Optional, Tuple

import numpy as np

from autodiff import Tensor, ops
from errors import ValidationError
from graphs import GeoGraph, build_kset_index

from .architecture import ArchitectureConfig
from .layers import ConvStructure


@dataclass(frozen=True, eq=False)
class BatchPlan:
    """
    Aggregation structures for ``copies`` stacked copies of one graph

    ``members`` and ``sets`` are only present for the k = 2 hierarchy.
    """

    copies: int
    node_count: int
    nodes: ConvStructure
    node_in_graph: np.ndarray
    members: Optional[np.ndarray] = None
    sets: Optional[ConvStructure] = None


def build_plan(graph: GeoGraph, k: int, copies: int) -> BatchPlan:
    n = graph.node_count
    nodes = ConvStructure.from_graph(graph).tile(copies)

    members = sets = None
    if k == 2:
        index = build_kset_index(graph, 2)
        offsets = (np.arange(copies) * n)[:, None, None]
        members = (index.members[None, :, :] + offsets).reshape(-1, 2)
        sets = ConvStructure.from_kset_index(index).tile(copies)

    return BatchPlan(
        copies=copies,
        node_count=n,
        nodes=nodes,
        node_in_graph=np.tile(np.arange(n), copies),
        members=members,
        sets=sets,
    )


def dense(params: Mapping[str, Tensor], name: str, x: Tensor) -> Tensor:
    return ops.add(
        ops.matmul(x, ops.transpose(params[f"{name}.W"])), params[f"{name}.b"]
    )


def lift_to_sets(h: Tensor, members: np.ndarray) -> Tensor:
    """
    Feature of a k-set = mean of its members' features
    """
    k = members.shape[1]
    total = ops.gather_rows(h, members[:, 0])
    for c in range(1, k):
        total = ops.add(total, ops.gather_rows(h, members[:, c]))

    return ops.scale(total, 1.0 / k)


def encoder_forward(
    params: Mapping[str, Tensor],
    architecture: ArchitectureConfig,
    plan: BatchPlan,
    x: Tensor,
) -> Tuple[Tensor, Tensor]:
    """
    Stacked node features (copies * nodes, f) to (mu, log sigma),
    each (copies, latent_dim)
    """
    if x.shape != (plan.nodes.n_rows, architecture.feature_count):
        raise ValidationError(
            "encoder expects features of shape "
            + f"{(plan.nodes.n_rows, architecture.feature_count)}, got {x.shape}"
        )

    h = x
    for layer in architecture.encoder_layers():
        h = layer.apply(params, plan.nodes, h)

    structure = plan.nodes
    for layer in architecture.set_layers():
        h = layer.apply(params, plan.sets, lift_to_sets(h, plan.members))
        structure = plan.sets

    pooled = structure.pool(h)
    lo, hi = architecture.log_sigma_bounds

    return (
        dense(params, "enc.mu", pooled),
        ops.clip(dense(params, "enc.logsigma", pooled), lo, hi),
    )


def decoder_forward(
    params: Mapping[str, Tensor],
    architecture: ArchitectureConfig,
    plan: BatchPlan,
    z: Tensor,
) -> Tuple[Tensor, Tensor]:
    """
    Latent codes (copies, latent_dim) to per-node (mu, log sigma),
    each (copies * nodes, f)
    """
    if z.shape != (plan.copies, architecture.latent_dim):
        raise ValidationError(
            f"decoder expects codes of shape {(plan.copies, architecture.latent_dim)}"
            + f", got {z.shape}"
        )

    seed = dense(params, "dec.lift", z)
    h = ops.tanh(
        ops.add(
            ops.gather_rows(seed, plan.nodes.group),
            ops.gather_rows(params["dec.embed"], plan.node_in_graph),
        )
    )

    for layer in architecture.decoder_layers():
        h = layer.apply(params, plan.nodes, h)

    lo, hi = architecture.log_sigma_bounds

    return (
        dense(params, "dec.mu", h),
        ops.clip(dense(params, "dec.logsigma", h), lo, hi),
    )
