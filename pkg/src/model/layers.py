from dataclasses import dataclass
from typing import Mapping, Optional

import numpy as np

from autodiff import Tensor, ops
from errors import ValidationError
from graphs import GeoGraph, KSetIndex

activations = ("tanh", "identity")


def _inverse_counts(counts: np.ndarray) -> np.ndarray:
    counts = np.asarray(counts, dtype=np.float64)
    return np.divide(1.0, counts, out=np.zeros_like(counts), where=counts > 0)


@dataclass(frozen=True, eq=False)
class ConvStructure:
    """
    Row-level aggregation plan for one or more stacked graphs

    Local means are a gather over ``local_src`` scattered into
    ``local_dst``. Global means either use explicit pairs, or, for node
    level structures, the per-graph total minus the local sum and the row
    itself (``global_src`` is None in that case).
    """

    n_rows: int
    group: np.ndarray
    n_groups: int
    local_src: np.ndarray
    local_dst: np.ndarray
    local_inv: np.ndarray
    global_inv: np.ndarray
    global_src: Optional[np.ndarray] = None
    global_dst: Optional[np.ndarray] = None

    @property
    def rows_per_group(self) -> int:
        return self.n_rows // self.n_groups

    @staticmethod
    def from_graph(graph: GeoGraph) -> "ConvStructure":
        src, dst = graph.directed_edges()
        degree = graph.degree
        n = graph.node_count

        return ConvStructure(
            n_rows=n,
            group=np.zeros(n, dtype=np.int64),
            n_groups=1,
            local_src=src,
            local_dst=dst,
            local_inv=_inverse_counts(degree),
            global_inv=_inverse_counts(n - degree - 1),
        )

    @staticmethod
    def from_kset_index(index: KSetIndex) -> "ConvStructure":
        n = index.size
        local = index.local_pairs
        global_ = index.global_pairs

        return ConvStructure(
            n_rows=n,
            group=np.zeros(n, dtype=np.int64),
            n_groups=1,
            local_src=local[:, 0],
            local_dst=local[:, 1],
            local_inv=_inverse_counts(np.bincount(local[:, 1], minlength=n)),
            global_inv=_inverse_counts(np.bincount(global_[:, 1], minlength=n)),
            global_src=global_[:, 0],
            global_dst=global_[:, 1],
        )

    def tile(self, copies: int) -> "ConvStructure":
        """
        The same structure repeated for ``copies`` stacked graphs
        """
        if self.n_groups != 1:
            raise ValidationError("only single-graph structures can be tiled")

        n = self.n_rows
        offsets = (np.arange(copies) * n)[:, None]

        def repeat(index: Optional[np.ndarray]) -> Optional[np.ndarray]:
            if index is None:
                return None
            return (index[None, :] + offsets).ravel()

        return ConvStructure(
            n_rows=n * copies,
            group=np.repeat(np.arange(copies), n),
            n_groups=copies,
            local_src=repeat(self.local_src),
            local_dst=repeat(self.local_dst),
            local_inv=np.tile(self.local_inv, copies),
            global_inv=np.tile(self.global_inv, copies),
            global_src=repeat(self.global_src),
            global_dst=repeat(self.global_dst),
        )

    # region aggregation

    def local_sum(self, h: Tensor) -> Tensor:
        return ops.scatter_add_rows(
            ops.gather_rows(h, self.local_src), self.local_dst, self.n_rows
        )

    def local_mean(self, h: Tensor) -> Tensor:
        return ops.row_scale(self.local_sum(h), self.local_inv)

    def global_mean(self, h: Tensor, local_sum: Optional[Tensor] = None) -> Tensor:
        if self.global_src is not None:
            total = ops.scatter_add_rows(
                ops.gather_rows(h, self.global_src), self.global_dst, self.n_rows
            )
            return ops.row_scale(total, self.global_inv)

        if local_sum is None:
            local_sum = self.local_sum(h)

        per_group = ops.scatter_add_rows(h, self.group, self.n_groups)
        rest = ops.sub(ops.sub(ops.gather_rows(per_group, self.group), local_sum), h)

        return ops.row_scale(rest, self.global_inv)

    def pool(self, h: Tensor) -> Tensor:
        """
        Mean over the rows of each graph, (n_groups, channels)
        """
        total = ops.scatter_add_rows(h, self.group, self.n_groups)
        return ops.scale(total, 1.0 / self.rows_per_group)

    # endregion


@dataclass(frozen=True)
class GraphConvLayer:
    """
    h'_t = act(W h_t + Q_L mean_{N_L(t)} h + Q_G mean_{N_G(t)} h)

    Weights are looked up as ``<name>.W``, ``<name>.Q_L``, ``<name>.Q_G``,
    each (out, in).
    """

    name: str
    in_dim: int
    out_dim: int
    activation: str = "tanh"

    def __post_init__(self):
        if self.activation not in activations:
            raise ValidationError(f"unknown activation {self.activation}")

    @property
    def param_names(self):
        return tuple(f"{self.name}.{p}" for p in ("W", "Q_L", "Q_G"))

    def init_params(self, rng: np.random.Generator) -> Mapping[str, np.ndarray]:
        bound = np.sqrt(6.0 / (self.in_dim + self.out_dim))

        return {
            name: rng.uniform(-bound, bound, size=(self.out_dim, self.in_dim))
            for name in self.param_names
        }

    def apply(
        self, params: Mapping[str, Tensor], structure: ConvStructure, h: Tensor
    ) -> Tensor:
        if h.data.ndim != 2 or h.shape[1] != self.in_dim:
            raise ValidationError(
                f"layer {self.name} expects {self.in_dim} input channels, "
                + f"got shape {h.shape}"
            )
        if h.shape[0] != structure.n_rows:
            raise ValidationError(
                f"layer {self.name}: {h.shape[0]} rows for a "
                + f"{structure.n_rows}-row structure"
            )

        w, q_local, q_global = (params[n] for n in self.param_names)

        local_sum = structure.local_sum(h)
        local = ops.row_scale(local_sum, structure.local_inv)
        global_ = structure.global_mean(h, local_sum)

        out = ops.matmul(h, ops.transpose(w))
        out = ops.add(out, ops.matmul(local, ops.transpose(q_local)))
        out = ops.add(out, ops.matmul(global_, ops.transpose(q_global)))

        if self.activation == "tanh":
            return ops.tanh(out)

        return out


def graph_conv_forward(
    layer: GraphConvLayer,
    weights: Mapping[str, np.ndarray],
    graph: GeoGraph,
    h: np.ndarray,
    index: Optional[KSetIndex] = None,
) -> np.ndarray:
    """
    Evaluate one layer on plain arrays

    Rows of ``h`` are nodes, or the k-sets of ``index`` when given.
    """
    structure = (
        ConvStructure.from_graph(graph)
        if index is None
        else ConvStructure.from_kset_index(index)
    )
    params = {name: Tensor(weights[name]) for name in layer.param_names}

    return layer.apply(params, structure, Tensor(h)).data
