from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from errors import NumericalError, ShapeError

VJP = Callable[[np.ndarray], Sequence[Optional[np.ndarray]]]


class Tensor:
    """
    A float64 array, optionally recorded on a tape
    and optionally carrying a forward-mode tangent

    Tensors without a tape are constants for reverse mode.
    """

    __slots__ = ("data", "tape", "index", "tangent")

    def __init__(
        self,
        data,
        tape: Optional["Tape"] = None,
        index: int = -1,
        tangent: Optional[np.ndarray] = None,
    ):
        self.data = np.asarray(data, dtype=np.float64)
        self.tape = tape
        self.index = index
        self.tangent = tangent

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.data.shape

    @property
    def size(self) -> int:
        return self.data.size

    def item(self) -> float:
        return float(self.data.reshape(()))

    def __repr__(self) -> str:
        return f"Tensor(shape={self.shape}, index={self.index})"

    # region operators

    def __add__(self, other):
        from . import ops

        return ops.add(self, as_tensor(other, like=self))

    def __sub__(self, other):
        from . import ops

        return ops.sub(self, as_tensor(other, like=self))

    def __mul__(self, other):
        from . import ops

        if np.isscalar(other):
            return ops.scale(self, float(other))
        return ops.mul(self, as_tensor(other))

    __rmul__ = __mul__

    def __neg__(self):
        from . import ops

        return ops.scale(self, -1.0)

    def __matmul__(self, other):
        from . import ops

        return ops.matmul(self, as_tensor(other))

    # endregion


def as_tensor(value, like: Optional[Tensor] = None) -> Tensor:
    """
    Wrap arrays and scalars as constants; a scalar next to ``like``
    is expanded to ``like``'s shape
    """
    if isinstance(value, Tensor):
        return value
    if like is not None and np.isscalar(value):
        return Tensor(np.full(like.shape, float(value)))

    return Tensor(value)


@dataclass
class TapeEntry:
    op: str
    inputs: Tuple[Tensor, ...]
    output: Tensor
    vjp: VJP


class Tape:
    """
    Ordered record of primitive applications

    Entries are appended as primitives run, so every input is recorded
    before the entry that consumes it.
    """

    def __init__(self):
        self.entries: List[TapeEntry] = []
        self.leaves: List[Tensor] = []
        self._count = 0

    def _next_index(self) -> int:
        index = self._count
        self._count += 1
        return index

    def variable(self, data) -> Tensor:
        leaf = Tensor(np.array(data, dtype=np.float64), tape=self)
        leaf.index = self._next_index()
        self.leaves.append(leaf)

        return leaf

    def record(
        self, op: str, inputs: Tuple[Tensor, ...], data: np.ndarray, vjp: VJP
    ) -> Tensor:
        output = Tensor(data, tape=self)
        output.index = self._next_index()
        self.entries.append(TapeEntry(op, inputs, output, vjp))

        return output


def backward(tape: Tape, output: Tensor) -> Dict[int, np.ndarray]:
    """
    Reverse sweep from a scalar output

    Parameters
    ----------
    tape : Tape
        The tape the output was recorded on
    output : Tensor
        A scalar (size 1) tensor

    Returns
    -------
    Dict[int, np.ndarray]
    Gradient of the output for every leaf, keyed by the leaf's index;
    leaves the output does not depend on get zeros
    """
    if output.size != 1:
        raise ShapeError(f"backward needs a scalar output, got shape {output.shape}")
    if output.tape is not tape:
        raise ShapeError("output was not recorded on this tape")

    adjoints: Dict[int, np.ndarray] = {output.index: np.ones_like(output.data)}

    for entry in reversed(tape.entries):
        g = adjoints.pop(entry.output.index, None)
        if g is None:
            continue

        for tensor, grad in zip(entry.inputs, entry.vjp(g)):
            if grad is None or tensor.tape is not tape:
                continue
            if grad.shape != tensor.shape:
                grad = grad.reshape(tensor.shape)
            if tensor.index in adjoints:
                adjoints[tensor.index] = adjoints[tensor.index] + grad
            else:
                adjoints[tensor.index] = grad

    gradients = {}
    for leaf in tape.leaves:
        grad = adjoints.get(leaf.index, np.zeros_like(leaf.data))
        if not np.all(np.isfinite(grad)):
            raise NumericalError(f"non-finite gradient for leaf {leaf.index}")
        gradients[leaf.index] = grad

    return gradients
