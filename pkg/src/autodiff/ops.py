"""
Differentiable primitives

Every primitive computes its output, traps non-finite values, records a
vector-Jacobian product on the inputs' tape (if any) and propagates
forward-mode tangents (if any input carries one). Broadcasting is limited
to adding a row bias to a matrix.
"""
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

from errors import NumericalError, ShapeError

from .tensor import Tensor, as_tensor

JVP = Callable[..., np.ndarray]


def _tape_of(inputs: Sequence[Tensor]):
    tape = None
    for tensor in inputs:
        if tensor.tape is None:
            continue
        if tape is not None and tensor.tape is not tape:
            raise ShapeError("inputs are recorded on different tapes")
        tape = tensor.tape

    return tape


def _apply(
    op: str,
    inputs: Tuple[Tensor, ...],
    data: np.ndarray,
    vjp,
    jvp: JVP,
) -> Tensor:
    if not np.all(np.isfinite(data)):
        raise NumericalError(f"{op} produced non-finite values")

    tangent = None
    if any(t.tangent is not None for t in inputs):
        tangents = [
            t.tangent if t.tangent is not None else np.zeros_like(t.data)
            for t in inputs
        ]
        tangent = np.asarray(jvp(*tangents), dtype=np.float64).reshape(data.shape)

    tape = _tape_of(inputs)
    if tape is None:
        return Tensor(data, tangent=tangent)

    output = tape.record(op, inputs, data, vjp)
    output.tangent = tangent

    return output


def _require_2d(op: str, *tensors: Tensor):
    for t in tensors:
        if t.data.ndim != 2:
            raise ShapeError(f"{op} expects 2-d operands, got shape {t.shape}")


# region linear


def matmul(a: Tensor, b: Tensor) -> Tensor:
    _require_2d("matmul", a, b)
    if a.shape[1] != b.shape[0]:
        raise ShapeError(f"matmul shapes {a.shape} and {b.shape} do not align")

    x, y = a.data, b.data

    return _apply(
        "matmul",
        (a, b),
        x @ y,
        lambda g: (g @ y.T, x.T @ g),
        lambda dx, dy: dx @ y + x @ dy,
    )


def transpose(a: Tensor) -> Tensor:
    _require_2d("transpose", a)

    return _apply("transpose", (a,), a.data.T.copy(), lambda g: (g.T,), lambda d: d.T)


def add(a: Tensor, b: Tensor) -> Tensor:
    """
    ``a + b`` for equal shapes, or a matrix plus a row bias vector
    """
    if a.shape == b.shape:
        return _apply(
            "add", (a, b), a.data + b.data, lambda g: (g, g), lambda da, db: da + db
        )

    if a.data.ndim == 2 and b.data.ndim == 1 and b.shape[0] == a.shape[1]:
        return _apply(
            "add",
            (a, b),
            a.data + b.data[None, :],
            lambda g: (g, g.sum(axis=0)),
            lambda da, db: da + db[None, :],
        )

    raise ShapeError(f"add shapes {a.shape} and {b.shape} are incompatible")


def sub(a: Tensor, b: Tensor) -> Tensor:
    return add(a, scale(b, -1.0))


def scale(a: Tensor, c: float) -> Tensor:
    c = float(c)

    return _apply("scale", (a,), a.data * c, lambda g: (g * c,), lambda d: d * c)


def mul(a: Tensor, b: Tensor) -> Tensor:
    if a.shape != b.shape:
        raise ShapeError(f"mul shapes {a.shape} and {b.shape} differ")

    x, y = a.data, b.data

    return _apply(
        "mul",
        (a, b),
        x * y,
        lambda g: (g * y, g * x),
        lambda dx, dy: dx * y + x * dy,
    )


def shift(a: Tensor, c: float) -> Tensor:
    """
    Add a constant scalar
    """
    return add(a, as_tensor(c, like=a))


def row_scale(a: Tensor, weights: np.ndarray) -> Tensor:
    """
    Multiply row ``r`` of a matrix by the constant ``weights[r]``
    """
    _require_2d("row_scale", a)
    w = np.asarray(weights, dtype=np.float64).reshape(-1, 1)
    if w.shape[0] != a.shape[0]:
        raise ShapeError(f"row_scale needs {a.shape[0]} weights, got {w.shape[0]}")

    return _apply("row_scale", (a,), a.data * w, lambda g: (g * w,), lambda d: d * w)


def reciprocal(a: Tensor) -> Tensor:
    x = a.data
    if np.any(x == 0):
        raise NumericalError("reciprocal of zero")
    y = 1.0 / x

    return _apply("reciprocal", (a,), y, lambda g: (-g * y**2,), lambda d: -d * y**2)


# endregion

# region elementwise


def tanh(a: Tensor) -> Tensor:
    y = np.tanh(a.data)

    return _apply(
        "tanh",
        (a,),
        y,
        lambda g: (g * (1.0 - y**2),),
        lambda d: d * (1.0 - y**2),
    )


def relu(a: Tensor) -> Tensor:
    mask = (a.data > 0).astype(np.float64)

    return _apply(
        "relu", (a,), a.data * mask, lambda g: (g * mask,), lambda d: d * mask
    )


def exp(a: Tensor) -> Tensor:
    with np.errstate(over="ignore"):
        y = np.exp(a.data)

    return _apply("exp", (a,), y, lambda g: (g * y,), lambda d: d * y)


def log(a: Tensor) -> Tensor:
    x = a.data
    if np.any(x <= 0):
        raise NumericalError("log of non-positive input")

    return _apply("log", (a,), np.log(x), lambda g: (g / x,), lambda d: d / x)


def clip(a: Tensor, lo: float, hi: float) -> Tensor:
    """
    Clamp into [lo, hi]; the gradient is zero where clamping is active
    """
    x = a.data
    inside = ((x >= lo) & (x <= hi)).astype(np.float64)

    return _apply(
        "clip",
        (a,),
        np.clip(x, lo, hi),
        lambda g: (g * inside,),
        lambda d: d * inside,
    )


# endregion

# region reductions


def sum(a: Tensor, axis: Optional[int] = None) -> Tensor:
    x = a.data

    def vjp(g):
        if axis is None:
            return (np.full(x.shape, float(np.asarray(g).reshape(()))),)
        return (np.broadcast_to(np.expand_dims(g, axis), x.shape).copy(),)

    return _apply(
        "sum",
        (a,),
        np.asarray(x.sum(axis=axis)),
        vjp,
        lambda d: np.asarray(d.sum(axis=axis)),
    )


def mean(a: Tensor, axis: Optional[int] = None) -> Tensor:
    count = a.size if axis is None else a.shape[axis]
    if count == 0:
        raise ShapeError("mean of an empty axis")

    return scale(sum(a, axis=axis), 1.0 / count)


# endregion

# region indexing


def gather_rows(a: Tensor, index: np.ndarray) -> Tensor:
    """
    ``a[index]`` along the first axis
    """
    index = np.asarray(index, dtype=np.int64)
    n_rows = a.shape[0]
    if index.size and (index.min() < 0 or index.max() >= n_rows):
        raise ShapeError(f"gather index out of range for {n_rows} rows")

    def vjp(g):
        grad = np.zeros_like(a.data)
        np.add.at(grad, index, g)
        return (grad,)

    return _apply("gather_rows", (a,), a.data[index], vjp, lambda d: d[index])


def scatter_add_rows(a: Tensor, index: np.ndarray, n_rows: int) -> Tensor:
    """
    Sum row ``r`` of ``a`` into output row ``index[r]``
    """
    index = np.asarray(index, dtype=np.int64)
    if index.shape[0] != a.shape[0]:
        raise ShapeError("scatter index needs one entry per input row")
    if index.size and (index.min() < 0 or index.max() >= n_rows):
        raise ShapeError(f"scatter index out of range for {n_rows} rows")

    def forward(x):
        out = np.zeros((n_rows,) + x.shape[1:])
        np.add.at(out, index, x)
        return out

    return _apply(
        "scatter_add_rows", (a,), forward(a.data), lambda g: (g[index],), forward
    )


def concat(tensors: Sequence[Tensor], axis: int = 0) -> Tensor:
    tensors = tuple(tensors)
    if not tensors:
        raise ShapeError("concat of nothing")

    data = [t.data for t in tensors]
    try:
        out = np.concatenate(data, axis=axis)
    except ValueError as error:
        raise ShapeError(f"concat: {error}") from error

    sizes = np.cumsum([d.shape[axis] for d in data])[:-1]

    return _apply(
        "concat",
        tensors,
        out,
        lambda g: tuple(np.split(g, sizes, axis=axis)),
        lambda *ds: np.concatenate(ds, axis=axis),
    )


def reshape(a: Tensor, shape: Tuple[int, ...]) -> Tensor:
    original = a.shape
    try:
        out = a.data.reshape(shape)
    except ValueError as error:
        raise ShapeError(f"reshape: {error}") from error

    return _apply(
        "reshape",
        (a,),
        out,
        lambda g: (g.reshape(original),),
        lambda d: d.reshape(shape),
    )


# endregion
