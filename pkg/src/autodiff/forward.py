from typing import Callable

import numpy as np

from errors import ShapeError

from .tensor import Tensor


def jvp(
    function: Callable[[Tensor], Tensor], point: np.ndarray, direction: np.ndarray
) -> np.ndarray:
    """
    Directional derivative of ``function`` at ``point`` along ``direction``

    The point is seeded with ``direction`` as its tangent and every primitive
    pushes the tangent forward, so one evaluation yields J·d.

    Parameters
    ----------
    function : Callable[[Tensor], Tensor]
        Built from autodiff primitives
    point : np.ndarray
    direction : np.ndarray
        Same shape as ``point``

    Returns
    -------
    np.ndarray
    J(point)·direction, shaped like the function's output
    """
    point = np.asarray(point, dtype=np.float64)
    direction = np.asarray(direction, dtype=np.float64)
    if point.shape != direction.shape:
        raise ShapeError(
            f"direction shape {direction.shape} does not match point {point.shape}"
        )

    out = function(Tensor(point, tangent=direction.copy()))
    if out.tangent is None:
        return np.zeros_like(out.data)

    return out.tangent
