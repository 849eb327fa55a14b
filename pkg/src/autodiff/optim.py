from dataclasses import dataclass, field
from typing import Dict

import numpy as np

from errors import ShapeError


@dataclass
class AdamState:
    """
    First/second moment estimates per parameter name and the step counter
    """

    m: Dict[str, np.ndarray] = field(default_factory=dict)
    v: Dict[str, np.ndarray] = field(default_factory=dict)
    t: int = 0


def adam_step(
    params: Dict[str, np.ndarray],
    grads: Dict[str, np.ndarray],
    state: AdamState,
    lr: float = 1e-3,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
) -> Dict[str, np.ndarray]:
    """
    One Adam update with bias correction

    ``state`` is advanced in place; a new parameter dict is returned
    and the input arrays are left untouched.
    """
    if set(params) != set(grads):
        raise ShapeError("params and grads must have the same names")

    state.t += 1
    correction1 = 1.0 - beta1**state.t
    correction2 = 1.0 - beta2**state.t

    updated = {}
    for name, value in params.items():
        grad = grads[name]
        if grad.shape != value.shape:
            raise ShapeError(
                f"gradient for {name} has shape {grad.shape}, expected {value.shape}"
            )

        m = state.m.get(name, np.zeros_like(value))
        v = state.v.get(name, np.zeros_like(value))
        m = beta1 * m + (1.0 - beta1) * grad
        v = beta2 * v + (1.0 - beta2) * grad**2
        state.m[name] = m
        state.v[name] = v

        m_hat = m / correction1
        v_hat = v / correction2
        updated[name] = value - lr * m_hat / (np.sqrt(v_hat) + eps)

    return updated
