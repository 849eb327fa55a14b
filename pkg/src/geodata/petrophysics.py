from typing import Tuple

import numpy as np
from scipy import ndimage

from config import (
    background_poro_perm,
    background_porosity,
    channel_poro_perm,
    channel_porosity,
    permeability_bounds,
)


def _smoothed_within(values: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """
    3x3x3 moving average restricted to the cells of ``mask``

    Only same-facies neighbours enter the average, so values stay
    inside the facies range.
    """
    weight = ndimage.uniform_filter(mask.astype(np.float64), size=3, mode="nearest")
    total = ndimage.uniform_filter(
        np.where(mask, values, 0.0), size=3, mode="nearest"
    )

    smoothed = values.copy()
    smoothed[mask] = total[mask] / weight[mask]

    return smoothed


def facies_porosity(
    channel_mask: np.ndarray,
    rng: np.random.Generator,
    channel_range: Tuple[float, float] = channel_porosity,
    background_range: Tuple[float, float] = background_porosity,
) -> np.ndarray:
    """
    Uniform porosity per facies, smoothed with a 1-cell moving average
    inside each facies
    """
    channel_mask = np.asarray(channel_mask, dtype=bool)

    porosity = np.where(
        channel_mask,
        rng.uniform(*channel_range, size=channel_mask.shape),
        rng.uniform(*background_range, size=channel_mask.shape),
    )

    porosity = _smoothed_within(porosity, channel_mask)
    porosity = _smoothed_within(porosity, ~channel_mask)

    return porosity


def poro_perm_transform(
    porosity: np.ndarray,
    channel_mask: np.ndarray,
    rng: np.random.Generator,
    channel_coefficients: Tuple[float, float, float] = channel_poro_perm,
    background_coefficients: Tuple[float, float, float] = background_poro_perm,
) -> np.ndarray:
    """
    Permeability (mD) as a noisy log-linear function of porosity

    .. math::
        \\log_{10} k = a_f + b_f \\phi + \\eta,\\quad
        \\eta \\sim N(0, s_f^2)

    Parameters
    ----------
    porosity : np.ndarray
    channel_mask : np.ndarray
        True for channel-facies cells
    rng : np.random.Generator
    channel_coefficients, background_coefficients : Tuple[float, float, float]
        (a, b, s) per facies

    Returns
    -------
    np.ndarray
    Permeability clamped to the configured bounds
    """
    porosity = np.asarray(porosity, dtype=np.float64)
    channel_mask = np.asarray(channel_mask, dtype=bool)

    a = np.where(channel_mask, channel_coefficients[0], background_coefficients[0])
    b = np.where(channel_mask, channel_coefficients[1], background_coefficients[1])
    s = np.where(channel_mask, channel_coefficients[2], background_coefficients[2])

    log_perm = a + b * porosity + s * rng.standard_normal(porosity.shape)

    return np.clip(10.0**log_perm, *permeability_bounds)
