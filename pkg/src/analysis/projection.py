from dataclasses import dataclass
from typing import Literal, Optional

import numpy as np
from sklearn.decomposition import PCA
from sklearn.manifold import TSNE

from errors import ValidationError


@dataclass(frozen=True)
class PcaModel:
    """
    mean : np.ndarray
        (m,)
    components : np.ndarray
        (n_components, m), orthonormal rows
    explained_variance : np.ndarray
        (n_components,), non-increasing
    """

    mean: np.ndarray
    components: np.ndarray
    explained_variance: np.ndarray

    @property
    def explained_ratio(self) -> np.ndarray:
        total = float(np.sum(self.explained_variance))
        if total <= 0:
            return np.zeros_like(self.explained_variance)
        return self.explained_variance / total


def _codes(codes: np.ndarray) -> np.ndarray:
    codes = np.atleast_2d(np.asarray(codes, dtype=np.float64))
    if not np.all(np.isfinite(codes)):
        raise ValidationError("latent codes must be finite")

    return codes


def pca_fit(codes: np.ndarray, n_components: Optional[int] = None) -> PcaModel:
    """
    Principal axes of the sample covariance (ddof = 1), all of them by default
    """
    codes = _codes(codes)
    n, m = codes.shape
    if n < 2:
        raise ValidationError("PCA needs at least 2 codes")

    n_components = min(n, m) if n_components is None else n_components
    if not 1 <= n_components <= min(n, m):
        raise ValidationError(
            f"n_components must be in [1, {min(n, m)}], got {n_components}"
        )

    pca = PCA(n_components=n_components, svd_solver="full").fit(codes)

    return PcaModel(
        mean=pca.mean_.copy(),
        components=pca.components_.copy(),
        explained_variance=np.maximum(pca.explained_variance_, 0.0),
    )


def pca_project(model: PcaModel, codes: np.ndarray) -> np.ndarray:
    """
    Coordinates of one code (m,) or a batch (n, m) on the principal axes
    """
    codes = np.asarray(codes, dtype=np.float64)
    if codes.shape[-1] != model.mean.size:
        raise ValidationError(
            f"codes have {codes.shape[-1]} coordinates, "
            + f"model expects {model.mean.size}"
        )

    return (codes - model.mean) @ model.components.T


def pca_back_project(model: PcaModel, coordinates: np.ndarray) -> np.ndarray:
    return np.asarray(coordinates) @ model.components + model.mean


def tsne(
    codes: np.ndarray,
    perplexity: float = 30.0,
    dims: Literal[2, 3] = 2,
    iters: int = 1000,
    seed: int = 0,
    learning_rate: float = 200.0,
) -> np.ndarray:
    """
    t-SNE embedding of latent codes

    Parameters
    ----------
    codes : np.ndarray
        (n, m)
    perplexity : float
        At most n / 3
    dims : int
        2 or 3
    iters : int
        Gradient steps, the first 250 with early exaggeration 12
    seed : int
    learning_rate : float

    Returns
    -------
    np.ndarray
    (n, dims)
    """
    codes = _codes(codes)
    n = len(codes)
    if dims not in (2, 3):
        raise ValidationError(f"t-SNE dims must be 2 or 3, got {dims}")
    if perplexity <= 0 or n < 3 * perplexity:
        raise ValidationError(
            f"perplexity {perplexity} is infeasible for {n} codes "
            + "(needs n >= 3 * perplexity)"
        )
    if iters < 250:
        raise ValidationError("t-SNE needs at least 250 iterations")

    embedding = TSNE(
        n_components=dims,
        perplexity=perplexity,
        early_exaggeration=12.0,
        learning_rate=learning_rate,
        max_iter=iters,
        init="pca" if n > dims else "random",
        method="exact" if n <= 500 else "barnes_hut",
        random_state=seed,
    ).fit_transform(codes)

    return np.asarray(embedding, dtype=np.float64)
