import math
from typing import Mapping, Optional, Tuple

import numpy as np

from autodiff import Tensor, ops
from errors import ValidationError

from .architecture import ArchitectureConfig
from .gwae import reparameterize_tensor
from .network import BatchPlan, decoder_forward, encoder_forward


def _squared_distances(a: Tensor, b: Tensor) -> Tensor:
    """
    ||a_i - b_j||^2 as an (n_a, n_b) matrix
    """
    a_sq = ops.sum(ops.mul(a, a), axis=1)
    b_sq = ops.sum(ops.mul(b, b), axis=1)
    cross = ops.scale(ops.matmul(a, ops.transpose(b)), -2.0)

    # row bias adds b_sq along columns; transposing swaps roles for a_sq
    partial = ops.transpose(ops.add(cross, b_sq))

    return ops.transpose(ops.add(partial, a_sq))


def imq_kernel(a: Tensor, b: Tensor, scale: float) -> Tensor:
    """
    C / (C + ||a - b||^2)
    """
    return ops.scale(
        ops.reciprocal(ops.shift(_squared_distances(a, b), scale)), scale
    )


def mmd(z: Tensor, prior: Tensor, scale: Optional[float] = None) -> Tensor:
    """
    Unbiased MMD^2 estimate with the inverse multiquadratic kernel

    Parameters
    ----------
    z : Tensor
        (n, m) encoded samples
    prior : Tensor
        (n, m) samples of the prior
    scale : Optional[float]
        Kernel constant C, 2m by default

    Returns
    -------
    Tensor
    Scalar; can be slightly negative
    """
    if z.shape != prior.shape or z.data.ndim != 2:
        raise ValidationError("mmd needs two (n, m) batches of equal shape")

    n, m = z.shape
    if n < 2:
        raise ValidationError("mmd needs at least 2 samples per batch")

    c = 2.0 * m if scale is None else scale

    # k(a, a) = 1, so the diagonal of each self-kernel sums to n
    within = 1.0 / (n * (n - 1))
    zz = ops.scale(ops.shift(ops.sum(imq_kernel(z, z, c)), -n), within)
    pp = ops.scale(ops.shift(ops.sum(imq_kernel(prior, prior, c)), -n), within)
    zp = ops.scale(ops.sum(imq_kernel(z, prior, c)), -2.0 / n**2)

    return ops.add(ops.add(zz, pp), zp)


def gaussian_nll(x: np.ndarray, mu: Tensor, log_sigma: Tensor) -> Tensor:
    """
    Mean over all entries of -log N(x; mu, sigma^2)
    """
    x = Tensor(x)
    diff = ops.sub(x, mu)
    inverse_variance = ops.exp(ops.scale(log_sigma, -2.0))
    per_entry = ops.add(
        log_sigma, ops.scale(ops.mul(ops.mul(diff, diff), inverse_variance), 0.5)
    )

    return ops.shift(ops.mean(per_entry), 0.5 * math.log(2 * math.pi))


def wae_loss(
    params: Mapping[str, Tensor],
    architecture: ArchitectureConfig,
    plan: BatchPlan,
    batch: np.ndarray,
    lam: float,
    rng: np.random.Generator,
) -> Tuple[Tensor, Tensor, Tensor]:
    """
    recon + lam * MMD^2 on one mini-batch

    Parameters
    ----------
    params : Mapping[str, Tensor]
        Model weights, tape variables when training
    architecture : ArchitectureConfig
    plan : BatchPlan
        Template structures tiled to the batch size
    batch : np.ndarray
        (batch, nodes, f) normalized features
    lam : float
    rng : np.random.Generator
        Draws the reparameterization noise, then the prior sample

    Returns
    -------
    Tuple[Tensor, Tensor, Tensor]
    (total, recon, reg)
    """
    batch = np.asarray(batch, dtype=np.float64)
    n = batch.shape[0]
    x = batch.reshape(-1, batch.shape[2])

    mu, log_sigma = encoder_forward(params, architecture, plan, Tensor(x))
    eps = rng.standard_normal(mu.shape)
    z = reparameterize_tensor(mu, log_sigma, eps)

    x_mu, x_log_sigma = decoder_forward(params, architecture, plan, z)
    recon = gaussian_nll(x, x_mu, x_log_sigma)

    prior = Tensor(rng.standard_normal((n, architecture.latent_dim)))
    reg = mmd(z, prior)

    return ops.add(recon, ops.scale(reg, lam)), recon, reg
