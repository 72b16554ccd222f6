"""Target densities the samplers are exercised on.

Three analytic 2-D targets (a correlated Gaussian with closed-form full
conditionals, a bimodal density, a donut-shaped ridge) plus a Gaussian-process
hyperparameter posterior with an ARD kernel, including dataset generation and
CSV round-tripping.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from numpy.random import Generator
from scipy.linalg import cho_solve, lapack

from .core import NumericalError

# Escalation ladder for the SPD factorization regularizer. The first attempt
# is unregularized so well-conditioned matrices factor exactly.
_JITTER_LADDER = (0.0, 1e-8, 1e-7, 1e-6, 1e-5, 1e-4, 1e-3, 1e-2)


# ---------------------------------------------------------------------------
# Gaussian chain


def gaussian_chain_log_density(x: np.ndarray, cond_std: float = 1.0) -> float:
    """Unnormalized log-density of the bivariate Gaussian chain.

    The target is defined through its full conditionals
    ``x_d | x_other ~ N(0.5 * x_other, cond_std**2)``; jointly that is a
    zero-mean Gaussian with covariance ``cond_std**2 * [[4/3, 2/3], [2/3, 4/3]]``.
    """
    x0, x1 = float(x[0]), float(x[1])
    return -(x0 * x0 - x0 * x1 + x1 * x1) / (2.0 * cond_std * cond_std)


def gaussian_chain_conditional_sample(coord: int, complement: np.ndarray, rng: Generator,
                                      cond_std: float = 1.0) -> float:
    """Exact draw from the full conditional of one chain coordinate."""
    return 0.5 * float(complement[0]) + cond_std * rng.standard_normal()


@dataclass(frozen=True)
class GaussianChainTarget:
    """Bivariate Gaussian with conditionals ``N(0.5 * x_other, cond_std**2)``."""

    cond_std: float = 1.0
    dim: int = 2
    quadrature_bounds = ((-8.0, 8.0), (-8.0, 8.0))

    def __post_init__(self) -> None:
        if self.cond_std <= 0:
            raise ValueError("cond_std must be positive")

    def log_density(self, x: np.ndarray) -> float:
        return gaussian_chain_log_density(x, self.cond_std)

    def log_density_batch(self, points: np.ndarray) -> np.ndarray:
        x0, x1 = points[:, 0], points[:, 1]
        return -(x0 * x0 - x0 * x1 + x1 * x1) / (2.0 * self.cond_std ** 2)

    def conditional_sample(self, coord: int, complement: np.ndarray, rng: Generator) -> float:
        return gaussian_chain_conditional_sample(coord, complement, rng, self.cond_std)

    @property
    def mean(self) -> np.ndarray:
        return np.zeros(2)

    @property
    def covariance(self) -> np.ndarray:
        v = self.cond_std ** 2
        return v * np.array([[4.0 / 3.0, 2.0 / 3.0], [2.0 / 3.0, 4.0 / 3.0]])

    def default_initial(self) -> np.ndarray:
        return np.zeros(2)


# ---------------------------------------------------------------------------
# Bimodal target


def bimodal_log_density(x: np.ndarray, mode_sq: float = 4.0, x1_spread: float = math.sqrt(2.5),
                        x2_mean: float = 1.0, x2_spread: float = 1.0) -> float:
    """Two symmetric modes at ``(+-sqrt(mode_sq), x2_mean)``."""
    x0, x1 = float(x[0]), float(x[1])
    a = x0 * x0 - mode_sq
    b = x1 - x2_mean
    return -a * a / (2.0 * x1_spread * x1_spread) - b * b / (2.0 * x2_spread * x2_spread)


@dataclass(frozen=True)
class BimodalTarget:
    """2-D density whose first coordinate concentrates around ``x1**2 = mode_sq``.

    The first coordinate has no closed-form full conditional, so only
    MH-style kernels apply.
    """

    mode_sq: float = 4.0
    x1_spread: float = math.sqrt(2.5)
    x2_mean: float = 1.0
    x2_spread: float = 1.0
    dim: int = 2
    quadrature_bounds = ((-7.0, 7.0), (-5.0, 7.0))

    def log_density(self, x: np.ndarray) -> float:
        return bimodal_log_density(x, self.mode_sq, self.x1_spread, self.x2_mean, self.x2_spread)

    def log_density_batch(self, points: np.ndarray) -> np.ndarray:
        a = points[:, 0] ** 2 - self.mode_sq
        b = points[:, 1] - self.x2_mean
        return -a * a / (2.0 * self.x1_spread ** 2) - b * b / (2.0 * self.x2_spread ** 2)

    def default_initial(self) -> np.ndarray:
        return np.zeros(2)


# ---------------------------------------------------------------------------
# Donut target


def donut_log_density(x: np.ndarray, level: float = 10.0, x2_weight: float = 0.1) -> float:
    """Ridge along the ellipse ``x1**2 + x2_weight * x2**2 = level``."""
    x0, x1 = float(x[0]), float(x[1])
    r = x0 * x0 + x2_weight * x1 * x1 - level
    return -r * r / 4.0


@dataclass(frozen=True)
class DonutTarget:
    """2-D density concentrated on an elliptical ring."""

    level: float = 10.0
    x2_weight: float = 0.1
    dim: int = 2
    quadrature_bounds = ((-6.0, 6.0), (-14.0, 14.0))

    def log_density(self, x: np.ndarray) -> float:
        return donut_log_density(x, self.level, self.x2_weight)

    def log_density_batch(self, points: np.ndarray) -> np.ndarray:
        r = points[:, 0] ** 2 + self.x2_weight * points[:, 1] ** 2 - self.level
        return -r * r / 4.0

    def default_initial(self) -> np.ndarray:
        return np.zeros(2)


# ---------------------------------------------------------------------------
# GP hyperparameter posterior


def ard_kernel(za: np.ndarray, zb: np.ndarray, lengthscales: np.ndarray) -> np.ndarray:
    """ARD squared-exponential Gram matrix.

    Parameters
    ----------
    za, zb : array_like
        Input locations, shape ``(na, L)`` and ``(nb, L)``.
    lengthscales : array_like
        Per-dimension scales ``(L,)``, all positive.

    Returns
    -------
    ndarray
        ``(na, nb)`` matrix with entries
        ``exp(-sum_l (za_il - zb_jl)**2 / (2 * lengthscales_l**2))``.
    """
    za = np.atleast_2d(np.asarray(za, dtype=float))
    zb = np.atleast_2d(np.asarray(zb, dtype=float))
    ell = np.asarray(lengthscales, dtype=float).ravel()
    if np.any(ell <= 0) or not np.all(np.isfinite(ell)):
        raise ValueError("lengthscales must be positive and finite")
    if za.shape[1] != ell.size or zb.shape[1] != ell.size:
        raise ValueError("input dimension does not match number of lengthscales")
    diff = za[:, None, :] - zb[None, :, :]
    return np.exp(-np.sum(diff * diff * (0.5 / (ell * ell)), axis=-1))


@dataclass(frozen=True)
class GPDataset:
    """Regression dataset for the GP posterior: inputs ``(P, L)``, outputs ``(P,)``."""

    inputs: np.ndarray
    outputs: np.ndarray
    noise_std: float | None = None
    true_lengthscales: np.ndarray | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "inputs", np.atleast_2d(np.asarray(self.inputs, dtype=float)))
        object.__setattr__(self, "outputs", np.asarray(self.outputs, dtype=float).ravel())
        if self.inputs.shape[0] != self.outputs.size:
            raise ValueError("inputs and outputs disagree on the number of points")

    @property
    def n_points(self) -> int:
        return self.outputs.size

    @property
    def input_dim(self) -> int:
        return self.inputs.shape[1]

    def to_csv(self, path: str | Path) -> None:
        """Write ``z_1,...,z_L,y`` rows with full float64 round-trip precision."""
        cols = [f"z_{i + 1}" for i in range(self.input_dim)] + ["y"]
        lines = [",".join(cols)]
        for row, out in zip(self.inputs, self.outputs):
            lines.append(",".join(f"{v:.17g}" for v in (*row, out)))
        Path(path).write_text("\n".join(lines) + "\n")

    @classmethod
    def from_csv(cls, path: str | Path) -> "GPDataset":
        text = Path(path).read_text().strip().splitlines()
        if not text:
            raise ValueError(f"empty dataset file: {path}")
        header = text[0].split(",")
        if header[-1] != "y" or any(h != f"z_{i + 1}" for i, h in enumerate(header[:-1])):
            raise ValueError(f"unexpected dataset header: {text[0]!r}")
        data = np.array([[float(v) for v in line.split(",")] for line in text[1:]])
        if data.ndim != 2 or data.shape[1] != len(header):
            raise ValueError(f"malformed dataset rows in {path}")
        return cls(inputs=data[:, :-1], outputs=data[:, -1])


def _cholesky_psd(matrix: np.ndarray, ladder=_JITTER_LADDER) -> tuple[np.ndarray, float]:
    """Lower Cholesky factor of a (nearly) PSD matrix, escalating jitter on failure."""
    n = matrix.shape[0]
    for jitter in ladder:
        try:
            chol = np.linalg.cholesky(matrix + jitter * np.eye(n) if jitter else matrix)
            return chol, jitter
        except np.linalg.LinAlgError:
            continue
    raise NumericalError(f"Cholesky factorization failed with jitter up to {ladder[-1]:g}")


def generate_gp_dataset(lengthscales: np.ndarray, noise_std: float, n_points: int,
                        rng: Generator, box: float = 10.0) -> GPDataset:
    """Draw a synthetic regression dataset from the GP prior.

    Inputs are uniform on ``[0, box]^L``, the latent function is one joint
    draw from the GP prior with the given lengthscales, and the outputs add
    ``N(0, noise_std**2)`` observation noise. Draw order (inputs, latent,
    noise) is fixed so a seeded generator reproduces the dataset exactly.
    """
    ell = np.asarray(lengthscales, dtype=float).ravel()
    if np.any(ell <= 0):
        raise ValueError("lengthscales must be positive")
    if noise_std < 0:
        raise ValueError("noise_std must be non-negative")
    if n_points < 1:
        raise ValueError("n_points must be >= 1")
    z = rng.uniform(0.0, box, size=(n_points, ell.size))
    gram = ard_kernel(z, z, ell)
    # the prior Gram matrix is frequently rank-deficient, so start regularized
    chol, _ = _cholesky_psd(gram, ladder=_JITTER_LADDER[1:])
    latent = chol @ rng.standard_normal(n_points)
    y = latent + noise_std * rng.standard_normal(n_points)
    return GPDataset(inputs=z, outputs=y, noise_std=noise_std, true_lengthscales=ell)


class GPPosteriorTarget:
    """Log-posterior over ``theta = [lengthscales_1..L, noise_std]``.

    Up to a constant:
    ``-y' (K + s^2 I)^{-1} y / 2  -  log det(K + s^2 I) / 2  -  beta * sum(log theta)``
    with ``K`` the ARD Gram matrix of the dataset inputs. Outside ``theta > 0``
    the value is ``-inf``. The pairwise squared differences are precomputed
    (they do not depend on ``theta``), so instances are safe to share across
    concurrent runs.
    """

    def __init__(self, dataset: GPDataset, beta: float = 1.3):
        if beta <= 0:
            raise ValueError("beta must be positive")
        z = dataset.inputs
        diff = z[:, None, :] - z[None, :, :]
        self._sq = np.ascontiguousarray((diff * diff).transpose(2, 0, 1))  # (L, P, P)
        self._y = np.asarray(dataset.outputs, dtype=float)
        self._n = dataset.n_points
        self.dataset = dataset
        self.beta = float(beta)
        self.dim = dataset.input_dim + 1

    def default_initial(self) -> np.ndarray:
        return np.ones(self.dim)

    def _gram(self, lengthscales: np.ndarray) -> np.ndarray:
        gram = np.tensordot(-0.5 / (lengthscales * lengthscales), self._sq, axes=1)
        np.exp(gram, out=gram)
        return gram

    def log_density(self, theta: np.ndarray) -> float:
        theta = np.asarray(theta, dtype=float)
        if theta.shape != (self.dim,):
            raise ValueError(f"theta must have shape ({self.dim},)")
        if not np.all(np.isfinite(theta)) or np.any(theta <= 0.0):
            return -math.inf
        noise_var = theta[-1] * theta[-1]
        n = self._n
        gram = self._gram(theta[:-1])
        for jitter in _JITTER_LADDER:
            gram.flat[:: n + 1] += noise_var + jitter
            # gram is symmetric, so its transpose is the same matrix in
            # Fortran order and LAPACK can factor it without a copy
            chol, info = lapack.dpotrf(gram.T, lower=1, overwrite_a=1)
            if info == 0:
                log_det = 2.0 * np.log(chol.diagonal()).sum()
                solved, _ = lapack.dpotrs(chol, self._y, lower=1)
                quad = float(self._y @ solved)
                prior = self.beta * float(np.log(theta).sum())
                return -0.5 * quad - 0.5 * log_det - prior
            gram = self._gram(theta[:-1])  # factorization clobbered it
        raise NumericalError(
            f"GP Gram factorization failed for theta={theta} with jitter up to {_JITTER_LADDER[-1]:g}")


def gp_log_posterior(theta: np.ndarray, dataset: GPDataset, beta: float = 1.3) -> float:
    """Log-posterior of the GP hyperparameters; see ``GPPosteriorTarget``.

    Convenience wrapper that builds the target and evaluates once. Hold a
    ``GPPosteriorTarget`` instead when evaluating many times on one dataset.
    """
    return GPPosteriorTarget(dataset, beta=beta).log_density(theta)


def gp_posterior_f(theta: np.ndarray, dataset: GPDataset) -> tuple[np.ndarray, np.ndarray]:
    """Posterior mean and covariance of the latent function at the inputs.

    Returns ``(mean, cov)`` with ``mean = K (K + s^2 I)^{-1} y`` and
    ``cov = K - K (K + s^2 I)^{-1} K``; the covariance is symmetrized before
    returning.
    """
    theta = np.asarray(theta, dtype=float).ravel()
    if theta.size != dataset.input_dim + 1:
        raise ValueError("theta must hold one lengthscale per input dimension plus the noise std")
    if np.any(theta <= 0):
        raise ValueError("theta entries must be positive")
    ell, noise_std = theta[:-1], theta[-1]
    gram = ard_kernel(dataset.inputs, dataset.inputs, ell)
    shifted = gram + noise_std ** 2 * np.eye(dataset.n_points)
    chol, _ = _cholesky_psd(shifted)
    mean = gram @ cho_solve((chol, True), dataset.outputs)
    cov = gram - gram @ cho_solve((chol, True), gram)
    return mean, 0.5 * (cov + cov.T)
