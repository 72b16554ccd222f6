"""Estimators over sampler output, MSE aggregation, and the quadrature oracle."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .gibbs import SGRun, SampleStore


@dataclass(frozen=True)
class Estimate:
    """Labeled vector of estimated quantities from one run."""

    values: np.ndarray
    labels: tuple[str, ...]
    sample_count: int
    eval_count: int | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float).ravel())
        if len(self.labels) != self.values.size:
            raise ValueError("labels and values disagree in length")


@dataclass(frozen=True)
class GroundTruth:
    """Reference values the per-run estimates are scored against."""

    values: np.ndarray
    labels: tuple[str, ...]
    source: str  # "analytic" | "quadrature" | "reference-run"

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float).ravel())
        if len(self.labels) != self.values.size:
            raise ValueError("labels and values disagree in length")


def _as_rows(f_out, n: int) -> np.ndarray:
    out = np.asarray(f_out, dtype=float)
    if out.ndim == 1:
        out = out[:, None]
    if out.ndim != 2 or out.shape[0] != n:
        raise ValueError("statistic function must map (N, D) samples to N rows")
    return out


def recycled_estimate(store: SampleStore, f: Callable[[np.ndarray], np.ndarray],
                      labels: Sequence[str] | None = None,
                      skip_sweeps: int = 0) -> Estimate:
    """Average ``f`` over every recycled vector of a run.

    ``f`` receives an ``(N, D)`` array and must return ``N`` rows of
    statistics. All ``sweeps * dim * inner_samples`` recycled samples
    contribute; nothing is discarded as burn-in (``skip_sweeps`` exists for
    warm-start comparisons, default 0).
    """
    if store.inner is None:
        raise ValueError("streaming run: use store.streaming_mean() for its registered statistic")
    vectors = store.assembled(skip_sweeps=skip_sweeps)
    rows = _as_rows(f(vectors), vectors.shape[0])
    values = rows.mean(axis=0)
    labels = tuple(labels) if labels is not None else tuple(f"f_{i + 1}" for i in range(values.size))
    return Estimate(values=values, labels=labels, sample_count=vectors.shape[0],
                    eval_count=store.eval_count)


def standard_estimate(run: SGRun | np.ndarray, f: Callable[[np.ndarray], np.ndarray],
                      labels: Sequence[str] | None = None,
                      burn_in: int | None = None) -> Estimate:
    """Average ``f`` over the chain states after the burn-in sweeps."""
    if isinstance(run, SGRun):
        chain = run.chain
        eval_count = run.eval_count
        if burn_in is None:
            burn_in = run.config.burn_in
    else:
        chain = np.asarray(run, dtype=float)
        eval_count = None
        burn_in = 0 if burn_in is None else burn_in
    if chain.ndim != 2:
        raise ValueError("chain must be a (T, D) array")
    if not 0 <= burn_in < chain.shape[0]:
        raise ValueError("burn_in must satisfy 0 <= burn_in < sweeps")
    kept = chain[burn_in:]
    rows = _as_rows(f(kept), kept.shape[0])
    values = rows.mean(axis=0)
    labels = tuple(labels) if labels is not None else tuple(f"f_{i + 1}" for i in range(values.size))
    return Estimate(values=values, labels=labels, sample_count=kept.shape[0], eval_count=eval_count)


def mse_over_runs(estimates: Sequence[Estimate | np.ndarray], truth: GroundTruth | np.ndarray) -> float:
    """Mean over runs of the mean squared error across the estimated quantities."""
    if len(estimates) == 0:
        raise ValueError("need at least one run estimate")
    truth_values = truth.values if isinstance(truth, GroundTruth) else np.asarray(truth, dtype=float).ravel()
    per_run = np.empty(len(estimates))
    for i, est in enumerate(estimates):
        values = est.values if isinstance(est, Estimate) else np.asarray(est, dtype=float).ravel()
        if isinstance(est, Estimate) and isinstance(truth, GroundTruth) and est.labels != truth.labels:
            raise ValueError(f"estimate labels {est.labels} do not match truth labels {truth.labels}")
        if values.shape != truth_values.shape:
            raise ValueError("estimate and truth disagree in length")
        err = values - truth_values
        per_run[i] = float(err @ err) / err.size
    return float(per_run.mean())


@dataclass(frozen=True)
class QuadratureMoments:
    """Deterministic moment oracle for a 2-D target (midpoint rule)."""

    mean: np.ndarray
    cov: np.ndarray
    grid_points: int
    boundary_mass: float

    @property
    def std(self) -> np.ndarray:
        return np.sqrt(np.diag(self.cov))


# Column schema of the MSE report CSV emitted by the experiment harness.
MSE_REPORT_COLUMNS = ("experiment", "method", "kernel", "T", "M", "sigma",
                      "E", "runs", "mse", "wall_time_s")


# Relative mass allowed in the outermost grid cells before the bounds are
# declared too small.
_BOUNDARY_TOL = 1e-6


def quadrature_moments(target, bounds=None, n: int = 1200) -> QuadratureMoments:
    """Midpoint-rule means, variances and covariance of a 2-D target.

    Parameters
    ----------
    target
        A 2-D ``TargetDensity``; evaluated in batch when it offers
        ``log_density_batch``, pointwise otherwise.
    bounds
        ``((x_lo, x_hi), (y_lo, y_hi))``; defaults to the target's
        ``quadrature_bounds``.
    n
        Grid points per axis.

    Raises
    ------
    ValueError
        If the target is not 2-D or the boundary cells carry more than a
        ``1e-6`` fraction of the total mass (bounds too small).
    """
    if target.dim != 2:
        raise ValueError("quadrature oracle supports 2-D targets only")
    if n < 8:
        raise ValueError("grid must have at least 8 points per axis")
    if bounds is None:
        bounds = getattr(target, "quadrature_bounds", None)
        if bounds is None:
            raise ValueError("target declares no quadrature_bounds; pass bounds explicitly")
    (x_lo, x_hi), (y_lo, y_hi) = bounds
    if not (x_hi > x_lo and y_hi > y_lo):
        raise ValueError("bounds must be non-degenerate intervals")
    xs = x_lo + (np.arange(n) + 0.5) * ((x_hi - x_lo) / n)
    ys = y_lo + (np.arange(n) + 0.5) * ((y_hi - y_lo) / n)
    grid_x, grid_y = np.meshgrid(xs, ys, indexing="ij")
    points = np.column_stack([grid_x.ravel(), grid_y.ravel()])
    if hasattr(target, "log_density_batch"):
        log_w = np.asarray(target.log_density_batch(points), dtype=float)
    else:
        log_w = np.array([target.log_density(p) for p in points])
    log_w -= log_w.max()
    weights = np.exp(log_w).reshape(n, n)
    total = weights.sum()
    boundary = weights[0, :].sum() + weights[-1, :].sum() + weights[1:-1, 0].sum() + weights[1:-1, -1].sum()
    boundary_mass = float(boundary / total)
    if boundary_mass > _BOUNDARY_TOL:
        raise ValueError(
            f"boundary cells hold a {boundary_mass:.2e} mass fraction; bounds {bounds} too small")
    weights /= total
    mean_x = float((weights * grid_x).sum())
    mean_y = float((weights * grid_y).sum())
    dx = grid_x - mean_x
    dy = grid_y - mean_y
    cov = np.array([
        [float((weights * dx * dx).sum()), float((weights * dx * dy).sum())],
        [float((weights * dx * dy).sum()), float((weights * dy * dy).sum())],
    ])
    return QuadratureMoments(mean=np.array([mean_x, mean_y]), cov=cov,
                             grid_points=n, boundary_mass=boundary_mass)
