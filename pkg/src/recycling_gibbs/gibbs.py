"""Gibbs drivers: the standard sampler, its recycling variants, and chain-rule sampling.

All drivers share one scan so a recycling run and a standard run consume
their per-(sweep, coordinate) random streams identically. Under a shared
seed, kernel and configuration, the recycling backbone therefore reproduces
the standard chain bit for bit; recycling only changes what gets recorded.
"""
from __future__ import annotations

import gzip
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from .core import FullConditionalView, GibbsConfig, RngStream, TargetDensity

# Storage guard for the recycled samples: T*D*M scalars at most, above which
# callers must supply a streaming function instead.
DEFAULT_STORE_CAP = 100_000_000


@dataclass
class SGRun:
    """Output of a standard Gibbs run: the chain and its evaluation accounting."""

    initial: np.ndarray
    chain: np.ndarray            # (T, D)
    eval_count: int              # proposed-point evaluations (direct draws for ideal kernels)
    setup_evals: int             # extra target evaluations spent seeding blocks
    accept_count: int
    config: GibbsConfig

    @property
    def sweeps(self) -> int:
        return self.chain.shape[0]

    @property
    def dim(self) -> int:
        return self.chain.shape[1]


@dataclass
class SampleStore:
    """Everything a recycling run produced.

    ``backbone[t-1, d]`` is the chain value the run carried forward;
    ``inner[t-1, d, m-1]`` the m-th inner sample of that block. The
    recycled sample ``(t, d, m)`` is the full vector whose coordinates
    ``< d`` come from sweep ``t``, coordinate ``d`` is the inner sample, and
    coordinates ``> d`` come from sweep ``t-1``. For runs beyond the storage
    cap ``inner`` is None and only streaming sums are kept.
    """

    initial: np.ndarray
    backbone: np.ndarray                  # (T, D)
    inner: np.ndarray | None              # (T, D, M)
    eval_count: int
    setup_evals: int
    accept_count: int
    config: GibbsConfig
    streaming_sums: np.ndarray | None = None
    streaming_count: int = 0

    @property
    def sweeps(self) -> int:
        return self.backbone.shape[0]

    @property
    def dim(self) -> int:
        return self.backbone.shape[1]

    @property
    def inner_samples(self) -> int:
        return self.config.inner_samples

    @property
    def recycled_count(self) -> int:
        return self.sweeps * self.dim * self.inner_samples

    def _complement_rows(self, t_index: int) -> tuple[np.ndarray, np.ndarray]:
        previous = self.initial if t_index == 0 else self.backbone[t_index - 1]
        return self.backbone[t_index], previous

    def assembled(self, skip_sweeps: int = 0) -> np.ndarray:
        """All recycled vectors from sweeps after ``skip_sweeps`` as an (N, D) array.

        Rows are ordered by (sweep, coordinate, inner index).
        """
        if self.inner is None:
            raise ValueError("this run streamed its recycled samples; no materialized store")
        if not 0 <= skip_sweeps < self.sweeps:
            raise ValueError("skip_sweeps must satisfy 0 <= skip_sweeps < sweeps")
        T, D, M = self.inner.shape
        out = np.empty(((T - skip_sweeps) * D * M, D))
        row = 0
        for t_index in range(skip_sweeps, T):
            current, previous = self._complement_rows(t_index)
            for d in range(D):
                block = out[row:row + M]
                block[:, :d] = current[:d]
                block[:, d] = self.inner[t_index, d]
                block[:, d + 1:] = previous[d + 1:]
                row += M
        return out

    def streaming_mean(self) -> np.ndarray:
        if self.streaming_sums is None:
            raise ValueError("run was not executed in streaming mode")
        return self.streaming_sums / self.streaming_count

    def export_csv(self, path: str | Path) -> None:
        """Write recycled samples as ``t,d,m,x_1,...,x_D`` rows (gzip if *.gz)."""
        T, D, M = self.sweeps, self.dim, self.inner_samples
        vectors = self.assembled()
        header = "t,d,m," + ",".join(f"x_{j + 1}" for j in range(D))
        lines = [header]
        row = 0
        for t in range(1, T + 1):
            for d in range(1, D + 1):
                for m in range(1, M + 1):
                    coords = ",".join(f"{v:.17g}" for v in vectors[row])
                    lines.append(f"{t},{d},{m},{coords}")
                    row += 1
        text = "\n".join(lines) + "\n"
        path = Path(path)
        if path.suffix == ".gz":
            with gzip.open(path, "wt", newline="") as fh:
                fh.write(text)
        else:
            path.write_text(text)


def _initial_point(target: TargetDensity, x0) -> np.ndarray:
    if x0 is None:
        if not hasattr(target, "default_initial"):
            raise ValueError("target has no default initial point; pass x0")
        x0 = target.default_initial()
    x = np.array(x0, dtype=float)
    if x.shape != (target.dim,):
        raise ValueError(f"initial point must have shape ({target.dim},)")
    return x


def _drive(target, kernel, config: GibbsConfig, stream: RngStream, x0,
           want_inner: bool, streaming_fn, cap: int):
    """Shared coordinate scan behind every driver."""
    D = target.dim
    T, M = config.sweeps, config.inner_samples
    if getattr(kernel, "requires_conditional_sampler", False) and not hasattr(target, "conditional_sample"):
        raise ValueError("kernel needs exact conditional draws but the target offers none")
    x = _initial_point(target, x0)
    lp = target.log_density(x)
    if not lp > -math.inf:
        raise ValueError("initial point lies outside the target support")
    setup_evals = 1

    inner = None
    sums = None
    count = 0
    if want_inner:
        if T * D * M <= cap:
            inner = np.empty((T, D, M))
        elif streaming_fn is None:
            raise ValueError(
                f"run would store {T * D * M} recycled scalars (cap {cap}); "
                "pass streaming_fn or raise the cap")

    kernel.reset(D)
    cursor = stream.blocks()
    uniform_backbone = config.backbone == "uniform"
    initial = x.copy()
    backbone = np.empty((T, D))
    evals = 0
    accepts = 0
    for t in range(1, T + 1):
        row = backbone[t - 1]
        for d in range(D):
            rng = cursor.block(t, d)
            complement = np.delete(x, d)
            view = FullConditionalView(target, d, complement)
            res = kernel.block(view, d, x[d], lp, rng, M)
            evals += res.evals
            accepts += res.accepts
            setup_evals += res.init_evals
            values = res.values
            if uniform_backbone:
                j = int(rng.integers(1, M + 1))
                x[d] = values[j - 1]
                lp = res.log_density if j == M else None
            else:
                x[d] = values[M - 1]
                lp = res.log_density
            row[d] = x[d]
            if inner is not None:
                inner[t - 1, d] = values
            elif streaming_fn is not None and want_inner:
                block_vecs = np.empty((M, D))
                block_vecs[:, :d] = complement[:d]
                block_vecs[:, d] = values
                block_vecs[:, d + 1:] = complement[d:]
                contribution = np.asarray(streaming_fn(block_vecs), dtype=float).sum(axis=0)
                sums = contribution if sums is None else sums + contribution
                count += M
    return initial, backbone, inner, sums, count, evals, setup_evals, accepts


def run_sg(target: TargetDensity, kernel, config: GibbsConfig, stream: RngStream,
           x0=None) -> SGRun:
    """Standard Gibbs: per block, run the kernel ``inner_samples`` times, keep the last."""
    initial, backbone, _, _, _, evals, setup, accepts = _drive(
        target, kernel, config, stream, x0, want_inner=False, streaming_fn=None, cap=0)
    return SGRun(initial=initial, chain=backbone, eval_count=evals,
                 setup_evals=setup, accept_count=accepts, config=config)


def run_mrg(target: TargetDensity, kernel, config: GibbsConfig, stream: RngStream,
            x0=None, streaming_fn: Callable[[np.ndarray], np.ndarray] | None = None,
            cap: int = DEFAULT_STORE_CAP) -> SampleStore:
    """Multiple recycling Gibbs: same scan as ``run_sg`` but every inner sample is kept.

    All ``sweeps * dim * inner_samples`` recycled vectors enter the store (no
    burn-in is removed). When that exceeds ``cap``, pass ``streaming_fn``
    (mapping an ``(M, D)`` block to per-sample statistic rows) and the run
    accumulates running sums instead of materializing samples.
    """
    initial, backbone, inner, sums, count, evals, setup, accepts = _drive(
        target, kernel, config, stream, x0, want_inner=True, streaming_fn=streaming_fn, cap=cap)
    return SampleStore(initial=initial, backbone=backbone, inner=inner,
                       eval_count=evals, setup_evals=setup, accept_count=accepts,
                       config=config, streaming_sums=sums, streaming_count=count)


def run_trg(target: TargetDensity, kernel, config: GibbsConfig, stream: RngStream,
            x0=None) -> SampleStore:
    """Trivial recycling Gibbs: one inner sample per block, all D*T intermediates kept."""
    if config.inner_samples != 1:
        raise ValueError("trivial recycling runs one inner sample per block; set inner_samples=1")
    return run_mrg(target, kernel, config, stream, x0)


@dataclass
class ChainRuleOutput:
    """Samples drawn marginal-first: ``samples[t-1, m-1] = (x1_t, x2_{t,m})``."""

    samples: np.ndarray  # (T, M, 2)

    def flattened(self) -> np.ndarray:
        return self.samples.reshape(-1, 2)


def run_chain_rule(marginal_sampler: Callable, conditional_sampler: Callable,
                   sweeps: int, inner_samples: int, stream: RngStream) -> ChainRuleOutput:
    """Draw ``sweeps`` exact marginal samples with ``inner_samples`` conditional draws each.

    ``marginal_sampler(rng)`` must return an exact draw of the first
    coordinate's marginal and ``conditional_sampler(x1, rng)`` an exact draw
    of the second coordinate given the first. Every (t, m) pair is then an
    exact joint sample, and all of them together estimate joint expectations
    without burn-in.
    """
    if sweeps < 1 or inner_samples < 1:
        raise ValueError("sweeps and inner_samples must be >= 1")
    samples = np.empty((sweeps, inner_samples, 2))
    for t in range(1, sweeps + 1):
        rng = stream.block(t, 0)
        x1 = float(marginal_sampler(rng))
        samples[t - 1, :, 0] = x1
        for m in range(inner_samples):
            samples[t - 1, m, 1] = float(conditional_sampler(x1, rng))
    return ChainRuleOutput(samples=samples)
