"""Within-Gibbs Markov kernels.

Three MH-type kernels (fixed-scale random walk, per-block adaptive MH, and
single-component adaptive MH with persistent per-coordinate scales) plus the
exact conditional sampler used when a target exposes closed-form full
conditionals. Every kernel also comes packaged as a "block kernel" object the
Gibbs drivers consume: it runs the inner steps of one (sweep, coordinate)
block and reports exactly how many proposed-point target evaluations it spent.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np
from numpy.random import Generator

from .core import FullConditionalView

# Adaptive-proposal constants: the classic scale factor 2.4**2, a small
# variance floor, and the pre-adaptation proposal scale.
HAARIO_SCALE = 2.4 ** 2
VARIANCE_FLOOR = 1e-6
BASE_SIGMA = 1.0


@dataclass(frozen=True)
class RWProposal:
    """Symmetric Gaussian random-walk proposal of scale ``sigma``."""

    sigma: float

    def __post_init__(self) -> None:
        if not self.sigma > 0:
            raise ValueError("proposal sigma must be positive")


class MHStep(NamedTuple):
    value: float
    accepted: bool
    log_density: float


def _mh_core(view: FullConditionalView, current: float, current_lp: float,
             sigma: float, rng: Generator) -> tuple[float, float, bool]:
    """One MH step; always consumes one normal and one uniform."""
    candidate = current + sigma * rng.standard_normal()
    candidate_lp = view.log_eval(candidate)
    u = rng.random()
    delta = candidate_lp - current_lp
    if delta >= 0.0:
        accepted = True
    else:
        # covers delta = -inf (proposal outside the support) and NaN: both reject
        accepted = u < math.exp(delta)
    if accepted:
        return candidate, candidate_lp, True
    return current, current_lp, False


def mh_step(view: FullConditionalView, current: float, proposal: RWProposal,
            rng: Generator, current_log_density: float | None = None) -> MHStep:
    """Single random-walk MH step on a full-conditional view.

    Exactly one target evaluation is spent on the proposed point; the current
    point's value is taken from ``current_log_density`` when the caller has it
    cached (evaluated once here otherwise). The acceptance uniform is drawn on
    every step, accepted or not, so coupled runs stay stream-aligned.
    """
    if current_log_density is None:
        current_log_density = view.log_eval(current)
        if not current_log_density > -math.inf:
            raise ValueError("current point lies outside the support")
    value, lp, accepted = _mh_core(view, current, current_log_density, proposal.sigma, rng)
    return MHStep(value, accepted, lp)


@dataclass(frozen=True)
class AMHState:
    """Running-moment state of an adaptive MH proposal.

    Tracks the sample count, mean and sum of squared deviations of the chain
    values seen so far. Until two samples are in, proposals use
    ``base_sigma``; afterwards the proposal variance is
    ``scale * sample_variance + floor``.
    """

    count: int = 0
    mean: float = 0.0
    sq_dev: float = 0.0
    base_sigma: float = BASE_SIGMA
    floor: float = VARIANCE_FLOOR
    scale: float = HAARIO_SCALE

    @property
    def variance(self) -> float | None:
        """Unbiased sample variance, or None with fewer than two samples."""
        if self.count < 2:
            return None
        return self.sq_dev / (self.count - 1)

    def effective_sigma(self) -> float:
        if self.count < 2:
            return self.base_sigma
        return math.sqrt(self.scale * self.sq_dev / (self.count - 1) + self.floor)


def amh_update(state: AMHState, value: float) -> AMHState:
    """Fold one chain value into the running moments (Welford recursion)."""
    n = state.count + 1
    d = value - state.mean
    mean = state.mean + d / n
    return replace(state, count=n, mean=mean, sq_dev=state.sq_dev + d * (value - mean))


@dataclass(frozen=True)
class SCAMState:
    """Per-coordinate adaptive proposal states for single-component MH."""

    coords: tuple[AMHState, ...]

    @classmethod
    def fresh(cls, dim: int, base_sigma: float = BASE_SIGMA, floor: float = VARIANCE_FLOOR,
              scale: float = HAARIO_SCALE) -> "SCAMState":
        one = AMHState(base_sigma=base_sigma, floor=floor, scale=scale)
        return cls(coords=(one,) * dim)

    def _with_coord(self, coord: int, state: AMHState) -> "SCAMState":
        coords = list(self.coords)
        coords[coord] = state
        return SCAMState(coords=tuple(coords))


class SCAMStep(NamedTuple):
    value: float
    accepted: bool
    state: SCAMState
    log_density: float


def scam_step(state: SCAMState, coord: int, view: FullConditionalView, current: float,
              rng: Generator, current_log_density: float | None = None) -> SCAMStep:
    """One single-component adaptive MH step on coordinate ``coord``.

    Proposes with that coordinate's current effective sigma, then updates its
    running moments with the resulting chain value; rejected steps update the
    moments with the repeated current value, so the scale at any step depends
    only on strictly earlier samples.
    """
    if current_log_density is None:
        current_log_density = view.log_eval(current)
        if not current_log_density > -math.inf:
            raise ValueError("current point lies outside the support")
    coord_state = state.coords[coord]
    value, lp, accepted = _mh_core(view, current, current_log_density,
                                   coord_state.effective_sigma(), rng)
    return SCAMStep(value, accepted, state._with_coord(coord, amh_update(coord_state, value)), lp)


# ---------------------------------------------------------------------------
# Block kernels consumed by the Gibbs drivers


class BlockResult(NamedTuple):
    values: np.ndarray          # the inner chain values, length n_steps
    log_density: float | None   # target log-density at values[-1], if known
    evals: int                  # proposed-point target evaluations spent
    accepts: int
    init_evals: int             # extra evaluations needed to seed the block


class RandomWalkKernel:
    """Fixed-scale random-walk MH inside each Gibbs block."""

    name = "mh"
    requires_conditional_sampler = False

    def __init__(self, sigma: float):
        self.proposal = RWProposal(sigma)

    def reset(self, dim: int) -> None:
        pass

    def block(self, view: FullConditionalView, coord: int, start: float,
              start_lp: float | None, rng: Generator, n_steps: int) -> BlockResult:
        init_evals = 0
        lp = start_lp
        if lp is None:
            lp = view.log_eval(start)
            init_evals = 1
        sigma = self.proposal.sigma
        x = start
        accepts = 0
        values = np.empty(n_steps)
        for i in range(n_steps):
            x, lp, acc = _mh_core(view, x, lp, sigma, rng)
            values[i] = x
            accepts += acc
        return BlockResult(values, lp, n_steps, accepts, init_evals)


class AdaptiveMHKernel:
    """Adaptive MH whose proposal scale restarts in every (sweep, coordinate) block.

    Within a block the scale adapts to the inner chain's running variance, so
    it only departs from ``base_sigma`` when a block spends several inner
    steps on the same coordinate.
    """

    name = "amh"
    requires_conditional_sampler = False

    def __init__(self, base_sigma: float = BASE_SIGMA, floor: float = VARIANCE_FLOOR,
                 scale: float = HAARIO_SCALE):
        if not base_sigma > 0:
            raise ValueError("base_sigma must be positive")
        self.base_sigma = float(base_sigma)
        self.floor = float(floor)
        self.scale = float(scale)

    def reset(self, dim: int) -> None:
        pass

    def block(self, view, coord, start, start_lp, rng, n_steps) -> BlockResult:
        init_evals = 0
        lp = start_lp
        if lp is None:
            lp = view.log_eval(start)
            init_evals = 1
        state = AMHState(base_sigma=self.base_sigma, floor=self.floor, scale=self.scale)
        x = start
        accepts = 0
        values = np.empty(n_steps)
        for i in range(n_steps):
            x, lp, acc = _mh_core(view, x, lp, state.effective_sigma(), rng)
            values[i] = x
            accepts += acc
            state = amh_update(state, x)
        return BlockResult(values, lp, n_steps, accepts, init_evals)


class SCAMKernel:
    """Single-component adaptive MH with per-coordinate scales.

    Each coordinate keeps its own running moments for the whole run, sweeps
    included, and the moments advance after every inner step.
    """

    name = "scam"
    requires_conditional_sampler = False

    def __init__(self, base_sigma: float = BASE_SIGMA, floor: float = VARIANCE_FLOOR,
                 scale: float = HAARIO_SCALE):
        if not base_sigma > 0:
            raise ValueError("base_sigma must be positive")
        self.base_sigma = float(base_sigma)
        self.floor = float(floor)
        self.scale = float(scale)
        self.state: SCAMState | None = None

    def reset(self, dim: int) -> None:
        self.state = SCAMState.fresh(dim, self.base_sigma, self.floor, self.scale)

    def block(self, view, coord, start, start_lp, rng, n_steps) -> BlockResult:
        if self.state is None:
            raise RuntimeError("SCAMKernel.block called before reset()")
        init_evals = 0
        lp = start_lp
        if lp is None:
            lp = view.log_eval(start)
            init_evals = 1
        state = self.state
        x = start
        accepts = 0
        values = np.empty(n_steps)
        for i in range(n_steps):
            x, accepted, state, lp = scam_step(state, coord, view, x, rng, lp)
            values[i] = x
            accepts += accepted
        self.state = state
        return BlockResult(values, lp, n_steps, accepts, init_evals)


class DirectConditionalKernel:
    """Exact full-conditional draws for targets that expose them.

    Each inner step is one independent draw from the current full
    conditional; draws are counted against the evaluation budget exactly like
    proposed-point evaluations of the MH kernels.
    """

    name = "ideal"
    requires_conditional_sampler = True

    def reset(self, dim: int) -> None:
        pass

    def block(self, view, coord, start, start_lp, rng, n_steps) -> BlockResult:
        sampler = view.target.conditional_sample
        complement = view.complement
        values = np.empty(n_steps)
        for i in range(n_steps):
            values[i] = sampler(coord, complement, rng)
        return BlockResult(values, None, n_steps, n_steps, 0)
