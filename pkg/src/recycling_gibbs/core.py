"""Shared sampler plumbing: joint targets, scalar conditional views, RNG streams.

Everything downstream (kernels, Gibbs drivers, the experiment harness) talks to
targets through the small interfaces defined here, so the samplers never need
to know which density they are working on.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Protocol

import numpy as np
from numpy.random import Generator, PCG64, Philox, SeedSequence


class NumericalError(RuntimeError):
    """A numerical routine failed beyond recovery (e.g. factorization)."""


class TargetDensity(Protocol):
    """Joint log-density on ``R^dim``.

    ``log_density`` returns ``-inf`` outside the support and a finite float
    inside it. Implementations must be pure: no internal state may change
    across calls, so one instance can be shared by concurrent runs.
    """

    dim: int

    def log_density(self, x: np.ndarray) -> float: ...


def assemble(complement: np.ndarray, coord: int, value: float) -> np.ndarray:
    """Insert ``value`` at position ``coord`` into the remaining coordinates.

    ``complement`` holds the other D-1 coordinates in ascending coordinate
    order; the result is the full D-vector.
    """
    complement = np.asarray(complement, dtype=float)
    if complement.ndim != 1:
        raise ValueError("complement must be a 1-D vector")
    if not 0 <= coord <= complement.size:
        raise ValueError(f"coordinate {coord} out of range for complement of size {complement.size}")
    out = np.empty(complement.size + 1)
    out[:coord] = complement[:coord]
    out[coord] = value
    out[coord + 1:] = complement[coord:]
    return out


@dataclass(frozen=True)
class FullConditionalView:
    """Scalar section of a joint log-density along one coordinate.

    ``log_eval(v)`` equals ``target.log_density`` of the vector obtained by
    inserting ``v`` at ``coord`` into ``complement``. Instances are immutable;
    each call evaluates on a fresh vector.
    """

    target: TargetDensity
    coord: int
    complement: np.ndarray

    @cached_property
    def _template(self) -> np.ndarray:
        return assemble(self.complement, self.coord, 0.0)

    def log_eval(self, value: float) -> float:
        x = self._template.copy()
        x[self.coord] = value
        return self.target.log_density(x)


def full_conditional_view(target: TargetDensity, coord: int, complement: np.ndarray) -> FullConditionalView:
    """Build the full-conditional view of ``target`` along ``coord``.

    Parameters
    ----------
    target : TargetDensity
    coord : int
        Coordinate the view varies, ``0 <= coord < target.dim``.
    complement : array_like
        The other ``target.dim - 1`` coordinates, ascending order, all finite.
    """
    if not 0 <= coord < target.dim:
        raise ValueError(f"coordinate {coord} out of range for dim {target.dim}")
    complement = np.asarray(complement, dtype=float)
    if complement.shape != (target.dim - 1,):
        raise ValueError(f"complement must have length {target.dim - 1}, got shape {complement.shape}")
    if not np.all(np.isfinite(complement)):
        raise ValueError("complement coordinates must be finite")
    return FullConditionalView(target, coord, complement)


class BlockCursor:
    """Reusable handle over one run's per-(t, d) block streams.

    Re-seating the Philox counter on a shared bit generator produces exactly
    the same streams as constructing them from scratch while skipping most of
    the per-block setup cost. Not safe to share across threads; drivers create
    one cursor per run.
    """

    def __init__(self, key: np.ndarray):
        self._bit_gen = Philox(key=key)
        self._gen = Generator(self._bit_gen)
        self._state = self._bit_gen.state

    def block(self, t: int, d: int) -> Generator:
        st = self._state
        counter = st["state"]["counter"]
        counter[0] = 0
        counter[1] = 0
        counter[2] = d
        counter[3] = t
        st["buffer_pos"] = 4
        st["has_uint32"] = 0
        st["uinteger"] = 0
        self._bit_gen.state = st
        return self._gen


@dataclass(frozen=True)
class RngStream:
    """Counter-based family of random streams for one (seed, run) pair.

    Each (t, d) block of a Gibbs sweep gets its own stream, addressed purely
    by integers: the same (seed, run, t, d) always yields the same sequence,
    no matter which other streams were consumed first or on which worker.
    That makes replications parallelizable and whole runs bit-reproducible.
    """

    seed: int
    run: int = 0

    def __post_init__(self) -> None:
        if self.seed < 0 or self.run < 0:
            raise ValueError("seed and run index must be non-negative")

    @cached_property
    def _key(self) -> np.ndarray:
        return SeedSequence([self.seed, self.run]).generate_state(2, np.uint64)

    def block(self, t: int, d: int) -> Generator:
        """Fresh generator for sweep ``t``, coordinate ``d``."""
        return Generator(Philox(counter=[0, 0, d, t], key=self._key))

    def blocks(self) -> BlockCursor:
        """Fast reusable cursor over this run's block streams."""
        return BlockCursor(self._key)

    def derive(self, *tags: int) -> Generator:
        """One-off generator for auxiliary draws (datasets, permutations, ...).

        Streams with distinct tag tuples are independent of each other and of
        every block stream.
        """
        return Generator(PCG64(SeedSequence([self.seed, self.run, *tags])))


@dataclass(frozen=True)
class GibbsConfig:
    """Run-length configuration shared by all Gibbs drivers.

    ``sweeps`` is the number of outer Gibbs sweeps, ``inner_samples`` the
    number of kernel steps spent on each coordinate per sweep, ``burn_in``
    the number of leading sweeps the standard (non-recycling) estimator
    discards. The scan visits coordinates in fixed ascending order. The
    backbone value a block hands to the next sweep is the last inner sample;
    ``backbone="uniform"`` draws the index uniformly instead.
    """

    sweeps: int
    inner_samples: int = 1
    burn_in: int = 0
    scan_order: str = "ascending"
    backbone: str = "last"

    def __post_init__(self) -> None:
        if self.sweeps < 1:
            raise ValueError("sweeps must be >= 1")
        if self.inner_samples < 1:
            raise ValueError("inner_samples must be >= 1")
        if not 0 <= self.burn_in < self.sweeps:
            raise ValueError("burn_in must satisfy 0 <= burn_in < sweeps")
        if self.scan_order != "ascending":
            raise ValueError("only the ascending scan order is supported")
        if self.backbone not in ("last", "uniform"):
            raise ValueError("backbone must be 'last' or 'uniform'")
