"""Experiment configuration, replicated runs, and CSV report emission.

A config file names one experiment and one sampling method, optionally a
sweep variable with its values, and the fixed run parameters. The harness
expands the sweep, executes the requested number of independent replications
per sweep point (each on its own seeded stream), scores the per-run
estimates against the experiment's ground truth, and emits one MSE report
row per sweep point.

Experiments
-----------
exp1-gauss       bivariate Gaussian chain; truth is analytic
exp2-bimodal     two-mode target; truth from the quadrature oracle
exp3-donut       elliptical ridge; truth from the quadrature oracle
exp4-gp-ard      GP hyperparameter posterior; truth from a cached long
                 reference run
exp5-depgraph    pairwise dependence screening on the synthetic fixture
chainrule-check  recycling estimator vs direct chain-rule sampling on the
                 Gaussian chain (two rows, one per estimator)

The ``sigma`` parameter is the random-walk proposal scale; for the adaptive
kernels it sets the initial scale that adaptation then adjusts. Reported
``E`` is the counted number of target evaluations per full conditional,
never the nominal ``M * T``. Wall times are measured around the sampler
only, and only when ``measure_time`` is set; left at zero otherwise so
reports are byte-identical across repeated runs.
"""
from __future__ import annotations

import hashlib
import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from functools import lru_cache
from pathlib import Path

import numpy as np

from .core import GibbsConfig, NumericalError, RngStream
from .depgraph import (DEFAULT_SURROGATES, STATISTICS, PairResult, emit_graph,
                       screen_all_pairs, synthetic_dependence_data)
from .estimators import (MSE_REPORT_COLUMNS, GroundTruth, mse_over_runs,
                         quadrature_moments, recycled_estimate,
                         standard_estimate)
from .gibbs import run_chain_rule, run_mrg, run_sg
from .kernels import (AdaptiveMHKernel, DirectConditionalKernel,
                      RandomWalkKernel, SCAMKernel)
from .targets import (BimodalTarget, DonutTarget, GaussianChainTarget,
                      GPPosteriorTarget, generate_gp_dataset)

EXPERIMENTS = ("exp1-gauss", "exp2-bimodal", "exp3-donut", "exp4-gp-ard",
               "exp5-depgraph", "chainrule-check")
METHODS = ("ideal-sg", "ideal-mrg", "mh-sg", "mh-mrg", "amh-sg", "amh-mrg",
           "scam-sg", "scam-mrg")
SWEEP_VARIABLES = ("M", "T", "sigma", "E", "D")

# Experiments whose targets expose exact full-conditional draws.
_ANALYTIC_CONDITIONALS = ("exp1-gauss", "chainrule-check")

# Derivation tag for the exp4 dataset stream; reference runs use a run index
# far above any replication index so their streams never collide.
_DATASET_TAG = 11
_REFERENCE_RUN = 1 << 31
_REFERENCE_SWEEPS = 20_000
_REFERENCE_INNER = 10

_EXP4_NOISE_STD = 0.5


def _true_lengthscales(input_dim: int) -> np.ndarray:
    """Data-generating lengthscales for the GP experiment at each input size."""
    if input_dim == 1:
        return np.array([1.0])
    if input_dim == 3:
        return np.array([1.0, 3.0, 1.0])
    return np.full(input_dim, 2.0)


@dataclass(frozen=True)
class ExperimentSpec:
    """Validated description of one experiment run.

    ``sweep`` of None means a single point at the fixed parameters. ``L``
    and ``P`` only matter for the GP experiment; ``n_points``, ``surrogates``
    and ``alpha`` only for dependence screening.
    """

    experiment: str
    method: str
    sweep: str | None = None
    sweep_values: tuple[float, ...] = ()
    T: int = 1000
    M: int = 1
    sigma: float = 1.0
    beta: float = 1.3
    L: int = 3
    P: int = 100
    runs: int = 200
    seed: int = 1
    n_points: int = 100
    surrogates: int = DEFAULT_SURROGATES
    alpha: float = 0.1

    def __post_init__(self) -> None:
        if self.experiment not in EXPERIMENTS:
            raise ValueError(f"unknown experiment {self.experiment!r}; "
                             f"choose from {EXPERIMENTS}")
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; choose from {METHODS}")
        _check_compatibility(self.experiment, self.method)
        for name, value, low in (("T", self.T, 1), ("M", self.M, 1),
                                 ("runs", self.runs, 1), ("L", self.L, 1),
                                 ("P", self.P, 2), ("n_points", self.n_points, 1),
                                 ("surrogates", self.surrogates, 1)):
            if not isinstance(value, int) or value < low:
                raise ValueError(f"{name} must be an integer >= {low}, got {value!r}")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")
        if not self.beta > 0:
            raise ValueError("beta must be positive")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must lie in (0, 1)")
        object.__setattr__(self, "sweep_values",
                           tuple(float(v) for v in self.sweep_values))
        _check_sweep(self)

    @property
    def kernel_name(self) -> str:
        return self.method.split("-", 1)[0]

    @property
    def scheme(self) -> str:
        return self.method.split("-", 1)[1]


def _check_compatibility(experiment: str, method: str) -> None:
    if experiment == "exp5-depgraph" and method != "scam-mrg":
        raise ValueError("dependence screening fits with scam-mrg only")
    if experiment == "chainrule-check" and method != "ideal-mrg":
        raise ValueError("the chain-rule check compares against ideal-mrg only")
    kernel = method.split("-", 1)[0]
    if kernel == "ideal" and experiment not in _ANALYTIC_CONDITIONALS:
        raise ValueError(f"method {method!r} needs exact conditional draws, "
                         f"which {experiment!r} does not provide")


def _check_sweep(spec: ExperimentSpec) -> None:
    if spec.sweep is None:
        if spec.sweep_values:
            raise ValueError("sweep_values given without a sweep variable")
        return
    if spec.sweep not in SWEEP_VARIABLES:
        raise ValueError(f"unknown sweep variable {spec.sweep!r}; "
                         f"choose from {SWEEP_VARIABLES}")
    if not spec.sweep_values:
        raise ValueError(f"sweep over {spec.sweep!r} needs sweep_values")
    if spec.experiment in ("exp5-depgraph", "chainrule-check"):
        raise ValueError(f"{spec.experiment} takes no sweep variable")
    values = spec.sweep_values
    if any(not v > 0 for v in values):
        raise ValueError("sweep values must be positive")
    if spec.sweep in ("M", "T", "E", "D"):
        if any(not float(v).is_integer() for v in values):
            raise ValueError(f"sweep over {spec.sweep!r} needs integer values")
    if spec.sweep == "sigma" and spec.kernel_name == "ideal":
        raise ValueError("ideal kernels have no proposal scale to sweep")
    if spec.sweep == "D":
        if spec.experiment != "exp4-gp-ard":
            raise ValueError("the dimension sweep applies to exp4-gp-ard only")
        if any(v < 2 for v in values):
            raise ValueError("dimension sweep values must be >= 2 "
                             "(one lengthscale plus the noise scale)")
    if spec.sweep == "E":
        for v in values:
            if int(v) % spec.M != 0:
                raise ValueError(f"evaluation budget {int(v)} is not divisible "
                                 f"by M={spec.M}")


# ---------------------------------------------------------------------------
# Config parsing


_INT_KEYS = ("T", "M", "L", "P", "runs", "seed", "n_points", "surrogates")
_FLOAT_KEYS = ("sigma", "beta", "alpha")
_STR_KEYS = ("experiment", "method", "sweep")
_LIST_KEYS = ("sweep_values",)
_ALL_KEYS = _STR_KEYS + _LIST_KEYS + _INT_KEYS + _FLOAT_KEYS

# Experiments whose method is forced, so a config may omit it.
_IMPLIED_METHOD = {"exp5-depgraph": "scam-mrg", "chainrule-check": "ideal-mrg"}


def _split_assignments(text: str) -> list[tuple[str, str]]:
    pairs = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.count("=") == 1:
            key, value = line.split("=")
            pairs.append((key.strip(), value.strip()))
            continue
        # several key=value tokens on one line (whitespace separated)
        for token in line.split():
            if "=" not in token:
                raise ValueError(f"line {lineno}: expected key=value, got {token!r}")
            key, value = token.split("=", 1)
            pairs.append((key.strip(), value.strip()))
    return pairs


def parse_spec(text: str) -> ExperimentSpec:
    """Parse a config into a validated spec.

    The grammar is flat ``key = value`` assignments, one per line, with
    ``#`` comments; several ``key=value`` tokens may share a line if none
    of the values contain spaces. ``sweep_values`` is a comma-separated
    list. Unknown keys, repeated keys, and malformed values raise
    ``ValueError`` naming the offending key.
    """
    data: dict[str, object] = {}
    for key, value in _split_assignments(text):
        if key not in _ALL_KEYS:
            raise ValueError(f"unknown config key {key!r}; valid keys: "
                             f"{', '.join(_ALL_KEYS)}")
        if key in data:
            raise ValueError(f"config key {key!r} given twice")
        if not value:
            raise ValueError(f"config key {key!r} has an empty value")
        if key in _INT_KEYS:
            try:
                data[key] = int(value)
            except ValueError:
                raise ValueError(f"config key {key!r} needs an integer, "
                                 f"got {value!r}") from None
        elif key in _FLOAT_KEYS:
            try:
                data[key] = float(value)
            except ValueError:
                raise ValueError(f"config key {key!r} needs a number, "
                                 f"got {value!r}") from None
        elif key in _LIST_KEYS:
            try:
                data[key] = tuple(float(v) for v in value.split(","))
            except ValueError:
                raise ValueError(f"config key {key!r} needs comma-separated "
                                 f"numbers, got {value!r}") from None
        else:
            data[key] = value
    if "experiment" not in data:
        raise ValueError("missing required config key 'experiment'")
    if data["experiment"] not in EXPERIMENTS:
        raise ValueError(f"unknown experiment {data['experiment']!r}; "
                         f"choose from {EXPERIMENTS}")
    if "method" not in data:
        implied = _IMPLIED_METHOD.get(data["experiment"])
        if implied is None:
            raise ValueError("missing required config key 'method'")
        data["method"] = implied
    return ExperimentSpec(**data)


# ---------------------------------------------------------------------------
# Results


@dataclass(frozen=True)
class SweepPointRow:
    """One MSE report row: the effective parameters and scores of one point."""

    experiment: str
    method: str
    kernel: str
    T: int
    M: int
    sigma: float
    evals_per_conditional: float
    runs: int
    mse: float
    wall_time_s: float


@dataclass
class ExperimentResult:
    """Report rows of one harness run, in sweep order."""

    spec: ExperimentSpec
    rows: list[SweepPointRow]
    notes: tuple[str, ...] = ()


@dataclass
class DepGraphResult:
    """Dependence screening output: per-pair statistics and the DOT graph.

    ``spec`` is None when the screening ran on user data instead of a
    harness experiment.
    """

    spec: ExperimentSpec | None
    pairs: list[PairResult]
    dot: str


# ---------------------------------------------------------------------------
# Per-experiment estimation pipelines


def _exp1_raw(samples: np.ndarray) -> np.ndarray:
    x1, x2 = samples[:, 0], samples[:, 1]
    return np.column_stack([x1, x2, x1 * x1, x1 * x2, x2 * x2])


def _exp1_transform(raw: np.ndarray) -> np.ndarray:
    m1, m2, s11, s12, s22 = raw
    return np.array([m1, m2, s11 - m1 * m1, s12 - m1 * m2, s22 - m2 * m2])


def _exp3_raw(samples: np.ndarray) -> np.ndarray:
    x1, x2 = samples[:, 0], samples[:, 1]
    return np.column_stack([x1, x2, x1 * x1, x2 * x2])


def _exp3_transform(raw: np.ndarray) -> np.ndarray:
    m1, m2, q1, q2 = raw
    return np.array([m1, m2,
                     np.sqrt(max(q1 - m1 * m1, 0.0)),
                     np.sqrt(max(q2 - m2 * m2, 0.0))])


def _identity_raw(samples: np.ndarray) -> np.ndarray:
    return samples


def _identity_transform(raw: np.ndarray) -> np.ndarray:
    return raw


_EXP1_LABELS = ("mean_1", "mean_2", "cov_11", "cov_12", "cov_22")
_EXP3_LABELS = ("mean_1", "mean_2", "std_1", "std_2")


def _pipeline(experiment: str, dim: int):
    """Statistic map, post-average transform and labels for one experiment."""
    if experiment in ("exp1-gauss", "chainrule-check"):
        return _exp1_raw, _exp1_transform, _EXP1_LABELS
    if experiment == "exp2-bimodal":
        return _identity_raw, _identity_transform, ("mean_1", "mean_2")
    if experiment == "exp3-donut":
        return _exp3_raw, _exp3_transform, _EXP3_LABELS
    if experiment == "exp4-gp-ard":
        labels = tuple(f"theta_{i + 1}" for i in range(dim))
        return _identity_raw, _identity_transform, labels
    raise ValueError(f"no estimation pipeline for {experiment!r}")


@lru_cache(maxsize=16)
def _cached_target(experiment: str, L: int, P: int, seed: int, beta: float):
    if experiment in ("exp1-gauss", "chainrule-check"):
        return GaussianChainTarget()
    if experiment == "exp2-bimodal":
        return BimodalTarget()
    if experiment == "exp3-donut":
        return DonutTarget()
    if experiment == "exp4-gp-ard":
        rng = RngStream(seed, 0).derive(_DATASET_TAG, L, P)
        dataset = generate_gp_dataset(_true_lengthscales(L), _EXP4_NOISE_STD, P, rng)
        return GPPosteriorTarget(dataset, beta=beta)
    raise ValueError(f"no sampling target for {experiment!r}")


def _kernel_for(method: str, sigma: float):
    kernel = method.split("-", 1)[0]
    if kernel == "ideal":
        return DirectConditionalKernel()
    if kernel == "mh":
        return RandomWalkKernel(sigma)
    if kernel == "amh":
        return AdaptiveMHKernel(base_sigma=sigma)
    return SCAMKernel(base_sigma=sigma)


@dataclass(frozen=True)
class _SweepPoint:
    """Effective parameters at one sweep position."""

    value: float | None
    T: int
    M: int
    sigma: float
    L: int


def _sweep_points(spec: ExperimentSpec) -> list[_SweepPoint]:
    base = _SweepPoint(value=None, T=spec.T, M=spec.M, sigma=spec.sigma, L=spec.L)
    if spec.sweep is None:
        return [base]
    points = []
    for v in spec.sweep_values:
        if spec.sweep == "M":
            point = replace(base, value=v, M=int(v))
        elif spec.sweep == "T":
            point = replace(base, value=v, T=int(v))
        elif spec.sweep == "sigma":
            point = replace(base, value=v, sigma=float(v))
        elif spec.sweep == "E":
            point = replace(base, value=v, T=int(v) // spec.M)
        else:
            point = replace(base, value=v, L=int(v) - 1)
        points.append(point)
    return points


# ---------------------------------------------------------------------------
# Ground truths


_GAUSS_TRUTH = GroundTruth(
    values=np.array([0.0, 0.0, 4.0 / 3.0, 2.0 / 3.0, 4.0 / 3.0]),
    labels=_EXP1_LABELS, source="analytic")


def _cache_dir() -> Path:
    override = os.environ.get("RG_CACHE")
    if override:
        return Path(override)
    return Path.home() / ".cache" / "recycling-gibbs"


def _reference_mean(target: GPPosteriorTarget, seed: int) -> np.ndarray:
    """Posterior mean from one long recycling run, cached on disk.

    The cache key hashes the dataset together with the reference run's
    sampler settings, so a changed dataset or protocol never reuses a stale
    value.
    """
    dataset = target.dataset
    digest = hashlib.sha256()
    digest.update(dataset.inputs.tobytes())
    digest.update(dataset.outputs.tobytes())
    digest.update(json.dumps(["scam-mrg", _REFERENCE_SWEEPS, _REFERENCE_INNER,
                              target.beta, seed]).encode())
    path = _cache_dir() / f"exp4-reference-{digest.hexdigest()[:16]}.json"
    if path.exists():
        payload = json.loads(path.read_text())
        return np.array(payload["theta_mean"], dtype=float)
    config = GibbsConfig(sweeps=_REFERENCE_SWEEPS, inner_samples=_REFERENCE_INNER)
    stream = RngStream(seed, _REFERENCE_RUN)
    store = run_mrg(target, SCAMKernel(), config, stream,
                    x0=np.ones(target.dim), streaming_fn=_identity_raw, cap=0)
    mean = store.streaming_mean()
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps({"theta_mean": list(mean),
                                "sweeps": _REFERENCE_SWEEPS,
                                "inner_samples": _REFERENCE_INNER,
                                "beta": target.beta, "seed": seed}))
    return mean


@lru_cache(maxsize=4)
def _quadrature_truth(experiment: str) -> GroundTruth:
    if experiment == "exp2-bimodal":
        oracle = quadrature_moments(BimodalTarget())
        return GroundTruth(values=oracle.mean, labels=("mean_1", "mean_2"),
                           source="quadrature")
    oracle = quadrature_moments(DonutTarget())
    return GroundTruth(values=np.concatenate([oracle.mean, oracle.std]),
                       labels=_EXP3_LABELS, source="quadrature")


def _point_truth(spec: ExperimentSpec, point: _SweepPoint) -> GroundTruth:
    experiment = spec.experiment
    if experiment in ("exp1-gauss", "chainrule-check"):
        return _GAUSS_TRUTH
    if experiment in ("exp2-bimodal", "exp3-donut"):
        return _quadrature_truth(experiment)
    target = _cached_target(experiment, point.L, spec.P, spec.seed, spec.beta)
    labels = tuple(f"theta_{i + 1}" for i in range(target.dim))
    return GroundTruth(values=_reference_mean(target, spec.seed), labels=labels,
                       source="reference-run")


# ---------------------------------------------------------------------------
# Replication driver


def _run_one(spec: ExperimentSpec, point: _SweepPoint, run_index: int,
             measure_time: bool) -> tuple[np.ndarray, int, float]:
    """Execute one replication; returns (estimate values, evals, seconds)."""
    target = _cached_target(spec.experiment, point.L, spec.P, spec.seed, spec.beta)
    kernel = _kernel_for(spec.method, point.sigma)
    config = GibbsConfig(sweeps=point.T, inner_samples=point.M)
    stream = RngStream(spec.seed, run_index)
    raw_f, transform, _ = _pipeline(spec.experiment, target.dim)
    start = time.perf_counter() if measure_time else 0.0
    if spec.scheme == "sg":
        run = run_sg(target, kernel, config, stream)
        elapsed = time.perf_counter() - start if measure_time else 0.0
        raw = standard_estimate(run, raw_f)
        evals = run.eval_count
    else:
        store = run_mrg(target, kernel, config, stream)
        elapsed = time.perf_counter() - start if measure_time else 0.0
        raw = recycled_estimate(store, raw_f)
        evals = store.eval_count
    return transform(raw.values), evals, elapsed


def _run_chain_rule_once(spec: ExperimentSpec, run_index: int,
                         measure_time: bool) -> tuple[np.ndarray, int, float]:
    target = GaussianChainTarget()
    marginal_std = float(np.sqrt(target.covariance[0, 0]))

    def marginal(rng):
        return marginal_std * rng.standard_normal()

    def conditional(x1, rng):
        return target.conditional_sample(1, np.array([x1]), rng)

    stream = RngStream(spec.seed, run_index)
    start = time.perf_counter() if measure_time else 0.0
    out = run_chain_rule(marginal, conditional, spec.T, spec.M, stream)
    elapsed = time.perf_counter() - start if measure_time else 0.0
    raw = standard_estimate(out.flattened(), _exp1_raw)
    evals = spec.T * (spec.M + 1)
    return _exp1_transform(raw.values), evals, elapsed


def _resolve_workers(workers: int | None) -> int:
    if workers is not None:
        if workers < 1:
            raise ValueError("workers must be >= 1")
        return workers
    env = os.environ.get("RG_WORKERS")
    if env:
        try:
            parsed = int(env)
        except ValueError:
            raise ValueError(f"RG_WORKERS must be an integer, got {env!r}") from None
        if parsed < 1:
            raise ValueError("RG_WORKERS must be >= 1")
        return parsed
    return os.cpu_count() or 1


def _collect_point(spec: ExperimentSpec, point: _SweepPoint, truth: GroundTruth,
                   runner, executor, measure_time: bool) -> SweepPointRow:
    """Run all replications of one sweep point and aggregate them.

    Estimates are assembled in run-index order regardless of completion
    order, so the MSE never depends on scheduling. A numerical failure
    abandons the point and records a NaN row with the completed-run count.
    Reported wall time is the mean sampler seconds per run.
    """
    if executor is None:
        futures = None
    else:
        futures = [executor.submit(runner, spec, point, run, measure_time)
                   for run in range(spec.runs)]
    estimates: list[np.ndarray] = []
    evals_seen: list[int] = []
    wall_total = 0.0
    failed = False
    for run in range(spec.runs):
        try:
            if futures is None:
                values, evals, elapsed = runner(spec, point, run, measure_time)
            else:
                values, evals, elapsed = futures[run].result()
        except NumericalError:
            failed = True
            break
        estimates.append(np.asarray(values, dtype=float))
        evals_seen.append(evals)
        wall_total += elapsed
    if futures is not None and failed:
        for fut in futures:
            fut.cancel()
    # evaluations are reported per full conditional, of which there are D
    blocks = point.L + 1 if spec.experiment == "exp4-gp-ard" else 2
    completed = len(estimates)
    mse = float("nan") if (failed or completed == 0) else mse_over_runs(estimates, truth)
    evals_per_conditional = (float(np.mean(evals_seen)) / blocks
                             if evals_seen else float("nan"))
    wall = wall_total / completed if (measure_time and completed) else 0.0
    return SweepPointRow(
        experiment=spec.experiment, method=spec.method, kernel=spec.kernel_name,
        T=point.T, M=point.M, sigma=point.sigma,
        evals_per_conditional=evals_per_conditional, runs=completed,
        mse=mse, wall_time_s=wall)


def run_experiment(spec: ExperimentSpec, *, workers: int | None = None,
                   measure_time: bool = False) -> ExperimentResult | DepGraphResult:
    """Execute a spec and return its report.

    Replications are distributed over ``workers`` processes (``RG_WORKERS``
    or the core count when unset); every run draws from the stream keyed by
    (seed, run index), so results are identical for any worker count. With
    ``measure_time`` unset all wall times are reported as zero and repeated
    invocations produce byte-identical CSVs.
    """
    workers = _resolve_workers(workers)
    if spec.experiment == "exp5-depgraph":
        return _run_depgraph(spec)
    if spec.experiment == "chainrule-check":
        return _run_chainrule(spec, workers, measure_time)
    points = _sweep_points(spec)
    rows = []
    notes: tuple[str, ...] = ()
    if spec.experiment == "exp4-gp-ard":
        notes = ("exp4 scores raw theta components (lengthscales and the "
                 "noise scale, not its square) against the reference-run mean",)
    with _pool(workers) as executor:
        for point in points:
            truth = _point_truth(spec, point)
            rows.append(_collect_point(spec, point, truth, _run_one,
                                       executor, measure_time))
    return ExperimentResult(spec=spec, rows=rows, notes=notes)


class _InlinePool:
    """Stand-in for a process pool when one worker suffices."""

    def __enter__(self):
        return None

    def __exit__(self, *exc):
        return False


def _pool(workers: int):
    if workers == 1:
        return _InlinePool()
    return ProcessPoolExecutor(max_workers=workers)


def _chain_rule_runner(spec: ExperimentSpec, point: _SweepPoint, run: int,
                       measure_time: bool) -> tuple[np.ndarray, int, float]:
    return _run_chain_rule_once(spec, run, measure_time)


def _run_chainrule(spec: ExperimentSpec, workers: int,
                   measure_time: bool) -> ExperimentResult:
    """Two rows: the recycling estimator and the direct chain-rule sampler."""
    point = _sweep_points(spec)[0]
    truth = _GAUSS_TRUTH
    with _pool(workers) as executor:
        mrg_row = _collect_point(spec, point, truth, _run_one, executor,
                                 measure_time)
        cr_row = _collect_point(spec, point, truth, _chain_rule_runner,
                                executor, measure_time)
    cr_row = replace(cr_row, method="chain-rule")
    return ExperimentResult(spec=spec, rows=[mrg_row, cr_row])


def _run_depgraph(spec: ExperimentSpec) -> DepGraphResult:
    names, data = synthetic_dependence_data(spec.n_points)
    pairs = screen_all_pairs(data, list(names), spec.seed,
                             n_surrogates=spec.surrogates, beta=spec.beta)
    dot = emit_graph(pairs, alpha=spec.alpha)
    return DepGraphResult(spec=spec, pairs=pairs, dot=dot)


# ---------------------------------------------------------------------------
# CSV emission


def _g(value: float) -> str:
    return f"{value:.17g}"


def _mse_csv(result: ExperimentResult) -> str:
    lines = [",".join(MSE_REPORT_COLUMNS)]
    for row in result.rows:
        lines.append(",".join([
            row.experiment, row.method, row.kernel, str(row.T), str(row.M),
            _g(row.sigma), _g(row.evals_per_conditional), str(row.runs),
            _g(row.mse), _g(row.wall_time_s)]))
    return "\n".join(lines) + "\n"


def _depgraph_csv(result: DepGraphResult) -> str:
    lines = ["in,out,stat,observed,p_value"]
    for pair in result.pairs:
        for stat in STATISTICS:
            observed = pair.statistics[stat]
            p = pair.p_values[stat] if pair.p_values else float("nan")
            lines.append(f"{pair.in_name},{pair.out_name},{stat},"
                         f"{_g(observed)},{_g(p)}")
    return "\n".join(lines) + "\n"


def write_csv(result: ExperimentResult | DepGraphResult, path) -> Path:
    """Write a result as CSV: UTF-8, LF endings, header always present."""
    if isinstance(result, ExperimentResult):
        text = _mse_csv(result)
    elif isinstance(result, DepGraphResult):
        text = _depgraph_csv(result)
    else:
        raise ValueError(f"cannot serialize {type(result).__name__} as CSV")
    path = Path(path)
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write report to {path}: {exc}") from exc
    return path
