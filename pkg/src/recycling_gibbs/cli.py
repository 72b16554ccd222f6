"""The ``rg`` command line: experiment runs, moment oracles, dependence graphs.

Exit codes: 0 on success, 2 on validation or I/O errors, 3 on numerical
failure inside a sampler or factorization.
"""
from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .core import NumericalError
from .depgraph import DEFAULT_SURROGATES, emit_graph, screen_all_pairs
from .estimators import quadrature_moments
from .harness import DepGraphResult, parse_spec, run_experiment, write_csv
from .targets import BimodalTarget, DonutTarget, GaussianChainTarget

_ORACLE_TARGETS = {
    "gauss": GaussianChainTarget,
    "bimodal": BimodalTarget,
    "donut": DonutTarget,
}


def _write_text(path: Path, text: str) -> None:
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write to {path}: {exc}") from exc


def _cmd_run(args: argparse.Namespace) -> int:
    config_path = Path(args.config)
    try:
        text = config_path.read_text()
    except OSError as exc:
        raise OSError(f"cannot read config {config_path}: {exc}") from exc
    spec = parse_spec(text)
    if args.seed is not None:
        spec = replace(spec, seed=args.seed)
    result = run_experiment(spec, workers=args.workers, measure_time=args.time)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    if isinstance(result, DepGraphResult):
        csv_path = write_csv(result, out_dir / f"{spec.experiment}.csv")
        dot_path = out_dir / f"{spec.experiment}.dot"
        _write_text(dot_path, result.dot)
        solid = result.dot.count("style=solid")
        print(f"wrote {csv_path}")
        print(f"wrote {dot_path} ({solid} solid edge(s) at alpha={spec.alpha:g})")
        return 0
    csv_path = write_csv(result, out_dir / f"{spec.experiment}-{spec.method}.csv")
    print(f"wrote {csv_path} ({len(result.rows)} row(s))")
    for row in result.rows:
        if np.isnan(row.mse):
            print(f"warning: sweep point T={row.T} M={row.M} sigma={row.sigma:g} "
                  f"failed after {row.runs} run(s)", file=sys.stderr)
    for note in result.notes:
        print(f"note: {note}", file=sys.stderr)
    return 0


def _cmd_oracle(args: argparse.Namespace) -> int:
    target = _ORACLE_TARGETS[args.target]()
    oracle = quadrature_moments(target, n=args.n)
    labels = ("mean_1", "mean_2", "cov_11", "cov_12", "cov_22", "std_1", "std_2")
    values = (oracle.mean[0], oracle.mean[1], oracle.cov[0, 0], oracle.cov[0, 1],
              oracle.cov[1, 1], oracle.std[0], oracle.std[1])
    for label, value in zip(labels, values):
        print(f"{label} = {value:.17g}")
    print(f"grid_points = {oracle.grid_points}")
    return 0


def _load_table(path: Path) -> tuple[list[str], np.ndarray]:
    """Read a plain CSV of named numeric columns."""
    try:
        lines = [ln for ln in path.read_text().splitlines() if ln.strip()]
    except OSError as exc:
        raise OSError(f"cannot read data file {path}: {exc}") from exc
    if len(lines) < 2:
        raise ValueError(f"{path}: need a header line and at least one data row")
    names = [c.strip() for c in lines[0].split(",")]
    if len(names) < 2:
        raise ValueError(f"{path}: need at least two variables to screen")
    try:
        data = np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]])
    except ValueError:
        raise ValueError(f"{path}: data rows must be numeric") from None
    if data.ndim != 2 or data.shape[1] != len(names):
        raise ValueError(f"{path}: data rows disagree with the header on column count")
    return names, data


def _cmd_depgraph(args: argparse.Namespace) -> int:
    data_path = Path(args.data)
    names, data = _load_table(data_path)
    pairs = screen_all_pairs(data, names, args.seed, n_surrogates=args.surrogates)
    dot = emit_graph(pairs, alpha=args.alpha)
    out_dir = Path(args.out) if args.out else data_path.parent
    out_dir.mkdir(parents=True, exist_ok=True)
    result = DepGraphResult(spec=None, pairs=pairs, dot=dot)
    csv_path = write_csv(result, out_dir / f"{data_path.stem}-screen.csv")
    dot_path = out_dir / f"{data_path.stem}-graph.dot"
    _write_text(dot_path, dot)
    solid = dot.count("style=solid")
    print(f"wrote {csv_path}")
    print(f"wrote {dot_path} ({solid} solid edge(s) at alpha={args.alpha:g})")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rg", description="Recycling Gibbs samplers: experiments, "
        "moment oracles, and dependence graphs.")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run an experiment config and write its CSV report")
    run_p.add_argument("config", help="path to a key = value config file")
    run_p.add_argument("--out", default=".", help="output directory (default: current)")
    run_p.add_argument("--seed", type=int, default=None, help="override the config's base seed")
    run_p.add_argument("--workers", type=int, default=None,
                       help="worker processes (default: RG_WORKERS or core count)")
    run_p.add_argument("--time", action="store_true",
                       help="measure sampler wall time; off by default so "
                            "repeated runs are byte-identical")
    run_p.set_defaults(func=_cmd_run)

    oracle_p = sub.add_parser("oracle", help="print quadrature moments of a benchmark target")
    oracle_p.add_argument("target", choices=sorted(_ORACLE_TARGETS))
    oracle_p.add_argument("--n", type=int, default=1200, help="grid points per axis")
    oracle_p.set_defaults(func=_cmd_oracle)

    dep_p = sub.add_parser("depgraph", help="screen a data table for pairwise dependence")
    dep_p.add_argument("data", help="CSV with one named numeric column per variable")
    dep_p.add_argument("--alpha", type=float, default=0.1,
                       help="significance level for solid edges")
    dep_p.add_argument("--surrogates", type=int, default=DEFAULT_SURROGATES,
                       help="permutation surrogates per direction")
    dep_p.add_argument("--seed", type=int, default=1, help="base seed for the fits")
    dep_p.add_argument("--out", default=None,
                       help="output directory (default: next to the data file)")
    dep_p.set_defaults(func=_cmd_depgraph)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
