"""Acceptance gate: twelve numbered checks over the whole sampler stack.

Each test computes one criterion, records a pass/fail line for the terminal
summary, and asserts. Replicated experiments run through the harness with
worker count 1, so the gate is deterministic for the frozen seeds below.
The full gate recomputes several 500-run experiments and the dependence
screen; expect roughly half an hour on one core.
"""
import math

import numpy as np
import pytest

from conftest import record_criterion
from recycling_gibbs.core import GibbsConfig, RngStream
from recycling_gibbs.depgraph import (emit_graph, screen_all_pairs, screen_pair,
                                      synthetic_dependence_data)
from recycling_gibbs.estimators import quadrature_moments
from recycling_gibbs.gibbs import run_chain_rule, run_mrg, run_sg, run_trg
from recycling_gibbs.harness import ExperimentSpec, run_experiment, write_csv
from recycling_gibbs.kernels import (AdaptiveMHKernel, DirectConditionalKernel,
                                     RandomWalkKernel, SCAMKernel)
from recycling_gibbs.targets import (BimodalTarget, DonutTarget, GaussianChainTarget,
                                     GPDataset, GPPosteriorTarget, ard_kernel,
                                     generate_gp_dataset, gp_log_posterior)


def _harness_mse(experiment, method, **kwargs):
    spec = ExperimentSpec(experiment=experiment, method=method, **kwargs)
    return run_experiment(spec, workers=1).rows[0].mse


def test_criterion_01_backbone_coupling():
    gp_data = generate_gp_dataset(np.array([1.0]), 0.5, 16, RngStream(5, 0).derive(1))
    targets = [
        ("gauss", GaussianChainTarget()),
        ("bimodal", BimodalTarget()),
        ("donut", DonutTarget()),
        ("gp", GPPosteriorTarget(gp_data)),
    ]
    kernels = [
        ("mh", lambda: RandomWalkKernel(2.0)),
        ("amh", AdaptiveMHKernel),
        ("scam", SCAMKernel),
        ("ideal", DirectConditionalKernel),
    ]
    config = GibbsConfig(sweeps=50, inner_samples=5)
    problems = []
    checked = 0
    for tname, target in targets:
        for kname, factory in kernels:
            if kname == "ideal" and not hasattr(target, "conditional_sample"):
                continue
            sg = run_sg(target, factory(), config, RngStream(909, 0))
            mrg = run_mrg(target, factory(), config, RngStream(909, 0))
            checked += 1
            if not np.array_equal(sg.chain, mrg.backbone):
                problems.append(f"{tname}/{kname}: backbone differs from SG chain")
            if sg.eval_count != mrg.eval_count:
                problems.append(f"{tname}/{kname}: evaluation budgets differ")
    ok = not problems and checked == 13
    record_criterion(1, "MRG backbone bit-identical to SG for every target and kernel", ok)
    assert ok, problems or f"expected 13 pairs, checked {checked}"


def test_criterion_02_exp1_recycling_ordering():
    mrg = _harness_mse("exp1-gauss", "ideal-mrg", T=1000, M=20, runs=200)
    sg = _harness_mse("exp1-gauss", "ideal-sg", T=1000, M=20, runs=200)
    ok = mrg < sg and mrg / sg < 0.8
    record_criterion(2, "exp1 ideal-MRG beats ideal-SG with MSE ratio below 0.8", ok)
    assert ok, f"mrg={mrg:.6g} sg={sg:.6g} ratio={mrg / sg:.3f}"


def test_criterion_03_exp1_pooled_covariance():
    target = GaussianChainTarget()
    config = GibbsConfig(sweeps=10_000, inner_samples=1)
    chains = [run_sg(target, DirectConditionalKernel(), config, RngStream(3, r)).chain
              for r in range(100)]
    pooled = np.concatenate(chains)
    emp = np.cov(pooled, rowvar=False)
    stated = np.array([[1.33, 0.66], [0.66, 1.33]])
    worst = float(np.max(np.abs(emp - stated)))
    ok = pooled.shape == (1_000_000, 2) and worst <= 0.02
    record_criterion(3, "exp1 pooled covariance within 0.02 of the Gaussian truth", ok)
    assert ok, f"worst deviation {worst:.4f} from {stated.tolist()}, got {emp.tolist()}"


def test_criterion_04_exp2_sigma_sweep_argmin():
    spec = ExperimentSpec(experiment="exp2-bimodal", method="mh-sg", T=1000, M=1,
                          runs=500, sweep="sigma",
                          sweep_values=(0.5, 1, 2, 3, 5, 8))
    rows = run_experiment(spec, workers=1).rows
    best = min(rows, key=lambda r: r.mse)
    ok = best.sigma in (2.0, 3.0, 5.0)
    record_criterion(4, "exp2 proposal-scale sweep has its MSE argmin near 3", ok)
    assert ok, {f"sigma={r.sigma:g}": r.mse for r in rows}


def test_criterion_05_exp2_recycling_gain():
    mrg = _harness_mse("exp2-bimodal", "mh-mrg", T=1000, M=20, sigma=3.0, runs=500)
    sg = _harness_mse("exp2-bimodal", "mh-sg", T=1000, M=20, sigma=3.0, runs=500)
    ok = mrg < sg
    record_criterion(5, "exp2 MH-MRG beats MH-SG at the tuned proposal scale", ok)
    assert ok, f"mrg={mrg:.6g} sg={sg:.6g}"


def test_criterion_06_exp3_oracle_and_ordering():
    oracle = quadrature_moments(DonutTarget())
    rel_1 = abs(oracle.std[0] - math.sqrt(5)) / math.sqrt(5)
    rel_2 = abs(oracle.std[1] - math.sqrt(51)) / math.sqrt(51)
    mrg = _harness_mse("exp3-donut", "mh-mrg", T=200, M=100, sigma=10.0, runs=200)
    sg = _harness_mse("exp3-donut", "mh-sg", T=200, M=100, sigma=10.0, runs=200)
    ok = rel_1 < 0.01 and rel_2 < 0.01 and mrg < sg
    record_criterion(6, "exp3 oracle stds within 1% and MH-MRG beats MH-SG", ok)
    assert ok, (f"std rel errors {rel_1:.4f}, {rel_2:.4f}; "
                f"mrg={mrg:.6g} sg={sg:.6g}")


def test_criterion_07_gp_log_posterior_oracle():
    rng = np.random.default_rng(202)
    worst = 0.0
    for _ in range(100):
        L = int(rng.integers(1, 4))
        P = int(rng.integers(2, 6))
        dataset = GPDataset(inputs=rng.uniform(0, 10, size=(P, L)),
                            outputs=rng.standard_normal(P))
        theta = rng.uniform(0.1, 5.0, size=L + 1)
        gram = ard_kernel(dataset.inputs, dataset.inputs, theta[:-1])
        a = gram + theta[-1] ** 2 * np.eye(P)
        sign, log_det = np.linalg.slogdet(a)
        assert sign > 0
        quad = dataset.outputs @ np.linalg.solve(a, dataset.outputs)
        dense = -0.5 * quad - 0.5 * log_det - 1.3 * np.log(theta).sum()
        worst = max(worst, abs(gp_log_posterior(theta, dataset) - dense))
    ok = worst < 1e-8
    record_criterion(7, "GP log-posterior matches the dense oracle within 1e-8", ok)
    assert ok, f"worst abs deviation {worst:.3e}"


def test_criterion_08_gp_recycling_trend():
    mrg = _harness_mse("exp4-gp-ard", "mh-mrg", T=300, M=10, sigma=2.0,
                       L=5, P=100, runs=50)
    sg = _harness_mse("exp4-gp-ard", "mh-sg", T=300, M=10, sigma=2.0,
                      L=5, P=100, runs=50)
    ok = mrg < sg
    record_criterion(8, "exp4 GP posterior: MH-MRG beats MH-SG at D=6", ok)
    assert ok, f"mrg={mrg:.6g} sg={sg:.6g}"


def test_criterion_09_trg_boundary_bound():
    target = GaussianChainTarget()
    config = GibbsConfig(sweeps=1000, inner_samples=1)
    store = run_trg(target, DirectConditionalKernel(), config, RngStream(17, 0))
    trace = store.assembled()
    problems = []
    for name, f in (("E[X2]", lambda x: x[:, 1]), ("E[X2^2]", lambda x: x[:, 1] ** 2)):
        trg_est = float(f(trace).mean())
        sg_est = float(f(store.backbone).mean())
        bound = (store.dim / store.sweeps) * float(np.abs(f(trace)).max())
        if abs(trg_est - sg_est) > bound:
            problems.append(f"{name}: |{trg_est:.6g} - {sg_est:.6g}| > {bound:.6g}")
    ok = not problems
    record_criterion(9, "TRG and SG estimates within the (D/T) boundary bound", ok)
    assert ok, problems


def test_criterion_10_chain_rule_equivalence():
    target = GaussianChainTarget()
    store = run_mrg(target, DirectConditionalKernel(),
                    GibbsConfig(sweeps=10_100, inner_samples=5), RngStream(23, 0))
    recycled = store.assembled(skip_sweeps=100)

    marginal_std = float(np.sqrt(target.covariance[0, 0]))
    out = run_chain_rule(lambda rng: marginal_std * rng.standard_normal(),
                         lambda x1, rng: target.conditional_sample(1, np.array([x1]), rng),
                         sweeps=10_000, inner_samples=5, stream=RngStream(23, 1))
    direct = out.flattened()

    def moments(samples):
        x1, x2 = samples[:, 0], samples[:, 1]
        return np.column_stack([x1, x2, x1 * x1, x1 * x2, x2 * x2])

    def batch_stats(rows, n_batches=20):
        size = rows.shape[0] // n_batches
        values = moments(rows)
        batches = np.array([values[i * size:(i + 1) * size].mean(axis=0)
                            for i in range(n_batches)])
        return batches.mean(axis=0), batches.std(axis=0, ddof=1) / np.sqrt(n_batches)

    rec_mean, rec_se = batch_stats(recycled)
    dir_mean, dir_se = batch_stats(direct)
    gap = np.abs(rec_mean - dir_mean)
    band = 3.0 * np.sqrt(rec_se ** 2 + dir_se ** 2)
    ok = bool(np.all(gap <= band))
    record_criterion(10, "recycled moments match chain-rule sampling within 3 SE", ok)
    assert ok, f"gaps {gap.tolist()} exceed bands {band.tolist()}"


def test_criterion_11_depgraph_calibration():
    names, data = synthetic_dependence_data(100, seed=73)
    pairs = screen_all_pairs(data, list(names), seed=1, n_surrogates=99)
    p = {(r.in_name, r.out_name): r.p_values["mean"] for r in pairs}
    problems = []
    if not (p[("x1", "x2")] <= 0.05 and p[("x2", "x1")] <= 0.05):
        problems.append(f"dependent pair p-values {p[('x1', 'x2')]:.3f}, "
                        f"{p[('x2', 'x1')]:.3f} exceed 0.05")
    dot = emit_graph(pairs, alpha=0.1)
    solid = [line.strip() for line in dot.splitlines() if "style=solid" in line]
    if len(solid) != 1 or '"x1" -- "x2"' not in solid[0]:
        problems.append(f"solid edges {solid} instead of exactly x1 -- x2")

    # the independent direction must stay insignificant across reseedings
    above = 0
    rep_ps = []
    for i in range(20):
        rep = screen_pair(data[:, 0], data[:, 3], RngStream(101 + i, 0),
                          n_surrogates=99, in_name="x1", out_name="x4")
        rep_ps.append(rep.p_values["mean"])
        above += rep.p_values["mean"] > 0.1
    if above < 16:
        problems.append(f"independent pair above 0.1 in only {above}/20 reps: {rep_ps}")
    ok = not problems
    record_criterion(11, "dependence screen flags only the dependent pair", ok)
    assert ok, problems


def test_criterion_12_reports_are_byte_identical(tmp_path):
    specs = [
        ExperimentSpec(experiment="exp1-gauss", method="ideal-mrg", T=50, M=2, runs=3),
        ExperimentSpec(experiment="exp2-bimodal", method="mh-sg", T=50, runs=3,
                       sweep="sigma", sweep_values=(1, 3)),
        ExperimentSpec(experiment="exp3-donut", method="mh-mrg", T=20, M=5,
                       sigma=10.0, runs=3),
        ExperimentSpec(experiment="exp4-gp-ard", method="mh-mrg", T=10, M=2,
                       sigma=2.0, L=5, P=100, runs=2),
        ExperimentSpec(experiment="exp5-depgraph", method="scam-mrg", n_points=10,
                       surrogates=1, runs=1),
        ExperimentSpec(experiment="chainrule-check", method="ideal-mrg", T=50, M=2,
                       runs=3),
    ]
    problems = []
    for k, spec in enumerate(specs):
        first = write_csv(run_experiment(spec, workers=1), tmp_path / f"{k}a.csv")
        second = write_csv(run_experiment(spec, workers=1), tmp_path / f"{k}b.csv")
        if first.read_bytes() != second.read_bytes():
            problems.append(f"{spec.experiment}/{spec.method} reports differ")
    ok = not problems
    record_criterion(12, "re-running every pipeline yields byte-identical CSVs", ok)
    assert ok, problems
