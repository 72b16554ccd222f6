"""Recycling Gibbs samplers and their experiment harness.

Standard Gibbs discards the intermediate draws its within-block kernels
produce; the recycling variants keep all of them and average estimators over
every intermediate sample, at no extra target evaluations. This package
implements both samplers, the within-Gibbs MH kernels (fixed-scale and
adaptive), the benchmark targets, estimators with deterministic ground-truth
oracles, a GP-based dependence-graph pipeline, and a CLI harness.
"""
from .core import (FullConditionalView, GibbsConfig, NumericalError, RngStream,
                   TargetDensity, assemble, full_conditional_view)
from .depgraph import (PairResult, SurrogateNull, emit_graph, fit_pair, p_value,
                       screen_all_pairs, screen_pair, standardize,
                       surrogate_null, synthetic_dependence_data)
from .estimators import (Estimate, GroundTruth, QuadratureMoments, mse_over_runs,
                         quadrature_moments, recycled_estimate, standard_estimate)
from .gibbs import (ChainRuleOutput, SGRun, SampleStore, run_chain_rule, run_mrg,
                    run_sg, run_trg)
from .harness import (DepGraphResult, ExperimentResult, ExperimentSpec,
                      SweepPointRow, parse_spec, run_experiment, write_csv)
from .kernels import (AMHState, AdaptiveMHKernel, DirectConditionalKernel, MHStep,
                      RWProposal, RandomWalkKernel, SCAMKernel, SCAMState, SCAMStep,
                      amh_update, mh_step, scam_step)
from .targets import (BimodalTarget, DonutTarget, GPDataset, GPPosteriorTarget,
                      GaussianChainTarget, ard_kernel, bimodal_log_density,
                      donut_log_density, gaussian_chain_conditional_sample,
                      gaussian_chain_log_density, generate_gp_dataset,
                      gp_log_posterior, gp_posterior_f)

__version__ = "0.1.0"

__all__ = [
    "AMHState", "AdaptiveMHKernel", "BimodalTarget", "ChainRuleOutput",
    "DepGraphResult", "DirectConditionalKernel", "DonutTarget", "Estimate",
    "ExperimentResult", "ExperimentSpec", "FullConditionalView", "GPDataset",
    "GPPosteriorTarget", "GaussianChainTarget", "GibbsConfig", "GroundTruth",
    "MHStep", "NumericalError", "PairResult", "QuadratureMoments", "RWProposal",
    "RandomWalkKernel", "RngStream", "SCAMKernel", "SCAMState", "SCAMStep",
    "SGRun", "SampleStore", "SurrogateNull", "SweepPointRow", "TargetDensity",
    "amh_update", "ard_kernel", "assemble", "bimodal_log_density",
    "donut_log_density", "emit_graph", "fit_pair", "full_conditional_view",
    "gaussian_chain_conditional_sample", "gaussian_chain_log_density",
    "generate_gp_dataset", "gp_log_posterior", "gp_posterior_f", "mh_step",
    "mse_over_runs", "p_value", "parse_spec", "quadrature_moments",
    "recycled_estimate", "run_chain_rule", "run_experiment", "run_mrg", "run_sg",
    "run_trg", "scam_step", "screen_all_pairs", "screen_pair", "standardize",
    "standard_estimate", "surrogate_null", "synthetic_dependence_data",
    "write_csv",
]
