"""Asynchronous parallel Bayesian optimization with variance control.

The package is organized bottom-up: :mod:`parbo.space` handles box bounds
and unit-cube rescaling, :mod:`parbo.gp` the Gaussian-process regression,
:mod:`parbo.hypers` the hyper-parameter priors and slice-sampling MCMC,
:mod:`parbo.thompson` lazy posterior draws and their maximization,
:mod:`parbo.chooser` the point-selection algorithms, and
:mod:`parbo.driver` the asynchronous m-node loop with its simulated and
subprocess executors.
"""

from .chooser import (
    Choice,
    ChooserConfig,
    PendingSet,
    bop_choose,
    default_step,
    expected_improvement,
    fantasize,
    fubar_choose,
    improvement,
    incumbent,
    poll_step,
)
from .config import (
    ConfigError,
    ExecutorConfig,
    InitConfig,
    ObjectiveConfig,
    RunConfig,
    config_from_dict,
    config_to_dict,
    default_config_dict,
    load_config,
)
from .driver import RunAbortedError, init_design, run
from .gp import (
    Dataset,
    DegeneracyError,
    GpPosterior,
    Hypers,
    NumericalError,
    chol_append,
    fit,
    gram,
    log_marginal,
    matern52,
    predict,
    predict_batch,
)
from .hypers import (
    McmcState,
    PriorConfig,
    PriorScales,
    SamplerStuckError,
    log_posterior,
    log_prior,
    sample_hypers,
    slice_step,
)
from .objectives import Objective, get_objective
from .runlog import InvariantViolation, LogFormatError, RunLog, verify_run_invariants, write_summary_csv
from .space import ParameterSpace, is_edge_point
from .thompson import Candidate, SampledFunction, barrier, nelder_mead_max, sample_candidate

__all__ = [
    "Candidate",
    "Choice",
    "ChooserConfig",
    "ConfigError",
    "Dataset",
    "DegeneracyError",
    "ExecutorConfig",
    "GpPosterior",
    "Hypers",
    "InitConfig",
    "InvariantViolation",
    "LogFormatError",
    "McmcState",
    "NumericalError",
    "Objective",
    "ObjectiveConfig",
    "ParameterSpace",
    "PendingSet",
    "PriorConfig",
    "PriorScales",
    "RunAbortedError",
    "RunConfig",
    "RunLog",
    "SampledFunction",
    "SamplerStuckError",
    "barrier",
    "bop_choose",
    "chol_append",
    "config_from_dict",
    "config_to_dict",
    "default_config_dict",
    "default_step",
    "expected_improvement",
    "fantasize",
    "fit",
    "fubar_choose",
    "get_objective",
    "gram",
    "improvement",
    "incumbent",
    "init_design",
    "is_edge_point",
    "load_config",
    "log_marginal",
    "log_posterior",
    "log_prior",
    "matern52",
    "nelder_mead_max",
    "poll_step",
    "predict",
    "predict_batch",
    "run",
    "sample_candidate",
    "sample_hypers",
    "slice_step",
    "verify_run_invariants",
    "write_summary_csv",
]

__version__ = "0.1.0"
