"""HMC sampling, convergence diagnostics and model fitting."""

from .diagnostics import Diagnostics, ess, split_rhat, summarize_diagnostics
from .hmc import (
    DualAveraging,
    HmcConfig,
    SampleSet,
    find_reasonable_step_size,
    hmc_sample,
    leapfrog,
)

__all__ = [
    "Diagnostics",
    "DualAveraging",
    "HmcConfig",
    "SampleSet",
    "ess",
    "find_reasonable_step_size",
    "hmc_sample",
    "leapfrog",
    "split_rhat",
    "summarize_diagnostics",
]
