"""Simulation study: synthetic populations, informative samples and repeated fits."""

from .design import (
    InformativeSample,
    SamplingDesign,
    draw_informative_sample,
    horvitz_thompson_share,
    inclusion_probabilities,
)
from .metrics import abs_bias, interval_score, rmse
from .population import LabeledPopulation, PopulationConfig, generate_population
from .replicate import ReplicationReport, run_replications

__all__ = [
    "InformativeSample",
    "LabeledPopulation",
    "PopulationConfig",
    "ReplicationReport",
    "SamplingDesign",
    "abs_bias",
    "draw_informative_sample",
    "generate_population",
    "horvitz_thompson_share",
    "inclusion_probabilities",
    "interval_score",
    "rmse",
    "run_replications",
]
