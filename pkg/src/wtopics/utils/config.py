"""
Run configuration: config files, flag overrides, worker count and manifests.

Config files are YAML (JSON parses as YAML too) with optional sections:

    corpus:     min_count, stopwords, unweighted
    model:      topics, alpha, eta, a, b, sigma2_beta, variance_prior, shared_variance
    sampler:    any HmcConfig field
    population: any PopulationConfig field
    design:     any SamplingDesign field
    study:      K, regenerate_population
    output:     top_words, assign
    logging:    level, file

Explicit command-line flags override file values.
"""

import logging
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Type, TypeVar, Union

import numpy as np
import pandas as pd
import scipy
import yaml

from .. import __version__
from ..errors import ConfigError

logger = logging.getLogger(__name__)

THREADS_ENV = "WTOPICS_THREADS"
SECTIONS = ("corpus", "model", "sampler", "population", "design", "study", "output", "logging")

T = TypeVar("T")


def load_config(path: Union[str, Path, None]) -> Dict[str, Dict[str, Any]]:
    """
    Load a sectioned config file.

    Args:
        path: YAML or JSON file (None gives an empty config)

    Returns:
        Mapping section -> settings
    """
    if path is None:
        return {}
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"Config file not found: {path}")
    try:
        with open(path, encoding="utf-8") as f:
            raw = yaml.safe_load(f)
    except yaml.YAMLError as e:
        raise ConfigError(f"{path}: cannot parse config ({e})") from e
    if raw is None:
        return {}
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: top level must be a mapping of sections")
    unknown = sorted(set(raw) - set(SECTIONS))
    if unknown:
        raise ConfigError(f"{path}: unknown section(s) {unknown}; expected {list(SECTIONS)}")
    for name, values in raw.items():
        if values is not None and not isinstance(values, dict):
            raise ConfigError(f"{path}: section {name!r} must be a mapping")
    return {name: dict(values or {}) for name, values in raw.items()}


def merged_section(
    config: Mapping[str, Mapping[str, Any]], name: str, flags: Mapping[str, Any]
) -> Dict[str, Any]:
    """File values of a section overridden by flags that were actually given (not None)."""
    values = dict(config.get(name, {}))
    values.update({k: v for k, v in flags.items() if v is not None})
    return values


def build(cls: Type[T], values: Mapping[str, Any], section: str) -> T:
    """Instantiate a config dataclass, reporting bad fields as ConfigError."""
    try:
        return cls(**values)
    except TypeError as e:
        raise ConfigError(f"[{section}] {e}") from e


def resolve_threads(flag: Optional[int]) -> int:
    """--threads, else WTOPICS_THREADS, else 1."""
    if flag is not None:
        threads = flag
    else:
        env = os.environ.get(THREADS_ENV)
        if env is None or env.strip() == "":
            return 1
        try:
            threads = int(env)
        except ValueError as e:
            raise ConfigError(f"{THREADS_ENV} must be an integer, got {env!r}") from e
    if threads < 1:
        raise ConfigError(f"threads must be >= 1, got {threads}")
    return threads


def versions() -> Dict[str, str]:
    return {
        "wtopics": __version__,
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "pandas": pd.__version__,
        "pyyaml": yaml.__version__,
    }


@dataclass
class RunConfig:
    """Effective settings of one command, echoed into every output directory."""

    command: str
    settings: Dict[str, Any] = field(default_factory=dict)

    def manifest(self, **extra: Any) -> Dict[str, Any]:
        out: Dict[str, Any] = {
            "command": self.command,
            "config": self.settings,
            "versions": versions(),
        }
        out.update(extra)
        return out
