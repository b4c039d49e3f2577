"""Configuration handling and random streams."""

from .config import RunConfig, build, load_config, merged_section, resolve_threads
from .rng import make_rng

__all__ = ["RunConfig", "build", "load_config", "make_rng", "merged_section", "resolve_threads"]
