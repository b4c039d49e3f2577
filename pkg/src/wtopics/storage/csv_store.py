"""
CSV storage backend for posterior draws, plus the JSON/CSV artifact writers.

Layout under the store directory:
    chain_<c>.csv    iteration,param_0,...,param_K,log_post
    sampler_<c>.csv  iteration,accept_prob,divergent
    manifest.json    parameter names, sampler config, step sizes, diagnostics

Floats are written with their shortest round-trip repr and read back with
pandas' round_trip parser, so load(save(x)) reproduces x exactly.
"""

import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Union

import numpy as np
import pandas as pd

from ..errors import DataError, InsufficientDraws
from ..inference.hmc import HmcConfig, SampleSet
from .base import SampleStore

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def _jsonable(obj: Any) -> Any:
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        value = float(obj)
        # JSON has no inf/nan
        return value if np.isfinite(value) else str(value)
    return obj


def write_json(path: PathLike, obj: Any) -> Path:
    """Write obj as indented JSON with a trailing newline."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        json.dump(_jsonable(obj), f, indent=2)
        f.write("\n")
    return path


def read_json(path: PathLike) -> Any:
    path = Path(path)
    if not path.exists():
        raise DataError(f"File not found: {path}")
    try:
        with open(path, encoding="utf-8") as f:
            return json.load(f)
    except json.JSONDecodeError as e:
        raise DataError(f"{path}: invalid JSON ({e})") from e


def write_csv(path: PathLike, frame: pd.DataFrame) -> Path:
    """Write a frame without its index, using '\\n' line endings."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, lineterminator="\n")
    return path


class CsvSampleStore(SampleStore):
    """One CSV per chain in a directory, with a JSON manifest."""

    MANIFEST = "manifest.json"

    def __init__(self, directory: PathLike):
        self.directory = Path(directory)

    def _chain_path(self, chain: int) -> Path:
        return self.directory / f"chain_{chain}.csv"

    def _sampler_path(self, chain: int) -> Path:
        return self.directory / f"sampler_{chain}.csv"

    def save(self, samples: SampleSet, manifest: Dict[str, Any]) -> None:
        self.directory.mkdir(parents=True, exist_ok=True)
        R, K = samples.num_retained, samples.dim
        iteration = np.arange(samples.config.burn_in, samples.config.iterations)
        columns = [f"param_{k}" for k in range(K)]

        for c in range(samples.num_chains):
            frame = pd.DataFrame(samples.draws[c], columns=columns)
            frame.insert(0, "iteration", iteration)
            frame["log_post"] = samples.log_post[c]
            write_csv(self._chain_path(c), frame)

            stats = pd.DataFrame(
                {
                    "iteration": iteration,
                    "accept_prob": samples.accept_prob[c],
                    "divergent": samples.divergent[c].astype(int),
                }
            )
            write_csv(self._sampler_path(c), stats)

        try:
            diagnostics = samples.diagnostics().to_dict()
        except InsufficientDraws as e:
            logger.warning(f"Diagnostics unavailable: {e}")
            diagnostics = None

        record = {
            "chains": samples.num_chains,
            "retained": R,
            "param_names": samples.param_names,
            "sampler": samples.config.to_dict(),
            "step_size": samples.step_size,
            "diagnostics": diagnostics,
        }
        if samples.inv_mass is not None and samples.config.adapt_mass:
            record["inv_mass"] = samples.inv_mass
        record.update(manifest)
        write_json(self.directory / self.MANIFEST, record)
        logger.info(f"Saved {samples.num_chains} chain(s) x {R} draws to {self.directory}")

    def exists(self) -> bool:
        manifest_path = self.directory / self.MANIFEST
        if not manifest_path.exists():
            return False
        chains = int(read_json(manifest_path).get("chains", 0))
        return all(
            self._chain_path(c).exists() and self._sampler_path(c).exists() for c in range(chains)
        )

    def load(self) -> SampleSet:
        if not self.exists():
            raise DataError(f"No complete sample store at {self.directory}")
        manifest = read_json(self.directory / self.MANIFEST)
        names: List[str] = list(manifest["param_names"])
        columns = [f"param_{k}" for k in range(len(names))]

        draws, log_post, accept, divergent = [], [], [], []
        for c in range(int(manifest["chains"])):
            frame = pd.read_csv(self._chain_path(c), float_precision="round_trip")
            missing = [col for col in columns + ["log_post"] if col not in frame.columns]
            if missing:
                raise DataError(f"{self._chain_path(c)} lacks columns {missing[:3]}")
            draws.append(frame[columns].to_numpy(dtype=np.float64))
            log_post.append(frame["log_post"].to_numpy(dtype=np.float64))
            stats = pd.read_csv(self._sampler_path(c), float_precision="round_trip")
            accept.append(stats["accept_prob"].to_numpy(dtype=np.float64))
            divergent.append(stats["divergent"].to_numpy().astype(bool))

        inv_mass = manifest.get("inv_mass")
        return SampleSet(
            draws=np.stack(draws),
            log_post=np.stack(log_post),
            accept_prob=np.stack(accept),
            divergent=np.stack(divergent),
            step_size=np.asarray(manifest["step_size"], dtype=np.float64),
            param_names=names,
            config=HmcConfig(**manifest["sampler"]),
            inv_mass=None if inv_mass is None else np.asarray(inv_mass, dtype=np.float64),
        )
