"""
Repeated sampling and estimation.

One population is shared by all replicates (unless regeneration is asked
for). Replicate k draws its sample from stream (seed, k) and fits the
weighted and unweighted MoU with sampler seeds derived from (seed, k), so
the report does not depend on how replicates are scheduled across workers.
"""

import logging
from dataclasses import dataclass, field, replace
from multiprocessing import Pool
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
import pandas as pd
from tqdm import tqdm

from ..core.model import MouSpec
from ..errors import ConfigError, InferenceError, WtopicsError
from ..inference.fit import fit_mou
from ..inference.hmc import HmcConfig
from ..posterior.summary import quantile_interval
from ..utils.rng import make_rng
from .design import SamplingDesign, draw_informative_sample
from .metrics import abs_bias, interval_score, rmse
from .population import LabeledPopulation, PopulationConfig, generate_population

logger = logging.getLogger(__name__)

SAMPLE_STREAM = 1
MODELS = ("weighted", "unweighted")
BLOCKS = ("theta", "phi")
METRICS = ("rmse", "abs_bias", "interval_score")


@dataclass(frozen=True)
class StudySettings:
    """Everything a replicate needs besides its index."""

    population: PopulationConfig
    design: SamplingDesign
    sampler: HmcConfig
    alpha: float = 1.0
    eta: float = 1.0
    regenerate_population: bool = False


@dataclass
class ReplicationReport:
    """Metrics per model and parameter block, averaged over the block's entries."""

    K: int
    metrics: Dict[str, Dict[str, Dict[str, float]]]
    failed: List[Dict[str, Any]] = field(default_factory=list)
    settings: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "K": self.K,
            "completed": self.K - len({f["replicate"] for f in self.failed}),
            "metrics": self.metrics,
            "failed": self.failed,
            "settings": self.settings,
        }

    def to_frame(self) -> pd.DataFrame:
        """One row per block; columns <model>_<metric>."""
        rows = []
        for block in BLOCKS:
            row: Dict[str, Any] = {"block": block}
            for model in MODELS:
                for metric in METRICS:
                    row[f"{model}_{metric}"] = self.metrics.get(model, {}).get(block, {}).get(
                        metric, np.nan
                    )
            rows.append(row)
        return pd.DataFrame(rows)


def replicate_seed(seed: int, k: int, model: int) -> int:
    """Sampler seed for (replicate, model), derived from the master seed."""
    return int(np.random.SeedSequence([seed, k, model]).generate_state(1, dtype=np.uint32)[0])


def _estimates(fit) -> Dict[str, np.ndarray]:
    theta_lo, theta_hi = quantile_interval(fit.draws.theta)
    phi_lo, phi_hi = quantile_interval(fit.draws.phi)
    return {
        "theta_mean": fit.draws.theta.mean(axis=0),
        "theta_lo": theta_lo,
        "theta_hi": theta_hi,
        "phi_mean": fit.draws.phi.mean(axis=0),
        "phi_lo": phi_lo,
        "phi_hi": phi_hi,
    }


def run_replicate(
    k: int, settings: StudySettings, population: LabeledPopulation
) -> Dict[str, Any]:
    """
    Draw sample k and fit both models.

    Returns:
        {"replicate": k, "weighted": estimates | {"error": msg}, "unweighted": ...}
    """
    if settings.regenerate_population:
        population = generate_population(
            replace(settings.population, seed=replicate_seed(settings.population.seed, k, 2))
        )
    rng = make_rng(settings.sampler.seed, SAMPLE_STREAM, k)
    sample = draw_informative_sample(population, settings.design, rng)
    pop_cfg = settings.population
    spec = MouSpec(J=pop_cfg.J, V=pop_cfg.V, alpha=settings.alpha, eta=settings.eta)
    reference = (pop_cfg.theta, pop_cfg.phi)

    out: Dict[str, Any] = {"replicate": k}
    for m, model in enumerate(MODELS):
        corpus = sample.corpus if model == "weighted" else sample.corpus.unweighted()
        config = replace(settings.sampler, seed=replicate_seed(settings.sampler.seed, k, m))
        try:
            fit = fit_mou(corpus, spec, config, progress=False, reference=reference)
            out[model] = _estimates(fit)
        except WtopicsError as e:
            logger.warning(f"Replicate {k}, {model} model failed: {e}")
            out[model] = {"error": f"{type(e).__name__}: {e}"}
    return out


def _block_metrics(
    results: List[Dict[str, np.ndarray]], truth: np.ndarray, block: str
) -> Dict[str, float]:
    mean = np.stack([r[f"{block}_mean"].ravel() for r in results])
    lo = np.stack([r[f"{block}_lo"].ravel() for r in results])
    hi = np.stack([r[f"{block}_hi"].ravel() for r in results])
    t = truth.ravel()
    per_entry = {
        "rmse": [rmse(mean[:, i], t[i]) for i in range(t.size)],
        "abs_bias": [abs_bias(mean[:, i], t[i]) for i in range(t.size)],
        "interval_score": [interval_score(lo[:, i], hi[:, i], t[i]) for i in range(t.size)],
    }
    return {metric: float(np.mean(values)) for metric, values in per_entry.items()}


def aggregate(
    replicates: List[Dict[str, Any]], population: PopulationConfig
) -> Tuple[Dict[str, Dict[str, Dict[str, float]]], List[Dict[str, Any]]]:
    """Average metrics over replicates in replicate order; collect failures."""
    replicates = sorted(replicates, key=lambda r: r["replicate"])
    truth = {"theta": population.theta, "phi": population.phi}
    metrics: Dict[str, Dict[str, Dict[str, float]]] = {}
    failed: List[Dict[str, Any]] = []
    for model in MODELS:
        ok = []
        for rep in replicates:
            if "error" in rep[model]:
                failed.append(
                    {"replicate": rep["replicate"], "model": model, "error": rep[model]["error"]}
                )
            else:
                ok.append(rep[model])
        if ok:
            metrics[model] = {block: _block_metrics(ok, truth[block], block) for block in BLOCKS}
    return metrics, failed


# Per-process state for pooled replicates
_worker_settings: Optional[StudySettings] = None
_worker_population: Optional[LabeledPopulation] = None


def _worker_init(settings: StudySettings, population: LabeledPopulation) -> None:
    global _worker_settings, _worker_population
    _worker_settings = settings
    _worker_population = population


def _worker_run_replicate(k: int) -> Dict[str, Any]:
    assert _worker_settings is not None and _worker_population is not None
    return run_replicate(k, _worker_settings, _worker_population)


def run_replications(
    pop_config: PopulationConfig,
    design: SamplingDesign,
    sampler: HmcConfig,
    K: int,
    alpha: float = 1.0,
    eta: float = 1.0,
    num_workers: int = 1,
    regenerate_population: bool = False,
    progress: bool = True,
) -> ReplicationReport:
    """
    Repeat sampling and estimation K times and compare the two models.

    Args:
        pop_config: Population settings
        design: Informative sampling design
        sampler: HMC settings; its seed is the master seed of the study
        K: Number of replicates
        alpha, eta: Dirichlet concentrations of the fitted models
        num_workers: Worker processes (replicates run in parallel, chains sequentially)
        regenerate_population: Draw a fresh population per replicate
        progress: Show a progress bar

    Returns:
        ReplicationReport
    """
    if K < 1:
        raise ConfigError(f"K must be >= 1, got {K}")
    settings = StudySettings(
        population=pop_config,
        design=design,
        sampler=sampler,
        alpha=alpha,
        eta=eta,
        regenerate_population=regenerate_population,
    )
    population = generate_population(pop_config)
    workers = max(1, min(num_workers, K))

    logger.info("=" * 60)
    logger.info(f"Simulation study: K={K}, m={design.sample_size}, c={design.boost}")
    logger.info("=" * 60)

    if workers == 1:
        results = [
            run_replicate(k, settings, population)
            for k in tqdm(range(K), desc="Replicates", disable=not progress)
        ]
    else:
        with Pool(
            processes=workers, initializer=_worker_init, initargs=(settings, population)
        ) as pool:
            results = list(
                tqdm(
                    pool.imap_unordered(_worker_run_replicate, range(K)),
                    total=K,
                    desc="Replicates",
                    disable=not progress,
                )
            )

    metrics, failed = aggregate(results, pop_config)
    if not metrics:
        raise InferenceError(f"All {K} replicates failed")
    if failed:
        logger.warning(f"{len(failed)} model fit(s) failed across replicates")

    report = ReplicationReport(
        K=K,
        metrics=metrics,
        failed=failed,
        settings={
            "population": pop_config.to_dict(),
            "design": design.to_dict(),
            "sampler": sampler.to_dict(),
            "alpha": alpha,
            "eta": eta,
            "regenerate_population": regenerate_population,
        },
    )
    for model, blocks in metrics.items():
        logger.info(
            f"{model:>10}: theta RMSE {blocks['theta']['rmse']:.4f}, "
            f"bias {blocks['theta']['abs_bias']:.4f}; phi RMSE {blocks['phi']['rmse']:.4f}"
        )
    return report
