"""
Choosing the number of topics.

Topics are added one at a time; the first J whose smallest posterior-mean
topic proportion drops below 1% signals an empty topic, and the previous J
is reported.
"""

import logging
from typing import Callable, List, Tuple

import numpy as np
from tqdm import tqdm

from ..core.corpus import Corpus
from ..errors import CapReached, ConfigError

logger = logging.getLogger(__name__)

MIN_PROPORTION = 0.01

FitFn = Callable[[Corpus, int], np.ndarray]


def select_num_topics(
    corpus: Corpus,
    fit_fn: FitFn,
    j_start: int = 2,
    j_max: int = 10,
    progress: bool = True,
) -> Tuple[int, List[Tuple[int, float]]]:
    """
    Fit J = j_start, j_start + 1, ... until a topic becomes negligible.

    Args:
        corpus: Corpus to fit
        fit_fn: (corpus, J) -> posterior-mean theta of length J
        j_start: First J to fit
        j_max: Largest J to fit

    Returns:
        (J*, trace of (J, min proportion)); J* is the last J before the rule fired

    Raises:
        CapReached: The rule never fired up to j_max (carries the trace)
    """
    if j_start < 2 or j_max < j_start:
        raise ConfigError(f"Need 2 <= j_start <= j_max, got j_start={j_start}, j_max={j_max}")

    trace: List[Tuple[int, float]] = []
    for J in tqdm(range(j_start, j_max + 1), desc="Topic counts", disable=not progress):
        theta_mean = np.asarray(fit_fn(corpus, J), dtype=np.float64)
        min_prop = float(theta_mean.min())
        trace.append((J, min_prop))
        logger.info(f"J={J}: smallest topic proportion {min_prop:.4f}")
        if min_prop < MIN_PROPORTION:
            logger.info(f"Rule fired at J={J}; selected J*={J - 1}")
            return J - 1, trace

    raise CapReached(
        f"No topic proportion fell below {MIN_PROPORTION} up to J={j_max}", trace
    )
