#!/usr/bin/env python3
"""
Validate the simulation study at reduced scale.

Runs K=20 replicates (1500 iterations, 300 burn-in, 2 chains) of the
M_pop=10,000, lambda=30, V=6, J=3, m=100, c=5 design and checks:
1. theta RMSE: weighted < 0.10, unweighted > 0.15
2. theta absolute bias: weighted < 0.05 and < unweighted / 3
3. phi RMSE of the two models within 0.01 of each other
"""

import argparse
import logging
import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent.parent))

from src.wtopics.inference.hmc import HmcConfig
from src.wtopics.simstudy import PopulationConfig, SamplingDesign, run_replications
from src.wtopics.storage import write_csv, write_json

logging.basicConfig(
    level=logging.INFO,
    format="%(asctime)s [%(levelname)s] %(name)s: %(message)s",
    datefmt="%Y-%m-%d %H:%M:%S",
    force=True,
)

logger = logging.getLogger(__name__)


def main():
    parser = argparse.ArgumentParser(description="Reduced-scale simulation study check")
    parser.add_argument("--workers", type=int, default=1, help="Parallel replicates")
    parser.add_argument("--seed", type=int, default=1, help="Master seed")
    parser.add_argument("--out", default="data/validate_simstudy", help="Report directory")
    args = parser.parse_args()

    logger.info("=" * 70)
    logger.info("SIMULATION STUDY VALIDATION - K=20, M_pop=10,000, m=100, c=5")
    logger.info("=" * 70)

    start = time.time()
    report = run_replications(
        PopulationConfig(M_pop=10_000, lam=30.0, V=6, J=3, seed=args.seed),
        SamplingDesign(target_topic=0, boost=5.0, sample_size=100),
        HmcConfig(iterations=1500, burn_in=300, chains=2, seed=args.seed),
        K=20,
        num_workers=args.workers,
    )
    elapsed = time.time() - start

    out = Path(args.out)
    write_json(out / "report.json", report.to_dict())
    write_csv(out / "report.csv", report.to_frame())
    logger.info(f"Report written to {out} ({elapsed / 60:.1f} min)")

    w, u = report.metrics["weighted"], report.metrics["unweighted"]
    checks = [
        ("theta RMSE weighted < 0.10", w["theta"]["rmse"] < 0.10),
        ("theta RMSE unweighted > 0.15", u["theta"]["rmse"] > 0.15),
        ("theta bias weighted < 0.05", w["theta"]["abs_bias"] < 0.05),
        (
            "theta bias weighted < unweighted / 3",
            w["theta"]["abs_bias"] < u["theta"]["abs_bias"] / 3,
        ),
        ("phi RMSE within 0.01", abs(w["phi"]["rmse"] - u["phi"]["rmse"]) < 0.01),
    ]

    logger.info("=" * 70)
    logger.info("VALIDATION RESULTS")
    logger.info("=" * 70)
    print(report.to_frame().to_string(index=False))
    success = True
    for name, ok in checks:
        if ok:
            logger.info(f"PASS  {name}")
        else:
            logger.error(f"FAIL  {name}")
            success = False

    if report.failed:
        logger.warning(f"{len(report.failed)} fit(s) failed; see report.json")
    return 0 if success else 1


if __name__ == "__main__":
    sys.exit(main())
