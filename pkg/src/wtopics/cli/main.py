"""
Main CLI for survey-weighted topic models.

Exit codes: 0 success, 2 configuration error, 3 data error, 4 inference failure.
"""

import argparse
import json
import logging
import sys
from dataclasses import asdict
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from ..core.corpus import Corpus, TokenizeRules, build_corpus, load_jsonl, load_stopwords
from ..core.corpus import write_vocabulary_csv
from ..core.hier import DesignEncoder, HierLayout, HierSpec, group_topic_proportions
from ..core.model import MouSpec, params_to_json
from ..errors import CapReached, ConfigError, DataError, InsufficientDraws, WtopicsError
from ..inference.fit import HierFit, MouFit, fit_hier, fit_mou
from ..inference.hmc import HmcConfig
from ..posterior.effects import summarize_effects
from ..posterior.selection import select_num_topics
from ..posterior.summary import (
    ClusterAssignment,
    TopicSummary,
    assign_documents,
    assign_documents_by_vote,
    assignments_frame,
    summarize,
    topics_frame,
)
from ..simstudy.design import SamplingDesign, draw_informative_sample
from ..simstudy.population import PopulationConfig, generate_population
from ..simstudy.replicate import SAMPLE_STREAM, run_replications
from ..storage import CsvSampleStore, read_json, write_csv, write_json
from ..utils.config import RunConfig, build, load_config, merged_section, resolve_threads
from ..utils.rng import make_rng

logger = logging.getLogger(__name__)

LOG_LEVELS = ["DEBUG", "INFO", "WARNING", "ERROR"]


def setup_logging(level: str = "INFO", file: Optional[str] = None) -> None:
    """Configure logging."""
    handlers: List[logging.Handler] = [logging.StreamHandler()]
    if file:
        Path(file).parent.mkdir(parents=True, exist_ok=True)
        handlers.append(logging.FileHandler(file))
    logging.basicConfig(
        level=getattr(logging, level.upper()),
        format="%(asctime)s [%(levelname)s] %(name)s: %(message)s",
        datefmt="%Y-%m-%d %H:%M:%S",
        handlers=handlers,
        force=True,
    )


def banner(title: str) -> None:
    logger.info("=" * 60)
    logger.info(title)
    logger.info("=" * 60)


def _split_names(value: Optional[str]) -> List[str]:
    if not value:
        return []
    return [name.strip() for name in value.split(",") if name.strip()]


def _output_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _sampler_config(args, config: Dict[str, Any]) -> HmcConfig:
    flags = {
        "iterations": args.iterations,
        "burn_in": args.burn_in,
        "chains": args.chains,
        "seed": args.seed,
    }
    return build(HmcConfig, merged_section(config, "sampler", flags), "sampler")


def _load_corpus(args, config: Dict[str, Any]) -> Tuple[Corpus, List[str], Dict[str, Any]]:
    settings = merged_section(
        config,
        "corpus",
        {
            "input": args.input,
            "min_count": args.min_count,
            "stopwords": args.stopwords,
            "unweighted": True if args.unweighted else None,
        },
    )
    unknown = sorted(set(settings) - {"input", "min_count", "stopwords", "unweighted"})
    if unknown:
        raise ConfigError(f"[corpus] unknown field(s) {unknown}")
    if not settings.get("input"):
        raise ConfigError("--input is required (or corpus.input in the config file)")
    settings.setdefault("min_count", 1)
    settings.setdefault("stopwords", None)
    settings.setdefault("unweighted", False)

    raw = load_jsonl(settings["input"])
    rules = TokenizeRules(stopwords=load_stopwords(settings["stopwords"]))
    corpus, dropped = build_corpus(
        raw, rules, min_count=int(settings["min_count"]), unweighted=bool(settings["unweighted"])
    )
    return corpus, dropped, settings


def _output_settings(args, config: Dict[str, Any]) -> Dict[str, Any]:
    settings = merged_section(
        config, "output", {"top_words": args.top_words, "assign": args.assign}
    )
    settings.setdefault("top_words", 15)
    settings.setdefault("assign", "plugin")
    if settings["assign"] not in ("plugin", "vote"):
        raise ConfigError(
            f"[output] assign must be 'plugin' or 'vote', got {settings['assign']!r}"
        )
    if int(settings["top_words"]) < 1:
        raise ConfigError("[output] top_words must be >= 1")
    return settings


def _topics(model: Dict[str, Any], minimum: int) -> int:
    if model.get("topics") is None:
        raise ConfigError("--topics is required (or model.topics in the config file)")
    J = int(model["topics"])
    if J < minimum:
        raise ConfigError(f"--topics must be >= {minimum}, got {J}")
    return J


def _mou_spec(J: int, corpus: Corpus, alpha: float, eta: float) -> MouSpec:
    if corpus.vocab.V < 2:
        raise DataError(f"Vocabulary has V={corpus.vocab.V} token(s); the model needs V >= 2")
    try:
        return MouSpec(J=J, V=corpus.vocab.V, alpha=float(alpha), eta=float(eta))
    except DataError as e:
        raise ConfigError(f"[model] {e}") from e


def _diagnostics_record(fit) -> Optional[Dict[str, Any]]:
    try:
        diag = fit.samples.diagnostics().to_dict()
    except InsufficientDraws as e:
        logger.warning(f"Diagnostics skipped: {e}")
        return None
    diag["divergent"] = int(fit.samples.divergent.sum())
    return diag


def _write_fit_outputs(
    out: Path,
    corpus: Corpus,
    fit,
    summary: TopicSummary,
    assignment: ClusterAssignment,
    run: RunConfig,
    dropped: List[str],
) -> None:
    record = {
        "model": run.command,
        "documents": corpus.M,
        "vocabulary": corpus.vocab.V,
        "dropped_documents": dropped,
        **summary.to_dict(),
        "diagnostics": _diagnostics_record(fit),
        "config": run.settings,
    }
    write_json(out / "summary.json", record)
    write_csv(out / "topics.csv", topics_frame(summary))
    write_csv(out / "assignments.csv", assignments_frame(assignment))
    write_vocabulary_csv(corpus, out / "vocabulary.csv")
    CsvSampleStore(out / "chains").save(fit.samples, {"command": run.command})
    write_json(out / "manifest.json", run.manifest())


def fit_command(args) -> int:
    """Fit the (weighted) mixture of unigrams."""
    config = load_config(args.config)
    corpus, dropped, corpus_settings = _load_corpus(args, config)
    model = merged_section(
        config, "model", {"topics": args.topics, "alpha": args.alpha, "eta": args.eta}
    )
    J = _topics(model, 1)
    spec = _mou_spec(J, corpus, model.get("alpha", 1.0), model.get("eta", 1.0))
    sampler = _sampler_config(args, config)
    output = _output_settings(args, config)
    threads = resolve_threads(args.threads)
    out = _output_dir(args)

    run = RunConfig(
        command="fit",
        settings={
            "corpus": corpus_settings,
            "model": {"topics": spec.J, "alpha": spec.alpha, "eta": spec.eta},
            "sampler": sampler.to_dict(),
            "output": output,
        },
    )

    banner(f"SAMPLING: MoU with J={J} on M={corpus.M}, V={corpus.vocab.V}")
    fit: MouFit = fit_mou(corpus, spec, sampler, num_workers=threads)

    banner("SUMMARY")
    summary = summarize(fit.draws, corpus.vocab, top_k=int(output["top_words"]))
    if output["assign"] == "vote":
        assignment = assign_documents_by_vote(corpus, fit.draws)
    else:
        assignment = assign_documents(corpus, summary.theta_mean, summary.phi_mean)
    for j, (m, lo, hi) in enumerate(zip(summary.theta_mean, summary.theta_lo, summary.theta_hi)):
        words = ", ".join(tok for tok, _ in summary.top_words[j][:5])
        logger.info(f"Topic {j + 1}: theta {m:.3f} [{lo:.3f}, {hi:.3f}]  {words}")

    _write_fit_outputs(out, corpus, fit, summary, assignment, run, dropped)
    write_json(out / "params.json", params_to_json(spec, summary.theta_mean, summary.phi_mean))
    logger.info(f"Outputs written to {out}")
    return 0


def fit_hier_command(args) -> int:
    """Fit the hierarchical mixture of unigrams with covariate effects."""
    config = load_config(args.config)
    model = merged_section(
        config,
        "model",
        {
            "topics": args.topics,
            "eta": args.eta,
            "a": args.a,
            "b": args.b,
            "sigma2_beta": args.sigma2_beta,
            "variance_prior": args.variance_prior,
            "shared_variance": True if args.shared_variance else None,
            "fixed": args.fixed,
            "random": args.random,
        },
    )
    fixed = model.get("fixed") or []
    fixed = _split_names(fixed) if isinstance(fixed, str) else [str(f) for f in fixed]
    random = model.get("random") or None
    if not fixed and not random:
        raise ConfigError("Declare at least one effect with --fixed or --random")
    J = _topics(model, 2)

    corpus, dropped, corpus_settings = _load_corpus(args, config)
    encoder = DesignEncoder.fit([doc.covariates for doc in corpus.docs], fixed, random)
    spec = build(
        HierSpec,
        {
            "J": J,
            "V": corpus.vocab.V,
            "p": encoder.p,
            "r": encoder.r,
            **{
                k: model[k]
                for k in ("a", "b", "sigma2_beta", "eta", "variance_prior", "shared_variance")
                if k in model
            },
        },
        "model",
    )
    sampler = _sampler_config(args, config)
    output = _output_settings(args, config)
    threads = resolve_threads(args.threads)
    out = _output_dir(args)

    spec_dict = asdict(spec)
    run = RunConfig(
        command="fit-hier",
        settings={
            "corpus": corpus_settings,
            "model": {**spec_dict, "topics": J, "fixed": fixed, "random": random},
            "sampler": sampler.to_dict(),
            "output": output,
        },
    )

    banner(
        f"SAMPLING: hierarchical MoU with J={J}, p={encoder.p}, r={encoder.r} on M={corpus.M}"
    )
    fit: HierFit = fit_hier(corpus, encoder, spec, sampler, num_workers=threads)

    banner("SUMMARY")
    summary = summarize(fit.draws, corpus.vocab, top_k=int(output["top_words"]))
    if output["assign"] == "vote":
        assignment = assign_documents_by_vote(corpus, fit.draws, fit.theta_docs_draw)
    else:
        assignment = assign_documents(corpus, fit.theta_docs_mean(), summary.phi_mean)

    _write_fit_outputs(out, corpus, fit, summary, assignment, run, dropped)
    write_json(out / "effects.json", summarize_effects(fit))
    write_json(out / "model.json", {"spec": spec_dict, "encoder": encoder.to_dict()})
    perms = pd.DataFrame(fit.permutations + 1, columns=[f"topic_{j + 1}" for j in range(J)])
    perms.insert(0, "draw", np.arange(perms.shape[0]))
    write_csv(out / "permutations.csv", perms)
    logger.info(f"Outputs written to {out}")
    return 0


def parse_group(text: str) -> Dict[str, str]:
    """'name=level,name=level' -> {name: level}."""
    combo: Dict[str, str] = {}
    for part in _split_names(text):
        if "=" not in part:
            raise ConfigError(f"Group spec {text!r}: expected name=level, got {part!r}")
        name, level = part.split("=", 1)
        combo[name.strip()] = level.strip()
    if not combo:
        raise ConfigError(f"Empty group spec {text!r}")
    return combo


def compare_groups_command(args) -> int:
    """Compare posterior topic proportions across covariate groups of a fitted run."""
    if not args.group:
        raise ConfigError("Give at least one --group name=level[,name=level...]")
    groups = [(text, parse_group(text)) for text in args.group]
    run_dir = Path(args.run)
    model = read_json(run_dir / "model.json")
    try:
        spec = HierSpec(**model["spec"])
        encoder = DesignEncoder.from_dict(model["encoder"])
    except (KeyError, TypeError) as e:
        raise DataError(f"{run_dir / 'model.json'}: malformed model record ({e})") from e
    samples = CsvSampleStore(run_dir / "chains").load()
    perm_path = run_dir / "permutations.csv"
    if not perm_path.exists():
        raise DataError(f"File not found: {perm_path}")
    perms = pd.read_csv(perm_path).drop(columns="draw").to_numpy(dtype=np.int64) - 1
    layout = HierLayout(spec)
    out = _output_dir(args)

    rows = []
    for label, combo in groups:
        result = group_topic_proportions(combo, samples, encoder, layout, permutations=perms)
        for j in range(spec.J):
            rows.append(
                {
                    "group": label,
                    "topic": j + 1,
                    "mean": float(result.mean[j]),
                    "lo": float(result.lo[j]),
                    "hi": float(result.hi[j]),
                }
            )
        logger.info(f"{label}: " + ", ".join(f"{m:.3f}" for m in result.mean))

    frame = pd.DataFrame(rows, columns=["group", "topic", "mean", "lo", "hi"])
    write_csv(out / "groups.csv", frame)
    run = RunConfig(
        command="compare-groups",
        settings={"run": str(run_dir), "groups": [label for label, _ in groups]},
    )
    write_json(out / "manifest.json", run.manifest())
    return 0


def _study_configs(args, config: Dict[str, Any]) -> Tuple[PopulationConfig, SamplingDesign]:
    population = merged_section(config, "population", {"M_pop": args.M_pop, "seed": args.seed})
    design = merged_section(
        config,
        "design",
        {
            "boost": args.boost,
            "sample_size": args.sample_size,
            "target_topic": args.target_topic,
        },
    )
    if "theta_true" in population and population["theta_true"] is not None:
        population["theta_true"] = tuple(population["theta_true"])
    if "phi_true" in population and population["phi_true"] is not None:
        population["phi_true"] = tuple(tuple(row) for row in population["phi_true"])
    return (
        build(PopulationConfig, population, "population"),
        build(SamplingDesign, design, "design"),
    )


def _write_jsonl(path: Path, records: Sequence[Dict[str, Any]]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for record in records:
            f.write(json.dumps(record) + "\n")


def simulate_command(args) -> int:
    """Write a synthetic population and one informative sample as JSONL."""
    config = load_config(args.config)
    pop_config, design = _study_configs(args, config)
    seed = args.seed if args.seed is not None else int(config.get("sampler", {}).get("seed", 0))
    out = _output_dir(args)

    banner(f"SIMULATION: M_pop={pop_config.M_pop}, m={design.sample_size}, c={design.boost}")
    pop = generate_population(pop_config)
    sample = draw_informative_sample(pop, design, make_rng(seed, SAMPLE_STREAM, 0))
    tokens = [f"w{v + 1}" for v in range(pop_config.V)]

    def counts_of(row: np.ndarray) -> Dict[str, int]:
        return {tokens[v]: int(row[v]) for v in np.flatnonzero(row)}

    _write_jsonl(
        out / "population.jsonl",
        [
            {"id": f"d{d:06d}", "counts": counts_of(pop.counts[d]), "true_topic": int(z) + 1}
            for d, z in enumerate(pop.labels)
        ],
    )
    _write_jsonl(
        out / "sample.jsonl",
        [
            {
                "id": f"d{int(d):06d}",
                "counts": counts_of(pop.counts[d]),
                "weight": float(1.0 / pi),
                "inclusion_prob": float(pi),
                "true_topic": int(z) + 1,
            }
            for d, pi, z in zip(sample.indices, sample.inclusion, sample.labels)
        ],
    )
    run = RunConfig(
        command="simulate",
        settings={"population": pop_config.to_dict(), "design": design.to_dict(), "seed": seed},
    )
    write_json(out / "manifest.json", run.manifest())
    logger.info(f"Wrote {pop.size} population and {sample.corpus.M} sampled documents to {out}")
    return 0


def replicate_command(args) -> int:
    """Run the simulation study and write the weighted vs unweighted comparison."""
    config = load_config(args.config)
    pop_config, design = _study_configs(args, config)
    sampler = _sampler_config(args, config)
    study = merged_section(
        config,
        "study",
        {"K": args.K, "regenerate_population": True if args.regenerate_population else None},
    )
    model = merged_section(config, "model", {"alpha": args.alpha, "eta": args.eta})
    threads = resolve_threads(args.threads)
    out = _output_dir(args)

    report = run_replications(
        pop_config,
        design,
        sampler,
        K=int(study.get("K", 100)),
        alpha=float(model.get("alpha", 1.0)),
        eta=float(model.get("eta", 1.0)),
        num_workers=threads,
        regenerate_population=bool(study.get("regenerate_population", False)),
    )
    write_json(out / "report.json", report.to_dict())
    write_csv(out / "report.csv", report.to_frame())
    run = RunConfig(
        command="replicate",
        settings={**report.settings, "K": report.K},
    )
    write_json(out / "manifest.json", run.manifest())
    print(report.to_frame().to_string(index=False))
    return 0


def select_topics_command(args) -> int:
    """Increase the number of topics until one becomes negligible."""
    config = load_config(args.config)
    corpus, _, corpus_settings = _load_corpus(args, config)
    model = merged_section(
        config, "model", {"alpha": args.alpha, "eta": args.eta, "max_topics": args.max_topics}
    )
    alpha, eta = float(model.get("alpha", 1.0)), float(model.get("eta", 1.0))
    j_max = int(model.get("max_topics", 10))
    sampler = _sampler_config(args, config)
    threads = resolve_threads(args.threads)
    out = _output_dir(args)

    def fit_fn(c: Corpus, J: int) -> np.ndarray:
        spec = _mou_spec(J, c, alpha, eta)
        fit = fit_mou(c, spec, sampler, num_workers=threads, progress=False)
        return fit.draws.theta.mean(axis=0)

    banner(f"TOPIC COUNT SELECTION: J = 2 .. {j_max}")
    cap_reached = False
    try:
        j_star, trace = select_num_topics(corpus, fit_fn, j_start=2, j_max=j_max)
    except CapReached as e:
        logger.warning(str(e))
        j_star, trace, cap_reached = None, e.trace, True

    table = pd.DataFrame(trace, columns=["J", "min_proportion"])
    write_csv(out / "selection.csv", table)
    run = RunConfig(
        command="select-topics",
        settings={
            "corpus": corpus_settings,
            "model": {"alpha": alpha, "eta": eta, "max_topics": j_max},
            "sampler": sampler.to_dict(),
        },
    )
    write_json(out / "manifest.json", run.manifest(j_star=j_star, cap_reached=cap_reached))

    print(table.to_string(index=False))
    if cap_reached:
        print(f"CapReached: no topic fell below 1% up to J={j_max}")
    else:
        print(f"Selected J* = {j_star}")
    return 0


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="YAML/JSON config file (flags override its values)")
    parser.add_argument("--out", required=True, help="Output directory")
    parser.add_argument("--seed", type=int, help="Master random seed")
    parser.add_argument(
        "--threads", type=int, help="Worker processes (default: WTOPICS_THREADS or 1)"
    )


def _add_sampler(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--iterations", type=int, help="Iterations per chain (default 3000)")
    parser.add_argument("--burn-in", type=int, help="Burn-in iterations (default 500)")
    parser.add_argument("--chains", type=int, help="Number of chains (default 4)")


def _add_corpus(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--input", help="JSONL documents")
    parser.add_argument("--min-count", type=int, help="Minimum token count (default 1)")
    parser.add_argument("--stopwords", help="Stopword file, one token per line")
    parser.add_argument("--unweighted", action="store_true", help="Set every weight to 1")


def _add_output(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--top-words", type=int, help="Words listed per topic (default 15)")
    parser.add_argument(
        "--assign", choices=["plugin", "vote"], help="Document clustering rule (default plugin)"
    )


def _add_study(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--M-pop", dest="M_pop", type=int, help="Population size (default 10000)")
    parser.add_argument("--boost", type=float, help="Selection factor c of the target topic")
    parser.add_argument("--sample-size", type=int, help="Sample size m (default 100)")
    parser.add_argument("--target-topic", type=int, help="0-based index of the boosted topic")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="Survey-weighted topic models")
    parser.add_argument("--log-level", default=None, choices=LOG_LEVELS, help="Logging level")
    subparsers = parser.add_subparsers(dest="command", help="Command to run")

    fit_parser = subparsers.add_parser("fit", help="Fit the weighted mixture of unigrams")
    _add_common(fit_parser)
    _add_sampler(fit_parser)
    _add_corpus(fit_parser)
    _add_output(fit_parser)
    fit_parser.add_argument("--topics", type=int, help="Number of topics J")
    fit_parser.add_argument("--alpha", type=float, help="Dirichlet concentration of theta")
    fit_parser.add_argument("--eta", type=float, help="Dirichlet concentration of phi")
    fit_parser.set_defaults(func=fit_command)

    hier_parser = subparsers.add_parser("fit-hier", help="Fit the hierarchical model")
    _add_common(hier_parser)
    _add_sampler(hier_parser)
    _add_corpus(hier_parser)
    _add_output(hier_parser)
    hier_parser.add_argument("--topics", type=int, help="Number of topics J (>= 2)")
    hier_parser.add_argument("--eta", type=float, help="Dirichlet concentration of phi")
    hier_parser.add_argument("--fixed", help="Comma-separated fixed-effect covariates")
    hier_parser.add_argument("--random", help="Random-effect covariate")
    hier_parser.add_argument("--a", type=float, help="Variance prior shape (default 0.1)")
    hier_parser.add_argument("--b", type=float, help="Variance prior rate (default 0.1)")
    hier_parser.add_argument("--sigma2-beta", type=float, help="Fixed-effect prior variance")
    hier_parser.add_argument(
        "--variance-prior", choices=["inverse_gamma", "gamma"], help="Prior on sigma2_gamma"
    )
    hier_parser.add_argument(
        "--shared-variance", action="store_true", help="One random-effect variance for all topics"
    )
    hier_parser.set_defaults(func=fit_hier_command)

    groups_parser = subparsers.add_parser(
        "compare-groups", help="Topic proportions of covariate groups from a fit-hier run"
    )
    groups_parser.add_argument("--run", required=True, help="Output directory of fit-hier")
    groups_parser.add_argument(
        "--group", action="append", help="name=level[,name=level...] (repeatable)"
    )
    groups_parser.add_argument("--out", required=True, help="Output directory")
    groups_parser.set_defaults(func=compare_groups_command)

    sim_parser = subparsers.add_parser("simulate", help="Write a synthetic population and sample")
    _add_common(sim_parser)
    _add_study(sim_parser)
    sim_parser.set_defaults(func=simulate_command)

    rep_parser = subparsers.add_parser("replicate", help="Run the simulation study")
    _add_common(rep_parser)
    _add_sampler(rep_parser)
    _add_study(rep_parser)
    rep_parser.add_argument("--K", type=int, help="Number of replicates (default 100)")
    rep_parser.add_argument("--alpha", type=float, help="Dirichlet concentration of theta")
    rep_parser.add_argument("--eta", type=float, help="Dirichlet concentration of phi")
    rep_parser.add_argument(
        "--regenerate-population", action="store_true", help="Fresh population per replicate"
    )
    rep_parser.set_defaults(func=replicate_command)

    sel_parser = subparsers.add_parser("select-topics", help="Choose the number of topics")
    _add_common(sel_parser)
    _add_sampler(sel_parser)
    _add_corpus(sel_parser)
    sel_parser.add_argument("--max-topics", type=int, help="Largest J to fit (default 10)")
    sel_parser.add_argument("--alpha", type=float, help="Dirichlet concentration of theta")
    sel_parser.add_argument("--eta", type=float, help="Dirichlet concentration of phi")
    sel_parser.set_defaults(func=select_topics_command)

    return parser


def _logging_settings(args) -> Tuple[str, Optional[str]]:
    level, file = "INFO", None
    config_path = getattr(args, "config", None)
    if config_path:
        try:
            section = load_config(config_path).get("logging", {})
        except ConfigError:
            section = {}
        level = str(section.get("level", level))
        file = section.get("file")
    if args.log_level:
        level = args.log_level
    if level.upper() not in LOG_LEVELS:
        level = "INFO"
    return level, file


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Main entry point."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    if not getattr(args, "func", None):
        parser.print_help()
        return 2

    setup_logging(*_logging_settings(args))
    try:
        return args.func(args)
    except WtopicsError as e:
        logger.error(f"{type(e).__name__}: {e}")
        return e.exit_code


if __name__ == "__main__":
    sys.exit(main())
