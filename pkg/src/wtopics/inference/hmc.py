"""
Hamiltonian Monte Carlo with dual-averaging step-size adaptation.

Each chain:
- starts at N(0, init_scale^2) in unconstrained space
- picks an initial step size with the doubling/halving heuristic
- adapts the step size by dual averaging during burn-in toward target_accept
- freezes the step size afterwards and keeps every post-burn-in draw

The leapfrog count is jittered by +/-20% per iteration. Chains are independent
and run in worker processes when more than one worker is allowed; every chain
draws from its own counter-based stream keyed by (seed, chain), so results do
not depend on scheduling.
"""

import logging
from dataclasses import asdict, dataclass, field
from multiprocessing import Pool
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np
from tqdm import tqdm

from ..errors import AllDivergent, ConfigError, NonFinite
from ..utils.rng import make_rng
from .diagnostics import Diagnostics, summarize_diagnostics

logger = logging.getLogger(__name__)

Target = Callable[[np.ndarray], Tuple[float, np.ndarray]]

DIVERGENCE_THRESHOLD = 1000.0
MAX_DIVERGENT_FRACTION = 0.9
MAX_INIT_ATTEMPTS = 100


@dataclass(frozen=True)
class HmcConfig:
    """Sampler settings. Defaults follow the simulation study (3000 iterations, 500 burn-in)."""

    iterations: int = 3000
    burn_in: int = 500
    leapfrog_steps: int = 32
    jitter: float = 0.2
    target_accept: float = 0.8
    chains: int = 4
    seed: int = 0
    init_scale: float = 0.1
    adapt_mass: bool = False

    def __post_init__(self) -> None:
        if self.iterations <= 0 or self.leapfrog_steps <= 0 or self.chains <= 0:
            raise ConfigError("iterations, leapfrog_steps and chains must be positive")
        if not 0 <= self.burn_in < self.iterations:
            raise ConfigError(
                f"burn_in must be in [0, iterations); got {self.burn_in} vs {self.iterations}"
            )
        if not 0 < self.target_accept < 1:
            raise ConfigError(f"target_accept must be in (0, 1), got {self.target_accept}")
        if not 0 <= self.jitter < 1:
            raise ConfigError(f"jitter must be in [0, 1), got {self.jitter}")
        if self.init_scale <= 0:
            raise ConfigError("init_scale must be positive")
        if self.seed < 0:
            raise ConfigError(f"seed must be non-negative, got {self.seed}")

    @property
    def retained(self) -> int:
        return self.iterations - self.burn_in

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass
class SampleSet:
    """
    Post-burn-in draws of every chain.

    draws has shape (chains, retained, dim) and lives in the unconstrained
    space; model layouts turn it into constrained views.
    """

    draws: np.ndarray
    log_post: np.ndarray
    accept_prob: np.ndarray
    divergent: np.ndarray
    step_size: np.ndarray
    param_names: List[str]
    config: HmcConfig
    inv_mass: Optional[np.ndarray] = None
    _diagnostics: Optional[Diagnostics] = field(default=None, repr=False, compare=False)

    @property
    def num_chains(self) -> int:
        return self.draws.shape[0]

    @property
    def num_retained(self) -> int:
        return self.draws.shape[1]

    @property
    def dim(self) -> int:
        return self.draws.shape[2]

    def flat_draws(self) -> np.ndarray:
        """(chains * retained, dim), chain-major."""
        return self.draws.reshape(-1, self.dim)

    def acceptance_rate(self) -> np.ndarray:
        return self.accept_prob.mean(axis=1)

    def diagnostics(self) -> Diagnostics:
        if self._diagnostics is None:
            self._diagnostics, _ = summarize_diagnostics(self.draws, self.accept_prob)
        return self._diagnostics


def leapfrog(
    position: np.ndarray,
    momentum: np.ndarray,
    step_size: float,
    steps: int,
    grad_fn: Callable[[np.ndarray], np.ndarray],
    inv_mass: Optional[np.ndarray] = None,
    initial_grad: Optional[np.ndarray] = None,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Symplectic leapfrog integration with a diagonal mass matrix.

    Args:
        position: Start position q
        momentum: Start momentum p
        step_size: Integrator step epsilon
        steps: Number of leapfrog steps (0 returns the inputs)
        grad_fn: Gradient of the potential (negative log posterior)
        inv_mass: Diagonal of the inverse mass matrix (identity when None)
        initial_grad: grad_fn(position) if already known

    Returns:
        (position', momentum')
    """
    q = np.array(position, dtype=np.float64)
    p = np.array(momentum, dtype=np.float64)
    if steps == 0:
        return q, p
    inv_m = 1.0 if inv_mass is None else inv_mass
    g = grad_fn(q) if initial_grad is None else initial_grad
    p = p - 0.5 * step_size * g
    for i in range(steps):
        q = q + step_size * inv_m * p
        g = grad_fn(q)
        p = p - (step_size if i < steps - 1 else 0.5 * step_size) * g
    return q, p


class _Potential:
    """Wraps a (log_post, grad) target as a potential gradient and keeps the last value."""

    def __init__(self, target: Target):
        self.target = target
        self.log_post = np.nan
        self.grad = None

    def __call__(self, q: np.ndarray) -> np.ndarray:
        with np.errstate(all="ignore"):
            value, grad = self.target(q)
        self.log_post = float(value)
        self.grad = np.asarray(grad, dtype=np.float64)
        return -self.grad


@dataclass
class _Transition:
    position: np.ndarray
    log_post: float
    grad: np.ndarray
    accept_prob: float
    divergent: bool


def _kinetic(p: np.ndarray, inv_mass: np.ndarray) -> float:
    return 0.5 * float(np.sum(inv_mass * p * p))


def _hmc_transition(
    target: Target,
    q: np.ndarray,
    log_post: float,
    grad: np.ndarray,
    step_size: float,
    steps: int,
    inv_mass: np.ndarray,
    rng: np.random.Generator,
) -> _Transition:
    p0 = rng.standard_normal(q.shape[0]) / np.sqrt(inv_mass)
    h0 = -log_post + _kinetic(p0, inv_mass)
    log_u = np.log(rng.uniform())

    potential = _Potential(target)
    try:
        with np.errstate(all="ignore"):
            q1, p1 = leapfrog(q, p0, step_size, steps, potential, inv_mass, initial_grad=-grad)
        h1 = -potential.log_post + _kinetic(p1, inv_mass)
    except (NonFinite, FloatingPointError):
        h1 = np.inf

    delta = h1 - h0
    if not np.isfinite(delta) or delta > DIVERGENCE_THRESHOLD:
        return _Transition(q, log_post, grad, 0.0, True)

    accept_prob = float(min(1.0, np.exp(min(0.0, -delta))))
    if log_u < -delta:
        return _Transition(q1, potential.log_post, potential.grad, accept_prob, False)
    return _Transition(q, log_post, grad, accept_prob, False)


def find_reasonable_step_size(
    target: Target,
    q: np.ndarray,
    log_post: float,
    grad: np.ndarray,
    inv_mass: np.ndarray,
    rng: np.random.Generator,
    step_size: float = 1.0,
) -> float:
    """Double or halve the step size until one-step acceptance crosses 0.5."""

    def one_step_accept(eps: float) -> float:
        t = _hmc_transition(target, q, log_post, grad, eps, 1, inv_mass, rng)
        return t.accept_prob

    a = one_step_accept(step_size)
    direction = 1.0 if a > 0.5 else -1.0
    for _ in range(60):
        crossed = a < 0.5 if direction > 0 else a > 0.5
        if crossed:
            break
        step_size *= 2.0**direction
        a = one_step_accept(step_size)
    return float(np.clip(step_size, 1e-10, 1e3))


class DualAveraging:
    """Dual-averaging step-size adaptation (gamma=0.05, t0=10, kappa=0.75)."""

    def __init__(self, step_size: float, target_accept: float):
        self.mu = np.log(10.0 * step_size)
        self.target_accept = target_accept
        self.h_bar = 0.0
        self.log_eps_bar = 0.0
        self.m = 0
        self.gamma, self.t0, self.kappa = 0.05, 10.0, 0.75

    def update(self, accept_prob: float) -> float:
        self.m += 1
        m = self.m
        w = 1.0 / (m + self.t0)
        self.h_bar = (1.0 - w) * self.h_bar + w * (self.target_accept - accept_prob)
        log_eps = self.mu - np.sqrt(m) / self.gamma * self.h_bar
        eta = m ** (-self.kappa)
        self.log_eps_bar = eta * log_eps + (1.0 - eta) * self.log_eps_bar
        return float(np.exp(log_eps))

    @property
    def final_step_size(self) -> float:
        return float(np.exp(self.log_eps_bar))


def _initial_point(
    target: Target, dim: int, config: HmcConfig, rng: np.random.Generator
) -> Tuple[np.ndarray, float, np.ndarray]:
    for _ in range(MAX_INIT_ATTEMPTS):
        q = rng.normal(0.0, config.init_scale, size=dim)
        with np.errstate(all="ignore"):
            value, grad = target(q)
        grad = np.asarray(grad, dtype=np.float64)
        if np.isfinite(value) and np.all(np.isfinite(grad)):
            return q, float(value), grad
    raise NonFinite(f"Target is not finite at {MAX_INIT_ATTEMPTS} random initial points")


def _jittered_steps(config: HmcConfig, rng: np.random.Generator) -> int:
    scale = rng.uniform(1.0 - config.jitter, 1.0 + config.jitter)
    return max(1, int(round(config.leapfrog_steps * scale)))


def _regularized_variance(window: np.ndarray) -> np.ndarray:
    n = window.shape[0]
    var = window.var(axis=0, ddof=1)
    return (n / (n + 5.0)) * var + 1e-3 * (5.0 / (n + 5.0))


def run_chain(
    target: Target, dim: int, config: HmcConfig, chain: int, progress: bool = False
) -> Dict[str, Any]:
    """
    Run one chain.

    Returns:
        Dict with draws (retained, dim), log_post, accept_prob, divergent,
        step_size and inv_mass.
    """
    rng = make_rng(config.seed, chain)
    q, log_post, grad = _initial_point(target, dim, config, rng)
    inv_mass = np.ones(dim)
    step_size = find_reasonable_step_size(target, q, log_post, grad, inv_mass, rng)
    adapter = DualAveraging(step_size, config.target_accept)
    mass_at = config.burn_in // 2 if config.adapt_mass and config.burn_in >= 40 else -1
    warmup_positions: List[np.ndarray] = []

    R = config.retained
    draws = np.empty((R, dim))
    log_posts = np.empty(R)
    accept = np.empty(R)
    divergent = np.zeros(R, dtype=bool)

    iterator = tqdm(
        range(config.iterations), desc=f"Chain {chain}", unit=" iter", disable=not progress
    )
    for it in iterator:
        steps = _jittered_steps(config, rng)
        t = _hmc_transition(target, q, log_post, grad, step_size, steps, inv_mass, rng)
        q, log_post, grad = t.position, t.log_post, t.grad

        if it < config.burn_in:
            step_size = adapter.update(t.accept_prob)
            if mass_at > 0:
                if it >= mass_at // 2:
                    warmup_positions.append(q)
                if it == mass_at:
                    inv_mass = _regularized_variance(np.vstack(warmup_positions))
                    step_size = find_reasonable_step_size(
                        target, q, log_post, grad, inv_mass, rng, step_size
                    )
                    adapter = DualAveraging(step_size, config.target_accept)
            if it == config.burn_in - 1:
                step_size = adapter.final_step_size
                logger.debug(f"Chain {chain}: adapted step size {step_size:.4g}")
        else:
            r = it - config.burn_in
            draws[r] = q
            log_posts[r] = log_post
            accept[r] = t.accept_prob
            divergent[r] = t.divergent

    return {
        "chain": chain,
        "draws": draws,
        "log_post": log_posts,
        "accept_prob": accept,
        "divergent": divergent,
        "step_size": step_size,
        "inv_mass": inv_mass,
    }


# Per-process target for pooled chains
_worker_target: Optional[Target] = None


def _worker_init(target: Target) -> None:
    global _worker_target
    _worker_target = target


def _worker_run_chain(task: Tuple[int, int, HmcConfig]) -> Dict[str, Any]:
    chain, dim, config = task
    assert _worker_target is not None
    return run_chain(_worker_target, dim, config, chain)


def hmc_sample(
    target: Target,
    config: HmcConfig,
    dim: Optional[int] = None,
    param_names: Optional[List[str]] = None,
    num_workers: int = 1,
    progress: bool = True,
) -> SampleSet:
    """
    Sample a target with multi-chain HMC.

    Args:
        target: Callable u -> (log density, gradient); must be picklable when
            num_workers > 1
        config: Sampler settings
        dim: Dimension of u (defaults to target.dim)
        param_names: Names of the coordinates of u
        num_workers: Worker processes (1 = run chains sequentially in-process)
        progress: Show tqdm progress bars

    Returns:
        SampleSet of post-burn-in draws
    """
    dim = int(dim if dim is not None else getattr(target, "dim"))
    names = param_names or [f"param_{i}" for i in range(dim)]
    workers = max(1, min(num_workers, config.chains))
    logger.info(
        f"HMC: {config.chains} chain(s) x {config.iterations} iterations "
        f"({config.burn_in} burn-in), dim={dim}, workers={workers}"
    )

    if workers == 1:
        results = [
            run_chain(target, dim, config, c, progress=progress) for c in range(config.chains)
        ]
    else:
        tasks = [(c, dim, config) for c in range(config.chains)]
        with Pool(processes=workers, initializer=_worker_init, initargs=(target,)) as pool:
            results = list(
                tqdm(
                    pool.imap(_worker_run_chain, tasks),
                    total=config.chains,
                    desc="Chains",
                    disable=not progress,
                )
            )
    results.sort(key=lambda res: res["chain"])

    samples = SampleSet(
        draws=np.stack([res["draws"] for res in results]),
        log_post=np.stack([res["log_post"] for res in results]),
        accept_prob=np.stack([res["accept_prob"] for res in results]),
        divergent=np.stack([res["divergent"] for res in results]),
        step_size=np.array([res["step_size"] for res in results]),
        param_names=names,
        config=config,
        inv_mass=np.stack([res["inv_mass"] for res in results]),
    )

    n_div = int(samples.divergent.sum())
    total = samples.divergent.size
    if n_div > MAX_DIVERGENT_FRACTION * total:
        raise AllDivergent(f"{n_div} of {total} post-burn-in transitions diverged")
    if n_div:
        logger.warning(f"{n_div} of {total} post-burn-in transitions diverged")
    logger.info(
        "Acceptance per chain: "
        + ", ".join(f"{a:.2f}" for a in samples.acceptance_rate())
        + "; step sizes: "
        + ", ".join(f"{s:.3g}" for s in samples.step_size)
    )
    return samples
