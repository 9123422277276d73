"""Non-convex Follow-the-Perturbed-Leader and the FTRL baseline."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Iterator, NamedTuple, Optional, Sequence, Union

import numpy as np

from .domain import BoxDomain, CallCounter, DomainError, LossFunction, NoiseVector, evaluate
from .losses import abs_distance, quadratic
from .oracles import GridOracle, ScanOracle

if TYPE_CHECKING:
    from .adversaries import Adversary

__all__ = [
    "FRESH",
    "SINGLE",
    "FtplConfig",
    "FtrlConfig",
    "Round",
    "Trajectory",
    "Schedule",
    "sample_exp_noise",
    "default_oracle",
    "ftpl_step",
    "ftpl_run",
    "ftrl_run",
    "regularizer_loss",
    "schedule_params",
]

FRESH = "fresh"
SINGLE = "single"


@dataclass(frozen=True)
class FtplConfig:
    eta: float
    noise_mode: str = FRESH
    seed: int = 0
    oracle_resolution: float = 1e-3

    def __post_init__(self):
        if not self.eta > 0:
            raise ValueError(f"eta must be positive, got {self.eta}")
        if self.noise_mode not in (FRESH, SINGLE):
            raise ValueError(f"noise_mode must be {FRESH!r} or {SINGLE!r}")


@dataclass(frozen=True)
class FtrlConfig:
    regularizer: str = "l2"
    weight: float = 0.0
    oracle_resolution: float = 1e-3

    def __post_init__(self):
        if self.regularizer not in ("l2", "l1"):
            raise ValueError("regularizer must be 'l2' or 'l1'")
        if not self.weight >= 0:
            raise ValueError("regularizer weight must be nonnegative")


class Round(NamedTuple):
    t: int
    sigma: NoiseVector
    w: np.ndarray
    incurred_loss: float


@dataclass
class Trajectory:
    """Per-round log of one online run.

    ``losses`` holds the realized loss sequence, so adaptive runs can be
    replayed later as an oblivious sequence.
    """

    domain: BoxDomain
    sigmas: np.ndarray
    points: np.ndarray
    incurred: np.ndarray
    losses: list
    config: Union[FtplConfig, FtrlConfig, None]
    counter: CallCounter = field(default_factory=CallCounter)
    eta: float = math.inf
    #: cumulative (offline_calls, value_calls) after each round
    call_log: Optional[np.ndarray] = None

    @property
    def T(self) -> int:
        return self.points.shape[0]

    @property
    def rounds(self) -> list[Round]:
        return list(self)

    def __iter__(self) -> Iterator[Round]:
        for i in range(self.T):
            yield Round(i + 1, NoiseVector(self.sigmas[i], self.eta), self.points[i],
                        float(self.incurred[i]))

    def __len__(self):
        return self.T

    @property
    def cumulative_loss(self) -> float:
        return float(np.sum(self.incurred))

    def step_gaps(self) -> np.ndarray:
        """``||w_t - w_{t+1}||_1`` along the realized run."""
        return np.sum(np.abs(np.diff(self.points, axis=0)), axis=1)


@dataclass(frozen=True)
class Schedule:
    eta: float
    delta: float
    horizon: int
    dim: int


def sample_exp_noise(eta: float, d: int, rng: np.random.Generator) -> NoiseVector:
    """``d`` i.i.d. Exp(eta) draws by inversion, ``x = -log(u) / eta`` with u in (0, 1]."""
    if not eta > 0:
        raise ValueError(f"eta must be positive, got {eta}")
    u = 1.0 - rng.random(d)
    return NoiseVector(-np.log(u) / eta, eta)


def schedule_params(T: int, d: int) -> Schedule:
    """Horizon-tuned noise rate and stability margin.

    ``eta = T^-1/2`` in one dimension and ``T^-2/3`` otherwise; the margin
    ``delta = T^-1/3`` only enters the multi-dimensional analysis.
    """
    if T < 1:
        raise ValueError("horizon must be at least 1")
    delta = T ** (-1.0 / 3.0)
    if d == 1:
        return Schedule(eta=T ** -0.5, delta=delta, horizon=T, dim=d)
    return Schedule(eta=T ** (-2.0 / 3.0), delta=delta, horizon=T, dim=d)


def _served(adversary: "Adversary", t: int, w: np.ndarray, domain: BoxDomain) -> LossFunction:
    loss = adversary.loss(t, w)
    if loss.domain is not None and loss.domain.dim != domain.dim:
        raise DomainError(f"round {t} loss has dim {loss.domain.dim}, learner has {domain.dim}")
    return loss


def default_oracle(domain: BoxDomain, resolution: float) -> GridOracle:
    if domain.dim == 1:
        return ScanOracle(resolution)
    return GridOracle(resolution)


def _sigma_array(sigma) -> np.ndarray:
    if isinstance(sigma, NoiseVector):
        return sigma.sigma
    return np.atleast_1d(np.asarray(sigma, dtype=float))


def ftpl_step(history: Sequence[LossFunction], sigma_t, oracle: GridOracle, domain: BoxDomain,
              counter: Optional[CallCounter] = None) -> np.ndarray:
    """One FTPL prediction: argmin of ``sum(history) - sigma_t.w`` (one offline call)."""
    sigma = _sigma_array(sigma_t)
    if sigma.shape != (domain.dim,):
        raise DomainError(f"sigma has dim {sigma.shape}, domain has dim {domain.dim}")
    return oracle.minimize(list(history), sigma, domain, counter).w_hat


def ftpl_run(adversary: "Adversary", T: int, config: FtplConfig,
             oracle: Optional[GridOracle] = None, counter: Optional[CallCounter] = None,
             sigma_override=None) -> Trajectory:
    """Run non-convex FTPL for ``T`` rounds against ``adversary``.

    In ``fresh`` mode a new Exp(eta) vector is drawn each round; in ``single``
    mode one vector is drawn before round 1 and reused. ``sigma_override``
    fixes the noise (single mode only), e.g. zero to recover
    Follow-the-Leader.
    """
    if T < 1:
        raise ValueError("T must be at least 1")
    domain = adversary.domain
    d = domain.dim
    oracle = oracle or default_oracle(domain, config.oracle_resolution)
    counter = counter if counter is not None else CallCounter()
    rng = np.random.default_rng(config.seed)
    session = oracle.session(domain)

    fixed = None
    if sigma_override is not None:
        if config.noise_mode != SINGLE:
            raise ValueError("sigma_override requires single-draw mode")
        fixed = _sigma_array(sigma_override).copy()
        if fixed.shape != (d,):
            raise DomainError("sigma_override has the wrong dimension")
    elif config.noise_mode == SINGLE:
        fixed = sample_exp_noise(config.eta, d, rng).sigma

    sigmas = np.empty((T, d))
    points = np.empty((T, d))
    incurred = np.empty(T)
    calls = np.empty((T, 2), dtype=np.int64)
    losses = []
    for i in range(T):
        sigma = fixed if fixed is not None else sample_exp_noise(config.eta, d, rng).sigma
        w = session.argmin(sigma, counter).w_hat
        loss = _served(adversary, i + 1, w, domain)
        incurred[i] = evaluate(loss, w, counter, domain)
        session.add(loss)
        sigmas[i] = sigma
        points[i] = w
        calls[i] = counter.offline_calls, counter.value_calls
        losses.append(loss)
    return Trajectory(domain, sigmas, points, incurred, losses, config, counter, eta=config.eta,
                      call_log=calls)


def regularizer_loss(kind: str, weight: float, domain: BoxDomain) -> LossFunction:
    """FTRL regularizer as a synthetic loss term, with G and B over the box."""
    if kind == "l2":
        return quadratic(domain, scale=weight)
    if kind == "l1":
        return abs_distance(domain).scaled(weight)
    raise ValueError(f"unknown regularizer {kind!r}")


def ftrl_run(adversary: "Adversary", T: int, config: FtrlConfig,
             oracle: Optional[GridOracle] = None,
             counter: Optional[CallCounter] = None) -> Trajectory:
    """Follow-the-Regularized-Leader: argmin of past losses plus ``weight * R(w)``."""
    if T < 1:
        raise ValueError("T must be at least 1")
    domain = adversary.domain
    oracle = oracle or default_oracle(domain, config.oracle_resolution)
    counter = counter if counter is not None else CallCounter()
    reg = regularizer_loss(config.regularizer, config.weight, domain)
    session = oracle.session(domain, [reg])
    zero = np.zeros(domain.dim)

    points = np.empty((T, domain.dim))
    incurred = np.empty(T)
    calls = np.empty((T, 2), dtype=np.int64)
    losses = []
    for i in range(T):
        w = session.argmin(zero, counter).w_hat
        loss = _served(adversary, i + 1, w, domain)
        incurred[i] = evaluate(loss, w, counter, domain)
        session.add(loss)
        points[i] = w
        calls[i] = counter.offline_calls, counter.value_calls
        losses.append(loss)
    return Trajectory(domain, np.zeros((T, domain.dim)), points, incurred, losses, config,
                      counter, call_log=calls)
