"""Regret accounting, stability probes, scaling fits and online-to-batch conversion."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Optional, Sequence

import numpy as np

from .adversaries import Adversary, sequence_adversary
from .domain import TOL, BoxDomain, CallCounter, DomainError, LossFunction, evaluate
from .learners import (FRESH, SINGLE, FtplConfig, FtrlConfig, Trajectory, ftpl_run, ftrl_run,
                       sample_exp_noise, schedule_params)
from .oracles import GridOracle, ScanOracle

__all__ = [
    "RegretReport",
    "StabilityReport",
    "ScalingFit",
    "BatchResult",
    "FiniteLossDistribution",
    "compute_regret",
    "ftl_btl_check",
    "stability_probe_1d",
    "stability_probe_kd",
    "fit_power_law",
    "scaling_fit",
    "ftpl_learner",
    "ftrl_learner",
    "online_to_batch",
    "trial_seeds",
]


@dataclass
class RegretReport:
    total_regret: float
    average_regret: float
    best_in_hindsight_w: np.ndarray
    best_in_hindsight_value: float
    discretization_slack: float
    T: int


@dataclass
class StabilityReport:
    gaps: np.ndarray
    mean_gap: float
    stderr: float
    violations: int
    checks: int
    margin_delta: float
    shift: float
    tolerance: float
    bound: float
    relation_violations: dict = field(default_factory=dict)
    first_order_violations: int = 0


def trial_seeds(seed: int, n: int) -> list[int]:
    """Independent 63-bit seeds for trials ``0..n-1``, stable under reordering."""
    children = np.random.SeedSequence(seed).spawn(n)
    return [int(c.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1)) for c in children]


def compute_regret(trajectory: Trajectory, losses: Optional[Sequence[LossFunction]] = None,
                   oracle: Optional[GridOracle] = None,
                   counter: Optional[CallCounter] = None) -> RegretReport:
    """Regret against the best fixed grid point in hindsight (one offline call)."""
    losses = list(trajectory.losses if losses is None else losses)
    if len(losses) != trajectory.T:
        raise ValueError(f"{len(losses)} losses for a trajectory of length {trajectory.T}")
    oracle = oracle or _oracle_for(trajectory)
    domain = trajectory.domain
    best = oracle.minimize(losses, np.zeros(domain.dim), domain, counter)
    total = trajectory.cumulative_loss - best.objective
    return RegretReport(total, total / trajectory.T, best.w_hat, best.objective,
                        best.error_bound, trajectory.T)


def _oracle_for(trajectory: Trajectory) -> GridOracle:
    res = getattr(trajectory.config, "oracle_resolution", 1e-3)
    return ScanOracle(res) if trajectory.domain.dim == 1 else GridOracle(res)


def ftl_btl_check(trajectory: Trajectory, losses: Optional[Sequence[LossFunction]] = None,
                  oracle: Optional[GridOracle] = None, counter: Optional[CallCounter] = None):
    """Pathwise FTL-BTL inequality for a single-draw FTPL run.

    With ``R(w) = -sigma.w`` checks
    ``regret <= R(w*) - R(w_1) + sum_t [l_t(w_t) - l_t(w_{t+1})]``, where
    ``w_{T+1}`` is the perturbed leader on the whole sequence. Returns
    ``(lhs, rhs, holds)``; the slack is the comparator's error bound.
    """
    cfg = trajectory.config
    if not isinstance(cfg, FtplConfig) or cfg.noise_mode != SINGLE:
        raise ValueError("FTL-BTL check needs a single-draw FTPL trajectory")
    if not np.all(trajectory.sigmas == trajectory.sigmas[0]):
        raise ValueError("noise changes across rounds; not a single-draw run")
    losses = list(trajectory.losses if losses is None else losses)
    if len(losses) != trajectory.T:
        raise ValueError("loss sequence length does not match the trajectory")
    oracle = oracle or _oracle_for(trajectory)
    domain = trajectory.domain
    sigma = trajectory.sigmas[0]
    best = oracle.minimize(losses, np.zeros(domain.dim), domain, counter)
    w_last = oracle.minimize(losses, sigma, domain, counter).w_hat
    nxt = np.vstack([trajectory.points[1:], w_last[None, :]])

    lhs = trajectory.cumulative_loss - best.objective
    instability = sum(loss.value(w) - loss.value(v)
                      for loss, w, v in zip(losses, trajectory.points, nxt))
    span = float(sigma @ trajectory.points[0] - sigma @ best.w_hat)
    rhs = span + instability
    slack = best.error_bound + TOL * (1.0 + abs(lhs) + abs(rhs))
    return lhs, rhs, bool(lhs <= rhs + slack)


def _stderr(x: np.ndarray) -> float:
    return float(np.std(x, ddof=1) / np.sqrt(x.size)) if x.size > 1 else 0.0


def _first_order_ok(f_w1: float, f_w2: float, dsigma, w1, w2, slack: float) -> bool:
    lhs = f_w1 - f_w2
    rhs = float(np.dot(dsigma, w1 - w2))
    return lhs <= rhs + slack + TOL * (1.0 + abs(lhs) + abs(rhs))


def _domain_of(new_loss: LossFunction, domain: Optional[BoxDomain]) -> BoxDomain:
    domain = domain or new_loss.domain
    if domain is None:
        raise DomainError("pass a domain or use losses that carry one")
    return domain


def stability_probe_1d(prefix: Sequence[LossFunction], new_loss: LossFunction, eta: float,
                       num_draws: int, oracle: GridOracle, rng: np.random.Generator,
                       domain: Optional[BoxDomain] = None,
                       counter: Optional[CallCounter] = None) -> StabilityReport:
    """Monotonicity and stability of consecutive FTPL minimizers in one dimension.

    For each draw ``sigma ~ Exp(eta)`` computes ``w_t`` (argmin of the
    prefix) and ``w_{t+1}`` (prefix plus ``new_loss``) at ``sigma`` and at
    ``sigma + 2G``, with ``G`` the Lipschitz constant of ``new_loss``, and
    counts draws where ``min(w_t, w_{t+1})(sigma + 2G) >= max(w_t, w_{t+1})(sigma)``
    fails by more than the grid resolution.
    """
    domain = _domain_of(new_loss, domain)
    if domain.dim != 1:
        raise DomainError("stability_probe_1d needs a one-dimensional domain")
    if oracle.resolution > 1e-4:
        raise ValueError("the 1-D probe needs oracle resolution <= 1e-4")
    before = oracle.session(domain, prefix)
    after = before.copy()
    after.add(new_loss)
    G = new_loss.lipschitz_G
    shift = 2.0 * G
    tol = oracle.resolution
    D = domain.linf_diameter

    names = ("t(s')>=t+1(s)", "t+1(s')>=t(s)", "t(s')>=t(s)", "t+1(s')>=t+1(s)", "min>=max")
    rel = dict.fromkeys(names, 0)
    gaps = np.empty(num_draws)
    bad = 0
    first_order_bad = 0
    for i in range(num_draws):
        s = sample_exp_noise(eta, 1, rng).sigma
        sp = s + shift
        a, b = before.argmin(s, counter), after.argmin(s, counter)
        ap, bp = before.argmin(sp, counter), after.argmin(sp, counter)
        wa, wb, wap, wbp = (float(x.w_hat[0]) for x in (a, b, ap, bp))
        gaps[i] = abs(wa - wb)
        checks = (wap >= wb - tol, wbp >= wa - tol, wap >= wa - tol, wbp >= wb - tol,
                  min(wap, wbp) >= max(wa, wb) - tol)
        for name, ok in zip(names, checks):
            rel[name] += not ok
        bad += not all(checks)

        # f1 - f2 is -new_loss for (prefix, prefix+new) and +new_loss the other way round
        na, nb, nap, nbp = (new_loss.value(x.w_hat) for x in (a, b, ap, bp))
        pairs = (
            (-na, -nb, 0.0, a, b),
            (-nap, -nb, shift, ap, b),
            (nbp, na, shift, bp, a),
            (0.0, 0.0, shift, ap, a),
        )
        for f1, f2, ds, x1, x2 in pairs:
            first_order_bad += not _first_order_ok(f1, f2, [ds], x1.w_hat, x2.w_hat,
                                         x1.error_bound + x2.error_bound)

    return StabilityReport(
        gaps=gaps, mean_gap=float(gaps.mean()), stderr=_stderr(gaps), violations=bad,
        checks=num_draws, margin_delta=0.0, shift=shift, tolerance=tol,
        bound=2.0 * eta * D * G, relation_violations=rel, first_order_violations=first_order_bad,
    )


def stability_probe_kd(prefix: Sequence[LossFunction], new_loss: LossFunction, eta: float,
                       delta: float, num_draws: int, oracle: GridOracle,
                       rng: np.random.Generator, domain: Optional[BoxDomain] = None,
                       counter: Optional[CallCounter] = None) -> StabilityReport:
    """Per-coordinate relaxed monotonicity in ``d >= 2`` dimensions.

    Shifting coordinate ``k`` of the noise by ``3B/delta`` (``B`` bounds
    ``|new_loss|``) must give
    ``min_k(sigma + 3B/delta e_k) >= max_k(sigma) - delta`` for the two
    consecutive minimizers; violations beyond ``delta + h`` are counted per
    (draw, coordinate).
    """
    domain = _domain_of(new_loss, domain)
    d = domain.dim
    if d < 2:
        raise DomainError("stability_probe_kd needs d >= 2")
    if not delta > 0:
        raise ValueError("delta must be positive")
    before = oracle.session(domain, prefix)
    after = before.copy()
    after.add(new_loss)
    B = new_loss.bound_B
    q = 3.0 * B / delta
    tol = delta + oracle.resolution
    D = domain.linf_diameter

    gaps = np.empty(num_draws)
    bad = 0
    first_order_bad = 0
    rel = {"t(s')>=t+1(s)": 0, "t+1(s')>=t(s)": 0, "min>=max": 0}
    for i in range(num_draws):
        s = sample_exp_noise(eta, d, rng).sigma
        a, b = before.argmin(s, counter), after.argmin(s, counter)
        gaps[i] = float(np.sum(np.abs(a.w_hat - b.w_hat)))
        na, nb = new_loss.value(a.w_hat), new_loss.value(b.w_hat)
        if not _first_order_ok(-na, -nb, np.zeros(d), a.w_hat, b.w_hat,
                          a.error_bound + b.error_bound):
            first_order_bad += 1
        for k in range(d):
            sp = s.copy()
            sp[k] += q
            ap, bp = before.argmin(sp, counter), after.argmin(sp, counter)
            c1 = ap.w_hat[k] >= b.w_hat[k] - tol
            c2 = bp.w_hat[k] >= a.w_hat[k] - tol
            c3 = min(ap.w_hat[k], bp.w_hat[k]) >= max(a.w_hat[k], b.w_hat[k]) - tol
            rel["t(s')>=t+1(s)"] += not c1
            rel["t+1(s')>=t(s)"] += not c2
            rel["min>=max"] += not c3
            bad += not (c1 and c2 and c3)
            e = np.zeros(d)
            e[k] = q
            nap, nbp = new_loss.value(ap.w_hat), new_loss.value(bp.w_hat)
            first_order_bad += not _first_order_ok(-nap, -nb, e, ap.w_hat, b.w_hat,
                                         ap.error_bound + b.error_bound)
            first_order_bad += not _first_order_ok(nbp, na, e, bp.w_hat, a.w_hat,
                                         bp.error_bound + a.error_bound)

    return StabilityReport(
        gaps=gaps, mean_gap=float(gaps.mean()), stderr=_stderr(gaps), violations=bad,
        checks=num_draws * d, margin_delta=delta, shift=q, tolerance=tol,
        bound=d * (q * eta * D + delta), relation_violations=rel, first_order_violations=first_order_bad,
    )


class ScalingFit(NamedTuple):
    exponent: float
    intercept: float
    T_grid: tuple
    mean_avg_regret: np.ndarray
    stderr: np.ndarray
    slack: np.ndarray
    floored: np.ndarray


def fit_power_law(T_grid, values) -> tuple[float, float]:
    """Least-squares slope and intercept of ``log(values)`` against ``log(T)``."""
    x = np.log(np.asarray(T_grid, dtype=float))
    y = np.log(np.asarray(values, dtype=float))
    slope, intercept = np.polyfit(x, y, 1)
    return float(slope), float(intercept)


#: ``learner(adversary, T, seed, counter=None) -> Trajectory``
Learner = Callable[..., Trajectory]


def ftpl_learner(eta=None, noise_mode: str = FRESH, resolution: float = 1e-3,
                 oracle: Optional[GridOracle] = None) -> Learner:
    """FTPL learner for :func:`scaling_fit`; ``eta=None`` uses the horizon schedule."""

    def run(adversary: Adversary, T: int, seed: int,
            counter: Optional[CallCounter] = None) -> Trajectory:
        rate = schedule_params(T, adversary.dim).eta if eta is None else (
            eta(T) if callable(eta) else eta)
        cfg = FtplConfig(eta=rate, noise_mode=noise_mode, seed=seed, oracle_resolution=resolution)
        return ftpl_run(adversary, T, cfg, oracle, counter)

    return run


def ftrl_learner(alpha: float = 0.5, regularizer: str = "l2", resolution: float = 1e-3,
                 oracle: Optional[GridOracle] = None) -> Learner:
    """FTRL learner with regularizer weight ``T^alpha``."""

    def run(adversary: Adversary, T: int, seed: int,
            counter: Optional[CallCounter] = None) -> Trajectory:
        cfg = FtrlConfig(regularizer=regularizer, weight=float(T) ** alpha,
                         oracle_resolution=resolution)
        return ftrl_run(adversary, T, cfg, oracle, counter)

    return run


def scaling_fit(learner: Learner, adversary_factory: Callable[[int, int], Adversary],
                T_grid: Sequence[int], trials: int, seed: int = 0,
                oracle: Optional[GridOracle] = None,
                counter: Optional[CallCounter] = None) -> ScalingFit:
    """Fit ``mean average regret ~ c * T^exponent`` over ``T_grid``.

    ``adversary_factory(T, seed)`` and ``learner(adversary, T, seed)`` get
    independent seeds per (T, trial). Learner and comparator share the
    oracle grid, so measured regret is exact for the grid problem; only
    nonpositive means are floored, at the average discretization slack.
    """
    if len(T_grid) < 4:
        raise ValueError("need at least four horizons to fit an exponent")
    means, errs, slacks, floored = [], [], [], []
    for ti, T in enumerate(T_grid):
        seeds = trial_seeds(seed * 1_000_003 + ti, 2 * trials)
        avg, sl = [], []
        for j in range(trials):
            adv = adversary_factory(T, seeds[2 * j])
            traj = learner(adv, T, seeds[2 * j + 1], counter)
            rep = compute_regret(traj, oracle=oracle, counter=counter)
            avg.append(rep.average_regret)
            sl.append(rep.discretization_slack / T)
        avg = np.array(avg)
        m = float(avg.mean())
        floor = float(np.mean(sl))
        floored.append(m <= 0.0)
        means.append(m if m > 0.0 else floor)
        errs.append(_stderr(avg))
        slacks.append(floor)
    slope, intercept = fit_power_law(T_grid, means)
    return ScalingFit(slope, intercept, tuple(T_grid), np.array(means), np.array(errs),
                      np.array(slacks), np.array(floored))


class BatchResult(NamedTuple):
    w_hat: np.ndarray
    risk_estimate: float
    index: int
    trajectory: Trajectory


def online_to_batch(sample: Sequence[LossFunction], learner: Learner, rng: np.random.Generator,
                    eval_sample: Optional[Sequence[LossFunction]] = None,
                    domain: Optional[BoxDomain] = None,
                    counter: Optional[CallCounter] = None) -> BatchResult:
    """Run ``learner`` over an i.i.d. sample and return a uniformly drawn iterate.

    The risk estimate is the mean loss of ``w_hat`` on ``eval_sample``
    (value-oracle calls); it is NaN when no evaluation sample is given.
    """
    sample = list(sample)
    if not sample:
        raise ValueError("empty sample")
    domain = domain or sample[0].domain
    if domain is None:
        raise DomainError("pass a domain or use losses that carry one")
    counter = counter if counter is not None else CallCounter()
    counter.charge_samples(len(sample))
    seed = int(rng.integers(2**63 - 1))
    traj = learner(sequence_adversary(sample, domain), len(sample), seed, counter)
    j = int(rng.integers(len(sample)))
    w_hat = traj.points[j].copy()
    if eval_sample:
        risk = float(np.mean([evaluate(l, w_hat, counter, domain) for l in eval_sample]))
    else:
        risk = float("nan")
    return BatchResult(w_hat, risk, j, traj)


class FiniteLossDistribution:
    """A distribution over finitely many losses; the population risk is exact."""

    def __init__(self, losses: Sequence[LossFunction], probs, domain: BoxDomain):
        self.losses = list(losses)
        p = np.asarray(probs, dtype=float)
        if p.shape != (len(self.losses),) or np.any(p < 0) or not np.isclose(p.sum(), 1.0):
            raise ValueError("probabilities must be nonnegative, sum to 1 and match the losses")
        self.probs = p / p.sum()
        self.domain = domain

    def sample(self, rng: np.random.Generator, n: int) -> list[LossFunction]:
        idx = rng.choice(len(self.losses), size=n, p=self.probs)
        return [self.losses[i] for i in idx]

    def risk(self, w) -> float:
        return float(sum(p * l.value(w) for p, l in zip(self.probs, self.losses)))

    def risk_values(self, points: np.ndarray) -> np.ndarray:
        out = np.zeros(points.shape[0])
        for p, l in zip(self.probs, self.losses):
            out = out + p * l.values(points)
        return out

    def minimize(self, oracle: GridOracle, counter: Optional[CallCounter] = None):
        """Population minimizer by brute force over the oracle grid."""
        weighted = [l.scaled(p) for p, l in zip(self.probs, self.losses) if p > 0]
        return oracle.minimize(weighted, np.zeros(self.domain.dim), self.domain, counter)
