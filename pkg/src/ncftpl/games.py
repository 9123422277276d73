"""Two-player zero-sum games solved by FTPL self-play, plus the experts embedding.

Both players run non-convex FTPL against the loss their opponent induces;
a uniformly sampled round gives an approximate equilibrium. Certificates
are computed with the same offline oracle the players use.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Optional

import numpy as np

from .adversaries import sequence_adversary
from .domain import BoxDomain, CallCounter, DomainError, LossFunction, evaluate
from .harness import RegretReport
from .learners import SINGLE, FtplConfig, default_oracle, ftpl_run, sample_exp_noise
from .oracles import GridOracle

__all__ = [
    "ZeroSumGame",
    "SelfPlayTrajectory",
    "SampledPair",
    "EquilibriumCertificate",
    "bilinear_game",
    "make_toy_gan_game",
    "double_well_game",
    "selfplay_run",
    "sample_pair",
    "equilibrium_gap",
    "mixture_gap",
    "amplify",
    "ExpertsEmbedding",
    "lift_experts_loss",
    "experts_eta",
    "experts_regret_run",
    "MAX_EXPERT_DIM",
]

MAX_EXPERT_DIM = 20


@dataclass
class ZeroSumGame:
    """``payoff(X, Y)`` is vectorized over leading axes of either argument.

    The x-player minimizes and the y-player maximizes the payoff.
    """

    payoff: Callable[[np.ndarray, np.ndarray], np.ndarray]
    domain_x: BoxDomain
    domain_y: BoxDomain
    G: float
    B: float
    label: str = "game"

    def F(self, x, y) -> float:
        return float(self.payoff(np.asarray(x, float), np.asarray(y, float)))

    def x_loss(self, y) -> LossFunction:
        y = np.array(y, dtype=float)
        f = self.payoff
        return LossFunction(lambda X: f(X, y), self.G, self.B, label=f"F(.,{y})",
                            domain=self.domain_x)

    def y_loss(self, x) -> LossFunction:
        x = np.array(x, dtype=float)
        f = self.payoff
        return LossFunction(lambda Y: -f(x, Y), self.G, self.B, label=f"-F({x},.)",
                            domain=self.domain_y)


def bilinear_game(A=None, domain_x: Optional[BoxDomain] = None,
                  domain_y: Optional[BoxDomain] = None) -> ZeroSumGame:
    """``F(x, y) = x.A.y``; the default is ``x * y`` on ``[-1, 1]^2``."""
    A = np.atleast_2d(np.asarray([[1.0]] if A is None else A, dtype=float))
    dx, dy = A.shape
    domain_x = domain_x or BoxDomain.cube(dx)
    domain_y = domain_y or BoxDomain.cube(dy)

    def payoff(x, y):
        s = 0.0
        for i in range(dx):
            for j in range(dy):
                if A[i, j] != 0.0:
                    s = s + A[i, j] * x[..., i] * y[..., j]
        return s

    # |d/dx_i| <= sum_j |A_ij| |y_j|
    gx = float(np.max(np.abs(A) @ domain_y.max_abs))
    gy = float(np.max(np.abs(A).T @ domain_x.max_abs))
    B = float(domain_x.max_abs @ np.abs(A) @ domain_y.max_abs)
    return ZeroSumGame(payoff, domain_x, domain_y, G=max(gx, gy), B=B, label="bilinear")


def make_toy_gan_game(target: float = 0.0) -> ZeroSumGame:
    """1-D generator against a 1-D discriminator.

    The generator places a synthetic point ``x``; the discriminator scores the
    discrepancy with slope ``y``: ``F(x, y) = clip(y * (x - target), -1, 1)``
    on ``[-1, 1]^2``. The x-slices are 1-Lipschitz and the y-slices
    ``max|x - target|``-Lipschitz.
    """
    if not -0.5 <= target <= 0.5:
        raise ValueError("target must lie in [-0.5, 0.5]")
    dom = BoxDomain.cube(1)
    c = float(target)

    def payoff(x, y):
        return np.clip(y[..., 0] * (x[..., 0] - c), -1.0, 1.0)

    G = max(1.0, 1.0 + abs(c))
    return ZeroSumGame(payoff, dom, dom, G=G, B=1.0, label=f"toy-gan(target={c:g})")


def double_well(w):
    return (w * w - 0.25) ** 2


def double_well_game() -> ZeroSumGame:
    """Separable ``F(x, y) = phi(x) - phi(y)`` with ``phi(w) = (w^2 - 1/4)^2``.

    Every pair of wells ``(+-1/2, +-1/2)`` is a pure equilibrium.
    """
    dom = BoxDomain.cube(1)

    def payoff(x, y):
        return double_well(x[..., 0]) - double_well(y[..., 0])

    # phi' = 4w(w^2 - 1/4) peaks at 3 on [-1, 1]; phi ranges over [0, 9/16]
    return ZeroSumGame(payoff, dom, dom, G=3.0, B=9.0 / 16.0, label="double-well")


@dataclass
class SelfPlayTrajectory:
    game: ZeroSumGame
    xs: np.ndarray
    ys: np.ndarray
    payoffs: np.ndarray
    sigmas_x: np.ndarray
    sigmas_y: np.ndarray
    x_losses: list
    y_losses: list
    incurred_y: np.ndarray
    counter: CallCounter = field(default_factory=CallCounter)
    call_log: Optional[np.ndarray] = None

    @property
    def T(self) -> int:
        return self.xs.shape[0]


class SampledPair(NamedTuple):
    x_hat: np.ndarray
    y_hat: np.ndarray
    index: int


@dataclass
class EquilibriumCertificate:
    x_hat: Optional[np.ndarray]
    y_hat: Optional[np.ndarray]
    value: float
    gap_x: float
    gap_y: float
    slack: float
    best_response_x: np.ndarray
    best_response_y: np.ndarray

    @property
    def total_gap(self) -> float:
        return self.gap_x + self.gap_y


def _noise_source(cfg: FtplConfig, stream: int, d: int):
    rng = np.random.default_rng([cfg.seed, stream])
    if cfg.noise_mode == SINGLE:
        fixed = sample_exp_noise(cfg.eta, d, rng).sigma
        return lambda: fixed
    return lambda: sample_exp_noise(cfg.eta, d, rng).sigma


def selfplay_run(game: ZeroSumGame, T: int, config_x: FtplConfig, config_y: FtplConfig,
                 oracle_x: Optional[GridOracle] = None, oracle_y: Optional[GridOracle] = None,
                 counter: Optional[CallCounter] = None) -> SelfPlayTrajectory:
    """Simultaneous FTPL self-play for ``T`` rounds.

    Round ``t`` points of both players depend only on rounds ``< t``. Each
    round costs two offline calls and two value calls.
    """
    if T < 1:
        raise ValueError("T must be at least 1")
    dx, dy = game.domain_x.dim, game.domain_y.dim
    oracle_x = oracle_x or default_oracle(game.domain_x, config_x.oracle_resolution)
    oracle_y = oracle_y or default_oracle(game.domain_y, config_y.oracle_resolution)
    counter = counter if counter is not None else CallCounter()
    sx, sy = oracle_x.session(game.domain_x), oracle_y.session(game.domain_y)
    # distinct stream ids keep the two players' noise independent even with equal seeds
    noise_x, noise_y = _noise_source(config_x, 0, dx), _noise_source(config_y, 1, dy)

    xs, ys = np.empty((T, dx)), np.empty((T, dy))
    sig_x, sig_y = np.empty((T, dx)), np.empty((T, dy))
    pay, inc_y = np.empty(T), np.empty(T)
    calls = np.empty((T, 2), dtype=np.int64)
    lx, ly = [], []
    for i in range(T):
        sig_x[i], sig_y[i] = noise_x(), noise_y()
        x = sx.argmin(sig_x[i], counter).w_hat
        y = sy.argmin(sig_y[i], counter).w_hat
        loss_x, loss_y = game.x_loss(y), game.y_loss(x)
        pay[i] = evaluate(loss_x, x, counter, game.domain_x)
        inc_y[i] = evaluate(loss_y, y, counter, game.domain_y)
        sx.add(loss_x)
        sy.add(loss_y)
        xs[i], ys[i] = x, y
        calls[i] = counter.offline_calls, counter.value_calls
        lx.append(loss_x)
        ly.append(loss_y)
    return SelfPlayTrajectory(game, xs, ys, pay, sig_x, sig_y, lx, ly, inc_y, counter, calls)


def sample_pair(trajectory: SelfPlayTrajectory, rng: np.random.Generator) -> SampledPair:
    """Uniformly random round ``j`` and its pair ``(x_j, y_j)``."""
    if trajectory.T < 1:
        raise ValueError("empty trajectory")
    j = int(rng.integers(trajectory.T))
    return SampledPair(trajectory.xs[j].copy(), trajectory.ys[j].copy(), j)


def _oracles(game, oracle_x, oracle_y, resolution):
    return (oracle_x or default_oracle(game.domain_x, resolution),
            oracle_y or default_oracle(game.domain_y, resolution))


def equilibrium_gap(game: ZeroSumGame, x_hat, y_hat, oracle_x: Optional[GridOracle] = None,
                    oracle_y: Optional[GridOracle] = None, counter: Optional[CallCounter] = None,
                    resolution: float = 1e-3) -> EquilibriumCertificate:
    """Best-response gaps of a pure pair (two offline calls)."""
    ox, oy = _oracles(game, oracle_x, oracle_y, resolution)
    x_hat = np.atleast_1d(np.asarray(x_hat, dtype=float))
    y_hat = np.atleast_1d(np.asarray(y_hat, dtype=float))
    if x_hat.shape != (game.domain_x.dim,) or y_hat.shape != (game.domain_y.dim,):
        raise DomainError("pair does not match the game's dimensions")
    value = game.F(x_hat, y_hat)
    bx = ox.minimize([game.x_loss(y_hat)], np.zeros(game.domain_x.dim), game.domain_x, counter)
    by = oy.minimize([game.y_loss(x_hat)], np.zeros(game.domain_y.dim), game.domain_y, counter)
    return EquilibriumCertificate(
        x_hat, y_hat, value,
        gap_x=value - bx.objective,
        gap_y=-by.objective - value,
        slack=bx.error_bound + by.error_bound,
        best_response_x=bx.w_hat, best_response_y=by.w_hat,
    )


def mixture_gap(trajectory: SelfPlayTrajectory, oracle_x: Optional[GridOracle] = None,
                oracle_y: Optional[GridOracle] = None, counter: Optional[CallCounter] = None,
                resolution: float = 1e-3) -> EquilibriumCertificate:
    """Gaps of the uniform-round mixture, i.e. of the pair law of a sampled round.

    With ``v = mean_t F(x_t, y_t)``: ``gap_x = v - min_x mean_t F(x, y_t)``
    and ``gap_y = max_y mean_t F(x_t, y) - v``. These are exactly the two
    players' average regrets, so they vanish with the regret.
    """
    game = trajectory.game
    ox, oy = _oracles(game, oracle_x, oracle_y, resolution)
    T = trajectory.T
    value = float(np.mean(trajectory.payoffs))
    bx = ox.minimize(trajectory.x_losses, np.zeros(game.domain_x.dim), game.domain_x, counter)
    by = oy.minimize(trajectory.y_losses, np.zeros(game.domain_y.dim), game.domain_y, counter)
    return EquilibriumCertificate(
        None, None, value,
        gap_x=value - bx.objective / T,
        gap_y=-by.objective / T - value,
        slack=(bx.error_bound + by.error_bound) / T,
        best_response_x=bx.w_hat, best_response_y=by.w_hat,
    )


def amplify(trajectory: SelfPlayTrajectory, K: int, rng: np.random.Generator,
            oracle_x: Optional[GridOracle] = None, oracle_y: Optional[GridOracle] = None,
            counter: Optional[CallCounter] = None,
            resolution: float = 1e-3) -> EquilibriumCertificate:
    """Certify ``K`` sampled pairs and keep the one with the smallest gap sum."""
    if K < 1:
        raise ValueError("K must be at least 1")
    best = None
    for _ in range(K):
        pair = sample_pair(trajectory, rng)
        cert = equilibrium_gap(trajectory.game, pair.x_hat, pair.y_hat, oracle_x, oracle_y,
                               counter, resolution)
        if best is None or cert.total_gap < best.total_gap:
            best = cert
    return best


class ExpertsEmbedding:
    """``N`` experts on the vertices of ``{0,1}^d`` with ``d = ceil(log2 N)``.

    Vertex ``z`` is read as a binary number, most significant bit first, and
    mapped to expert ``int(z) mod N``; surplus vertices wrap around. A point
    ``x`` of the cube is the product distribution
    ``p(z) = prod_i (z_i x_i + (1 - z_i)(1 - x_i))``.
    """

    def __init__(self, N: int):
        if N < 1:
            raise ValueError("need at least one expert")
        self.N = N
        self.d = max(1, math.ceil(math.log2(N)))
        if self.d > MAX_EXPERT_DIM:
            raise ValueError(f"d = {self.d} exceeds the enumeration budget {MAX_EXPERT_DIM}")
        self.domain = BoxDomain.cube(self.d, 0.0, 1.0)
        self.vertex_expert = np.arange(2 ** self.d) % N

    def vertices(self) -> np.ndarray:
        idx = np.arange(2 ** self.d)
        shifts = np.arange(self.d - 1, -1, -1)
        return ((idx[:, None] >> shifts[None, :]) & 1).astype(float)

    def vertex_of(self, expert: int) -> np.ndarray:
        """The lowest vertex assigned to ``expert``."""
        idx = int(np.flatnonzero(self.vertex_expert == expert)[0])
        return self.vertices()[idx]

    def vertex_probabilities(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        Z = self.vertices()
        return np.prod(Z * x + (1 - Z) * (1 - x), axis=1)

    def lifted_values(self, round_losses, X: np.ndarray) -> np.ndarray:
        """Expected loss under ``p(.|x)`` for a batch ``X`` of shape ``(n, d)``."""
        X = np.asarray(X, dtype=float)
        vals = np.asarray(round_losses, dtype=float)[self.vertex_expert]
        n = X.shape[0]
        V = np.broadcast_to(vals, (n, vals.size))
        for i in range(self.d):
            V = V.reshape(n, 2, -1)
            xi = X[:, i][:, None]
            V = (1.0 - xi) * V[:, 0, :] + xi * V[:, 1, :]
        return V.reshape(n)

    def lifted_loss(self, round_losses) -> LossFunction:
        """Multilinear extension of one round's expert losses.

        Each partial derivative is a difference of two conditional averages
        of losses in ``[0, 1]``, so the extension is 1-Lipschitz in l1
        (well inside the ``G <= d`` budget).
        """
        losses = np.array(round_losses, dtype=float)
        if losses.shape != (self.N,):
            raise ValueError(f"expected {self.N} expert losses")
        if np.any(losses < 0) or np.any(losses > 1):
            raise ValueError("expert losses must lie in [0, 1]")
        return LossFunction(lambda X: self.lifted_values(losses, X.reshape(-1, self.d)).reshape(
            X.shape[:-1]), 1.0, float(np.max(losses, initial=0.0)), label="lifted-experts",
            domain=self.domain)


def lift_experts_loss(embedding: ExpertsEmbedding, round_losses, x) -> float:
    """Exact ``sum_z p(z) * loss[i(z)]`` at a single point of the cube."""
    losses = np.asarray(round_losses, dtype=float)
    if losses.shape != (embedding.N,):
        raise ValueError(f"expected {embedding.N} expert losses")
    if np.any(losses < 0) or np.any(losses > 1):
        raise ValueError("expert losses must lie in [0, 1]")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    embedding.domain.check(x)
    return float(embedding.lifted_values(losses, x[None, :])[0])


def experts_eta(T: int) -> float:
    """Noise rate for experts play: the lifted losses are 1-Lipschitz, so ``T^-1/2``."""
    if T < 1:
        raise ValueError("horizon must be at least 1")
    return T ** -0.5


def experts_regret_run(N: int, T: int, loss_matrix, config: FtplConfig,
                       oracle: Optional[GridOracle] = None,
                       counter: Optional[CallCounter] = None):
    """FTPL over the embedding cube; regret is measured against the best single expert.

    The perturbed objective is multilinear, so its minimum over the cube is
    attained at a vertex; the default oracle therefore scans the vertices
    only (grid step 1), which is exact here. Returns ``(report, trajectory)``.
    """
    L = np.asarray(loss_matrix, dtype=float)
    if L.shape != (T, N):
        raise ValueError(f"loss matrix must have shape ({T}, {N})")
    emb = ExpertsEmbedding(N)
    adversary = sequence_adversary([emb.lifted_loss(row) for row in L], emb.domain,
                                   label="experts")
    traj = ftpl_run(adversary, T, config, oracle or GridOracle(1.0), counter)
    totals = L.sum(axis=0)
    best = int(np.argmin(totals))
    regret = traj.cumulative_loss - float(totals[best])
    report = RegretReport(regret, regret / T, emb.vertex_of(best), float(totals[best]), 0.0, T)
    return report, traj
