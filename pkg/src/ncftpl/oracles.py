"""Offline optimization oracles.

An offline oracle receives losses ``l_1..l_k`` and a vector ``sigma`` and
returns a minimizer of ``sum_i l_i(w) - sigma.w`` over the box. Here the box
is replaced by a uniform grid anchored at the lower corner, so every answer
carries a certified discretization error bound. Ties between grid points are
broken towards the lexicographically smallest coordinate vector, which is the
first occurrence in C order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .domain import TOL, BoxDomain, CallCounter, DomainError, LossFunction

__all__ = [
    "BudgetError",
    "OracleRequest",
    "OracleAnswer",
    "Grid",
    "GridOracle",
    "ScanOracle",
    "OracleSession",
    "error_bound",
    "grid_minimize",
    "scan_minimize_1d",
    "verify_first_order_gap",
    "oracle_report",
]

DEFAULT_GRID_BUDGET = 4_000_000
DEFAULT_SCAN_BUDGET = 10**9


class BudgetError(RuntimeError):
    """The requested grid is larger than the configured budget."""

    def __init__(self, required: int, budget: int):
        super().__init__(f"grid needs {required} points, budget is {budget}")
        self.required = required
        self.budget = budget


@dataclass(frozen=True)
class OracleRequest:
    losses: tuple
    sigma: np.ndarray
    domain: BoxDomain

    def __init__(self, losses: Sequence[LossFunction], sigma, domain: BoxDomain):
        sigma = np.atleast_1d(np.asarray(sigma, dtype=float)).copy()
        if sigma.shape != (domain.dim,):
            raise DomainError(f"sigma has shape {sigma.shape}, domain has dim {domain.dim}")
        for loss in losses:
            if loss.domain is not None and loss.domain.dim != domain.dim:
                raise DomainError(f"loss {loss.label} is defined on a different domain")
        object.__setattr__(self, "losses", tuple(losses))
        object.__setattr__(self, "sigma", sigma)
        object.__setattr__(self, "domain", domain)


@dataclass(frozen=True)
class OracleAnswer:
    w_hat: np.ndarray
    objective: float
    error_bound: float
    grid_resolution: float


def error_bound(losses: Sequence[LossFunction], sigma, dim: int, h: float) -> float:
    """Worst-case suboptimality of the best grid point: ``(k*G_max + |sigma|_1) d h / 2``."""
    k = len(losses)
    g_max = max((l.lipschitz_G for l in losses), default=0.0)
    return (k * g_max + float(np.sum(np.abs(sigma)))) * dim * h / 2.0


class Grid:
    """Uniform grid over a box with spacing at most ``h`` per coordinate.

    Coordinate ``k`` takes the values ``lower_k + i * step_k`` for
    ``i < n_k`` and exactly ``upper_k`` for ``i = n_k``, where
    ``n_k = ceil(width_k / h)``.
    """

    def __init__(self, domain: BoxDomain, h: float):
        if not h > 0:
            raise ValueError("grid resolution must be positive")
        self.domain = domain
        self.h = float(h)
        # the 1e-9 guard keeps exact multiples (e.g. 2 / 0.01) from gaining a cell
        self.steps_per_axis = np.array(
            [max(1, math.ceil(w / h - 1e-9)) for w in domain.widths], dtype=np.int64)
        self.step = domain.widths / self.steps_per_axis
        self.shape = tuple(int(n) + 1 for n in self.steps_per_axis)
        self.size = int(np.prod([float(s) for s in self.shape]))

    @staticmethod
    def required_points(domain: BoxDomain, h: float) -> float:
        return float(np.prod([max(1, math.ceil(w / h - 1e-9)) + 1.0 for w in domain.widths]))

    def coords(self, k: int, idx) -> np.ndarray:
        """Coordinate values along axis ``k`` for integer indices ``idx``."""
        idx = np.asarray(idx)
        n = self.steps_per_axis[k]
        x = self.domain.lower[k] + idx * self.step[k]
        return np.where(idx >= n, self.domain.upper[k], x)

    def axis(self, k: int) -> np.ndarray:
        return self.coords(k, np.arange(self.shape[k]))

    def points(self) -> np.ndarray:
        """All grid points, shape ``(size, d)``, in lexicographic order."""
        axes = [self.axis(k) for k in range(self.domain.dim)]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)

    def point(self, flat_index: int) -> np.ndarray:
        multi = np.unravel_index(int(flat_index), self.shape)
        return np.array([float(self.coords(k, multi[k])) for k in range(self.domain.dim)])


def _linear_term(cols: Sequence[np.ndarray], sigma: np.ndarray) -> np.ndarray:
    s = cols[0] * sigma[0]
    for k in range(1, len(cols)):
        s = s + cols[k] * sigma[k]
    return s


def _total_loss(losses: Sequence[LossFunction], points: np.ndarray) -> np.ndarray:
    total = np.zeros(points.shape[0])
    for loss in losses:
        total = total + loss.values(points)
    return total


class OracleSession:
    """Grid oracle that caches the cumulative loss across calls.

    FTPL adds one loss per round; the cache turns each round into one loss
    evaluation plus one argmin over the grid. Answers are bit-identical to a
    stateless :func:`grid_minimize` call on the same loss list.
    """

    def __init__(self, domain: BoxDomain, h: float, budget: int = DEFAULT_GRID_BUDGET,
                 losses: Sequence[LossFunction] = ()):
        required = Grid.required_points(domain, h)
        if required > budget:
            raise BudgetError(int(required), budget)
        self.grid = Grid(domain, h)
        self.domain = domain
        self.points = self.grid.points()
        self.cols = [np.ascontiguousarray(self.points[:, k]) for k in range(domain.dim)]
        self.total = np.zeros(self.grid.size)
        self.losses: list[LossFunction] = []
        for loss in losses:
            self.add(loss)

    def add(self, loss: LossFunction) -> None:
        self.total = self.total + loss.values(self.points)
        self.losses.append(loss)

    def copy(self) -> "OracleSession":
        new = object.__new__(OracleSession)
        new.grid, new.domain, new.points, new.cols = self.grid, self.domain, self.points, self.cols
        new.total = self.total.copy()
        new.losses = list(self.losses)
        return new

    def objective_values(self, sigma) -> np.ndarray:
        sigma = np.atleast_1d(np.asarray(sigma, dtype=float))
        if not np.any(sigma):
            return self.total
        return self.total - _linear_term(self.cols, sigma)

    def argmin(self, sigma, counter: Optional[CallCounter] = None) -> OracleAnswer:
        sigma = np.atleast_1d(np.asarray(sigma, dtype=float))
        if sigma.shape != (self.domain.dim,):
            raise DomainError(f"sigma has shape {sigma.shape}, domain has dim {self.domain.dim}")
        obj = self.objective_values(sigma)
        i = int(np.argmin(obj))
        if counter is not None:
            counter.charge_offline()
        return OracleAnswer(
            w_hat=self.points[i].copy(),
            objective=float(obj[i]),
            error_bound=error_bound(self.losses, sigma, self.domain.dim, self.grid.h),
            grid_resolution=self.grid.h,
        )


def grid_minimize(request: OracleRequest, resolution: float,
                  counter: Optional[CallCounter] = None,
                  budget: int = DEFAULT_GRID_BUDGET) -> OracleAnswer:
    """Exhaustive grid search; one offline-oracle call."""
    session = OracleSession(request.domain, resolution, budget, request.losses)
    return session.argmin(request.sigma, counter)


def _bnb_argmin_1d(losses, sigma: float, grid: Grid, lipschitz: float) -> tuple[int, float]:
    """Exact grid argmin in 1-D by Lipschitz branch and bound.

    Returns the same index and value as a dense scan of the grid: a cell is
    discarded only when its Lipschitz lower bound exceeds the incumbent, so
    every grid point attaining the minimum is evaluated.
    """
    n = int(grid.steps_per_axis[0])
    lo, hi = float(grid.domain.lower[0]), float(grid.domain.upper[0])

    def f(idx):
        x = grid.coords(0, idx)
        pts = x[:, None]
        total = np.zeros(idx.shape[0])
        for loss in losses:
            total = total + loss.values(pts)
        if sigma != 0.0:
            total = total - x * sigma
        return total

    fan = 16
    stride = 1
    while n // stride > 4096:
        stride *= fan
    starts = np.arange(0, n, stride, dtype=np.int64)
    seen_idx, seen_val = [], []
    best = math.inf
    width = hi - lo
    while True:
        ends = np.minimum(starts + stride, n)
        pts = np.unique(np.concatenate([starts, ends]))
        vals = f(pts)
        seen_idx.append(pts)
        seen_val.append(vals)
        best = min(best, float(vals.min()))
        if stride == 1:
            break
        fs = vals[np.searchsorted(pts, starts)]
        fe = vals[np.searchsorted(pts, ends)]
        span = grid.coords(0, ends) - grid.coords(0, starts)
        lower = 0.5 * (fs + fe) - 0.5 * lipschitz * span
        tol = 1e-9 * (1.0 + abs(best) + lipschitz * width)
        starts = starts[lower <= best + tol]
        sub = stride // fan
        starts = (starts[:, None] + np.arange(0, stride, sub, dtype=np.int64)[None, :]).ravel()
        starts = starts[starts < n]
        stride = sub
    all_idx = np.concatenate(seen_idx)
    all_val = np.concatenate(seen_val)
    m = all_val.min()
    return int(all_idx[all_val == m].min()), float(m)


def scan_minimize_1d(request: OracleRequest, resolution: float,
                     counter: Optional[CallCounter] = None, prune: bool = True,
                     budget: int = DEFAULT_SCAN_BUDGET) -> OracleAnswer:
    """High-resolution 1-D grid oracle, bit-identical to :func:`grid_minimize`.

    With ``prune=True`` (and finite declared Lipschitz constants) the scan
    skips cells that provably cannot contain a minimizer, which makes
    resolutions around 1e-6 cheap.
    """
    domain = request.domain
    if domain.dim != 1:
        raise DomainError("scan_minimize_1d needs a one-dimensional domain")
    required = Grid.required_points(domain, resolution)
    if required > budget:
        raise BudgetError(int(required), budget)
    grid = Grid(domain, resolution)
    sigma = float(request.sigma[0])
    lipschitz = sum(l.lipschitz_G for l in request.losses) + abs(sigma)
    if prune and math.isfinite(lipschitz):
        i, val = _bnb_argmin_1d(request.losses, sigma, grid, lipschitz)
    else:
        x = grid.axis(0)
        obj = _total_loss(request.losses, x[:, None])
        if sigma != 0.0:
            obj = obj - x * sigma
        i = int(np.argmin(obj))
        val = float(obj[i])
    if counter is not None:
        counter.charge_offline()
    return OracleAnswer(
        w_hat=np.array([float(grid.coords(0, i))]),
        objective=val,
        error_bound=error_bound(request.losses, request.sigma, 1, resolution),
        grid_resolution=resolution,
    )


class GridOracle:
    """Offline oracle backed by :func:`grid_minimize`."""

    def __init__(self, resolution: float, budget: int = DEFAULT_GRID_BUDGET):
        if not resolution > 0:
            raise ValueError("resolution must be positive")
        self.resolution = float(resolution)
        self.budget = budget

    def minimize(self, losses: Sequence[LossFunction], sigma, domain: BoxDomain,
                 counter: Optional[CallCounter] = None) -> OracleAnswer:
        return grid_minimize(OracleRequest(losses, sigma, domain), self.resolution, counter,
                             self.budget)

    def session(self, domain: BoxDomain, losses: Sequence[LossFunction] = ()) -> OracleSession:
        return OracleSession(domain, self.resolution, self.budget, losses)

    def __repr__(self):
        return f"{type(self).__name__}(resolution={self.resolution:g})"


class ScanOracle(GridOracle):
    """1-D oracle backed by the pruned exact scan."""

    def __init__(self, resolution: float, budget: int = DEFAULT_SCAN_BUDGET, prune: bool = True):
        super().__init__(resolution, budget)
        self.prune = prune

    def minimize(self, losses, sigma, domain, counter=None) -> OracleAnswer:
        return scan_minimize_1d(OracleRequest(losses, sigma, domain), self.resolution, counter,
                                prune=self.prune, budget=self.budget)

    def session(self, domain, losses=()) -> OracleSession:
        if domain.dim != 1:
            raise DomainError("ScanOracle only handles one-dimensional domains")
        return OracleSession(domain, self.resolution, self.budget, losses)


def _sum_at(losses: Sequence[LossFunction], w: np.ndarray) -> float:
    total = 0.0
    for loss in losses:
        total += loss.value(w)
    return total


def verify_first_order_gap(f1_losses, sigma1, w1, f2_losses, sigma2, w2):
    """Check ``f(w1) - f(w2) <= (sigma1 - sigma2).(w1 - w2)`` with ``f = F1 - F2``.

    ``w1`` and ``w2`` are oracle answers for ``(F1, sigma1)`` and
    ``(F2, sigma2)``; plain vectors are accepted and get zero slack.
    Returns ``(lhs, rhs, holds)``.
    """
    slack = 0.0
    if isinstance(w1, OracleAnswer):
        slack += w1.error_bound
        w1 = w1.w_hat
    if isinstance(w2, OracleAnswer):
        slack += w2.error_bound
        w2 = w2.w_hat
    w1 = np.atleast_1d(np.asarray(w1, dtype=float))
    w2 = np.atleast_1d(np.asarray(w2, dtype=float))
    s = np.atleast_1d(np.asarray(sigma1, float)) - np.atleast_1d(np.asarray(sigma2, float))
    f_w1 = _sum_at(f1_losses, w1) - _sum_at(f2_losses, w1)
    f_w2 = _sum_at(f1_losses, w2) - _sum_at(f2_losses, w2)
    lhs = f_w1 - f_w2
    rhs = float(np.dot(s, w1 - w2))
    scale = 1.0 + abs(lhs) + abs(rhs)
    return lhs, rhs, bool(lhs <= rhs + slack + TOL * scale)


def oracle_report(counter: CallCounter) -> dict:
    """The three oracle-complexity terms and their sum."""
    return {
        "sample_count": counter.sample_count,
        "value_calls": counter.value_calls,
        "offline_calls": counter.offline_calls,
        "oracle_complexity": counter.oracle_complexity,
    }
