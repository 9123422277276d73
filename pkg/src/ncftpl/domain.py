"""Decision sets, instrumented loss functions and oracle-call accounting."""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

__all__ = [
    "DomainError",
    "BoxDomain",
    "LossFunction",
    "CallCounter",
    "NoiseVector",
    "evaluate",
    "l1_distance",
    "linf_norm",
]

#: absolute tolerance used for exact-value comparisons
TOL = 1e-12


class DomainError(ValueError):
    """A point lies outside the decision set, or dimensions disagree."""


@dataclass(frozen=True)
class BoxDomain:
    """Axis-aligned box ``lower <= w <= upper`` in R^d."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = np.atleast_1d(np.asarray(self.lower, dtype=float)).copy()
        hi = np.atleast_1d(np.asarray(self.upper, dtype=float)).copy()
        if lo.ndim != 1 or lo.shape != hi.shape:
            raise DomainError("lower and upper must be 1-D arrays of equal length")
        if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
            raise DomainError("box bounds must be finite")
        if np.any(lo >= hi):
            raise DomainError("need lower[k] < upper[k] for every coordinate")
        lo.setflags(write=False)
        hi.setflags(write=False)
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @classmethod
    def cube(cls, dim: int, lower: float = -1.0, upper: float = 1.0) -> "BoxDomain":
        return cls(np.full(dim, lower), np.full(dim, upper))

    @property
    def dim(self) -> int:
        return self.lower.shape[0]

    @property
    def widths(self) -> np.ndarray:
        return self.upper - self.lower

    @property
    def linf_diameter(self) -> float:
        return float(np.max(self.widths))

    @property
    def max_abs(self) -> np.ndarray:
        """Per-coordinate ``max |w_k|`` over the box."""
        return np.maximum(np.abs(self.lower), np.abs(self.upper))

    def contains(self, w, atol: float = 0.0) -> bool:
        w = np.asarray(w, dtype=float)
        if w.shape != (self.dim,):
            return False
        return bool(np.all(w >= self.lower - atol) and np.all(w <= self.upper + atol))

    def check(self, w) -> np.ndarray:
        w = np.asarray(w, dtype=float)
        if w.shape != (self.dim,):
            raise DomainError(f"expected a {self.dim}-vector, got shape {w.shape}")
        if not self.contains(w):
            raise DomainError(f"point {w} lies outside the box [{self.lower}, {self.upper}]")
        return w

    def sample(self, rng: np.random.Generator, n: Optional[int] = None) -> np.ndarray:
        size = (self.dim,) if n is None else (n, self.dim)
        return rng.uniform(self.lower, self.upper, size=size)

    def __eq__(self, other):
        if not isinstance(other, BoxDomain):
            return NotImplemented
        return np.array_equal(self.lower, other.lower) and np.array_equal(self.upper, other.upper)

    def __hash__(self):
        return hash((self.lower.tobytes(), self.upper.tobytes()))


@dataclass(frozen=True, eq=False)
class LossFunction:
    """A black-box loss with declared l1-Lipschitz constant and range bound.

    ``fn`` must be vectorized: it maps an array of shape ``(..., d)`` to an
    array of shape ``(...)``. It must be pure.
    """

    fn: Callable[[np.ndarray], np.ndarray]
    lipschitz_G: float
    bound_B: float
    label: str = "loss"
    domain: Optional[BoxDomain] = None

    def __post_init__(self):
        if not self.lipschitz_G >= 0 or not self.bound_B >= 0:
            raise ValueError("G and B must be nonnegative")

    def values(self, points: np.ndarray) -> np.ndarray:
        """Evaluate on a batch of points, shape ``(n, d)`` -> ``(n,)``."""
        return np.asarray(self.fn(np.asarray(points, dtype=float)), dtype=float)

    def value(self, w) -> float:
        w = np.asarray(w, dtype=float).reshape(1, -1)
        return float(self.values(w)[0])

    __call__ = value

    def __add__(self, other: "LossFunction") -> "LossFunction":
        f, g = self.fn, other.fn
        return LossFunction(
            lambda p: f(p) + g(p),
            self.lipschitz_G + other.lipschitz_G,
            self.bound_B + other.bound_B,
            label=f"({self.label}+{other.label})",
            domain=self.domain or other.domain,
        )

    def scaled(self, c: float) -> "LossFunction":
        f = self.fn
        return LossFunction(
            lambda p: c * f(p),
            abs(c) * self.lipschitz_G,
            abs(c) * self.bound_B,
            label=f"{c:g}*{self.label}",
            domain=self.domain,
        )

    def negated(self) -> "LossFunction":
        f = self.fn
        return LossFunction(lambda p: -f(p), self.lipschitz_G, self.bound_B,
                            label=f"-{self.label}", domain=self.domain)


@dataclass
class CallCounter:
    """Counts of the three resources that make up oracle complexity."""

    value_calls: int = 0
    offline_calls: int = 0
    sample_count: int = 0
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False, compare=False)

    def charge_value(self, n: int = 1) -> None:
        with self._lock:
            self.value_calls += n

    def charge_offline(self, n: int = 1) -> None:
        with self._lock:
            self.offline_calls += n

    def charge_samples(self, n: int) -> None:
        with self._lock:
            self.sample_count += n

    @property
    def oracle_complexity(self) -> int:
        return self.sample_count + self.value_calls + self.offline_calls

    def snapshot(self) -> tuple[int, int, int]:
        return self.value_calls, self.offline_calls, self.sample_count


@dataclass(frozen=True)
class NoiseVector:
    """Nonnegative perturbation vector drawn coordinatewise from Exp(eta)."""

    sigma: np.ndarray
    eta: float

    def __post_init__(self):
        s = np.atleast_1d(np.asarray(self.sigma, dtype=float))
        if np.any(s < 0):
            raise ValueError("noise coordinates must be nonnegative")
        object.__setattr__(self, "sigma", s)

    @property
    def dim(self) -> int:
        return self.sigma.shape[0]


def evaluate(loss: LossFunction, w, counter: Optional[CallCounter] = None,
             domain: Optional[BoxDomain] = None) -> float:
    """Value oracle: return ``loss(w)`` and charge one value call."""
    domain = domain or loss.domain
    if domain is not None:
        w = domain.check(w)
    out = loss.value(w)
    if counter is not None:
        counter.charge_value()
    return out


def l1_distance(w1, w2) -> float:
    a = np.atleast_1d(np.asarray(w1, dtype=float))
    b = np.atleast_1d(np.asarray(w2, dtype=float))
    if a.shape != b.shape:
        raise DomainError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return float(np.sum(np.abs(a - b)))


def linf_norm(v) -> float:
    v = np.atleast_1d(np.asarray(v, dtype=float))
    if v.size == 0:
        return 0.0
    return float(np.max(np.abs(v)))
