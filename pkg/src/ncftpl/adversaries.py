"""Loss-sequence generators for the online experiments."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .domain import BoxDomain, LossFunction
from .losses import random_piecewise_loss, relu_regression

__all__ = [
    "OBLIVIOUS",
    "ADAPTIVE",
    "Adversary",
    "sequence_adversary",
    "replay_adversary",
    "relu_menu",
    "relu_alternating_adversary",
    "random_relu_adversary",
    "random_piecewise_adversary",
    "adaptive_relu_adversary",
    "ADVERSARIES",
    "make_adversary",
]

OBLIVIOUS = "oblivious"
ADAPTIVE = "adaptive"


@dataclass
class Adversary:
    """Serves the round-``t`` loss, optionally looking at the learner's point.

    Oblivious adversaries never see ``w``: their sequence is fixed in advance.
    """

    kind: str
    generator: Callable[[int, Optional[np.ndarray]], LossFunction]
    domain: BoxDomain
    G: float
    B: float
    label: str = "adversary"

    def __post_init__(self):
        if self.kind not in (OBLIVIOUS, ADAPTIVE):
            raise ValueError(f"unknown adversary kind {self.kind!r}")

    @property
    def dim(self) -> int:
        return self.domain.dim

    def loss(self, t: int, w: Optional[np.ndarray] = None) -> LossFunction:
        return self.generator(t, None if self.kind == OBLIVIOUS else w)


class _LazySequence:
    """Round-indexed i.i.d. losses, generated in order from one RNG stream."""

    def __init__(self, draw: Callable[[np.random.Generator], LossFunction], seed: int):
        self._draw = draw
        self._rng = np.random.default_rng(seed)
        self._cache: list[LossFunction] = []

    def __call__(self, t: int, w=None) -> LossFunction:
        while len(self._cache) < t:
            self._cache.append(self._draw(self._rng))
        return self._cache[t - 1]


def sequence_adversary(losses: Sequence[LossFunction], domain: BoxDomain,
                       label: str = "sequence") -> Adversary:
    losses = list(losses)
    if not losses:
        raise ValueError("empty loss sequence")

    def gen(t, w=None):
        return losses[t - 1]

    return Adversary(OBLIVIOUS, gen, domain,
                     G=max(l.lipschitz_G for l in losses), B=max(l.bound_B for l in losses),
                     label=label)


def replay_adversary(trajectory) -> Adversary:
    """The realized sequence of a finished run, served obliviously."""
    return sequence_adversary(trajectory.losses, trajectory.domain, label="replay")


def relu_menu(domain: BoxDomain) -> tuple[LossFunction, LossFunction]:
    """Two ReLU regression losses pulling towards opposite corners.

    ``A(w) = (relu(w.u) - 1)^2`` and ``B(w) = (relu(-w.u) - 1)^2`` with
    ``u = 1/d``. Each one is flat (value 1) on the half-space the other
    prefers, so a regularizer towards zero does not help.
    """
    u = np.full(domain.dim, 1.0 / domain.dim)
    return relu_regression(u, 1.0, domain), relu_regression(-u, 1.0, domain)


def relu_alternating_adversary(domain: Optional[BoxDomain] = None) -> Adversary:
    domain = domain or BoxDomain.cube(1)
    a, b = relu_menu(domain)

    def gen(t, w=None):
        return a if t % 2 == 1 else b

    return Adversary(OBLIVIOUS, gen, domain, G=max(a.lipschitz_G, b.lipschitz_G),
                     B=max(a.bound_B, b.bound_B), label="relu-alternating")


def random_relu_adversary(domain: Optional[BoxDomain] = None, seed: int = 0,
                          teacher=None, noise: float = 0.1) -> Adversary:
    """I.i.d. ReLU regression losses ``(relu(w.x_t) - y_t)^2``.

    ``x_t`` is uniform on ``[-1, 1]^d``. With a ``teacher`` vector the label
    is ``clip(relu(teacher.x_t) + noise * N(0,1), 0, 1)``; otherwise it is
    uniform on ``[0, 1]``.
    """
    domain = domain or BoxDomain.cube(1)
    d = domain.dim
    teacher = None if teacher is None else np.atleast_1d(np.asarray(teacher, dtype=float))

    def draw(rng):
        x = rng.uniform(-1.0, 1.0, size=d)
        if teacher is None:
            y = rng.uniform(0.0, 1.0)
        else:
            y = float(np.clip(max(float(teacher @ x), 0.0) + noise * rng.standard_normal(), 0, 1))
        return relu_regression(x, y, domain)

    # worst case over x in [-1,1]^d, y in [0,1]
    R = float(np.sum(domain.max_abs))
    G = 2.0 * max(1.0, R)
    B = max(1.0, (R - 0.0) ** 2)
    return Adversary(OBLIVIOUS, _LazySequence(draw, seed), domain, G=G, B=B,
                     label="relu-random")


def random_piecewise_adversary(domain: Optional[BoxDomain] = None, seed: int = 0,
                               pieces: int = 3, cap: float = 1.0) -> Adversary:
    domain = domain or BoxDomain.cube(1)
    return Adversary(OBLIVIOUS,
                     _LazySequence(lambda rng: random_piecewise_loss(rng, domain, pieces, cap), seed),
                     domain, G=1.0, B=cap, label="piecewise-random")


def adaptive_relu_adversary(domain: Optional[BoxDomain] = None) -> Adversary:
    """Serves whichever menu loss is larger at the learner's current point.

    Meant for deterministic learners (FTRL), whose next point the adversary
    could compute anyway. Ties go to the first menu entry.
    """
    domain = domain or BoxDomain.cube(1)
    a, b = relu_menu(domain)

    def gen(t, w):
        if w is None:
            return a
        return a if a.value(w) >= b.value(w) else b

    return Adversary(ADAPTIVE, gen, domain, G=max(a.lipschitz_G, b.lipschitz_G),
                     B=max(a.bound_B, b.bound_B), label="relu-adaptive")


ADVERSARIES = {
    "relu-alternating": lambda domain, seed: relu_alternating_adversary(domain),
    "relu-random": lambda domain, seed: random_relu_adversary(domain, seed),
    "relu-teacher": lambda domain, seed: random_relu_adversary(
        domain, seed, teacher=np.full(domain.dim, -1.0)),
    "piecewise-random": lambda domain, seed: random_piecewise_adversary(domain, seed),
    "relu-adaptive": lambda domain, seed: adaptive_relu_adversary(domain),
}


def make_adversary(name: str, domain: BoxDomain, seed: int = 0) -> Adversary:
    try:
        factory = ADVERSARIES[name]
    except KeyError:
        raise ValueError(f"unknown adversary {name!r}; choose from {sorted(ADVERSARIES)}") from None
    return factory(domain, seed)
