"""Built-in loss families with closed-form Lipschitz constants and range bounds.

All Lipschitz constants are with respect to the l1 norm on the decision set,
so the relevant gradient bound is the l-infinity norm of the (sub)gradient.
"""

from __future__ import annotations

import numpy as np

from .domain import BoxDomain, LossFunction

__all__ = [
    "seq_dot",
    "relu",
    "relu_regression",
    "linear",
    "quadratic",
    "abs_distance",
    "piecewise_linear",
    "interp_1d",
    "zero_loss",
    "random_relu_loss",
    "random_piecewise_loss",
    "random_interp_loss",
    "max_abs_over_box",
]


def seq_dot(points: np.ndarray, x: np.ndarray) -> np.ndarray:
    """``points @ x`` accumulated coordinate by coordinate.

    BLAS may reorder or fuse the products, which would make a batch
    evaluation differ in the last bit from a single-point one.
    """
    points = np.asarray(points, dtype=float)
    s = points[..., 0] * x[0]
    for k in range(1, x.shape[0]):
        s = s + points[..., k] * x[k]
    return s


def relu(z):
    return np.maximum(z, 0.0)


def max_abs_over_box(x: np.ndarray, b: float, domain: BoxDomain) -> float:
    """``max |x.w + b|`` over the box (attained at a corner)."""
    hi = b + np.sum(np.where(x > 0, x * domain.upper, x * domain.lower))
    lo = b + np.sum(np.where(x > 0, x * domain.lower, x * domain.upper))
    return float(max(abs(hi), abs(lo)))


def relu_regression(x, y: float, domain: BoxDomain) -> LossFunction:
    """Squared ReLU regression loss ``(relu(w.x) - y)^2``."""
    x = np.atleast_1d(np.asarray(x, dtype=float)).copy()
    if x.shape != (domain.dim,):
        raise ValueError("feature vector must match the domain dimension")
    y = float(y)
    # relu(w.x) ranges over [0, R]
    R = float(np.sum(np.abs(x) * domain.max_abs))
    dev = max(abs(y), abs(R - y))
    G = 2.0 * dev * float(np.max(np.abs(x)))
    B = max(y * y, (R - y) ** 2)

    def fn(p):
        return (relu(seq_dot(p, x)) - y) ** 2

    return LossFunction(fn, G, B, label=f"relu_reg(x={np.round(x, 3).tolist()},y={y:.3g})",
                        domain=domain)


def linear(c, domain: BoxDomain) -> LossFunction:
    c = np.atleast_1d(np.asarray(c, dtype=float)).copy()
    G = float(np.max(np.abs(c)))
    B = float(np.sum(np.abs(c) * domain.max_abs))
    return LossFunction(lambda p: seq_dot(p, c), G, B,
                        label=f"linear({np.round(c, 3).tolist()})", domain=domain)


def quadratic(domain: BoxDomain, center=None, scale: float = 1.0) -> LossFunction:
    """``scale * ||w - center||_2^2``."""
    c = np.zeros(domain.dim) if center is None else np.atleast_1d(np.asarray(center, float)).copy()
    far = np.maximum(np.abs(domain.lower - c), np.abs(domain.upper - c))
    G = 2.0 * abs(scale) * float(np.max(far))
    B = abs(scale) * float(np.sum(far ** 2))

    def fn(p):
        d = np.asarray(p, dtype=float) - c
        s = d[..., 0] ** 2
        for k in range(1, c.shape[0]):
            s = s + d[..., k] ** 2
        return scale * s

    return LossFunction(fn, G, B, label=f"quad(c={np.round(c, 3).tolist()},s={scale:g})",
                        domain=domain)


def abs_distance(domain: BoxDomain, center=None) -> LossFunction:
    """``||w - center||_1``."""
    c = np.zeros(domain.dim) if center is None else np.atleast_1d(np.asarray(center, float)).copy()
    far = np.maximum(np.abs(domain.lower - c), np.abs(domain.upper - c))

    def fn(p):
        d = np.abs(np.asarray(p, dtype=float) - c)
        s = d[..., 0]
        for k in range(1, c.shape[0]):
            s = s + d[..., k]
        return s

    return LossFunction(fn, 1.0, float(np.sum(far)),
                        label=f"abs(c={np.round(c, 3).tolist()})", domain=domain)


def piecewise_linear(slopes_a, offsets_a, slopes_b, offsets_b, domain: BoxDomain,
                     cap: float = 1.0) -> LossFunction:
    """``clip(min(max_j a_j.w + b_j, max_j c_j.w + e_j), -cap, cap)``.

    The min of two convex piecewise-linear functions is non-convex in
    general; the cap adds flat regions.
    """
    A = np.atleast_2d(np.asarray(slopes_a, dtype=float)).copy()
    C = np.atleast_2d(np.asarray(slopes_b, dtype=float)).copy()
    a0 = np.atleast_1d(np.asarray(offsets_a, dtype=float)).copy()
    c0 = np.atleast_1d(np.asarray(offsets_b, dtype=float)).copy()
    if A.shape[1] != domain.dim or C.shape[1] != domain.dim:
        raise ValueError("slope vectors must match the domain dimension")
    G = float(max(np.max(np.abs(A)), np.max(np.abs(C))))
    reach = max(max(max_abs_over_box(A[j], a0[j], domain) for j in range(len(a0))),
                max(max_abs_over_box(C[j], c0[j], domain) for j in range(len(c0))))
    B = float(min(cap, reach))

    def fn(p):
        ma = seq_dot(p, A[0]) + a0[0]
        for j in range(1, A.shape[0]):
            ma = np.maximum(ma, seq_dot(p, A[j]) + a0[j])
        mc = seq_dot(p, C[0]) + c0[0]
        for j in range(1, C.shape[0]):
            mc = np.maximum(mc, seq_dot(p, C[j]) + c0[j])
        return np.clip(np.minimum(ma, mc), -cap, cap)

    return LossFunction(fn, G, B, label=f"pwl({A.shape[0]}+{C.shape[0]} pieces)", domain=domain)


def interp_1d(knots, values, domain: BoxDomain) -> LossFunction:
    """Continuous piecewise-linear 1-D loss through ``(knots, values)``."""
    if domain.dim != 1:
        raise ValueError("interp_1d needs a one-dimensional domain")
    k = np.asarray(knots, dtype=float).copy()
    v = np.asarray(values, dtype=float).copy()
    if k.ndim != 1 or k.shape != v.shape or k.size < 2 or np.any(np.diff(k) <= 0):
        raise ValueError("knots must be strictly increasing and match values")
    G = float(np.max(np.abs(np.diff(v) / np.diff(k))))
    B = float(np.max(np.abs(v)))
    return LossFunction(lambda p: np.interp(np.asarray(p, dtype=float)[..., 0], k, v), G, B,
                        label=f"interp({k.size} knots)", domain=domain)


def zero_loss(domain: BoxDomain) -> LossFunction:
    return LossFunction(lambda p: np.zeros(np.shape(p)[:-1]), 0.0, 0.0, label="zero",
                        domain=domain)


def random_relu_loss(rng: np.random.Generator, domain: BoxDomain) -> LossFunction:
    x = rng.uniform(-1.0, 1.0, size=domain.dim)
    y = rng.uniform(0.0, 1.0)
    return relu_regression(x, y, domain)


def random_piecewise_loss(rng: np.random.Generator, domain: BoxDomain, pieces: int = 3,
                          cap: float = 1.0) -> LossFunction:
    d = domain.dim
    return piecewise_linear(
        rng.uniform(-1, 1, size=(pieces, d)), rng.uniform(-0.5, 0.5, size=pieces),
        rng.uniform(-1, 1, size=(pieces, d)), rng.uniform(-0.5, 0.5, size=pieces),
        domain, cap=cap,
    )


def random_interp_loss(rng: np.random.Generator, domain: BoxDomain, knots: int = 6,
                       scale: float = 1.0) -> LossFunction:
    """Random continuous piecewise-linear loss on a 1-D interval."""
    lo, hi = float(domain.lower[0]), float(domain.upper[0])
    k = np.linspace(lo, hi, knots)
    step = (hi - lo) / (knots - 1)
    # jitter interior knots by at most 30% of the spacing so slopes stay bounded
    k[1:-1] += rng.uniform(-0.3, 0.3, size=knots - 2) * step
    return interp_1d(k, scale * rng.uniform(-1, 1, size=knots), domain)
