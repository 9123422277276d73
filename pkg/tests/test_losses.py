import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ncftpl.adversaries import relu_menu
from ncftpl.domain import BoxDomain
from ncftpl.games import ExpertsEmbedding, bilinear_game, double_well_game, make_toy_gan_game
from ncftpl.learners import regularizer_loss
from ncftpl.losses import (abs_distance, interp_1d, linear, max_abs_over_box, piecewise_linear,
                           quadratic, random_interp_loss, random_piecewise_loss,
                           random_relu_loss, relu, relu_regression, seq_dot, zero_loss)


def lipschitz_and_bound_ok(loss, box, rng, pairs=1000):
    a = box.sample(rng, pairs)
    b = box.sample(rng, pairs)
    # include corners and near-duplicates
    b[: pairs // 4] = a[: pairs // 4] + rng.uniform(-1e-3, 1e-3, size=(pairs // 4, box.dim))
    b = np.clip(b, box.lower, box.upper)
    fa, fb = loss.values(a), loss.values(b)
    lip = np.abs(fa - fb) <= loss.lipschitz_G * np.sum(np.abs(a - b), axis=1) + 1e-12
    bound = (np.abs(fa) <= loss.bound_B + 1e-12) & (np.abs(fb) <= loss.bound_B + 1e-12)
    return bool(np.all(lip)), bool(np.all(bound))


def test_seq_dot_is_sequential_and_close_to_dot(rng):
    P = rng.uniform(-1, 1, size=(100, 5))
    x = rng.uniform(-1, 1, size=5)
    out = seq_dot(P, x)
    manual = P[:, 0] * x[0]
    for k in range(1, 5):
        manual = manual + P[:, k] * x[k]
    np.testing.assert_array_equal(out, manual)
    np.testing.assert_allclose(out, P @ x, atol=1e-14)


def test_relu_regression_values(line):
    loss = relu_regression([1.0], 1.0, line)
    assert loss.value([1.0]) == 0.0
    assert loss.value([-0.5]) == 1.0
    assert loss.value([0.25]) == 0.5625
    assert relu(np.array([-1.0, 2.0])).tolist() == [0.0, 2.0]


def test_relu_regression_declared_constants(square):
    loss = relu_regression([0.5, -1.0], 0.2, square)
    # relu(w.x) in [0, 1.5]; worst deviation max(0.2, 1.3)
    assert loss.lipschitz_G == pytest.approx(2 * 1.3 * 1.0)
    assert loss.bound_B == pytest.approx(1.3 ** 2)


def test_max_abs_over_box(square):
    assert max_abs_over_box(np.array([1.0, -2.0]), 0.5, square) == 3.5


def test_linear_quadratic_abs(square):
    lin = linear([1.0, -2.0], square)
    assert lin.value([0.5, 0.5]) == -0.5
    assert lin.lipschitz_G == 2.0 and lin.bound_B == 3.0
    q = quadratic(square, center=[0.5, 0.0], scale=2.0)
    assert q.value([0.5, 0.0]) == 0.0
    assert q.value([-1.0, 1.0]) == pytest.approx(2 * (1.5 ** 2 + 1))
    a = abs_distance(square, center=[0.5, 0.0])
    assert a.value([0.0, -1.0]) == 1.5


def test_piecewise_linear_is_capped_min_of_max(line):
    loss = piecewise_linear([[1.0], [-1.0]], [0.0, 0.0], [[0.5]], [0.2], line, cap=0.6)
    w = np.linspace(-1, 1, 11)
    expected = np.clip(np.minimum(np.abs(w), 0.5 * w + 0.2), -0.6, 0.6)
    np.testing.assert_allclose(loss.values(w[:, None]), expected, atol=1e-15)


def test_interp_validation(line):
    with pytest.raises(ValueError):
        interp_1d([0.0, 0.0], [1.0, 2.0], line)
    with pytest.raises(ValueError):
        interp_1d([0.0, 1.0], [1.0, 2.0], BoxDomain.cube(2))
    loss = interp_1d([-1, 0, 1], [0.0, 1.0, 0.0], line)
    assert loss.value([0.5]) == 0.5 and loss.lipschitz_G == 1.0


def test_zero_loss(square):
    z = zero_loss(square)
    np.testing.assert_array_equal(z.values(np.ones((3, 2))), np.zeros(3))


@given(st.integers(1, 4), st.integers(0, 2**32 - 1))
def test_random_families_respect_declared_constants(dim, seed):
    rng = np.random.default_rng(seed)
    box = BoxDomain.cube(dim)
    for loss in (random_relu_loss(rng, box), random_piecewise_loss(rng, box),
                 quadratic(box, center=box.sample(rng)), abs_distance(box, box.sample(rng)),
                 linear(rng.uniform(-1, 1, dim), box)):
        assert lipschitz_and_bound_ok(loss, box, rng, pairs=200) == (True, True), loss.label


@given(st.integers(0, 2**32 - 1))
def test_interp_family_respects_declared_constants(seed):
    rng = np.random.default_rng(seed)
    box = BoxDomain.cube(1)
    assert lipschitz_and_bound_ok(random_interp_loss(rng, box), box, rng, 200) == (True, True)


def test_registered_losses_sampled_lipschitz(rng):
    """1000 sampled pairs per registered loss family."""
    box1, box3 = BoxDomain.cube(1), BoxDomain.cube(3)
    registered = [
        random_relu_loss(rng, box1), random_relu_loss(rng, box3),
        random_piecewise_loss(rng, box1), random_piecewise_loss(rng, box3),
        random_interp_loss(rng, box1), *relu_menu(box1), *relu_menu(box3),
        regularizer_loss("l2", 3.0, box3), regularizer_loss("l1", 2.0, box3),
    ]
    for game in (bilinear_game(), make_toy_gan_game(0.3), double_well_game()):
        for v in (-1.0, -0.2, 0.7):
            registered += [game.x_loss([v]), game.y_loss([v])]
    emb = ExpertsEmbedding(6)
    registered.append(emb.lifted_loss(rng.random(6)))
    for loss in registered:
        box = loss.domain
        assert lipschitz_and_bound_ok(loss, box, rng) == (True, True), loss.label
