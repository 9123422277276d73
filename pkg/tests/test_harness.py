import numpy as np
import pytest
from scipy import optimize

from ncftpl.adversaries import (ADVERSARIES, Adversary, adaptive_relu_adversary, make_adversary,
                                random_piecewise_adversary, random_relu_adversary,
                                relu_alternating_adversary, relu_menu, sequence_adversary)
from ncftpl.domain import BoxDomain, CallCounter, DomainError, LossFunction
from ncftpl.harness import (FiniteLossDistribution, compute_regret, fit_power_law,
                            ftl_btl_check, ftpl_learner, online_to_batch, scaling_fit,
                            stability_probe_1d, stability_probe_kd, trial_seeds)
from ncftpl.learners import SINGLE, FtplConfig, ftpl_run
from ncftpl.losses import (abs_distance, linear, quadratic, random_interp_loss,
                           random_piecewise_loss, random_relu_loss, relu_regression, zero_loss)
from ncftpl.oracles import GridOracle, ScanOracle


# --- adversaries ---


def test_oblivious_adversaries_ignore_the_point(square):
    for name in ("relu-alternating", "relu-random", "relu-teacher", "piecewise-random"):
        adv = make_adversary(name, square, seed=3)
        assert adv.kind == "oblivious"
        assert adv.loss(5, np.array([1.0, 1.0])) is adv.loss(5, np.array([-1.0, 0.0]))
    with pytest.raises(ValueError):
        make_adversary("nope", square)
    with pytest.raises(ValueError):
        Adversary("psychic", lambda t, w: None, square, 1.0, 1.0)


def test_random_adversary_sequence_is_seeded(line):
    a, b = random_relu_adversary(line, 4), random_relu_adversary(line, 4)
    pts = np.linspace(-1, 1, 7)[:, None]
    for t in (3, 1, 10):
        np.testing.assert_array_equal(a.loss(t).values(pts), b.loss(t).values(pts))


def test_adversary_declared_constants_cover_served_losses(square):
    rng = np.random.default_rng(0)
    for name in sorted(ADVERSARIES):
        adv = make_adversary(name, square, seed=1)
        for t in range(1, 30):
            loss = adv.loss(t, square.sample(rng))
            assert loss.lipschitz_G <= adv.G + 1e-12 and loss.bound_B <= adv.B + 1e-12


def test_adaptive_menu_serves_the_larger_loss(line):
    adv = adaptive_relu_adversary(line)
    a, b = relu_menu(line)
    pts = np.linspace(-1, 1, 9)[:, None]

    def served(t, w):
        return adv.loss(t, None if w is None else np.array([w])).values(pts)

    np.testing.assert_array_equal(served(1, None), a.values(pts))
    np.testing.assert_array_equal(served(2, 0.5), b.values(pts))   # a(0.5)=0.25 < b(0.5)=1
    np.testing.assert_array_equal(served(3, -0.5), a.values(pts))
    np.testing.assert_array_equal(served(4, 0.0), a.values(pts))   # tie
    alt = relu_alternating_adversary(line)
    np.testing.assert_array_equal(alt.loss(2).values(pts), b.values(pts))


# --- regret ---


def test_regret_zero_losses(square):
    traj = ftpl_run(sequence_adversary([zero_loss(square)] * 10, square), 10,
                    FtplConfig(eta=1.0, oracle_resolution=0.25))
    rep = compute_regret(traj)
    assert rep.total_regret == 0.0 and rep.average_regret == 0.0


def test_regret_single_round(line):
    traj = ftpl_run(random_relu_adversary(line, 7), 1, FtplConfig(eta=1.0, seed=2))
    rep = compute_regret(traj)
    assert rep.T == 1
    assert rep.total_regret >= -rep.discretization_slack
    assert rep.total_regret == pytest.approx(traj.incurred[0] - rep.best_in_hindsight_value)


def test_regret_hand_computed_three_rounds(line):
    losses = [abs_distance(line, [0.5]), abs_distance(line, [-0.5]).scaled(2.0),
              abs_distance(line).scaled(0.5)]
    traj = ftpl_run(sequence_adversary(losses, line), 3, FtplConfig(eta=1.0, noise_mode=SINGLE),
                    sigma_override=[0.0])
    # follow-the-leader: -1, then 0.5, then the minimizer of l1 + l2, which is -0.5
    np.testing.assert_allclose(traj.points[:, 0], [-1.0, 0.5, -0.5], atol=1e-12)
    np.testing.assert_allclose(traj.incurred, [1.5, 2.0, 0.25], atol=1e-12)
    rep = compute_regret(traj)
    # best fixed point -0.5: 1 + 0 + 0.25
    assert rep.best_in_hindsight_value == pytest.approx(1.25, abs=1e-12)
    assert rep.total_regret == pytest.approx(2.5, abs=rep.discretization_slack + 1e-12)


def test_regret_charges_one_offline_call_and_checks_length(line):
    traj = ftpl_run(random_relu_adversary(line, 7), 5, FtplConfig(eta=1.0, seed=2))
    c = CallCounter()
    compute_regret(traj, counter=c)
    assert c.offline_calls == 1
    with pytest.raises(ValueError):
        compute_regret(traj, losses=traj.losses[:3])


def test_comparator_is_certified(line):
    rng = np.random.default_rng(4)
    for seed in range(10):
        traj = ftpl_run(random_relu_adversary(line, seed), 40, FtplConfig(eta=0.2, seed=seed))
        rep = compute_regret(traj)

        def total(w):
            return sum(l.value([w]) for l in traj.losses)

        lo = max(-1.0, rep.best_in_hindsight_w[0] - 0.05)
        hi = min(1.0, rep.best_in_hindsight_w[0] + 0.05)
        refined = optimize.minimize_scalar(total, bounds=(lo, hi), method="bounded",
                                           options=dict(xatol=1e-10))
        dense = min(total(w) for w in rng.uniform(-1, 1, 300))
        assert rep.best_in_hindsight_value <= refined.fun + rep.discretization_slack
        assert rep.best_in_hindsight_value <= dense + rep.discretization_slack


# --- FTL-BTL ---


def test_ftl_btl_single_round_zero_noise(line):
    traj = ftpl_run(random_relu_adversary(line, 1), 1, FtplConfig(eta=1.0, noise_mode=SINGLE),
                    sigma_override=[0.0])
    lhs, rhs, holds = ftl_btl_check(traj)
    loss = traj.losses[0]
    # w_2 minimizes l_1, so the right side is l_1(w_1) - min l_1 on the grid
    w2 = ScanOracle(1e-3).minimize([loss], [0.0], line).w_hat
    assert rhs == pytest.approx(loss.value(traj.points[0]) - loss.value(w2), abs=1e-12)
    assert lhs == pytest.approx(rhs, abs=1e-12) and holds


def test_ftl_btl_constant_losses_by_hand(line):
    loss = linear([1.0], line)  # l(w) = w
    sigma = 0.4
    traj = ftpl_run(sequence_adversary([loss] * 3, line), 3,
                    FtplConfig(eta=1.0, noise_mode=SINGLE), sigma_override=[sigma])
    # w_1 = 1 (pure noise), afterwards the loss dominates: w = -1
    np.testing.assert_array_equal(traj.points[:, 0], [1.0, -1.0, -1.0])
    lhs, rhs, holds = ftl_btl_check(traj)
    assert lhs == pytest.approx((1 - 1 - 1) - (-3))
    # span sigma*(w_1 - w*) = 0.4 * 2; instability (1 - (-1)) + 0 + 0 = 2
    assert rhs == pytest.approx(0.8 + 2.0)
    assert holds


def test_ftl_btl_random_piecewise(line, square):
    for seed in range(40):
        box = line if seed % 2 else square
        res = 1e-3 if box.dim == 1 else 0.1
        adv = random_piecewise_adversary(box, seed)
        traj = ftpl_run(adv, 32, FtplConfig(eta=0.5, noise_mode=SINGLE, seed=seed,
                                            oracle_resolution=res))
        assert ftl_btl_check(traj)[2]


def test_ftl_btl_rejects_fresh_noise(line):
    traj = ftpl_run(random_relu_adversary(line, 1), 4, FtplConfig(eta=1.0, seed=1))
    with pytest.raises(ValueError):
        ftl_btl_check(traj)


# --- 1-D stability probe ---


def test_probe_1d_zero_new_loss(line, rng):
    prefix = [random_relu_loss(rng, line) for _ in range(3)]
    rep = stability_probe_1d(prefix, zero_loss(line), 0.1, 200, ScanOracle(1e-4), rng)
    assert rep.mean_gap == 0.0 and rep.violations == 0 and rep.first_order_violations == 0


def test_probe_1d_quadratic_closed_form(line):
    q, lin = quadratic(line), linear([1.0], line)
    scan = ScanOracle(1e-4)
    rng = np.random.default_rng(2)
    rep = stability_probe_1d([q], lin, 0.5, 300, scan, rng)
    assert rep.violations == 0 and rep.first_order_violations == 0
    assert rep.shift == 2.0
    # recompute the gaps in closed form from the same noise stream
    s = -np.log(1.0 - np.random.default_rng(2).random((300, 1))[:, 0]) / 0.5
    gaps = np.abs(np.clip(s / 2, -1, 1) - np.clip((s - 1) / 2, -1, 1))
    np.testing.assert_allclose(rep.gaps, gaps, atol=2e-4)
    # monotonicity holds exactly in closed form: w_{t+1}(s + 2) = (s + 1)/2 >= s/2 = w_t(s)
    assert np.all(np.clip((s + 2 - 1) / 2, -1, 1) >= np.clip(s / 2, -1, 1))


def test_probe_1d_validation(line, square):
    with pytest.raises(ValueError):
        stability_probe_1d([], quadratic(line), 0.1, 5, ScanOracle(1e-3), np.random.default_rng())
    with pytest.raises(DomainError):
        stability_probe_1d([], quadratic(square), 0.1, 5, ScanOracle(1e-4),
                           np.random.default_rng())


@pytest.mark.parametrize("eta", [0.01, 0.05, 0.1])
def test_probe_1d_stability_bound(line, eta):
    rng = np.random.default_rng(int(eta * 1000))
    scan = ScanOracle(1e-4)
    gaps, bound = [], 0.0
    for _ in range(20):
        prefix = [random_relu_loss(rng, line) for _ in range(4)]
        rep = stability_probe_1d(prefix, random_relu_loss(rng, line), eta, 50, scan, rng)
        assert rep.violations == 0 and rep.first_order_violations == 0
        gaps.append(rep.gaps)
        bound = max(bound, rep.bound)
    g = np.concatenate(gaps)
    assert g.mean() <= bound + 2e-4 + 3 * g.std(ddof=1) / np.sqrt(g.size)


def test_probe_1d_monotonicity_random_instances(line):
    rng = np.random.default_rng(77)
    scan = ScanOracle(1e-4)
    total = 0
    for _ in range(100):
        prefix = [random_interp_loss(rng, line) for _ in range(rng.integers(0, 4))]
        rep = stability_probe_1d(prefix, random_interp_loss(rng, line), rng.choice([0.1, 1.0]),
                                 5, scan, rng)
        total += rep.violations + rep.first_order_violations
        assert all(v == 0 for v in rep.relation_violations.values())
    assert total == 0


# --- k-dim probe ---


def test_probe_kd_zero_new_loss(square, rng):
    prefix = [random_piecewise_loss(rng, square)]
    rep = stability_probe_kd(prefix, zero_loss(square), 0.5, 0.25, 20, GridOracle(0.1), rng)
    assert rep.mean_gap == 0.0 and rep.violations == 0 and rep.checks == 40


def test_probe_kd_separable_matches_1d(rng):
    line, square = BoxDomain.cube(1), BoxDomain.cube(2)
    h = 1 / 64
    for _ in range(10):
        g1, g2 = random_interp_loss(rng, line), random_interp_loss(rng, line)
        f = LossFunction(lambda p, g1=g1, g2=g2: g1.fn(p[..., :1]) + g2.fn(p[..., 1:]),
                         max(g1.lipschitz_G, g2.lipschitz_G), g1.bound_B + g2.bound_B,
                         domain=square)
        sigma = rng.exponential(1.0, 2)
        w = GridOracle(h).minimize([f], sigma, square).w_hat
        w1 = ScanOracle(h).minimize([g1], sigma[:1], line).w_hat[0]
        w2 = ScanOracle(h).minimize([g2], sigma[1:], line).w_hat[0]
        assert w.tolist() == [w1, w2]
        rep = stability_probe_kd([f], f, 0.5, 0.25, 10, GridOracle(h), rng)
        assert rep.violations == 0


def test_probe_kd_random_piecewise_three_dims(rng):
    box = BoxDomain.cube(3, 0.0, 1.0)
    oracle = GridOracle(1 / 8)
    means = []
    prefix = [random_piecewise_loss(rng, box) for _ in range(3)]
    new = random_piecewise_loss(rng, box)
    for eta in (1.0, 0.1, 0.01):
        rep = stability_probe_kd(prefix, new, eta, 0.25, 100, oracle, np.random.default_rng(1))
        assert rep.violations == 0 and rep.first_order_violations == 0
        assert rep.tolerance == 0.25 + 1 / 8 and rep.shift == 3 * new.bound_B / 0.25
        assert np.isfinite(rep.mean_gap)
        means.append(rep.mean_gap)
    assert means[0] >= means[1] >= means[2]


def test_probe_kd_validation(line, square):
    with pytest.raises(DomainError):
        stability_probe_kd([], quadratic(line), 0.1, 0.2, 5, GridOracle(0.1),
                           np.random.default_rng())
    with pytest.raises(ValueError):
        stability_probe_kd([], quadratic(square), 0.1, 0.0, 5, GridOracle(0.1),
                           np.random.default_rng())


# --- scaling fit ---


def test_power_law_recovers_planted_slope():
    T = np.array([64, 128, 256, 512, 1024, 2048, 4096])
    slope, intercept = fit_power_law(T, 0.7 * T ** -0.5)
    assert abs(slope + 0.5) < 1e-9 and abs(intercept - np.log(0.7)) < 1e-9


def test_scaling_fit_requires_four_horizons(line):
    with pytest.raises(ValueError):
        scaling_fit(ftpl_learner(), lambda T, s: random_relu_adversary(line, s), [8, 16, 32], 2)


def test_scaling_fit_floors_nonpositive_means(line):
    fit = scaling_fit(ftpl_learner(), lambda T, s: relu_alternating_adversary(line),
                      [16, 32, 64, 128], 2)
    assert fit.floored.all()
    np.testing.assert_array_equal(fit.mean_avg_regret, fit.slack)
    assert np.all(fit.slack > 0)


def test_scaling_fit_is_order_independent(line):
    fac = lambda T, s: random_relu_adversary(line, s)  # noqa: E731
    a = scaling_fit(ftpl_learner(), fac, [16, 32, 64, 128], 3, seed=5)
    b = scaling_fit(ftpl_learner(), fac, [16, 32, 64, 128], 3, seed=5)
    assert a.exponent == b.exponent
    c = CallCounter()
    scaling_fit(ftpl_learner(), fac, [16, 32, 64, 128], 1, seed=5, counter=c)
    assert c.offline_calls == 240 + 4 and c.value_calls == 240


def test_trial_seeds_prefix_stable():
    assert trial_seeds(3, 5)[:3] == trial_seeds(3, 3)
    assert len(set(trial_seeds(3, 100))) == 100


# --- online-to-batch ---


def test_online_to_batch_single_sample(line):
    loss = relu_regression([1.0], 0.5, line)
    res = online_to_batch([loss], ftpl_learner(), np.random.default_rng(0))
    np.testing.assert_array_equal(res.w_hat, res.trajectory.points[0])
    assert res.index == 0 and np.isnan(res.risk_estimate)


def test_online_to_batch_accounting(line):
    dist = FiniteLossDistribution([relu_regression([1.0], 0.5, line),
                                   relu_regression([-1.0], 0.2, line)], [0.3, 0.7], line)
    rng = np.random.default_rng(1)
    c = CallCounter()
    res = online_to_batch(dist.sample(rng, 50), ftpl_learner(), rng, dist.sample(rng, 20),
                          counter=c)
    assert c.sample_count == 50 and c.value_calls == 50 + 20 and c.offline_calls == 50
    assert res.risk_estimate >= 0
    with pytest.raises(ValueError):
        online_to_batch([], ftpl_learner(), rng)


def test_online_to_batch_two_point_distribution(line):
    dist = FiniteLossDistribution([relu_regression([1.0], 0.6, line),
                                   relu_regression([-1.0], 0.3, line)], [0.5, 0.5], line)
    best = dist.minimize(ScanOracle(1e-3))
    # population risk 0.5 (relu(w) - 0.6)^2 + 0.5 (relu(-w) - 0.3)^2 is minimized at w = 0.6
    assert best.w_hat[0] == pytest.approx(0.6, abs=1e-3)
    rng = np.random.default_rng(3)
    excess, regret = [], []
    for _ in range(60):
        res = online_to_batch(dist.sample(rng, 128), ftpl_learner(), rng)
        excess.append(dist.risk(res.w_hat) - best.objective)
        regret.append(compute_regret(res.trajectory).average_regret)
    diff = np.array(excess) - np.array(regret)
    assert diff.mean() <= 3 * diff.std(ddof=1) / np.sqrt(diff.size)


def test_online_to_batch_deterministic_distribution(line):
    loss = relu_regression([1.0], 0.4, line)
    dist = FiniteLossDistribution([loss], [1.0], line)
    best = dist.minimize(ScanOracle(1e-3)).objective
    means = []
    for n in (16, 256):
        rng = np.random.default_rng(n)
        ex = [dist.risk(online_to_batch([loss] * n, ftpl_learner(), rng).w_hat) - best
              for _ in range(40)]
        means.append(np.mean(ex))
    assert means[1] < means[0]
    assert means[1] < 0.05


def test_finite_distribution_validation(line):
    loss = quadratic(line)
    with pytest.raises(ValueError):
        FiniteLossDistribution([loss], [0.5], line)
    with pytest.raises(ValueError):
        FiniteLossDistribution([loss, loss], [1.5, -0.5], line)
    dist = FiniteLossDistribution([loss, linear([1.0], line)], [0.25, 0.75], line)
    pts = np.array([[0.2], [-0.4]])
    np.testing.assert_allclose(dist.risk_values(pts), [dist.risk(p) for p in pts], atol=1e-15)
