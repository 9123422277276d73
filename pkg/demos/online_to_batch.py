"""
From regret to excess risk
==========================

Run FTPL over an i.i.d. sample and return the iterate of a uniformly
random round. Its expected excess risk is at most the expected average
regret.
"""

import numpy as np

from ncftpl import (BoxDomain, FiniteLossDistribution, ScanOracle, compute_regret, ftpl_learner,
                    online_to_batch, relu_regression)

line = BoxDomain.cube(1)
rng = np.random.default_rng(0)
atoms = [relu_regression(rng.uniform(-1, 1, 1), rng.uniform(0, 1), line) for _ in range(8)]
dist = FiniteLossDistribution(atoms, rng.dirichlet(np.ones(8)), line)
best = dist.minimize(ScanOracle(1e-3))
print("population minimizer", best.w_hat, "risk", round(best.objective, 4))

for n in (64, 256, 1024):
    excess, regret = [], []
    for _ in range(20):
        res = online_to_batch(dist.sample(rng, n), ftpl_learner(eta=n ** -0.5), rng)
        excess.append(dist.risk(res.w_hat) - best.objective)
        regret.append(compute_regret(res.trajectory).average_regret)
    print(f"n={n:5d}  excess risk {np.mean(excess):.4f}  average regret {np.mean(regret):.4f}")
