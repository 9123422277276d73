"""
Where a fixed regularizer is not enough
=======================================

Against an adversary that always serves the ReLU loss that hurts the
learner most, FTRL with a squared-norm regularizer keeps jumping between
the ends of the interval and its average regret does not decay. FTPL on
the very same recorded loss sequence does fine.
"""

import numpy as np

from ncftpl import (BoxDomain, FtplConfig, FtrlConfig, adaptive_relu_adversary, compute_regret,
                    ftpl_run, ftrl_run, replay_adversary)

line = BoxDomain.cube(1)

for T in (128, 512, 2048):
    ftrl = ftrl_run(adaptive_relu_adversary(line), T, FtrlConfig(weight=T ** 0.5))
    ftrl_regret = compute_regret(ftrl).average_regret
    replay = replay_adversary(ftrl)
    ftpl = [compute_regret(ftpl_run(replay, T, FtplConfig(eta=T ** -0.5, seed=s))).average_regret
            for s in range(5)]
    print(f"T={T:5d}  FTRL {ftrl_regret:.3f}   FTPL on the same losses {np.mean(ftpl):.4f}")

print("FTRL's last points", ftrl.points[-4:, 0])
