"""
Self-play in zero-sum games
===========================

Both players run FTPL against each other. The uniform mixture over rounds
is an approximate equilibrium. A single sampled round need not be, which
the certificate makes visible.
"""

import numpy as np

from ncftpl import (FtplConfig, amplify, bilinear_game, double_well_game, make_toy_gan_game,
                    mixture_gap, selfplay_run)

T = 1024
eta = T ** -0.5
for game in (bilinear_game(), make_toy_gan_game(0.2), double_well_game()):
    traj = selfplay_run(game, T, FtplConfig(eta=eta, seed=1), FtplConfig(eta=eta, seed=2))
    mix = mixture_gap(traj)
    pair = amplify(traj, 8, np.random.default_rng(0))
    print(game.label)
    print(f"  mixture gaps   x={mix.gap_x:+.4f}  y={mix.gap_y:+.4f}")
    print(f"  best of 8 pure pairs {pair.x_hat} {pair.y_hat} gap sum {pair.total_gap:.3f}")
    print(f"  offline calls {traj.counter.offline_calls}")
