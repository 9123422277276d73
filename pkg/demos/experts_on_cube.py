"""
Experts as vertices of a cube
=============================

N experts sit on the corners of a ceil(log2 N)-dimensional cube. An
interior point is a product distribution over corners, and its loss is
the expected expert loss. FTPL on the cube then competes with the best
expert.
"""

import numpy as np

from ncftpl import ExpertsEmbedding, FtplConfig, experts_eta, experts_regret_run

emb = ExpertsEmbedding(5)
print("cube dimension", emb.d)
print("corner -> expert", emb.vertex_expert)
losses = np.array([0.1, 0.9, 0.5, 0.3, 0.7])
print("loss at the centre", emb.lifted_values(losses, np.full((1, emb.d), 0.5))[0])

rng = np.random.default_rng(4)
T, N = 1024, 8
means = rng.uniform(0.2, 0.8, N)
L = (rng.random((T, N)) < means).astype(float)
report, traj = experts_regret_run(N, T, L, FtplConfig(eta=experts_eta(T), seed=1))
uniform = (L.mean(axis=1).sum() - L.sum(axis=0).min()) / T
print(f"average regret {report.average_regret:.4f}   uniform play {uniform:.4f}")
print("best expert", int(np.argmin(L.sum(axis=0))), "final corner", traj.points[-1])
