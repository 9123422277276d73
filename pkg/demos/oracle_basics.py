"""
Offline oracles on a grid
=========================

A brute-force oracle returns the grid minimizer of a sum of losses minus a
linear perturbation, together with a certified bound on how far the grid
value can sit above the true minimum.
"""

import numpy as np

from ncftpl import BoxDomain, CallCounter, GridOracle, ScanOracle, quadratic, random_relu_loss

line = BoxDomain.cube(1)
square = BoxDomain.cube(2)

# the minimizer of w^2 - 0.5 w is 0.25
answer = ScanOracle(1e-4).minimize([quadratic(line)], [0.5], line)
print("1-D minimizer", answer.w_hat, "bound", answer.error_bound)

# the 1-D scan is exact on its grid but prunes cells it can rule out,
# so a million-point grid stays cheap
answer = ScanOracle(1e-6).minimize([quadratic(line)], [0.001], line)
print("fine scan", answer.w_hat)

# two dimensions, a few ReLU regression losses
rng = np.random.default_rng(0)
losses = [random_relu_loss(rng, square) for _ in range(5)]
counter = CallCounter()
coarse = GridOracle(0.1).minimize(losses, [0.2, 0.0], square, counter)
fine = GridOracle(0.01).minimize(losses, [0.2, 0.0], square, counter)
print("coarse", coarse.w_hat, coarse.objective, "+-", coarse.error_bound)
print("fine  ", fine.w_hat, fine.objective)

# every call is charged to the counter
print("offline calls", counter.offline_calls)
