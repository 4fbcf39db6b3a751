"""How many samples does the guarantee ask for?

Walks through the closed-form sample count for a two-parameter model with a
Rademacher design (alpha^2 = 10, so the expected Gram is 10 I) and noise with
sub-Gaussian parameter 4.  Run: python demos/01_sample_count_bound.py
"""

import math

from lstail import bounds

inp = bounds.BoundInputs(p=2, alpha=math.sqrt(10), delta=4.0, sigma_min=10.0, sigma_max=10.0)
eps = 0.2

# Two terms compete: one is driven by the noise and scales like 1/r^2,
# the other is the price of a well-conditioned random Gram matrix.
print(f"{'r':>6} {'noise term':>11} {'gram term':>10} {'n':>5}")
for r in (0.25, 0.5, 0.75, 1.0, 1.5, 2.0):
    res = bounds.n_required(inp, r, eps)
    print(f"{r:6.2f} {res.n1:11.2f} {res.nrand:10.2f} {res.n:5d}")

# Below this radius the noise term dominates.
print(f"\ncrossover radius: {bounds.crossover_r(inp):.4f}")

# Going the other way: with a fixed budget, what accuracy or confidence do we get?
n = 200
print(f"with N = {n}: r = {bounds.invert_r(inp, n, eps):.4f} at eps = {eps}")
print(f"with N = {n}: eps = {bounds.invert_eps(inp, n, 0.5):.4g} at r = 0.5")

# Too few samples for the Gram term and no radius can be promised.
print(f"with N = 50: r = {bounds.invert_r(inp, 50, eps)}")
