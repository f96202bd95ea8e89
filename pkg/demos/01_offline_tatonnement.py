"""
Offline welfare maximization from aggregate demand
==================================================

A seller who can only post prices and watch the total quantity demanded
still finds near-optimal prices. Each posted price vector is one query; the
excess supply (what a profit-maximizing producer would make minus what
consumers buy) is the gradient of a smoothed dual, and accelerated projected
gradient descent drives it toward zero.
"""

import numpy as np

from revpref import benchmark_market, offline_bound, offline_maximize_sw, primal_sw_star

# Five quadratic consumers, three goods, a linear cost with unit-norm
# coefficients, and consumption set [0, 1]^3.
market = benchmark_market("B1", seed=0)
print(market)
print("constants:", market.constants())

# The ground-truth optimum reads the valuations directly, something the
# pricing algorithm never does.
star = primal_sw_star(market, tol=1e-8)
print(f"\nSW* = {star.sw_star:.8f} (duality-gap certificate {star.residual:.1e})")

# %%
# Welfare gap against the number of queries
# -----------------------------------------
print(f"\n{'T':>6} {'realized SW':>14} {'gap':>11} {'guarantee':>10}")
for T in (25, 100, 400, 1600):
    run = offline_maximize_sw(market, T)
    gap = star.sw_star - run.realized_sw
    bound = offline_bound(market.lam, market.m, market.D, market.alpha_min, T)
    print(f"{T:>6} {run.realized_sw:>14.8f} {gap:>11.3e} {bound:>10.3f}")

# The guarantee is loose by orders of magnitude here, and the gap shrinks
# faster than 1/sqrt(T): quadrupling T cuts it by about 3 on this market.

# %%
# What the prices look like
# -------------------------
run = offline_maximize_sw(market, 400)
print("\nfinal prices       :", np.round(run.final_prices, 5))
print("cost coefficients  :", np.round(market.cost.b, 5))
print("excess supply norm :", f"{run.excess_supply_norms[-1]:.3e}")
print("queries used       :", run.queries)
