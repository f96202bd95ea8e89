"""
Pricing consumers who arrive one at a time
==========================================

Consumers show up in a uniformly random order. Before each arrival the
seller posts prices, observes that single purchase, and takes one online
gradient step. The per-consumer welfare deficit shrinks as the population
grows.
"""

import numpy as np

from revpref import benchmark_market, expected_online_sw, online_bound, online_simulate, primal_sw_star, regret_bound
from revpref.oracle import deviation_bound, permutation_deviation

base = benchmark_market("B2", seed=0)

# %%
# One arrival order
# -----------------
run = online_simulate(base, seed=0)
print("first five posted prices:\n", np.round(run.prices[:5], 4))
print("last posted price      :", np.round(run.prices[-1], 4))
print(f"regret {run.regret:.3f} <= {regret_bound(run, base.lam):.3f}")

# %%
# Many orders, two population sizes
# ---------------------------------
for k in (1, 4):
    market = base.replicate(k)
    star = primal_sw_star(market).sw_star
    summary = expected_online_sw(market, num_permutations=60, seed=1)
    gap = star - summary.mean
    bound = online_bound(market.lam, market.D_inf, market.n, market.m)
    print(f"m={market.m:>4}: SW*={star:9.4f}  E[SW]={summary.mean:9.4f} +- {summary.stderr:.3f}  "
          f"gap/m={gap / market.m:.5f}  guarantee/m={bound / market.m:.4f}")

# %%
# Why early arrivals are informative
# ----------------------------------
# The average optimal bundle of the consumers still to come stays close to
# the population average, even after a random prefix has been removed.
X = primal_sw_star(benchmark_market("B5")).bundles
for i in (2, 10, 19, 20):
    est = permutation_deviation(X, i, 10_000, seed=i)
    print(f"i={i:>2}: deviation {est.mean:.4f} +- {est.stderr:.4f}   bound {deviation_bound(1.0, 2, 20, i):.4f}")
