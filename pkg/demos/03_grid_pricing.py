"""
Profit maximization by a uniform price grid
===========================================

When valuations and cost split across goods, one posted price vector probes
every good at once. Walking a calibrated grid and keeping each good's best
price is enough to come within eps of the optimal profit. A grid that is too
coarse can miss a narrow high-revenue window entirely.
"""

import math

import numpy as np

from revpref import OracleStats, benchmark_market, make_appendix_c_instance, profit, profit_grid_search, revenue_grid_search
from revpref.oracle import optimal_profit
from revpref.profit import interval_centered_at

# %%
# A separable quadratic market
# ----------------------------
market = benchmark_market("B3", seed=0)
stats = OracleStats()
res = profit_grid_search(market, eps=0.05, stats=stats, lam=1.0, alpha=1.0)
print("grid size r       :", res.r, " queries:", stats.aggregate_queries)
print("chosen prices     :", np.round(res.prices, 4))
print(f"profit            : {profit(market, res.prices):.6f}")
print(f"fine-scan optimum : {optimal_profit(market, 5e-4, lam=1.0):.6f}")

# %%
# The flat-revenue instance
# -------------------------
# With v'(x) = 1/x on [1/lam, 1], revenue p x(p) equals 1 at every price in
# [1, lam], so the grid can't go wrong.
flat = make_appendix_c_instance(math.e)
prices = np.linspace(0.5, 3.0, 11)
print("\nrevenue curve:", np.round([p * flat.consumers[0].demand(flat.feasible, [p])[0] for p in prices], 3))
print("revenue found:", profit(flat, revenue_grid_search(flat, 0.1).prices))

# %%
# A hidden bump
# -------------
# Raising the derivative on a short interval lifts the best revenue to 1.1,
# but only for prices in a window about 0.07 wide around 1.4.
eps = 0.1
bumped = make_appendix_c_instance(math.e, interval_centered_at(1.4, eps))
for coarsen in (1, 2, 4):
    r = revenue_grid_search(bumped, eps, lam=math.e, coarsen=coarsen)
    print(f"step {r.step:.2f} ({r.r:>2} queries): price {r.prices[0]:.2f}, revenue {profit(bumped, r.prices):.4f}")
