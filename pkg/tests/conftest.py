import numpy as np
import pytest

from revpref import CostFunction, FeasibleSet, Market, QuadraticValuation


def quadratic_market(seed, m, n, cost="linear", general=False, a_range=(0.3, 1.2)):
    """Seeded quadratic market on the unit box.

    ``general=True`` draws full (non-diagonal) curvature matrices, which
    routes demand through the iterative solver.
    """
    rng = np.random.default_rng(seed)
    consumers = []
    for _ in range(m):
        a = rng.uniform(*a_range, n)
        if general:
            B = rng.normal(size=(n, n))
            Q = B @ B.T / n + 0.5 * np.eye(n)
        else:
            Q = rng.uniform(0.5, 2.0, n)
        consumers.append(QuadraticValuation(a, Q))
    if cost == "linear":
        c = CostFunction.linear(rng.uniform(0.0, 0.4, n))
    elif cost == "quadratic":
        c = CostFunction(n, linear=rng.uniform(0.0, 0.1, n), kappa=0.2, family="quadratic-clipped")
    else:
        c = CostFunction.zero(n)
    return Market(consumers, c, FeasibleSet.unit_box(n))


def grid_argmax_1d(f, lo, hi, num=200_001):
    """Brute-force maximizer of a vectorized 1-D function on a uniform grid."""
    xs = np.linspace(lo, hi, num)
    vals = f(xs)
    k = int(np.argmax(vals))
    return xs[k], vals[k]


@pytest.fixture
def one_good():
    """m=1, n=1, v(x) = x - x^2/2 on [0, 1]."""
    return QuadraticValuation([1.0], 1.0), FeasibleSet.unit_box(1)
