"""The pricing algorithms see nothing but an oracle and public constants."""


import numpy as np

from revpref import AggregateDemandOracle, OracleStats, grid_search
from revpref.offline import offline_prices
from revpref.online import online_prices
from revpref.profit import separable_view
from revpref.valuations import Valuation
from conftest import quadratic_market


class CountingStub:
    """Stand-in oracle: answers with a fixed linear demand rule."""

    def __init__(self, info):
        self.info = info
        self.stats = OracleStats()
        self.calls = []

    def query(self, p):
        self.calls.append(np.array(p, dtype=float))
        self.stats.record(self.info.m)
        return self.info.m * np.clip(0.8 - np.asarray(p), 0.0, 1.0)

    def purchase(self, p):
        self.calls.append(np.array(p, dtype=float))
        self.stats.record(1)
        return np.clip(0.8 - np.asarray(p), 0.0, 1.0)


def _holds_valuation(obj):
    seen = set()
    stack = [obj]
    while stack:
        o = stack.pop()
        if id(o) in seen:
            continue
        seen.add(id(o))
        if isinstance(o, Valuation):
            return True
        if isinstance(o, dict):
            stack.extend(o.values())
        elif isinstance(o, (list, tuple)):
            stack.extend(o)
        elif hasattr(o, "__dict__"):
            stack.extend(vars(o).values())
    return False


def test_info_carries_no_valuations():
    market = quadratic_market(0, 4, 2)
    assert not _holds_valuation(market.info())
    assert _holds_valuation(market)


def test_offline_runs_against_stub():
    info = quadratic_market(0, 4, 2).info()
    stub = CountingStub(info)
    config, traj = offline_prices(stub, 25)
    assert len(stub.calls) == stub.stats.aggregate_queries == 25
    np.testing.assert_array_equal(stub.calls, traj.query_points)


def test_online_runs_against_stub():
    info = quadratic_market(0, 9, 2).info()
    stub = CountingStub(info)
    prices, bundles, _ = online_prices(stub)
    assert len(stub.calls) == 9
    np.testing.assert_array_equal(stub.calls, prices)


def test_grid_search_runs_against_stub():
    market = quadratic_market(0, 3, 2)
    view = separable_view(market)
    stub = CountingStub(view.info)
    res = grid_search(stub, view, 12, 0.05)
    assert len(stub.calls) == res.queries == 12


def test_real_oracle_exposes_only_info_and_query():
    oracle = AggregateDemandOracle(quadratic_market(0, 3, 2))
    public = {k for k in vars(oracle) if not k.startswith("_")}
    assert public == {"info", "stats"}
    assert not any(isinstance(v, Valuation) for k, v in vars(oracle).items() if not k.startswith("_"))
