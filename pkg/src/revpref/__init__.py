"""Pricing with revealed preferences: simulated markets, dual price
algorithms and their certified oracles."""

from .bench import RunRecord, benchmark_market, make_benchmark_suite, run_experiment
from .config import ConfigError, ExperimentConfig, load_experiment, load_market
from .costs import CostFunction
from .errors import ConvergenceError, InvalidInputError, NumericError, RevprefError
from .market import (
    LAMBDA_FLOOR,
    AggregateDemandOracle,
    ArrivalOracle,
    Market,
    MarketInfo,
    OracleStats,
    aggregate_demand,
    concave_conjugate,
    cost_conjugate,
    demand,
    profit,
    social_welfare,
)
from .offline import dual_gradient, offline_bound, offline_maximize_sw, offline_prices
from .online import expected_online_sw, online_bound, online_prices, online_simulate, regret_bound
from .oracle import (
    deviation_bound,
    dual_value,
    optimal_profit,
    per_good_profit_oracle,
    permutation_deviation,
    primal_sw_star,
)
from .profit import grid_search, make_appendix_c_instance, profit_grid_search, revenue_grid_search
from .sets import FeasibleSet, project, project_prices
from .valuations import (
    AppendixCPiece,
    ApproximateConsumer,
    QuadraticValuation,
    ScalarConcave,
    SeparableValuation,
    appendix_c_valuation,
)

__version__ = "0.1.0"
