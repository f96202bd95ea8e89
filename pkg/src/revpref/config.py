"""Plain-text market and experiment configuration.

The format is INI-like: ``[section]`` headers followed by ``key = value``
lines; ``#`` and ``;`` start comments. Vectors are comma separated, matrix
rows are separated by ``|``. Sections::

    [experiment]   kind, id, seed and the algorithm parameters
    [set]          kind = box (upper = u1, u2, ...) or
                   kind = nonneg-ball (radius = r, n = k)
    [cost]         family = zero | linear (coef = ...) |
                   quadratic-clipped (linear = ..., kappa = k)
    [market]       optional: replicate = k, lam_floor = f
    [consumer.N]   one per consumer, in increasing N:
                   family = quadratic          a = ..., curvature = ...
                   family = separable-concave  a = ..., w = ..., q = ...
                   family = appendix-c         lam = ..., interval = lo, hi

``curvature`` is either a vector (the diagonal) or ``|``-separated rows.
"""

from __future__ import annotations

import configparser
import re
from dataclasses import dataclass, field

import numpy as np

from .costs import CostFunction, LINEAR, QUADRATIC_CLIPPED, ZERO
from .errors import InvalidInputError
from .market import LAMBDA_FLOOR, Market
from .sets import BOX, NONNEG_BALL, FeasibleSet
from .valuations import (
    APPENDIX_C,
    QUADRATIC,
    SEPARABLE,
    AppendixCPiece,
    QuadraticValuation,
    ScalarConcave,
    SeparableValuation,
)

KINDS = ("offline", "sweep", "online", "profit", "revenue", "deviation")

_INT_KEYS = {"seed", "T", "num_permutations", "samples", "replicate"}
_FLOAT_KEYS = {"eps", "lam", "alpha"}


class ConfigError(InvalidInputError):
    """A config problem, with the offending line when it is known."""


@dataclass
class ExperimentConfig:
    kind: str
    market: Market
    seed: int
    id: str = "experiment"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown experiment kind {self.kind!r}")
        if self.seed is None:
            raise ConfigError("a seed is mandatory")
        _validate_params(self.kind, self.params)


def _validate_params(kind, params):
    def need(key, test, msg):
        if key not in params:
            raise ConfigError(f"[experiment] {key}: required for kind={kind}")
        if not test(params[key]):
            raise ConfigError(f"[experiment] {key}: {msg}")

    if kind == "offline":
        need("T", lambda v: v >= 1, "must be >= 1")
    elif kind == "sweep":
        need("T_values", lambda v: len(v) >= 1 and min(v) >= 1, "must be positive integers")
    elif kind == "online":
        need("num_permutations", lambda v: v >= 1, "must be >= 1")
    elif kind in ("profit", "revenue"):
        need("eps", lambda v: v > 0, "must be positive")
    elif kind == "deviation":
        need("samples", lambda v: v >= 2, "must be >= 2")


# ----------------------------------------------------------------------------
# formatting helpers


def fmt(x) -> str:
    """Float text that round-trips exactly."""
    return format(float(x), ".17g")


def fmt_vec(v) -> str:
    return ", ".join(fmt(x) for x in np.asarray(v, dtype=float).ravel())


def _line_map(text):
    lines, section = {}, None
    for k, raw in enumerate(text.splitlines(), start=1):
        s = raw.strip()
        m = re.match(r"\[(.+)\]$", s)
        if m:
            section = m.group(1).strip()
            lines[(section, None)] = k
        elif "=" in s and section is not None and not s.startswith(("#", ";")):
            lines[(section, s.split("=", 1)[0].strip().lower())] = k
    return lines


class _Reader:
    def __init__(self, parser, lines):
        self.parser = parser
        self.lines = lines

    def where(self, section, key=None):
        line = self.lines.get((section, key.lower() if key else None))
        loc = f"line {line}: " if line else ""
        return f"{loc}[{section}]" + (f" {key}" if key else "")

    def get(self, section, key, default=None):
        if not self.parser.has_option(section, key):
            if default is None:
                raise ConfigError(f"{self.where(section)}: missing key {key!r}")
            return default
        return self.parser.get(section, key)

    def num(self, section, key, default=None, cast=float):
        raw = self.get(section, key, None if default is None else str(default))
        try:
            return cast(raw)
        except ValueError:
            raise ConfigError(f"{self.where(section, key)}: expected a number, got {raw!r}") from None

    def vec(self, section, key, default=None):
        raw = self.get(section, key, default)
        try:
            return np.array([float(t) for t in raw.split(",") if t.strip()])
        except ValueError:
            raise ConfigError(f"{self.where(section, key)}: expected comma-separated numbers, got {raw!r}") from None

    def matrix(self, section, key):
        raw = self.get(section, key)
        try:
            rows = [[float(t) for t in row.split(",") if t.strip()] for row in raw.split("|")]
            if len(rows) == 1:
                return rows[0][0] if len(rows[0]) == 1 else np.array(rows[0])
            return np.array(rows)
        except ValueError:
            raise ConfigError(f"{self.where(section, key)}: malformed matrix {raw!r}") from None


def _parse(text):
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"config syntax error: {exc}") from None
    return _Reader(parser, _line_map(text))


def _build_set(rd):
    kind = rd.get("set", "kind")
    if kind == BOX:
        return FeasibleSet.box(rd.vec("set", "upper"))
    if kind == NONNEG_BALL:
        return FeasibleSet.nonneg_ball(rd.num("set", "radius"), rd.num("set", "n", cast=int))
    raise ConfigError(f"{rd.where('set', 'kind')}: unknown set kind {kind!r}")


def _build_cost(rd, n):
    family = rd.get("cost", "family")
    if family == ZERO:
        return CostFunction.zero(n)
    if family == LINEAR:
        return CostFunction.linear(rd.vec("cost", "coef"))
    if family == QUADRATIC_CLIPPED:
        return CostFunction(n, rd.vec("cost", "linear", ",".join(["0"] * n)), rd.num("cost", "kappa"), family=family)
    raise ConfigError(f"{rd.where('cost', 'family')}: unknown cost family {family!r}")


def _build_consumer(rd, section):
    family = rd.get(section, "family")
    if family == QUADRATIC:
        return QuadraticValuation(rd.vec(section, "a"), rd.matrix(section, "curvature"))
    if family == SEPARABLE:
        a = rd.vec(section, "a")
        w = rd.vec(section, "w", ",".join(["0"] * len(a)))
        q = rd.vec(section, "q", ",".join(["0"] * len(a)))
        if not len(a) == len(w) == len(q):
            raise ConfigError(f"{rd.where(section)}: a, w and q need equal lengths")
        return SeparableValuation([ScalarConcave(*t) for t in zip(a, w, q)])
    if family == APPENDIX_C:
        lam = rd.num(section, "lam")
        interval = None
        if rd.parser.has_option(section, "interval"):
            iv = rd.vec(section, "interval")
            if len(iv) != 2:
                raise ConfigError(f"{rd.where(section, 'interval')}: need two endpoints")
            interval = (iv[0], iv[1])
        return SeparableValuation([AppendixCPiece(lam, interval)], family=APPENDIX_C)
    raise ConfigError(f"{rd.where(section, 'family')}: unknown valuation family {family!r}")


def market_from_reader(rd) -> Market:
    try:
        feasible = _build_set(rd)
        cost = _build_cost(rd, feasible.n)
        sections = [s for s in rd.parser.sections() if s.startswith("consumer.")]
        try:
            sections.sort(key=lambda s: int(s.split(".", 1)[1]))
        except ValueError:
            raise ConfigError("consumer sections must be named [consumer.<integer>]") from None
        if not sections:
            raise ConfigError("no [consumer.N] sections")
        consumers = []
        for s in sections:
            try:
                consumers.append(_build_consumer(rd, s))
            except ConfigError:
                raise
            except InvalidInputError as exc:
                raise ConfigError(f"{rd.where(s)}: {exc}") from None
        replicate = rd.num("market", "replicate", 1, int) if rd.parser.has_section("market") else 1
        floor = rd.num("market", "lam_floor", LAMBDA_FLOOR) if rd.parser.has_section("market") else LAMBDA_FLOOR
        return Market(consumers * replicate, cost, feasible, floor)
    except ConfigError:
        raise
    except InvalidInputError as exc:
        raise ConfigError(f"invalid market: {exc}") from None


def load_market(text: str) -> Market:
    return market_from_reader(_parse(text))


def load_experiment(text: str, seed: int | None = None) -> ExperimentConfig:
    rd = _parse(text)
    if not rd.parser.has_section("experiment"):
        raise ConfigError("missing [experiment] section")
    params = {}
    for key, raw in rd.parser.items("experiment"):
        if key in ("kind", "id"):
            continue
        if key == "T_values":
            params[key] = [int(v) for v in rd.vec("experiment", key)]
        elif key in _INT_KEYS:
            params[key] = rd.num("experiment", key, cast=int)
        elif key in _FLOAT_KEYS:
            params[key] = rd.num("experiment", key)
        else:
            raise ConfigError(f"{rd.where('experiment', key)}: unknown key")
    cfg_seed = params.pop("seed", None)
    if seed is not None:
        cfg_seed = seed
    if cfg_seed is None:
        raise ConfigError("[experiment] seed: a seed is mandatory")
    return ExperimentConfig(
        kind=rd.get("experiment", "kind"),
        market=market_from_reader(rd),
        seed=cfg_seed,
        id=rd.get("experiment", "id", "experiment"),
        params=params,
    )


def dump_market(market: Market) -> str:
    out = []
    fs = market.feasible
    out.append("[set]")
    if fs.is_box:
        out += [f"kind = {BOX}", f"upper = {fmt_vec(fs.upper)}"]
    else:
        out += [f"kind = {NONNEG_BALL}", f"radius = {fmt(fs.radius)}", f"n = {fs.n}"]
    out += ["", "[cost]", f"family = {market.cost.family}"]
    if market.cost.family == LINEAR:
        out.append(f"coef = {fmt_vec(market.cost.b)}")
    elif market.cost.family == QUADRATIC_CLIPPED:
        out += [f"linear = {fmt_vec(market.cost.b)}", f"kappa = {fmt(market.cost.kappa)}"]
    out += ["", "[market]", f"lam_floor = {fmt(market.lam_floor)}"]
    for k, v in enumerate(market.consumers, start=1):
        out += ["", f"[consumer.{k}]", f"family = {v.family}"]
        if isinstance(v, QuadraticValuation):
            out.append(f"a = {fmt_vec(v.a)}")
            if v.is_diagonal:
                out.append(f"curvature = {fmt_vec(np.diag(v.Q))}")
            else:
                out.append("curvature = " + " | ".join(fmt_vec(row) for row in v.Q))
        elif v.family == APPENDIX_C:
            piece = v.pieces[0]
            out.append(f"lam = {fmt(piece.lam)}")
            if piece.interval is not None:
                out.append(f"interval = {fmt_vec(piece.interval)}")
        elif isinstance(v, SeparableValuation):
            out.append(f"a = {fmt_vec([p.a for p in v.pieces])}")
            out.append(f"w = {fmt_vec([p.w for p in v.pieces])}")
            out.append(f"q = {fmt_vec([p.q for p in v.pieces])}")
        else:
            raise ConfigError(f"cannot serialize valuation {v!r}")
    return "\n".join(out) + "\n"


def dump_experiment(cfg: ExperimentConfig) -> str:
    out = ["[experiment]", f"kind = {cfg.kind}", f"id = {cfg.id}", f"seed = {cfg.seed}"]
    for key, value in cfg.params.items():
        if isinstance(value, (list, tuple)):
            out.append(f"{key} = " + ", ".join(str(v) for v in value))
        elif isinstance(value, float):
            out.append(f"{key} = {fmt(value)}")
        else:
            out.append(f"{key} = {value}")
    return "\n".join(out) + "\n\n" + dump_market(cfg.market)
