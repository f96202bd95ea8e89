import math

import pytest

from revpref import ExperimentConfig, Market, QuadraticValuation, benchmark_market, make_benchmark_suite, run_experiment
from revpref.bench import read_header
from revpref.costs import CostFunction
from revpref.errors import RevprefError
from revpref.sets import FeasibleSet
from conftest import quadratic_market


def _offline_cfg(T=60, seed=0):
    return ExperimentConfig("offline", quadratic_market(seed, 3, 2), seed, "off", {"T": T})


def _read(path):
    with open(path, "rb") as fh:
        return fh.read()


def _summary_rows(path):
    with open(path) as fh:
        lines = fh.read().splitlines()
    cols = lines[2].split(",")
    return [dict(zip(cols, line.split(","))) for line in lines[3:]]


def test_suite_shape():
    suite = make_benchmark_suite(0)
    assert len(suite) == 5 + 1
    assert [c.id for c in suite] == ["B1", "B2_m100", "B2_m400", "B3", "B4", "B5"]
    assert suite[2].market.m == 4 * suite[1].market.m


def test_suite_seed_changes_markets_not_formulas():
    a, b = make_benchmark_suite(0), make_benchmark_suite(1)
    for x, y in zip(a, b):
        assert (x.kind, x.params) == (y.kind, y.params)
        if x.id != "B4":
            assert x.market.fingerprint() != y.market.fingerprint()
        assert (x.market.m, x.market.n) == (y.market.m, y.market.n)


def test_benchmark_market_constants():
    b1 = benchmark_market("B1")
    assert (b1.m, b1.n) == (5, 3)
    assert b1.lam == pytest.approx(1.0) and b1.alpha_min == pytest.approx(1.0)
    assert b1.D == pytest.approx(math.sqrt(3))
    b2 = benchmark_market("B2")
    assert (b2.m, b2.n, b2.lam, b2.D_inf) == (100, 2, pytest.approx(1.0), 1.0)
    with pytest.raises(KeyError):
        benchmark_market("B9")


def test_offline_files_and_bound_from_header(tmp_path):
    rec = run_experiment(_offline_cfg(), str(tmp_path))
    rows_path, summary_path = rec.files
    for path in rec.files:
        assert _read(path).startswith(b"schema=1\n")
    head = read_header(summary_path)
    for row in _summary_rows(summary_path):
        T = int(row["T"])
        expected = 9 * head["lambda"] * head["m"] * head["D"] / math.sqrt(T) + 16 * head["lambda"] ** 2 * head["m"] / (head["alpha_min"] * T)
        assert float(row["bound"]) == expected
        assert float(row["slack"]) == pytest.approx(float(row["bound"]) - float(row["gap"]))
    with open(rows_path) as fh:
        assert len(fh.read().splitlines()) == 3 + 60


def test_rerun_is_byte_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    r1 = run_experiment(_offline_cfg(), str(a))
    r2 = run_experiment(_offline_cfg(), str(b))
    for f1, f2 in zip(r1.files, r2.files):
        assert _read(f1) == _read(f2)


def test_sweep_rows_monotone(tmp_path):
    cfg = ExperimentConfig("sweep", quadratic_market(1, 3, 2), 0, "sw", {"T_values": [25, 100, 400]})
    rec = run_experiment(cfg, str(tmp_path))
    gaps = [float(r["gap"]) for r in _summary_rows(rec.files[1])]
    assert len(gaps) == 3
    assert gaps[2] <= gaps[1] + 1e-6 and gaps[1] <= gaps[0] + 1e-6
    assert rec.passed


def test_online_summary_bound_from_header(tmp_path):
    cfg = ExperimentConfig("online", quadratic_market(2, 16, 2), 4, "on", {"num_permutations": 5})
    rec = run_experiment(cfg, str(tmp_path))
    head = read_header(rec.files[1])
    (row,) = _summary_rows(rec.files[1])
    assert float(row["bound"]) == 4 * head["lambda"] * head["D_inf"] * math.sqrt(head["n"] * head["m"])
    with open(rec.files[0]) as fh:
        assert len(fh.read().splitlines()) == 3 + 16 * 5


def test_deviation_rows(tmp_path):
    market = quadratic_market(3, 8, 2)
    rec = run_experiment(ExperimentConfig("deviation", market, 0, "dev", {"samples": 500}), str(tmp_path))
    head = read_header(rec.files[0])
    assert len(rec.rows) == 8
    for i, est, se, bound, ok in rec.rows:
        assert bound == head["D_inf"] * math.sqrt(head["n"] / (head["m"] - i + 1))


def test_solver_failure_flushes_summary(tmp_path):
    flat = Market([QuadraticValuation([1.0], 0.0)], CostFunction.zero(1), FeasibleSet.unit_box(1))
    cfg = ExperimentConfig("offline", flat, 0, "flat", {"T": 10})
    with pytest.raises(RevprefError):
        run_experiment(cfg, str(tmp_path))
    text = (tmp_path / "flat_summary.csv").read_text()
    assert text.startswith("schema=1\n") and "error" in text


def test_wall_clock_not_in_files(tmp_path):
    rec = run_experiment(_offline_cfg(T=10), str(tmp_path))
    assert rec.wall_clock > 0
    for path in rec.files:
        assert b"wall" not in _read(path)
