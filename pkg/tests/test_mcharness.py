import math

import numpy as np
import pytest

from graphrates import (Alphabet, ColorMeasure, ExponentEstimate, Kernel,
                        ModelParams, TailExperiment, estimate_tail_exponent,
                        exact_er_edge_exponent, lln_check)

A1 = Alphabet(1)
A2 = Alphabet(2)
MU1 = ColorMeasure(A1, [1.0], probability=True)
MU2 = ColorMeasure(A2, [0.5, 0.5], probability=True)
C2 = Kernel(A2, [[3.0, 1.0], [1.0, 2.0]])


def _er_experiment(x, sizes, replicas, seed, offset=0):
    return TailExperiment(mu=MU1, C=Kernel.constant(2.0),
                          event={"kind": "edges", "x": x}, sizes=sizes,
                          replicas=replicas, seed=seed, replica_offset=offset)


# ---------------------------------------------------------------------------
# exact finite-n exponent


def test_exact_er_edge_exponent_frozen():
    assert exact_er_edge_exponent(250, 2.0, 1.5) == pytest.approx(
        0.12247458412549937, abs=1e-15)
    assert exact_er_edge_exponent(500, 2.0, 1.5) == pytest.approx(
        0.11599436063975796, abs=1e-15)


def test_exact_er_edge_exponent_edges():
    assert exact_er_edge_exponent(100, 2.0, 0.0) == 0.0
    assert exact_er_edge_exponent(100, 2.0, -1.0) == 0.0
    # at the typical density the finite-n exponent is near zero
    assert exact_er_edge_exponent(2000, 2.0, 1.0) < 5e-3
    with pytest.raises(ValueError):
        exact_er_edge_exponent(1, 2.0, 1.2)


# ---------------------------------------------------------------------------
# estimation against the exact law


def test_estimate_matches_exact_per_size():
    exp = _er_experiment(1.2, (50, 100, 200), 100000, seed=12)
    est = estimate_tail_exponent(exp)
    assert not est.inconclusive
    for row in est.rows:
        assert row["hits"] > 0
        exact = exact_er_edge_exponent(row["n"], 2.0, 1.2)
        assert abs(row["exponent"] - exact) <= 3.0 * row["se"]


def test_estimate_below_mean_is_near_zero():
    # x below the typical density c/2: the event is not rare at all
    exp = _er_experiment(0.8, (100, 200), 20000, seed=5)
    est = estimate_tail_exponent(exp)
    for row in est.rows:
        assert row["p_hat"] > 0.9
    assert abs(est.exponent) < 0.01


def test_estimate_impossible_event_inconclusive():
    exp = _er_experiment(50.0, (50, 100), 5000, seed=9)
    est = estimate_tail_exponent(exp)
    assert est.inconclusive
    assert est.exponent is None
    for row in est.rows:
        assert row["hits"] == 0
        assert row["exponent_lower_bound"] > 0.0


def test_estimate_deterministic():
    a = estimate_tail_exponent(_er_experiment(1.3, (60, 120), 30000, seed=77))
    b = estimate_tail_exponent(_er_experiment(1.3, (60, 120), 30000, seed=77))
    assert a.to_dict() == b.to_dict()
    c = estimate_tail_exponent(_er_experiment(1.3, (60, 120), 30000, seed=78))
    assert c.to_dict() != a.to_dict()


# ---------------------------------------------------------------------------
# shard merging: hit counts must be independent of how replicas are split


def _split_hits(make_exp, total, cut):
    full = estimate_tail_exponent(make_exp(total, 0))
    left = estimate_tail_exponent(make_exp(cut, 0))
    right = estimate_tail_exponent(make_exp(total - cut, cut))
    merged = [l["hits"] + r["hits"] for l, r in zip(left.rows, right.rows)]
    return [row["hits"] for row in full.rows], merged


def test_merge_contract_er_fast_path():
    # cut chosen off any block boundary on purpose
    def make(replicas, offset):
        return _er_experiment(1.25, (80, 160), replicas, seed=4321,
                              offset=offset)

    full, merged = _split_hits(make, 200000, 70001)
    assert full == merged


def test_merge_contract_generic_path():
    def make(replicas, offset):
        return TailExperiment(mu=MU2, C=C2,
                              event={"kind": "pair", "a": 0, "b": 0, "s": 1.9},
                              sizes=(40, 80), replicas=replicas, seed=99,
                              replica_offset=offset)

    full, merged = _split_hits(make, 3000, 1234)
    assert full == merged


def test_degree_zero_event_sanity():
    # P(isolated fraction >= t) with t below the limit e^{-c}: not rare
    exp = TailExperiment(mu=MU1, C=Kernel.constant(2.0),
                         event={"kind": "degree_zero", "t": 0.05},
                         sizes=(200,), replicas=2000, seed=11)
    est = estimate_tail_exponent(exp)
    assert est.rows[0]["p_hat"] > 0.95
    rare = TailExperiment(mu=MU1, C=Kernel.constant(2.0),
                          event={"kind": "degree_zero", "t": 0.4},
                          sizes=(200,), replicas=2000, seed=11)
    rare_est = estimate_tail_exponent(rare)
    assert rare_est.rows[0]["p_hat"] < 0.05


def test_experiment_validation():
    with pytest.raises(ValueError):
        _er_experiment(1.2, (100, 50), 100, seed=0)  # not increasing
    with pytest.raises(ValueError):
        _er_experiment(1.2, (50,), 0, seed=0)
    with pytest.raises(ValueError):
        TailExperiment(mu=MU1, C=Kernel.constant(2.0),
                       event={"kind": "nope"}, sizes=(50,), replicas=10, seed=0)


# ---------------------------------------------------------------------------
# CSV and reporting


def test_to_csv_shape_and_zero_hit_rows():
    exp = _er_experiment(50.0, (50,), 1000, seed=2)
    est = estimate_tail_exponent(exp)
    text = est.to_csv(rate_prediction=0.5)
    lines = text.strip().splitlines()
    assert lines[0] == "n,replicas,hits,p_hat,exponent,rate_prediction,ci_half_width"
    fields = lines[1].split(",")
    assert fields[0] == "50" and fields[2] == "0"
    assert fields[4] == ""  # no exponent when nothing hit
    assert fields[5] == "0.5"

    # the lower bound still lives on the row dict
    assert est.rows[0]["exponent_lower_bound"] == pytest.approx(
        -math.log(3.0 / 1000) / 50.0, abs=1e-15)


def test_estimate_round_trip_dict():
    est = estimate_tail_exponent(_er_experiment(1.2, (50, 100), 20000, seed=6))
    d = est.to_dict()
    assert set(d) == {"rows", "exponent", "intercept", "ci_half_width",
                      "inconclusive", "fit_residuals"}
    assert d["exponent"] == est.exponent


# ---------------------------------------------------------------------------
# law of large numbers harness


def test_lln_check_structure_and_decay():
    params = ModelParams(MU2, C2, 1)
    out = lln_check(params, 5000, seeds=range(20))
    assert out["n"] == 5000
    assert len(out["per_seed"]) == 20
    row = out["per_seed"][0]
    assert set(row) == {"seed", "tv_degree", "tv_neighborhood", "tv_color",
                        "l2_max_deviation", "max_magnitude"}

    # color empirical measure concentrates: TV <= 3 sqrt(1/4n) for 19 of 20
    band = 3.0 * math.sqrt(0.25 / 5000)
    hits = sum(1 for r in out["per_seed"] if r["tv_color"] <= band)
    assert hits >= 19

    # max degree grows slowly; 5 ln n is a loose envelope
    cap = 5.0 * math.log(5000)
    tall = sum(1 for r in out["per_seed"] if r["max_magnitude"] <= cap)
    assert tall >= 19

    for key in ("tv_degree", "tv_neighborhood", "tv_color", "l2_max_deviation"):
        assert out["summary"][key]["min"] >= 0.0
        assert out["summary"][key]["max"] < 1.0
