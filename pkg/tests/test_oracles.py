import itertools
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from graphrates import (Alphabet, BudgetError, ColorMeasure, Kernel,
                        ModelParams, NeighborhoodCounts, ising_annealed,
                        sample_colored_graph)
from graphrates.oracles import (binomial_log_tail, composition_count,
                                exact_tiny_partition_function, ising_oracle,
                                partition_bound_check, scalar_partition_counts,
                                support_bound_check, vector_partition_count)


# ---------------------------------------------------------------------------
# binomial tail


def test_binomial_tail_exact_points():
    assert binomial_log_tail(10, 0.3, 0) == 0.0
    assert binomial_log_tail(2, 0.5, 2) == pytest.approx(math.log(0.25), abs=1e-12)
    assert binomial_log_tail(5, 0.5, 6) == -math.inf
    assert binomial_log_tail(5, 0.0, 1) == -math.inf
    assert binomial_log_tail(5, 1.0, 5) == 0.0


def test_binomial_tail_vs_direct_sum():
    N, p = 12, 0.37
    for k in range(N + 2):
        direct = sum(math.comb(N, j) * p ** j * (1 - p) ** (N - j)
                     for j in range(k, N + 1))
        got = binomial_log_tail(N, p, k)
        if direct == 0.0:
            assert got == -math.inf
        else:
            assert got == pytest.approx(math.log(direct), abs=1e-10)


@given(st.integers(0, 30), st.floats(0.01, 0.99))
@settings(max_examples=100, deadline=None)
def test_binomial_tail_nonincreasing_in_k(N, p):
    vals = [binomial_log_tail(N, p, k) for k in range(N + 2)]
    for a, b in zip(vals, vals[1:]):
        assert b <= a + 1e-12


def test_binomial_tail_rejects_bad_args():
    with pytest.raises(ValueError):
        binomial_log_tail(5, 1.5, 2)
    with pytest.raises(ValueError):
        binomial_log_tail(5, 0.5, 7)


# ---------------------------------------------------------------------------
# counting


def test_composition_count_small_cases():
    assert composition_count(0, 3) == 1
    assert composition_count(3, 2) == 4  # (0,3) (1,2) (2,1) (3,0)
    assert composition_count(5, 1) == 1
    # stars and bars cross-check
    for j, parts in itertools.product(range(8), range(1, 5)):
        assert composition_count(j, parts) == math.comb(j + parts - 1, parts - 1)


def test_composition_count_sandwich_at_scale():
    # the internal assertion runs on every call; exercise the stated domain edge
    assert composition_count(50, 6) > 0
    assert composition_count(50, 1) == 1


def _brute_force_vector_partitions(ell):
    """Multisets of nonzero nonneg vectors summing to ell, counted directly."""
    dims = len(ell)
    cells = [v for v in itertools.product(*(range(x + 1) for x in ell))
             if any(v)]
    target = tuple(ell)

    def rec(remaining, start):
        if not any(remaining):
            return 1
        total = 0
        for i in range(start, len(cells)):
            part = cells[i]
            if all(p <= r for p, r in zip(part, remaining)):
                rest = tuple(r - p for r, p in zip(remaining, part))
                total += rec(rest, i)  # parts may repeat
        return total

    return rec(target, 0)


def test_vector_partition_count_small_cases():
    assert vector_partition_count((0,)) == 1
    assert vector_partition_count((0, 0)) == 1
    # scalar case reduces to integer partitions: p(4) = 5
    assert vector_partition_count((4,)) == 5
    # (1,1) = {(1,1)} and {(1,0),(0,1)}
    assert vector_partition_count((1, 1)) == 2


@pytest.mark.parametrize("ell", [(1, 1), (2, 1), (2, 2), (3, 2), (1, 1, 1),
                                 (2, 0, 1), (4, 3)])
def test_vector_partition_count_vs_brute_force(ell):
    assert vector_partition_count(ell) == _brute_force_vector_partitions(ell)


def test_vector_partition_count_permutation_symmetry():
    for ell in [(3, 1), (4, 2), (2, 1, 0)]:
        base = vector_partition_count(ell)
        for perm in itertools.permutations(ell):
            assert vector_partition_count(perm) == base


def test_vector_partition_count_budget():
    assert vector_partition_count((7, 7)) > 0
    with pytest.raises(BudgetError):
        vector_partition_count((8, 7))


def test_scalar_partition_counts_known_prefix():
    p = scalar_partition_counts(12)
    assert p == [1, 1, 2, 3, 5, 7, 11, 15, 22, 30, 42, 56, 77]


def test_scalar_partition_bound_to_60():
    p = scalar_partition_counts(60)
    for S in range(1, 61):
        assert p[S] <= math.exp(2.57 * math.sqrt(S))


def test_partition_bound_check_two_colors():
    out = partition_bound_check(2, range(1, 13))
    assert out["theta_ok"] and out["scalar_ok"]
    assert out["theta_bound"] == 6
    assert all(row["theta_hat"] <= 6 for row in out["per_magnitude"])
    # counts come back as decimal strings
    assert all(int(row["max_count"]) >= 1 for row in out["per_magnitude"])


def test_partition_bound_check_single_color():
    out = partition_bound_check(1, range(1, 15))
    assert out["theta_ok"]


# ---------------------------------------------------------------------------
# support bound


def test_support_bound_empty_graph():
    nc = NeighborhoodCounts(5, {(0, (0,)): 5})
    assert support_bound_check(nc)


def test_support_bound_on_er_samples():
    mu = ColorMeasure(Alphabet(1), [1.0], probability=True)
    params = ModelParams(mu, Kernel.constant(2.0), 500)
    from graphrates import empirical_measures
    for seed in range(50):
        g = sample_colored_graph(params, seed)
        _, _, nc = empirical_measures(g)
        assert support_bound_check(nc)


# ---------------------------------------------------------------------------
# Ising oracle and tiny partition functions


def test_ising_oracle_beta_zero():
    assert ising_oracle(0.0, 5.0) == pytest.approx(math.log(2.0), abs=1e-12)


def test_ising_oracle_agrees_with_annealed_solver():
    for beta, c in ((0.5, 1.0), (1.0, 2.0), (0.25, 4.0)):
        assert abs(ising_oracle(beta, c) - ising_annealed(beta, c).value) <= 1e-6


def test_ising_oracle_rejects_bad_args():
    with pytest.raises(ValueError):
        ising_oracle(-0.1, 1.0)
    with pytest.raises(ValueError):
        ising_oracle(0.5, 0.0)


def test_tiny_partition_function_beta_zero():
    for n in (1, 3, 8):
        assert exact_tiny_partition_function(n, 0.3, 0.0) == pytest.approx(
            2.0 ** n, rel=1e-12)
        assert exact_tiny_partition_function(n, 0.3, 0.0, seed=1) == pytest.approx(
            2.0 ** n, rel=1e-12)


def test_tiny_partition_function_two_vertices_full_graph():
    beta = 0.7
    expect = 2.0 * math.exp(beta) + 2.0 * math.exp(-beta)
    assert exact_tiny_partition_function(2, 1.0, beta) == pytest.approx(
        expect, rel=1e-12)
    assert exact_tiny_partition_function(2, 1.0, beta, seed=3) == pytest.approx(
        expect, rel=1e-12)


def test_tiny_partition_function_tracks_annealed_limit():
    # (1/n) ln E Z at n=8 sits within 0.15 of the n->inf annealed value
    n, beta, c = 8, 0.5, 1.0
    z = exact_tiny_partition_function(n, c / n, beta)
    finite = math.log(z) / n
    limit = ising_annealed(beta, c).value
    assert abs(finite - limit) <= 0.15


def test_tiny_partition_function_budget():
    with pytest.raises(BudgetError):
        exact_tiny_partition_function(15, 0.1, 0.5)
