import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from graphrates import (Alphabet, ColorCounts, ColorMeasure, Kernel,
                        NeighborhoodCounts, NeighborhoodMeasure, PairCounts,
                        PairMeasure, cap_degrees, consistify,
                        degree_distribution, is_sub_consistent, magnitude, phi,
                        phi_counts, product_kernel_measure, quantize,
                        relative_entropy, total_variation)
from graphrates.errors import InfeasibleError
from graphrates.seeds import derive_child_seed

A1 = Alphabet(1)
A2 = Alphabet(2)


# ---------------------------------------------------------------------------
# constructors and validation


def test_color_measure_rejects_negative():
    with pytest.raises(ValueError):
        ColorMeasure(A2, [0.5, -0.1])


def test_color_measure_probability_mass_check():
    with pytest.raises(ValueError):
        ColorMeasure(A2, [0.5, 0.6], probability=True)
    ColorMeasure(A2, [0.5, 0.5], probability=True)


def test_pair_measure_requires_exact_symmetry():
    with pytest.raises(ValueError, match="symmetric"):
        PairMeasure(A2, [[1.0, 0.3], [0.300000001, 1.0]])


def test_neighborhood_measure_drops_nothing_and_rejects_zero_mass():
    with pytest.raises(ValueError):
        NeighborhoodMeasure(A1, {(0, (1,)): 0.0})
    nu = NeighborhoodMeasure(A1, {(0, (1,)): 0.25, (0, (0,)): 0.75}, probability=True)
    assert nu.mass(0, (1,)) == 0.25
    assert nu.mass(0, (7,)) == 0.0


def test_kernel_rejects_identically_zero():
    with pytest.raises(ValueError):
        Kernel(A2, np.zeros((2, 2)))


def test_counts_round_trip_dicts():
    cc = ColorCounts(5, [3, 2])
    assert ColorCounts.from_dict(cc.to_dict()).counts.tolist() == [3, 2]
    pc = PairCounts(5, [[2, 1], [1, 0]])
    assert PairCounts.from_dict(pc.to_dict()).edge_counts.tolist() == [[2, 1], [1, 0]]
    nc = NeighborhoodCounts(5, {(0, (1, 0)): 2, (1, (2, 0)): 3})
    assert NeighborhoodCounts.from_dict(nc.to_dict()).counts == nc.counts


# ---------------------------------------------------------------------------
# relative entropy


def test_relative_entropy_identity_is_zero():
    mu = ColorMeasure(A2, [0.25, 0.75], probability=True)
    assert relative_entropy(mu, mu) == 0.0


def test_relative_entropy_frozen_example():
    # H((1/2,1/2) || (1/4,3/4)) = 0.5 ln 2 + 0.5 ln(2/3) = 0.5 ln(4/3)
    nu = ColorMeasure(A2, [0.5, 0.5], probability=True)
    mu = ColorMeasure(A2, [0.25, 0.75], probability=True)
    assert relative_entropy(nu, mu) == pytest.approx(0.14384103622589042, abs=1e-15)


def test_relative_entropy_infinite_when_support_escapes():
    nu = ColorMeasure(A2, [0.5, 0.5], probability=True)
    mu = ColorMeasure(A2, [1.0, 0.0], probability=True)
    assert relative_entropy(nu, mu) == math.inf


def test_relative_entropy_neighborhood_atomwise():
    nu = NeighborhoodMeasure(A1, {(0, (2,)): 1.0}, probability=True)
    ref = NeighborhoodMeasure(A1, {(0, (0,)): 1.0}, probability=True)
    assert relative_entropy(nu, ref) == math.inf
    assert relative_entropy(nu, nu) == 0.0


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(0.01, 10.0), min_size=3, max_size=3),
       st.lists(st.floats(0.01, 10.0), min_size=3, max_size=3))
def test_relative_entropy_nonnegative_on_simplex_pairs(wa, wb):
    a3 = Alphabet(3)
    nu = ColorMeasure(a3, np.array(wa) / np.sum(wa), probability=True)
    mu = ColorMeasure(a3, np.array(wb) / np.sum(wb), probability=True)
    h = relative_entropy(nu, mu)
    assert h >= 0.0
    if np.array_equal(nu.weights, mu.weights):
        assert h == 0.0


# ---------------------------------------------------------------------------
# total variation


def test_total_variation_identity_and_disjoint():
    nu = NeighborhoodMeasure(A1, {(0, (1,)): 1.0}, probability=True)
    other = NeighborhoodMeasure(A1, {(0, (2,)): 1.0}, probability=True)
    assert total_variation(nu, nu) == 0.0
    assert total_variation(nu, other) == 1.0


def test_total_variation_half_example():
    ell = (1, 0)
    nu = NeighborhoodMeasure(A2, {(0, ell): 1.0}, probability=True)
    mix = NeighborhoodMeasure(A2, {(0, ell): 0.5, (1, ell): 0.5}, probability=True)
    assert total_variation(nu, mix) == pytest.approx(0.5, abs=1e-15)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(0.01, 1.0), min_size=4, max_size=4),
       st.lists(st.floats(0.01, 1.0), min_size=4, max_size=4),
       st.lists(st.floats(0.01, 1.0), min_size=4, max_size=4))
def test_total_variation_is_a_metric(wa, wb, wc):
    a4 = Alphabet(4)
    pa = ColorMeasure(a4, np.array(wa) / np.sum(wa), probability=True)
    pb = ColorMeasure(a4, np.array(wb) / np.sum(wb), probability=True)
    pc = ColorMeasure(a4, np.array(wc) / np.sum(wc), probability=True)
    dab = total_variation(pa, pb)
    assert dab == pytest.approx(total_variation(pb, pa), abs=1e-15)
    assert 0.0 <= dab <= 1.0
    assert total_variation(pa, pa) == 0.0
    assert dab <= total_variation(pa, pc) + total_variation(pc, pb) + 1e-12


# ---------------------------------------------------------------------------
# product kernel measure and phi


def test_product_kernel_measure_single_color():
    omega = ColorMeasure(A1, [1.0], probability=True)
    out = product_kernel_measure(Kernel.constant(2.0), omega)
    assert out.weights.tolist() == [[2.0]]


def test_product_kernel_measure_uniform_two_colors():
    omega = ColorMeasure(A2, [0.5, 0.5], probability=True)
    C = Kernel(A2, np.full((2, 2), 3.0))
    out = product_kernel_measure(C, omega)
    assert np.allclose(out.weights, 0.75)
    assert out.total_mass == pytest.approx(3.0, abs=1e-15)


def test_phi_isolated_atom():
    nu = NeighborhoodMeasure(A2, {(1, (0, 0)): 1.0}, probability=True)
    nu1, phi2 = phi(nu)
    assert nu1.weights.tolist() == [0.0, 1.0]
    assert not phi2.any()


def test_phi_two_vertex_graph_measure():
    # one same-color edge on two vertices: M = delta_{(0, (1))}
    m = NeighborhoodMeasure(A1, {(0, (1,)): 1.0}, probability=True)
    nu1, phi2 = phi(m)
    assert nu1.weights.tolist() == [1.0]
    assert phi2.tolist() == [[1.0]]


def test_phi_mass_bookkeeping_identity():
    nu = NeighborhoodMeasure(A2, {(0, (2, 1)): 0.25, (1, (0, 3)): 0.5,
                                  (0, (0, 0)): 0.25}, probability=True)
    _, phi2 = phi(nu)
    direct = sum(mass * magnitude(ell) for (a, ell), mass in nu.atoms())
    assert float(phi2.sum()) == pytest.approx(direct, abs=1e-14)


def test_is_sub_consistent_cases():
    nu = NeighborhoodMeasure(A1, {(0, (5,)): 1.0}, probability=True)
    assert not is_sub_consistent(PairMeasure(A1, [[1.0]]), nu)
    assert is_sub_consistent(PairMeasure(A1, [[6.0]]), nu)


def test_degree_distribution_examples():
    nu = NeighborhoodMeasure(A2, {(0, (0, 0)): 1.0}, probability=True)
    assert degree_distribution(nu) == {0: 1.0}
    m = NeighborhoodMeasure(A1, {(0, (1,)): 1.0}, probability=True)
    assert degree_distribution(m) == {1: 1.0}


def test_degree_distribution_poisson_limit():
    from graphrates import poisson_limit_law
    mu = ColorMeasure(A1, [1.0], probability=True)
    qstar = poisson_limit_law(mu, Kernel.constant(2.0))
    d = degree_distribution(qstar)
    for k in range(8):
        assert d[k] == pytest.approx(math.exp(-2.0) * 2.0 ** k / math.factorial(k),
                                     abs=1e-12)


# ---------------------------------------------------------------------------
# counts and their measures


def test_color_counts_from_measure_largest_remainder():
    target = ColorMeasure(A2, [1 / 3, 2 / 3], probability=True)
    cc = ColorCounts.from_measure(target, 10)
    assert cc.counts.sum() == 10
    assert cc.counts.tolist() == [3, 7]


def test_pair_counts_adjacency_and_edges():
    pc = PairCounts(4, [[1, 2], [2, 0]])
    assert pc.adjacency.tolist() == [[2, 2], [2, 0]]
    assert pc.total_edges == 3
    assert pc.measure.weights.tolist() == [[0.5, 0.5], [0.5, 0.0]]


def test_phi_counts_integer_identity():
    # counts need not come from a realizable graph; the raw (possibly
    # asymmetric) adjacency tally is returned as-is
    nc = NeighborhoodCounts(4, {(0, (1, 0)): 2, (1, (2, 1)): 1, (1, (0, 1)): 1})
    color, adj = phi_counts(nc)
    assert color.tolist() == [2, 2]
    assert adj.tolist() == [[2, 0], [2, 2]]
    assert adj.dtype.kind == "i" and color.dtype.kind == "i"


# ---------------------------------------------------------------------------
# consistify


def test_consistify_identity_on_consistent_input():
    nu = NeighborhoodMeasure(A1, {(0, (1,)): 1.0}, probability=True)
    pair = PairMeasure(A1, [[1.0]])
    p2, n2 = consistify(pair, nu, 0.1)
    assert p2 is pair and n2 is nu


@pytest.mark.parametrize("delta,eps", [(0.8, 0.1), (0.3, 0.01), (1.7, 0.05)])
def test_consistify_single_deficit_construction(delta, eps):
    """A point mass at degree zero with pair mass delta to absorb.

    The repair must place mass delta/n on the degree-n vector and reproduce
    the pair measure exactly through phi.
    """
    nu = NeighborhoodMeasure(A1, {(0, (0,)): 1.0}, probability=True)
    pair = PairMeasure(A1, [[delta]])
    pair_hat, nu_hat = consistify(pair, nu, eps)
    _, phi2 = phi(nu_hat)
    assert abs(phi2[0, 0] - pair_hat.weights[0, 0]) <= 1e-12
    assert abs(pair_hat.weights[0, 0] - delta) <= eps
    assert total_variation(nu, nu_hat) <= eps
    heavy = [(a, ell) for (a, ell), _ in nu_hat.atoms() if magnitude(ell) > 0]
    assert len(heavy) == 1
    (a, ell), = heavy
    assert nu_hat.mass(a, ell) * ell[0] == pytest.approx(delta, abs=1e-12)


def test_consistify_requires_near_symmetric_phi2():
    nu = NeighborhoodMeasure(A2, {(0, (0, 1)): 1.0}, probability=True)
    pair = PairMeasure(A2, [[0.0, 1.0], [1.0, 0.0]])
    # phi2 is asymmetric here (0,1) vs (1,0): 1 vs 0
    with pytest.raises(ValueError):
        consistify(pair, nu, 0.1)


# ---------------------------------------------------------------------------
# quantize


def _target_pair():
    nu = NeighborhoodMeasure(
        A1, {(0, (0,)): 0.3, (0, (1,)): 0.4, (0, (2,)): 0.3}, probability=True)
    _, phi2 = phi(nu)
    return nu, phi2[0, 0]


def test_quantize_hits_targets_exactly():
    nu, mean_deg = _target_pair()
    n = 200
    cc = ColorCounts(n, [n])
    edges = int(round(mean_deg * n / 2))
    pc = PairCounts(n, [[edges]])
    nu_n = quantize(cc, pc, nu, seed=31)
    color, adj = phi_counts(nu_n)
    assert np.array_equal(color, cc.counts)
    assert np.array_equal(adj, pc.adjacency)
    assert sum(nu_n.counts.values()) == n


def test_quantize_distance_shrinks_with_n():
    """Median distance to the target over 20 seeds is nonincreasing in n."""
    nu, mean_deg = _target_pair()
    medians = []
    for n in (100, 1000, 10000):
        cc = ColorCounts(n, [n])
        pc = PairCounts(n, [[int(round(mean_deg * n / 2))]])
        tvs = sorted(total_variation(quantize(cc, pc, nu, derive_child_seed(7, n, i)).measure, nu)
                     for i in range(20))
        medians.append(tvs[10])
    assert medians[0] >= medians[1] >= medians[2]


def test_quantize_on_already_empirical_target():
    n = 50
    nc = NeighborhoodCounts(n, {(0, (1,)): 40, (0, (0,)): 10})
    color, adj = phi_counts(nc)
    cc = ColorCounts(n, color.tolist())
    pc = PairCounts(n, [[int(adj[0, 0]) // 2]])
    out = quantize(cc, pc, nc.measure, seed=5)
    c2, a2 = phi_counts(out)
    assert np.array_equal(c2, color) and np.array_equal(a2, adj)


# ---------------------------------------------------------------------------
# cap_degrees


def test_cap_degrees_identity_when_within_cap():
    nc = NeighborhoodCounts(8, {(0, (1,)): 8})
    assert cap_degrees(nc) is nc


def test_cap_degrees_redistributes_heavy_vertex():
    n = 1000  # cap = 10
    heavy = 2 * 10
    nc = NeighborhoodCounts(n, {(0, (heavy,)): 1, (0, (0,)): n - 1})
    out = cap_degrees(nc)
    assert out.max_magnitude() <= 10
    assert all(np.array_equal(x, y)
               for x, y in zip(phi_counts(nc), phi_counts(out)))
    assert sum(out.counts.values()) == n


def test_cap_degrees_infeasible_when_no_receivers():
    nc = NeighborhoodCounts(8, {(0, (4,)): 8})  # cap 2, low 1, nobody can absorb
    with pytest.raises(InfeasibleError):
        cap_degrees(nc)


def test_cap_degrees_two_colors():
    n = 1000
    nc = NeighborhoodCounts(n, {(0, (15, 9)): 2, (1, (3, 0)): 6,
                                (0, (0, 0)): 500, (1, (0, 0)): n - 508})
    out = cap_degrees(nc)
    assert out.max_magnitude() <= 10
    assert all(np.array_equal(x, y)
               for x, y in zip(phi_counts(nc), phi_counts(out)))
