"""Acceptance battery: the eleven numbered criteria behind `validate`.

Each criterion_N function runs one self-contained check with its published
tolerances and pinned seeds and returns a record dict
{id, name, passed, details, elapsed}. The pytest acceptance module and the
CLI validate command both drive these, so a tolerance tampered through a
config fails in both places identically.
"""

import math
import time
from functools import lru_cache

import numpy as np

from . import oracles, rates, varsolve
from .graphs import ModelParams, empirical_measures, sample_colored_graph, sample_conditional
from .measures import (Alphabet, ColorCounts, ColorMeasure, Kernel,
                       NeighborhoodCounts, NeighborhoodMeasure, PairCounts,
                       PairMeasure, cap_degrees, consistify, phi, phi_counts,
                       product_kernel_measure, quantize, total_variation)
from .mcharness import TailExperiment, estimate_tail_exponent, exact_er_edge_exponent, lln_check
from .seeds import derive_child_seed

# the 2-color benchmark model used across criteria
BENCH_MU = (0.5, 0.5)
BENCH_C = ((3.0, 1.0), (1.0, 2.0))

# published seed material; changing any of these invalidates the battery
MC_TAIL_SEED = 74205
DUALITY_SEED = 31415
ZERO_POINT_SEED = 27182
BATTERY_SEED = 9001
CONDITIONAL_SEED = 4242
UNIFORMITY_SEED = 8080
QUANTIZE_SEED = 555
LLN_SEEDS_ER = tuple(range(11, 31))
LLN_SEEDS_BENCH = tuple(range(211, 231))

SUITES = {
    "mc": (1, 2),
    "rates": (3, 6),
    "duality": (4, 5),
    "bounds": (7, 8, 9, 10),
    "lln": (11,),
    "all": tuple(range(1, 12)),
}


def _bench_model():
    alphabet = Alphabet(2)
    mu = ColorMeasure(alphabet, BENCH_MU, probability=True)
    C = Kernel(alphabet, np.array(BENCH_C))
    return mu, C


def _record(cid, name, passed, details, started):
    return {"id": cid, "name": name, "passed": bool(passed), "details": details,
            "elapsed": time.perf_counter() - started}


def format_record(rec):
    status = "PASS" if rec["passed"] else "FAIL"
    keys = ", ".join(f"{k}={v}" for k, v in rec["details"].items()
                     if not isinstance(v, (list, dict)))
    return f"{status} criterion {rec['id']} ({rec['name']}): {keys} [{rec['elapsed']:.1f}s]"


def _merged(defaults, tol):
    out = dict(defaults)
    if tol:
        out.update(tol)
    return out


# ---------------------------------------------------------------------------
# criterion 1: exact edge-rate extrapolation


def criterion_1(tol=None):
    t = _merged({"rel_tol": 0.02, "zeta_tol": 1e-8, "runtime_s": 10.0}, tol)
    started = time.perf_counter()
    c, x = 2.0, 1.5
    sizes = (250, 500, 1000, 2000)
    exponents = [exact_er_edge_exponent(n, c, x) for n in sizes]
    X = np.array([[1.0, 1.0 / n] for n in sizes])
    coef, *_ = np.linalg.lstsq(X, np.array(exponents), rcond=None)
    extrapolated = float(coef[0])
    target = rates.rate_zeta_er(x, c)
    rel_err = abs(extrapolated - target) / target

    mu1 = ColorMeasure(Alphabet(1), [1.0], probability=True)
    C1 = Kernel.constant(c)
    zeta_gaps = {xx: abs(rates.rate_zeta(xx, mu1, C1) - rates.rate_zeta_er(xx, c))
                 for xx in (0.5, 1.0, 1.5, 3.0)}
    elapsed = time.perf_counter() - started
    passed = (rel_err <= t["rel_tol"]
              and max(zeta_gaps.values()) <= t["zeta_tol"]
              and elapsed < t["runtime_s"])
    details = {"extrapolated": round(extrapolated, 9), "target": round(target, 9),
               "rel_err": round(rel_err, 6), "max_zeta_gap": max(zeta_gaps.values()),
               "exponents": [round(e, 9) for e in exponents]}
    return _record(1, "edge-rate-extrapolation", passed, details, started)


# ---------------------------------------------------------------------------
# criterion 2: Monte Carlo tail agreement


def criterion_2(tol=None):
    t = _merged({"se_mult": 3.0, "rel_tol": 0.15, "min_hits": 50,
                 "replicas": 10 ** 7, "runtime_s": 300.0}, tol)
    started = time.perf_counter()
    c, x = 2.0, 1.5
    mu1 = ColorMeasure(Alphabet(1), [1.0], probability=True)
    exp = TailExperiment(mu=mu1, C=Kernel.constant(c),
                         event={"kind": "edges", "x": x},
                         sizes=(100, 200, 400), replicas=int(t["replicas"]),
                         seed=MC_TAIL_SEED)
    est = estimate_tail_exponent(exp)
    per_n_ok = True
    comparisons = []
    for row in est.rows:
        exact = exact_er_edge_exponent(row["n"], c, x)
        entry = {"n": row["n"], "hits": row["hits"], "exact": round(exact, 9)}
        if row["hits"] >= t["min_hits"]:
            gap = abs(row["exponent"] - exact)
            entry["gap"] = gap
            entry["band"] = t["se_mult"] * row["se"]
            per_n_ok = per_n_ok and gap <= t["se_mult"] * row["se"]
        comparisons.append(entry)
    target = rates.rate_zeta_er(x, c)
    if est.exponent is None:
        extrap_ok = False
        rel_err = None
    else:
        rel_err = abs(est.exponent - target) / target
        extrap_ok = rel_err <= t["rel_tol"]
    elapsed = time.perf_counter() - started
    passed = per_n_ok and extrap_ok and elapsed < t["runtime_s"]
    details = {"extrapolated": est.exponent, "target": round(target, 9),
               "rel_err": rel_err, "inconclusive": est.inconclusive,
               "rows": comparisons}
    return _record(2, "mc-tail-agreement", passed, details, started)


# ---------------------------------------------------------------------------
# criterion 3: degree-rate closed points


def _poisson_dict(lam, tail=1e-14):
    d = {}
    cum, k = 0.0, 0
    while cum < 1.0 - tail and k < 600:
        p = math.exp(-lam + k * math.log(lam) - math.lgamma(k + 1))
        d[k] = p
        cum += p
        k += 1
    return d


def criterion_3(tol=None):
    t = _merged({"zero_tol": 1e-10, "closed_tol": 1e-10, "residual_tol": 1e-12,
                 "continuity_tol": 1e-10}, tol)
    started = time.perf_counter()
    worst = {"zero": 0.0, "closed": 0.0, "residual": 0.0, "continuity": 0.0}
    for c in (1.0, 2.0, 4.0):
        worst["zero"] = max(worst["zero"], rates.rate_delta(_poisson_dict(c), c))
        gap = abs(rates.rate_delta({0: 1.0}, c) - 0.5 * c * (1.0 - math.exp(-2.0)))
        worst["closed"] = max(worst["closed"], gap)
        for mean in (0.0, 0.3 * c, 0.7 * c, c):
            worst["residual"] = max(worst["residual"],
                                    varsolve.solve_degree_fixed_point(mean, c).residual)
        two_point = {0: 0.5, int(2 * c): 0.5}
        x_fp = varsolve.solve_degree_fixed_point(float(c), c).value
        v_fixed = rates._delta_given_x(two_point, c, x_fp)
        v_mean = rates._delta_given_x(two_point, c, float(c))
        worst["continuity"] = max(worst["continuity"], abs(v_fixed - v_mean))
    passed = (worst["zero"] <= t["zero_tol"] and worst["closed"] <= t["closed_tol"]
              and worst["residual"] <= t["residual_tol"]
              and worst["continuity"] <= t["continuity_tol"])
    return _record(3, "degree-rate-points", passed, worst, started)


# ---------------------------------------------------------------------------
# criterion 4: annealed Ising agreement


def criterion_4(tol=None):
    t = _merged({"agree_tol": 1e-6, "ln2_tol": 1e-10, "runtime_s": 30.0}, tol)
    started = time.perf_counter()
    max_gap = 0.0
    max_ln2_gap = 0.0
    grid = []
    for beta in (0.0, 0.25, 0.5, 1.0):
        for c in (0.5, 1.0, 2.0):
            solved = varsolve.ising_annealed(beta, c).value
            oracle = oracles.ising_oracle(beta, c)
            gap = abs(solved - oracle)
            max_gap = max(max_gap, gap)
            if beta == 0.0:
                max_ln2_gap = max(max_ln2_gap, abs(solved - math.log(2.0)))
            grid.append({"beta": beta, "c": c, "solved": solved, "oracle": oracle})
    elapsed = time.perf_counter() - started
    passed = (max_gap <= t["agree_tol"] and max_ln2_gap <= t["ln2_tol"]
              and elapsed < t["runtime_s"])
    details = {"max_gap": max_gap, "max_ln2_gap": max_ln2_gap, "points": len(grid)}
    return _record(4, "ising-free-energy", passed, details, started)


# ---------------------------------------------------------------------------
# criterion 5: Legendre duality


def criterion_5(tol=None):
    t = _merged({"tol": 1e-4, "instances": 200}, tol)
    started = time.perf_counter()
    rng = np.random.default_rng(DUALITY_SEED)
    alphabet = Alphabet(2)
    max_gap = 0.0
    for _ in range(int(t["instances"])):
        w = rng.uniform(0.05, 1.0, 2)
        omega = ColorMeasure(alphabet, w / w.sum(), probability=True)
        cvals = rng.uniform(0.2, 3.0, 3)
        C = Kernel(alphabet, [[cvals[0], cvals[1]], [cvals[1], cvals[2]]])
        f = rng.uniform(0.05, 2.5, 3)
        ref = product_kernel_measure(C, omega).weights
        pair = PairMeasure(alphabet, ref * [[f[0], f[1]], [f[1], f[2]]])
        dual = varsolve.legendre_i_omega(pair, omega, C)
        primal = rates.rate_I_omega(pair, omega, C)
        max_gap = max(max_gap, abs(dual - primal))
    passed = max_gap <= t["tol"]
    return _record(5, "pair-rate-duality", passed, {"max_gap": max_gap}, started)


# ---------------------------------------------------------------------------
# criterion 6: zero point and nonnegativity of rate_J


def _random_sub_consistent(rng, alphabet):
    m = alphabet.m
    support = {}
    # one atom per color keeps nu1 > 0, so the rate stays finite and the
    # nonnegativity check below is not vacuous
    extras = int(rng.integers(2, 6))
    colors = list(range(m)) + [int(a) for a in rng.integers(0, m, extras)]
    for a in colors:
        ell = tuple(int(x) for x in rng.integers(0, 4, m))
        support[(a, ell)] = support.get((a, ell), 0.0) + float(rng.uniform(0.1, 1.0))
    total = sum(support.values())
    nu = NeighborhoodMeasure(alphabet, {k: v / total for k, v in support.items()},
                             probability=True)
    _, phi2 = phi(nu)
    base = np.maximum(phi2, phi2.T)
    noise = rng.uniform(0.0, 0.5, (m, m))
    pair = PairMeasure(alphabet, base + (noise + noise.T) / 2.0)
    return pair, nu


def criterion_6(tol=None):
    t = _merged({"zero_tol": 1e-9, "instances": 500}, tol)
    started = time.perf_counter()
    mu, C = _bench_model()
    pair_star = product_kernel_measure(C, mu)
    qstar = rates.poisson_limit_law(mu, C, tail_mass=1e-14)
    zero_value = rates.rate_J(pair_star, qstar, mu, C).value

    rng = np.random.default_rng(ZERO_POINT_SEED)
    min_random = math.inf
    finite_count = 0
    breakdown_ok = True
    for _ in range(int(t["instances"])):
        pair, nu = _random_sub_consistent(rng, mu.alphabet)
        rv = rates.rate_J(pair, nu, mu, C)
        min_random = min(min_random, rv.value)
        if rv.finite:
            finite_count += 1
            breakdown_ok = breakdown_ok and math.isclose(
                rv.value, sum(rv.breakdown.values()), rel_tol=0, abs_tol=1e-12)

    bad_nu = NeighborhoodMeasure(mu.alphabet, {(0, (5, 0)): 1.0}, probability=True)
    bad_pair = PairMeasure(mu.alphabet, np.full((2, 2), 1e-6))
    inf_value = rates.rate_J(bad_pair, bad_nu, mu, C)
    passed = (zero_value <= t["zero_tol"] and min_random >= 0.0 and breakdown_ok
              and finite_count == int(t["instances"])
              and math.isinf(inf_value.value)
              and inf_value.reason == "not-sub-consistent")
    details = {"zero_value": zero_value, "min_random": min_random,
               "finite": finite_count, "breakdown_ok": breakdown_ok,
               "inf_reason": inf_value.reason}
    return _record(6, "zero-point-nonnegativity", passed, details, started)


# ---------------------------------------------------------------------------
# criteria 7, 8, 10 share the sampled-graph batteries


def _mixed_model(i):
    which = i % 3
    if which == 0:
        return (ColorMeasure(Alphabet(1), [1.0], probability=True),
                Kernel.constant(2.5))
    if which == 1:
        return _bench_model()
    alphabet = Alphabet(3)
    mu = ColorMeasure(alphabet, [0.5, 0.3, 0.2], probability=True)
    C = Kernel(alphabet, [[2.0, 1.0, 0.5], [1.0, 3.0, 1.0], [0.5, 1.0, 1.5]])
    return mu, C


@lru_cache(maxsize=1)
def _mixed_battery():
    out = []
    for i in range(1000):
        mu, C = _mixed_model(i)
        n = 60 + 60 * (i % 4)
        graph = sample_colored_graph(ModelParams(mu, C, n),
                                     derive_child_seed(BATTERY_SEED, i))
        out.append((graph, *empirical_measures(graph)))
    return tuple(out)


@lru_cache(maxsize=1)
def _conditional_battery():
    omega_n = ColorCounts(60, [35, 25])
    pair_n = PairCounts(60, [[20, 15], [15, 10]])
    out = []
    for i in range(200):
        g = sample_conditional(omega_n, pair_n, derive_child_seed(CONDITIONAL_SEED, i))
        out.append((g, *empirical_measures(g)))
    return omega_n, pair_n, tuple(out)


def criterion_7(tol=None):
    started = time.perf_counter()
    checked = 0
    for graph, cc, pc, nc in _mixed_battery():
        color, adj = phi_counts(nc)
        if not (np.array_equal(color, cc.counts)
                and np.array_equal(adj, pc.adjacency)
                and int(pc.adjacency.sum()) == 2 * graph.edge_count):
            details = {"checked": checked, "failed_at": graph.n}
            return _record(7, "empirical-exactness", False, details, started)
        checked += 1
    return _record(7, "empirical-exactness", True, {"checked": checked}, started)


def criterion_8(tol=None):
    t = _merged({"uniform_seeds": 60000, "se_mult": 3.0}, tol)
    started = time.perf_counter()
    omega_n, pair_n, battery = _conditional_battery()
    exact_ok = all(
        np.array_equal(cc.counts, omega_n.counts)
        and np.array_equal(pc.edge_counts, pair_n.edge_counts)
        for _, cc, pc, _ in battery)

    reps = int(t["uniform_seeds"])
    counts = {}
    oc = ColorCounts(4, [4])
    ec = PairCounts(4, [[2]])
    for i in range(reps):
        g = sample_conditional(oc, ec, derive_child_seed(UNIFORMITY_SEED, i))
        key = g.edges.tobytes()
        counts[key] = counts.get(key, 0) + 1
    p = 1.0 / 15.0
    band = t["se_mult"] * math.sqrt(p * (1.0 - p) / reps)
    freqs = [v / reps for v in counts.values()]
    uniform_ok = len(counts) == 15 and all(abs(f - p) <= band for f in freqs)
    passed = exact_ok and uniform_ok
    details = {"exact_ok": exact_ok, "distinct_graphs": len(counts),
               "max_freq_dev": max(abs(f - p) for f in freqs), "band": band}
    return _record(8, "conditional-sampler", passed, details, started)


# ---------------------------------------------------------------------------
# criterion 9: approximation pipeline


def criterion_9(tol=None):
    t = _merged({"consistency_tol": 1e-12, "eps_grid": (0.1, 0.01, 0.001),
                 "quantize": ((1000, 0.2), (10000, 0.1))}, tol)
    started = time.perf_counter()
    mu, C = _bench_model()
    details = {}

    # consistify: strict sub-consistency gets repaired exactly, at every eps
    worst_consistency = 0.0
    worst_pair_move = {}
    cases = [
        (PairMeasure(Alphabet(1), [[0.8]]),
         NeighborhoodMeasure(Alphabet(1), {(0, (0,)): 1.0}, probability=True)),
        (product_kernel_measure(C, mu), rates.poisson_limit_law(mu, C)),
    ]
    consistify_ok = True
    for eps in t["eps_grid"]:
        for pair, nu in cases:
            pair_hat, nu_hat = consistify(pair, nu, eps)
            _, phi2 = phi(nu_hat)
            worst_consistency = max(worst_consistency,
                                    float(np.abs(phi2 - pair_hat.weights).max()))
            move = float(np.abs(pair_hat.weights - pair.weights).max())
            tv = total_variation(nu, nu_hat)
            consistify_ok = consistify_ok and move <= eps and tv <= eps
    worst_pair_move["consistency"] = worst_consistency
    consistify_ok = consistify_ok and worst_consistency <= t["consistency_tol"]

    # exactly consistent input comes back untouched; graph-derived input is
    # consistent up to one ulp of float recomputation, so the repair there
    # must be at rounding scale, not at eps scale
    exact_nu = NeighborhoodMeasure(Alphabet(1), {(0, (1,)): 1.0}, probability=True)
    exact_pair = PairMeasure(Alphabet(1), [[1.0]])
    same_pair, same_nu = consistify(exact_pair, exact_nu, 0.01)
    identity_ok = same_pair is exact_pair and same_nu is exact_nu
    g, cc, pc, nc = _mixed_battery()[1]
    near_pair, near_nu = consistify(pc.measure, nc.measure, 0.01)
    identity_ok = (identity_ok
                   and float(np.abs(near_pair.weights - pc.measure.weights).max()) <= 1e-14
                   and total_variation(nc.measure, near_nu) <= 1e-12)

    # quantize: exact phi pinning plus shrinking distance to the target
    quant_ok = True
    qstar = rates.poisson_limit_law(mu, C)
    tvs = {}
    for idx, (n, eps) in enumerate(t["quantize"]):
        graph = sample_colored_graph(ModelParams(mu, C, int(n)),
                                     derive_child_seed(QUANTIZE_SEED, 1000 + idx))
        cc_n, pc_n, _ = empirical_measures(graph)
        nu_n = quantize(cc_n, pc_n, qstar, derive_child_seed(QUANTIZE_SEED, idx))
        color, adj = phi_counts(nu_n)
        quant_ok = (quant_ok and np.array_equal(color, cc_n.counts)
                    and np.array_equal(adj, pc_n.adjacency))
        tv = total_variation(nu_n.measure, qstar)
        tvs[int(n)] = tv
        quant_ok = quant_ok and tv <= eps

    # cap_degrees: heavy vertex redistributed, phi untouched
    n_cap = 1000
    cap = 10
    heavy = {(0, (2 * cap,)): 1, (0, (1,)): 2 * cap, (0, (0,)): n_cap - 1 - 2 * cap}
    nu_heavy = NeighborhoodCounts(n_cap, heavy)
    capped = cap_degrees(nu_heavy)
    cap_ok = (capped.max_magnitude() <= cap
              and all(np.array_equal(x, y) for x, y in
                      zip(phi_counts(nu_heavy), phi_counts(capped))))
    already = NeighborhoodCounts(8, {(0, (1,)): 8})
    cap_ok = cap_ok and cap_degrees(already) is already

    passed = consistify_ok and identity_ok and quant_ok and cap_ok
    details.update({"consistency_residual": worst_consistency,
                    "identity_ok": identity_ok, "quantize_tv": tvs,
                    "cap_ok": cap_ok})
    return _record(9, "approximation-pipeline", passed, details, started)


# ---------------------------------------------------------------------------
# criterion 10: combinatorial bounds


def criterion_10(tol=None):
    t = _merged({"j_max": 50, "parts_max": 6, "scalar_limit": 60,
                 "theta_magnitudes": tuple(range(1, 11))}, tol)
    started = time.perf_counter()
    # composition_count re-verifies the sandwich internally on every call
    for j in range(t["j_max"] + 1):
        for parts in range(1, t["parts_max"] + 1):
            oracles.composition_count(j, parts)
    report = oracles.partition_bound_check(2, t["theta_magnitudes"],
                                           scalar_limit=t["scalar_limit"])
    support_ok = all(oracles.support_bound_check(nc)
                     for _, _, _, nc in _mixed_battery())
    support_ok = support_ok and all(oracles.support_bound_check(nc)
                                    for _, _, _, nc in _conditional_battery()[2])
    passed = report["theta_ok"] and report["scalar_ok"] and support_ok
    details = {"theta_ok": report["theta_ok"], "scalar_ok": report["scalar_ok"],
               "support_ok": support_ok,
               "graphs_checked": len(_mixed_battery()) + len(_conditional_battery()[2])}
    return _record(10, "combinatorial-bounds", passed, details, started)


# ---------------------------------------------------------------------------
# criterion 11: law of large numbers at n = 20000


def criterion_11(tol=None):
    t = _merged({"degree_tv": 0.02, "nbhd_tv": 0.05, "min_pass": 19,
                 "n": 20000, "runtime_s": 120.0}, tol)
    started = time.perf_counter()
    mu1 = ColorMeasure(Alphabet(1), [1.0], probability=True)
    er = lln_check(ModelParams(mu1, Kernel.constant(3.0), int(t["n"])),
                   int(t["n"]), LLN_SEEDS_ER)
    degree_pass = sum(row["tv_degree"] <= t["degree_tv"] for row in er["per_seed"])

    mu2, C2 = _bench_model()
    bench = lln_check(ModelParams(mu2, C2, int(t["n"])), int(t["n"]),
                      LLN_SEEDS_BENCH)
    nbhd_pass = sum(row["tv_neighborhood"] <= t["nbhd_tv"]
                    for row in bench["per_seed"])
    elapsed = time.perf_counter() - started
    passed = (degree_pass >= t["min_pass"] and nbhd_pass >= t["min_pass"]
              and elapsed < t["runtime_s"])
    details = {"degree_pass": f"{degree_pass}/20", "nbhd_pass": f"{nbhd_pass}/20",
               "median_tv_degree": float(er["summary"]["tv_degree"]["median"]),
               "median_tv_nbhd": float(bench["summary"]["tv_neighborhood"]["median"])}
    return _record(11, "lln-at-scale", passed, details, started)


CRITERIA = {
    1: criterion_1, 2: criterion_2, 3: criterion_3, 4: criterion_4,
    5: criterion_5, 6: criterion_6, 7: criterion_7, 8: criterion_8,
    9: criterion_9, 10: criterion_10, 11: criterion_11,
}


def run_criterion(cid, tol=None):
    return CRITERIA[cid](tol)


def run_suite(name, overrides=None):
    """Run one named suite; overrides maps criterion id to tolerance dicts."""
    if name not in SUITES:
        raise ValueError(f"unknown suite {name!r}, expected one of {sorted(SUITES)}")
    overrides = overrides or {}
    records = []
    for cid in SUITES[name]:
        records.append(run_criterion(cid, overrides.get(cid)))
    return records
