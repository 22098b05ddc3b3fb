"""Exact ground-truth computations used to validate the main code paths.

Everything here is coded independently of the modules under test: binomial
tails in log space, exact composition/partition counting with the proven
sandwich bounds, the support-size bound for empirical neighborhood measures,
the spin-count Ising free energy, and brute-force tiny partition functions.
Counts are exact Python integers throughout.
"""

import itertools
import math
from functools import lru_cache

import numpy as np
from scipy.special import gammaln, logsumexp

from .errors import BudgetError
from .measures import phi_counts

VECTOR_PARTITION_BUDGET = 14
_SCALAR_BOUND_CONST = 2.57  # just above the Hardy-Ramanujan pi*sqrt(2/3)

# ---------------------------------------------------------------------------
# binomial tails


def binomial_log_tail(N, p, k):
    """log P(Binomial(N, p) >= k), exact to ~1e-10 absolute in the log.

    k <= 0 returns 0.0 (log of 1); k = N+1 returns -inf.
    """
    N, k = int(N), int(k)
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p!r}")
    if not 0 <= k <= N + 1:
        raise ValueError(f"k must lie in [0, {N + 1}], got {k}")
    if k <= 0:
        return 0.0
    if k > N:
        return -math.inf
    if p == 0.0:
        return -math.inf
    if p == 1.0:
        return 0.0
    j = np.arange(k, N + 1, dtype=float)
    log_terms = (gammaln(N + 1) - gammaln(j + 1) - gammaln(N - j + 1)
                 + j * math.log(p) + (N - j) * math.log1p(-p))
    return float(min(logsumexp(log_terms), 0.0))


# ---------------------------------------------------------------------------
# exact counting


def composition_count(j, parts):
    """Number of nonnegative integer solutions of l_1 + ... + l_parts = j.

    Exact binomial closed form; every call re-verifies the sandwich
    j^{parts-1} <= count * (parts-1)! <= (j+parts)^{parts-1} in integer
    arithmetic.
    """
    j, parts = int(j), int(parts)
    if j < 0:
        raise ValueError(f"j must be nonnegative, got {j}")
    if parts < 1:
        raise ValueError(f"parts must be >= 1, got {parts}")
    count = math.comb(j + parts - 1, parts - 1)
    scaled = count * math.factorial(parts - 1)
    if not j ** (parts - 1) <= scaled <= (j + parts) ** (parts - 1):
        raise AssertionError(f"composition sandwich violated at j={j}, parts={parts}")
    return count


def _order_key(vec):
    # magnitude first, then lexicographic; the nonincreasing order for parts
    return (sum(vec), vec)


def vector_partition_count(ell):
    """Exact number of multisets of nonzero vectors summing to ell.

    Parts are enumerated depth-first in nonincreasing magnitude-then-lex
    order, so each multiset is generated exactly once. Budget: |ell| <= 14.
    """
    ell = tuple(int(x) for x in ell)
    if any(x < 0 for x in ell):
        raise ValueError(f"entries must be nonnegative, got {ell}")
    if sum(ell) > VECTOR_PARTITION_BUDGET:
        raise BudgetError(
            f"magnitude {sum(ell)} exceeds the enumeration budget {VECTOR_PARTITION_BUDGET}")

    @lru_cache(maxsize=None)
    def count(remaining, bound):
        if not any(remaining):
            return 1
        bkey = _order_key(bound)
        total = 0
        for part in itertools.product(*(range(r + 1) for r in remaining)):
            if not any(part):
                continue
            if _order_key(part) <= bkey:
                total += count(tuple(r - p for r, p in zip(remaining, part)), part)
        return total

    return count(ell, ell)


def scalar_partition_counts(limit):
    """p(0..limit) by Euler's pentagonal-number recurrence, exact integers."""
    p = [1]
    for s in range(1, limit + 1):
        total = 0
        k = 1
        while True:
            g1 = k * (3 * k - 1) // 2
            g2 = k * (3 * k + 1) // 2
            if g1 > s and g2 > s:
                break
            sign = 1 if k % 2 else -1
            if g1 <= s:
                total += sign * p[s - g1]
            if g2 <= s:
                total += sign * p[s - g2]
            k += 1
        p.append(total)
    return p


def partition_bound_check(m, magnitudes, scalar_limit=60):
    """Vector-partition growth check against the ln-scale envelope.

    For each magnitude S, finds max vector_partition_count over all ell with
    |ell| = S and m coordinates, and reports theta_hat(S) =
    ln(max count) / (ln(S) * S^{(2m-1)/(2m)}); asserts theta_hat <= 3m. Also
    checks p(S) <= exp(2.57 sqrt(S)) for S <= scalar_limit. Counts are
    reported as decimal strings to keep them exact in JSON.
    """
    m = int(m)
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    rows = []
    theta_ok = True
    for S in magnitudes:
        S = int(S)
        if S < 1:
            raise ValueError(f"magnitudes must be >= 1, got {S}")
        best = 0
        for cuts in itertools.combinations(range(S + m - 1), m - 1):
            ell = []
            prev = -1
            for cutpos in cuts:
                ell.append(cutpos - prev - 1)
                prev = cutpos
            ell.append(S + m - 2 - prev)
            best = max(best, vector_partition_count(tuple(ell)))
        if S == 1:
            theta = 0.0
        else:
            theta = math.log(best) / (math.log(S) * S ** ((2 * m - 1) / (2 * m)))
        ok = theta <= 3 * m
        theta_ok = theta_ok and ok
        rows.append({"S": S, "max_count": str(best), "theta_hat": theta, "ok": ok})
    if not theta_ok:
        raise AssertionError(f"theta bound 3m={3 * m} violated: {rows}")

    scalar = scalar_partition_counts(scalar_limit)
    scalar_ok = all(scalar[S] <= math.exp(_SCALAR_BOUND_CONST * math.sqrt(S))
                    for S in range(1, scalar_limit + 1))
    if not scalar_ok:
        raise AssertionError("scalar partition bound exp(2.57 sqrt(S)) violated")
    return {"m": m, "theta_bound": 3 * m, "per_magnitude": rows,
            "theta_ok": theta_ok, "scalar_limit": scalar_limit,
            "scalar_ok": scalar_ok}


def support_bound_check(nu_n):
    """Support-size bound for an n-empirical neighborhood measure.

    #support <= C (n ||pair||)^{m/(m+1)} + D with
    C = 2^m Gamma(m+2)^{m/(m+1)} / Gamma(m) and D = 2^m (m+1)^m / Gamma(m).
    nu_n is a NeighborhoodCounts; n ||pair|| is the exact integer total of
    the induced adjacency counts.
    """
    m = nu_n.alphabet.m
    _, adjacency = phi_counts(nu_n)
    n_pair_mass = int(adjacency.sum())
    support_size = len(nu_n.counts)
    exponent = m / (m + 1)
    c_const = 2 ** m * math.gamma(m + 2) ** exponent / math.gamma(m)
    d_const = 2 ** m * (m + 1) ** m / math.gamma(m)
    return support_size <= c_const * n_pair_mass ** exponent + d_const


# ---------------------------------------------------------------------------
# Ising


def _spin_count_objective(alpha, beta, c):
    ent = 0.0
    if 0.0 < alpha < 1.0:
        ent = -alpha * math.log(alpha) - (1.0 - alpha) * math.log(1.0 - alpha)
    agree = alpha * alpha + (1.0 - alpha) * (1.0 - alpha)
    cross = 2.0 * alpha * (1.0 - alpha)
    return ent + 0.5 * c * (agree * math.expm1(beta) + cross * math.expm1(-beta))


def ising_oracle(beta, c):
    """Annealed Ising free energy by conditioning on the +1 spin fraction.

    The objective is symmetric about alpha = 1/2 and unimodal on [0, 1/2],
    so a golden-section search there (plus a coarse grid that contains 1/2
    exactly) finds the global maximum. beta = 0 returns ln 2 exactly.
    """
    if c <= 0:
        raise ValueError(f"c must be positive, got {c!r}")
    if beta < 0:
        raise ValueError(f"beta must be nonnegative, got {beta!r}")
    f = lambda a: _spin_count_objective(a, beta, c)
    grid = np.linspace(0.0, 0.5, 101)
    best = max(float(f(a)) for a in grid)
    lo, hi = 0.0, 0.5
    inv = (math.sqrt(5.0) - 1.0) / 2.0
    c1 = hi - inv * (hi - lo)
    c2 = lo + inv * (hi - lo)
    f1, f2 = f(c1), f(c2)
    while hi - lo > 1e-12:
        if f1 >= f2:
            hi, c2, f2 = c2, c1, f1
            c1 = hi - inv * (hi - lo)
            f1 = f(c1)
        else:
            lo, c1, f1 = c1, c2, f2
            c2 = lo + inv * (hi - lo)
            f2 = f(c2)
    return max(best, f1, f2)


def exact_tiny_partition_function(n, p, beta, seed=None):
    """Brute-force Ising partition function on a tiny Erdos-Renyi graph.

    With a seed: samples G(n, p) and returns Z(beta) by summing over all 2^n
    spin assignments. With seed=None: returns E Z(beta) exactly via the
    per-edge expectation prod (1 - p + p e^{beta eta_u eta_v}), reduced over
    the spin-up count. Budget n <= 14.
    """
    n = int(n)
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if n > 14:
        raise BudgetError(f"n={n} exceeds the 2^n enumeration budget (14)")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p!r}")

    if seed is None:
        agree_factor = 1.0 - p + p * math.exp(beta)
        cross_factor = 1.0 - p + p * math.exp(-beta)
        total = 0.0
        for j in range(n + 1):
            agree_pairs = math.comb(j, 2) + math.comb(n - j, 2)
            cross_pairs = j * (n - j)
            total += (math.comb(n, j) * agree_factor ** agree_pairs
                      * cross_factor ** cross_pairs)
        return total

    rng = np.random.default_rng(seed)
    pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
    present = rng.random(len(pairs)) < p
    edges = [uv for uv, keep in zip(pairs, present) if keep]
    spins = 1 - 2 * ((np.arange(2 ** n)[:, None] >> np.arange(n)) & 1)
    energy = np.zeros(2 ** n)
    for u, v in edges:
        energy += spins[:, u] * spins[:, v]
    return float(np.exp(beta * energy).sum())
