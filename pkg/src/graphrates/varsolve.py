"""Solvers for the model's low-dimensional variational problems.

Covers the degree-distribution fixed point, the constrained entropy
minimization psi(y) = inf { H(omega||mu) : omega' C omega = y }, the inner
infimum of the edge-count rate, the four-variable annealed Ising
optimization, and the numeric Legendre dual of the conditional pair rate.
All solvers are deterministic: multi-starts come from a fixed
low-discrepancy set, never from an RNG.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize
from scipy.special import rel_entr

from .errors import NonConvergenceError
from .measures import _check_same_alphabet

FIXED_POINT_TOL = 1e-12
CONSTRAINT_TOL = 1e-8
GOLDEN_TOL = 1e-10
OBJECTIVE_TOL = 1e-10

_PENALTY_SCHEDULE = tuple(10.0 ** k for k in range(2, 9))
_N_STARTS = 32
_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class SolveReport:
    """Result of one solver run; argmin doubles as argmax for maximizers."""

    argmin: tuple
    value: float
    residual: float
    iterations: int
    converged: bool

    def __post_init__(self):
        # numpy scalars sneak in from grid searches; pin plain python types
        object.__setattr__(self, "argmin", tuple(float(v) for v in self.argmin))
        object.__setattr__(self, "value", float(self.value))
        object.__setattr__(self, "residual", float(self.residual))
        object.__setattr__(self, "iterations", int(self.iterations))
        object.__setattr__(self, "converged", bool(self.converged))

    @property
    def argmax(self):
        return self.argmin

    def to_dict(self):
        return {"argmin": list(self.argmin), "value": self.value,
                "residual": self.residual, "iterations": self.iterations,
                "converged": self.converged}

    @classmethod
    def from_dict(cls, d):
        return cls(tuple(d["argmin"]), float(d["value"]), float(d["residual"]),
                   int(d["iterations"]), bool(d["converged"]))


# ---------------------------------------------------------------------------
# degree fixed point


def solve_degree_fixed_point(mean, c):
    """Unique x in [max(mean, c e^-2), c] with x = c exp(-2(1 - mean/x)).

    Bisection on g(x) = x - c exp(-2(1 - mean/x)); g <= 0 at the left
    endpoint and >= 0 at x = c, and the solution is unique on the bracket.
    Only the mean <= c branch of the degree rate calls this.
    """
    if c <= 0:
        raise ValueError(f"c must be positive, got {c!r}")
    if mean < 0:
        raise ValueError(f"mean must be nonnegative, got {mean!r}")
    if mean > c:
        raise ValueError(f"mean {mean!r} exceeds c {c!r}: fixed point not applicable")

    def g(x):
        return x - c * math.exp(-2.0 * (1.0 - mean / x))

    lo = max(mean, c * math.exp(-2.0))
    hi = c
    for x0, r0 in ((hi, g(hi)), (lo, g(lo))):
        if r0 == 0.0:
            return SolveReport((x0,), x0, 0.0, 0, True)
    iterations = 0
    glo = g(lo)
    while hi - lo > 1e-16 * max(1.0, c) and iterations < 200:
        mid = 0.5 * (lo + hi)
        gm = g(mid)
        if gm == 0.0:
            lo = hi = mid
            break
        if (gm < 0) == (glo < 0):
            lo, glo = mid, gm
        else:
            hi = mid
        iterations += 1
    x = 0.5 * (lo + hi)
    residual = abs(g(x))
    return SolveReport((x,), x, residual, iterations, residual <= FIXED_POINT_TOL)


# ---------------------------------------------------------------------------
# constrained entropy minimization on the simplex


def _softmax(z):
    z = z - z.max()
    e = np.exp(z)
    return e / e.sum()


def _simplex_starts(k, mu_w):
    """Fixed multi-start set on the k-simplex: mu, uniform, smoothed vertices,
    then a Kronecker low-discrepancy fill."""
    starts = [np.asarray(mu_w, dtype=float), np.full(k, 1.0 / k)]
    for a in range(min(k, 8)):
        v = np.full(k, 0.1 / k)
        v[a] += 0.9
        starts.append(v / v.sum())
    alphas = np.sqrt(np.array([2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37,
                               41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83,
                               89, 97, 101, 103, 107, 109, 113, 127, 131],
                              dtype=float))[:k]
    i = 1
    while len(starts) < _N_STARTS:
        v = np.mod(i * alphas, 1.0) + 0.02
        starts.append(v / v.sum())
        i += 1
    return starts[:_N_STARTS]


def _quad_form(w, C_w):
    return float(w @ C_w @ w)


def _attainable_range(mu, C):
    """Numeric range [ymin, ymax] of omega' C omega over the admissible face.

    Colors with mu(a) = 0 are excluded (any finite-entropy omega vanishes
    there). Vertex and two-color segment optima are exact candidates; the
    multi-start Nelder-Mead sweep covers interior optima for k >= 3.
    """
    _check_same_alphabet(mu, C)
    idx = np.flatnonzero(mu.weights > 0)
    k = idx.size
    C_a = C.values[np.ix_(idx, idx)]
    mu_a = mu.weights[idx] / mu.weights[idx].sum()
    qmu = _quad_form(mu_a, C_a)

    candidates = [qmu, _quad_form(np.full(k, 1.0 / k), C_a)]
    for i in range(k):
        candidates.append(C_a[i, i])
        for j in range(i + 1, k):
            caa, cab, cbb = C_a[i, i], C_a[i, j], C_a[j, j]
            den = caa - 2 * cab + cbb
            if den != 0.0:
                t = (cbb - cab) / den
                if 0.0 < t < 1.0:
                    candidates.append(t * t * caa + 2 * t * (1 - t) * cab
                                      + (1 - t) * (1 - t) * cbb)
    ymin, ymax = min(candidates), max(candidates)
    if k > 2:
        for sign in (1.0, -1.0):
            def quad_obj(z):
                return sign * _quad_form(_softmax(z), C_a)
            for w0 in _simplex_starts(k, mu_a):
                res = minimize(quad_obj, np.log(w0), method="Nelder-Mead",
                               options={"xatol": 1e-10, "fatol": 1e-12,
                                        "maxiter": 2000})
                y = _quad_form(_softmax(res.x), C_a)
                ymin, ymax = min(ymin, y), max(ymax, y)
    return ymin, ymax, qmu, idx


def _entropy_on_face(w, mu_a):
    return float(np.sum(rel_entr(w, mu_a)))


def _psi_on_face(y, mu_a, C_a):
    """Penalty-method minimum of H(omega||mu) subject to omega' C omega = y."""
    k = mu_a.size
    best = math.inf
    for w0 in _simplex_starts(k, mu_a):
        z = np.log(w0)
        for pen in _PENALTY_SCHEDULE:
            def obj(z_, pen=pen):
                w = _softmax(z_)
                return (_entropy_on_face(w, mu_a)
                        + pen * (_quad_form(w, C_a) - y) ** 2)
            res = minimize(obj, z, method="Nelder-Mead",
                           options={"xatol": 1e-11, "fatol": 1e-13,
                                    "maxiter": 3000})
            z = res.x
        w = _softmax(z)
        if abs(_quad_form(w, C_a) - y) <= CONSTRAINT_TOL:
            best = min(best, _entropy_on_face(w, mu_a))
    return best


def _psi_given_range(y, mu, C, range_info):
    ymin, ymax, qmu, idx = range_info
    scale = max(1.0, abs(ymax))
    if abs(y - qmu) <= 1e-12 * scale:
        return 0.0
    if y < ymin - 1e-9 * scale or y > ymax + 1e-9 * scale:
        return math.inf
    C_a = C.values[np.ix_(idx, idx)]
    mu_a = mu.weights[idx] / mu.weights[idx].sum()
    value = _psi_on_face(min(max(y, ymin), ymax), mu_a, C_a)
    if math.isinf(value):
        raise NonConvergenceError(
            f"no multi-start satisfied the constraint at y={y!r}")
    return max(value, 0.0)


def psi(y, mu, C):
    """inf H(omega||mu) over probability omega with omega' C omega = y.

    +inf when y lies outside the attainable range of the quadratic form.
    """
    if y < 0:
        raise ValueError(f"y must be nonnegative, got {y!r}")
    return _psi_given_range(y, mu, C, _attainable_range(mu, C))


def zeta_inner(x, mu, C):
    """Golden-section minimum of psi(y) - x ln(y/2) + y/2 over attainable y.

    A degenerate attainable range (the constant-kernel case) short-circuits
    to the single feasible point, where psi vanishes.
    """
    if x < 0:
        raise ValueError(f"x must be nonnegative, got {x!r}")
    range_info = _attainable_range(mu, C)
    ymin, ymax, qmu, _ = range_info
    scale = max(1.0, abs(ymax))

    def g(y):
        log_part = 0.0 if x == 0 else -x * math.log(y / 2.0)
        return _psi_given_range(y, mu, C, range_info) + log_part + y / 2.0

    if ymax - ymin <= 1e-10 * scale:
        return SolveReport((qmu,), g(qmu), 0.0, 0, True)

    lo = ymin if ymin > 0 else 1e-12 * scale
    hi = ymax
    c1 = hi - _GOLDEN * (hi - lo)
    c2 = lo + _GOLDEN * (hi - lo)
    f1, f2 = g(c1), g(c2)
    iterations = 0
    while hi - lo > GOLDEN_TOL and iterations < 300:
        if f1 <= f2:
            hi, c2, f2 = c2, c1, f1
            c1 = hi - _GOLDEN * (hi - lo)
            f1 = g(c1)
        else:
            lo, c1, f1 = c1, c2, f2
            c2 = lo + _GOLDEN * (hi - lo)
            f2 = g(c2)
        iterations += 1
    y_star, f_star = (c1, f1) if f1 <= f2 else (c2, f2)
    width = hi - lo
    return SolveReport((y_star,), f_star, width, iterations, width <= GOLDEN_TOL)


# ---------------------------------------------------------------------------
# annealed Ising free energy


def _mix_entropy(x):
    if x <= 0.0 or x >= 1.0:
        return 0.0
    return -x * math.log(x) - (1.0 - x) * math.log(1.0 - x)


def _ising_objective(x, wpp, wmm, wpm, beta, c):
    """Four-variable free-energy functional; -inf off the admissible domain."""
    if not (0.0 <= x <= 1.0) or wpp < 0 or wmm < 0 or wpm < 0:
        return -math.inf
    refs = (c * x * x, c * (1.0 - x) * (1.0 - x), c * x * (1.0 - x))
    ent = 0.0
    for w, r, mult in ((wpp, refs[0], 1.0), (wmm, refs[1], 1.0), (wpm, refs[2], 2.0)):
        if w > 0.0:
            if r == 0.0:
                return -math.inf
            ent += mult * w * math.log(w / r)
    mass = wpp + wmm + 2.0 * wpm
    return (0.5 * beta * (wpp + wmm - 2.0 * wpm) + _mix_entropy(x)
            - 0.5 * (ent + c - mass))


def _ising_grid_best(beta, c):
    wmax = c * math.exp(beta)
    xs = np.linspace(0.0, 1.0, 40)
    ws = np.linspace(0.0, wmax, 40)
    wpp, wmm, wpm = np.meshgrid(ws, ws, ws, indexing="ij")
    mass = wpp + wmm + 2.0 * wpm
    bracket = 0.5 * beta * (wpp + wmm - 2.0 * wpm)
    best_val, best_pt = -math.inf, None
    with np.errstate(divide="ignore", invalid="ignore"):
        for x in xs:
            refs = (c * x * x, c * (1.0 - x) * (1.0 - x), c * x * (1.0 - x))
            ent = np.zeros_like(wpp)
            ok = np.ones(wpp.shape, dtype=bool)
            for w, r, mult in ((wpp, refs[0], 1.0), (wmm, refs[1], 1.0),
                               (wpm, refs[2], 2.0)):
                pos = w > 0.0
                if r == 0.0:
                    ok &= ~pos
                else:
                    ent += np.where(pos, mult * w * np.log(np.maximum(w, 1e-300) / r), 0.0)
            val = np.where(ok, bracket + _mix_entropy(x) - 0.5 * (ent + c - mass),
                           -math.inf)
            flat = int(np.argmax(val))
            if val.flat[flat] > best_val:
                best_val = float(val.flat[flat])
                i, j, l = np.unravel_index(flat, val.shape)
                best_pt = (float(x), float(ws[i]), float(ws[j]), float(ws[l]))
    return best_val, best_pt


def _ising_profiled_best(beta, c):
    # stationarity in the pair variables at fixed x gives w = ref * e^{+-beta};
    # scanning that profile curve seeds the refinement near the true optimum
    eb, emb = math.exp(beta), math.exp(-beta)
    best_val, best_pt = -math.inf, None
    for x in np.linspace(0.0, 1.0, 401):
        pt = (float(x), c * x * x * eb, c * (1.0 - x) * (1.0 - x) * eb,
              c * x * (1.0 - x) * emb)
        val = _ising_objective(*pt, beta, c)
        if val > best_val:
            best_val, best_pt = val, pt
    return best_val, best_pt


def ising_annealed(beta, c):
    """Limiting annealed free energy via the four-variable maximization.

    Coarse 40^4 grid plus a stationarity profile seed, refined by repeated
    Nelder-Mead until two polish rounds agree within 1e-10.
    """
    if c <= 0:
        raise ValueError(f"c must be positive, got {c!r}")
    if beta < 0:
        raise ValueError(f"beta must be nonnegative, got {beta!r}")
    seeds = [_ising_grid_best(beta, c), _ising_profiled_best(beta, c)]
    best_val, best_pt = max(seeds, key=lambda s: s[0])

    def neg(v):
        val = _ising_objective(v[0], v[1], v[2], v[3], beta, c)
        return 1e18 if val == -math.inf else -val

    point = np.asarray(best_pt, dtype=float)
    value = best_val
    iterations = 0
    residual = math.inf
    for _ in range(6):
        res = minimize(neg, point, method="Nelder-Mead",
                       options={"xatol": 1e-12, "fatol": 1e-14, "maxiter": 20000})
        iterations += int(res.nit)
        new_val = -neg(res.x)
        residual = abs(new_val - value)
        if new_val > value:
            value, point = new_val, res.x
        if residual <= OBJECTIVE_TOL:
            break
    x, wpp, wmm, wpm = (float(v) for v in point)
    return SolveReport((x, wpp, wmm, wpm), value, residual, iterations,
                       residual <= OBJECTIVE_TOL)


# ---------------------------------------------------------------------------
# numeric Legendre dual of the conditional pair rate


def legendre_i_omega(pair, omega, C, grid_spec=None):
    """(1/2) sup_g { <pair, g> + <C omega x omega, 1 - e^g> } over symmetric g.

    The objective is separable per entry, so coordinate ascent lands on the
    clipped analytic optimum g(a,b) = ln(pair/(C omega x omega)) in one
    sweep. +inf when pair charges a zero of the reference product.
    grid_spec: optional {"clip": G, "sweeps": k} overriding the defaults.
    """
    _check_same_alphabet(pair, omega, C)
    m = pair.alphabet.m
    if m > 3:
        raise ValueError(f"dual check is limited to m <= 3, got m={m}")
    spec = {"clip": 40.0, "sweeps": 2}
    if grid_spec:
        spec.update(grid_spec)
    clip = float(spec["clip"])

    w = omega.weights
    ref = C.values * np.outer(w, w)
    p = pair.weights
    if np.any((ref == 0.0) & (p > 0.0)):
        return math.inf

    g = np.full((m, m), -clip)
    for _ in range(int(spec["sweeps"])):
        for a in range(m):
            for b in range(m):
                if p[a, b] > 0.0:
                    g[a, b] = min(max(math.log(p[a, b] / ref[a, b]), -clip), clip)
                else:
                    g[a, b] = -clip
    value = float(np.sum(p * g) + np.sum(ref * (1.0 - np.exp(g))))
    return 0.5 * value
