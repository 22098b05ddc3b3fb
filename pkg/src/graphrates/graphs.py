"""Colored random graph model: free and conditioned samplers, empirical measures.

The model: n vertices with i.i.d. colors from mu, and each unordered pair
(u, v) an edge independently with probability p_n(a, b) = min(C(a, b)/n, 1)
where a, b are the endpoint colors. The conditional sampler instead fixes the
exact color counts and per-color-pair edge counts and draws uniformly from the
graphs realizing them: a seeded shuffle of the fixed color multiset, then for
every unordered color pair exactly n(a, b) distinct edge slots sampled without
replacement.
"""

import math
from collections import Counter

import numpy as np

from .errors import InfeasibleError
from .measures import (Alphabet, ColorCounts, ColorMeasure, Kernel,
                       NeighborhoodCounts, PairCounts, _check_same_alphabet)

# Bernoulli draws are streamed over pair slots up to this size, geometric
# skipping above it; both are exact samplers of the same product law.
_STREAM_LIMIT = 10_000
_CHUNK = 1 << 20


class ColoredGraph:
    """Simple graph with vertex colors; edges stored as sorted (u, v), u < v."""

    def __init__(self, n, m, colors, edges):
        n, m = int(n), int(m)
        colors = np.asarray(colors, dtype=np.int64)
        if colors.shape != (n,):
            raise ValueError(f"colors shape {colors.shape} != ({n},)")
        if n and (colors.min() < 0 or colors.max() >= m):
            raise ValueError("color index outside alphabet")
        edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        if edges.size:
            if edges.min() < 0 or edges.max() >= n:
                raise ValueError("edge endpoint outside vertex range")
            if np.any(edges[:, 0] >= edges[:, 1]):
                raise ValueError("edges must satisfy u < v (no loops)")
            order = np.lexsort((edges[:, 1], edges[:, 0]))
            edges = edges[order]
            if np.any(np.all(edges[1:] == edges[:-1], axis=1)):
                raise ValueError("duplicate edges")
        self.n = n
        self.alphabet = Alphabet(m)
        self.colors = colors.copy()
        self.colors.setflags(write=False)
        self.edges = edges.copy()
        self.edges.setflags(write=False)

    @property
    def m(self):
        return self.alphabet.m

    @property
    def edge_count(self):
        return int(self.edges.shape[0])

    def degrees(self):
        deg = np.zeros(self.n, dtype=np.int64)
        if self.edges.size:
            np.add.at(deg, self.edges[:, 0], 1)
            np.add.at(deg, self.edges[:, 1], 1)
        return deg

    def __eq__(self, other):
        return (isinstance(other, ColoredGraph) and self.n == other.n
                and self.m == other.m
                and np.array_equal(self.colors, other.colors)
                and np.array_equal(self.edges, other.edges))

    def __hash__(self):
        return hash((self.n, self.m, self.colors.tobytes(), self.edges.tobytes()))

    # -- serialization ------------------------------------------------------

    def to_text(self):
        lines = [f"{self.n} {self.m}",
                 " ".join(str(int(c)) for c in self.colors)]
        lines.extend(f"{u} {v}" for u, v in self.edges)
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text):
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if len(lines) < 2:
            raise ValueError("graph text needs a header line and a color line")
        n, m = (int(x) for x in lines[0].split())
        colors = [int(x) for x in lines[1].split()]
        edges = [[int(x) for x in ln.split()] for ln in lines[2:]]
        return cls(n, m, colors, edges)

    def to_dict(self):
        return {"n": self.n, "m": self.m, "colors": self.colors.tolist(),
                "edges": self.edges.tolist()}

    @classmethod
    def from_dict(cls, d):
        return cls(d["n"], d["m"], d["colors"], d["edges"])


class ModelParams:
    """Color law mu, kernel C, and size n; p_n(a,b) = min(C(a,b)/n, 1)."""

    def __init__(self, mu, C, n):
        if not isinstance(mu, ColorMeasure) or not mu.probability:
            raise ValueError("mu must be a probability ColorMeasure")
        if not isinstance(C, Kernel):
            raise ValueError("C must be a Kernel")
        _check_same_alphabet(mu, C)
        n = int(n)
        if n < 1:
            raise ValueError("n must be >= 1")
        self.mu = mu
        self.C = C
        self.n = n

    @property
    def edge_probabilities(self):
        return np.minimum(self.C.values / self.n, 1.0)


# ---------------------------------------------------------------------------
# slot machinery: pair slots are indexed 0..S-1 per color-class pair


def _triangle_offset(i, k):
    # slots before row i when enumerating pairs (i, j), i < j, of k vertices
    return i * k - (i * (i + 1)) // 2


def _decode_triangle(slots, k):
    """Map slot indices to (i, j), i < j, within a class of k vertices."""
    s = np.asarray(slots, dtype=np.int64)
    i = np.floor((2 * k - 1 - np.sqrt((2 * k - 1) ** 2 - 8.0 * s)) / 2).astype(np.int64)
    i = np.clip(i, 0, k - 2)
    # float sqrt can be off by one row either way
    for _ in range(2):
        i = np.where(_triangle_offset(i + 1, k) <= s, i + 1, i)
        i = np.where(_triangle_offset(i, k) > s, i - 1, i)
    j = s - _triangle_offset(i, k) + i + 1
    return i, j


def _bernoulli_slots(S, p, rng, streamed):
    """Indices of successes among S independent Bernoulli(p) slots."""
    if S <= 0 or p <= 0.0:
        return np.empty(0, dtype=np.int64)
    if p >= 1.0:
        return np.arange(S, dtype=np.int64)
    if streamed:
        out = []
        for start in range(0, S, _CHUNK):
            stop = min(start + _CHUNK, S)
            hits = np.flatnonzero(rng.random(stop - start) < p)
            if hits.size:
                out.append(hits + start)
        return np.concatenate(out) if out else np.empty(0, dtype=np.int64)
    # geometric skipping: gaps between successes are iid Geometric(p) on {1,2,..}
    log1mp = math.log1p(-p)
    out = []
    pos = -1
    while pos < S:
        remaining = S - pos
        batch = max(1024, int(remaining * p * 1.25) + 64)
        gaps = 1 + np.floor(np.log(rng.random(batch)) / log1mp).astype(np.int64)
        steps = pos + np.cumsum(gaps)
        out.append(steps[steps < S])
        pos = int(steps[-1])
    hits = np.concatenate(out) if out else np.empty(0, dtype=np.int64)
    return hits[hits < S]


def sample_colored_graph(params, seed):
    """Draw one graph from the model; deterministic per seed."""
    n, m = params.n, params.mu.alphabet.m
    rng = np.random.default_rng(seed)
    colors = rng.choice(m, size=n, p=params.mu.weights / params.mu.weights.sum())
    classes = [np.flatnonzero(colors == a) for a in range(m)]
    probs = params.edge_probabilities
    streamed = n <= _STREAM_LIMIT

    parts = []
    for a in range(m):
        for b in range(a, m):
            p = float(probs[a, b])
            A, B = classes[a], classes[b]
            if a == b:
                k = A.size
                S = k * (k - 1) // 2
                slots = _bernoulli_slots(S, p, rng, streamed)
                if slots.size:
                    i, j = _decode_triangle(slots, k)
                    parts.append(np.column_stack((A[i], A[j])))
            else:
                S = A.size * B.size
                slots = _bernoulli_slots(S, p, rng, streamed)
                if slots.size:
                    u = A[slots // B.size]
                    v = B[slots % B.size]
                    parts.append(np.column_stack((np.minimum(u, v), np.maximum(u, v))))
    edges = np.concatenate(parts) if parts else np.empty((0, 2), dtype=np.int64)
    return ColoredGraph(n, m, colors, edges)


def empirical_measures(graph):
    """Exact integer-backed (L1, L2, M) of a colored graph.

    L1 counts vertices per color; L2 counts each edge once per orientation
    (total mass 2|E|/n); M counts vertices per (color, degree vector) atom.
    phi_counts(M) reproduces (L1, L2) exactly in integer arithmetic.
    """
    n, m = graph.n, graph.m
    colors = graph.colors
    color_counts = np.bincount(colors, minlength=m)

    tally = np.zeros((m, m), dtype=np.int64)
    deg = np.zeros((n, m), dtype=np.int64)
    if graph.edges.size:
        cu = colors[graph.edges[:, 0]]
        cv = colors[graph.edges[:, 1]]
        np.add.at(tally, (cu, cv), 1)
        np.add.at(deg, (graph.edges[:, 0], cv), 1)
        np.add.at(deg, (graph.edges[:, 1], cu), 1)
    edge_counts = tally + tally.T
    edge_counts[np.diag_indices(m)] = np.diag(tally)

    atom_counts = Counter(zip(colors.tolist(), map(tuple, deg.tolist())))
    return (ColorCounts(n, color_counts), PairCounts(n, edge_counts),
            NeighborhoodCounts(n, atom_counts))


def _floyd_sample(S, k, rng):
    """k distinct slots from range(S), uniform over k-subsets."""
    chosen = set()
    for t in range(S - k, S):
        r = int(rng.integers(0, t + 1))
        chosen.add(t if r in chosen else r)
    return sorted(chosen)


def sample_conditional(omega_n, pair_n, seed, max_retries=3):
    """Uniform graph with exact color counts omega_n and edge counts pair_n.

    Colors are a seeded shuffle of the fixed multiset; per unordered color
    pair {a, b}, exactly pair_n.edge_counts[a, b] distinct slots are drawn by
    Floyd sampling over the slot index space. max_retries is reserved for
    future sampling modes that can fail; without-replacement sampling cannot.
    """
    if omega_n.n != pair_n.n:
        raise ValueError(f"size mismatch: omega_n.n={omega_n.n}, pair_n.n={pair_n.n}")
    _check_same_alphabet(omega_n, pair_n)
    n, m = omega_n.n, omega_n.alphabet.m
    need = pair_n.edge_counts

    counts = omega_n.counts
    for a in range(m):
        for b in range(a, m):
            slots = (int(counts[a]) * (int(counts[a]) - 1) // 2 if a == b
                     else int(counts[a]) * int(counts[b]))
            if need[a, b] > slots:
                raise InfeasibleError(
                    f"{int(need[a, b])} edges requested between colors {a},{b} "
                    f"but only {slots} simple-edge slots exist")

    rng = np.random.default_rng(seed)
    colors = np.repeat(np.arange(m, dtype=np.int64), counts)
    rng.shuffle(colors)
    classes = [np.flatnonzero(colors == a) for a in range(m)]

    parts = []
    for a in range(m):
        for b in range(a, m):
            k = int(need[a, b])
            if k == 0:
                continue
            A, B = classes[a], classes[b]
            if a == b:
                S = A.size * (A.size - 1) // 2
                slots = np.asarray(_floyd_sample(S, k, rng), dtype=np.int64)
                i, j = _decode_triangle(slots, A.size)
                parts.append(np.column_stack((A[i], A[j])))
            else:
                S = A.size * B.size
                slots = np.asarray(_floyd_sample(S, k, rng), dtype=np.int64)
                u = A[slots // B.size]
                v = B[slots % B.size]
                parts.append(np.column_stack((np.minimum(u, v), np.maximum(u, v))))
    edges = np.concatenate(parts) if parts else np.empty((0, 2), dtype=np.int64)
    return ColoredGraph(n, m, colors, edges)
