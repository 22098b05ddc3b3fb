"""Deterministic child-seed derivation.

Samplers and the Monte Carlo harness never share RNG streams; every unit of
work (graph, replica block) gets its own seed derived from the base seed and
its integer coordinates, so replicas can run in any order or in parallel and
still reproduce bit-identical results.
"""

_MASK = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15


def _mix(z):
    # splitmix64 finalizer
    z &= _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return (z ^ (z >> 31)) & _MASK


def derive_child_seed(base, *parts):
    """Fold integer coordinates into a 64-bit child seed, splitmix-style.

    derive_child_seed(s, a, b) != derive_child_seed(s, b, a) in general;
    order of coordinates is significant and part of the contract.
    """
    s = _mix(int(base) & _MASK)
    for p in parts:
        s = (s + _GAMMA) & _MASK
        s = _mix(s ^ (int(p) & _MASK))
    return s
