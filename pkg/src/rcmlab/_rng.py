"""Reproducible randomness for the whole laboratory.

Two mechanisms, both keyed by (master seed, replicate index, stream tag):

* Philox counter-based generators, split with numpy SeedSequence spawn
  keys, for bulk sampling (Poisson counts, uniform coordinates).
* A stateless splitmix-style 64-bit hash chain for per-pair edge marks,
  so that an edge's Bernoulli variable depends only on the unordered
  vertex-key pair and never on enumeration order.  This is what makes
  eager graph construction and lazy cluster growth agree exactly.

The hash chain here must stay bit-compatible with the numba version in
``_kernels``; both implement the splitmix64 finalizer.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1

# Substream tags under one (seed, replicate).
STREAM_POINTS = 0
STREAM_PALM = 1
STREAM_EDGES = 2
STREAM_WINDOW = 3

# Operation tags mixed into the master seed by estimators, so that
# different experiments never consume identical streams and a CLI run
# reproduces the corresponding library call bit for bit.
OP_THETA = 101
OP_GIANT = 102
OP_MECKE_FIRST = 103
OP_MECKE_SECOND = 104
OP_LAMBDA_C = 105
OP_FKG = 106
OP_EVENT_U = 107
OP_EVENT_F = 108
OP_BLOCK_FIELD = 109
OP_SAMPLE = 110

# Vertex keys at and above this value denote Palm points (deterministic
# extra vertices); base Poisson points use their array index.
PALM_KEY_BASE = 1 << 48


def mix64(z: int) -> int:
    """splitmix64 finalizer on a 64-bit word."""
    z = (z + 0x9E3779B97F4A7C15) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def chain64(*words: int) -> int:
    """Fold any number of integer words into one well-mixed 64-bit key."""
    h = 0x243F6A8885A308D3  # pi fractional bits, arbitrary nonzero start
    for w in words:
        h = mix64(h ^ (int(w) & MASK64))
    return h


def u01_from_hash(h: int) -> float:
    """Map a 64-bit hash to a double in [0, 1) using its top 53 bits."""
    return (h >> 11) * 2.0 ** -53


def pair_u01(edge_key: int, key_a: int, key_b: int) -> float:
    """Uniform mark of the unordered vertex pair {a, b} under edge_key."""
    if key_a > key_b:
        key_a, key_b = key_b, key_a
    h = mix64(edge_key ^ key_a)
    h = mix64(h ^ key_b)
    return u01_from_hash(h)


def pair_u01_coords(edge_key: int, x1: float, y1: float, x2: float, y2: float) -> float:
    """Uniform mark of a point pair keyed by exact coordinate bits.

    Used where edge marks must be invariant under relabeling or under
    changes to the configuration elsewhere (block events read only their
    own disk).  The two endpoints are put in lexicographic order first.
    """
    if (x1, y1) > (x2, y2):
        x1, y1, x2, y2 = x2, y2, x1, y1
    bits = np.array([x1, y1, x2, y2], dtype=np.float64).view(np.uint64)
    h = edge_key
    for b in bits:
        h = mix64(h ^ int(b))
    return u01_from_hash(h)


def edge_key(seed: int, replicate: int) -> int:
    """Key of the edge-mark stream for one (seed, replicate)."""
    return chain64(seed, STREAM_EDGES, replicate)


def check_seed(seed: int) -> int:
    seed = int(seed)
    if not 0 <= seed <= MASK64:
        raise ValueError(f"seed must be a 64-bit nonnegative integer, got {seed}")
    return seed


def substream(seed: int, *spawn: int) -> np.random.Generator:
    """Philox generator for the substream (seed; spawn key tuple)."""
    ss = np.random.SeedSequence(check_seed(seed), spawn_key=tuple(int(k) for k in spawn))
    return np.random.Generator(np.random.Philox(ss))


def points_stream(seed: int, replicate: int) -> np.random.Generator:
    return substream(seed, STREAM_POINTS, replicate)


def palm_stream(seed: int, replicate: int) -> np.random.Generator:
    return substream(seed, STREAM_PALM, replicate)


def window_stream(seed: int, replicate: int, annulus: int) -> np.random.Generator:
    return substream(seed, STREAM_WINDOW, replicate, annulus)
