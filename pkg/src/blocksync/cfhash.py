"""Collision-free hash functions certified for one string.

A descriptor names a small-bias generator seed.  The generator output is
cut into a p x q bit matrix G (bit ``j*q + r`` is G[j, r]) and the hash of a
p-bit block u is the GF(2) product ``u @ G``.  Two different blocks collide
with probability at most 2^-q + eps over the seed, so with q = 4 log n a
seed certified for x is found on the first few tries.
"""

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .bits import as_bits, window_ints
from .prg import SmallBiasGenerator, candidate_seed, seed_to_hex

HASH_CONSTANT = 4  # q = HASH_CONSTANT * ceil(log2 n)
MAX_ATTEMPTS = 64


class HashExhausted(RuntimeError):
    """No seed in the search budget was collision free."""


def log2_ceil(n):
    return max(1, math.ceil(math.log2(max(n, 2))))


def default_q(n):
    return HASH_CONSTANT * log2_ceil(n)


@dataclass(frozen=True)
class HashDescriptor:
    seed: int
    p: int
    q: int
    n: int

    @property
    def generator(self):
        return _generator(self.p, self.q, self.n)

    @property
    def seed_bits(self):
        return self.generator.seed_length

    def dumps(self):
        return (f"CFH v1 n={self.n} p={self.p} q={self.q} "
                f"seed={seed_to_hex(self.seed, self.seed_bits)}")

    @classmethod
    def loads(cls, text):
        parts = text.split()
        if parts[:2] != ["CFH", "v1"]:
            raise ValueError(f"bad descriptor: {text!r}")
        kv = dict(p.split("=", 1) for p in parts[2:])
        return cls(int(kv["seed"], 16), int(kv["p"]), int(kv["q"]), int(kv["n"]))


@lru_cache(maxsize=64)
def _generator(p, q, n):
    return SmallBiasGenerator(p * q, Fraction(1, max(n, 2) ** 3))


@lru_cache(maxsize=256)
def _matrix(seed, p, q, n):
    """Row j of G packed as an int (bit q-1-r holds G[j, r]); shape (p, words)."""
    bits = _generator(p, q, n).stream(seed).reshape(p, q)
    words = (q + 63) // 64
    pad = words * 64 - q
    full = np.concatenate([np.zeros((p, pad), dtype=np.uint8), bits], axis=1)
    packed = np.zeros((p, words), dtype=np.uint64)
    for w in range(words):
        chunk = full[:, w * 64:(w + 1) * 64].astype(np.uint64)
        weights = np.uint64(1) << np.arange(63, -1, -1, dtype=np.uint64)
        packed[:, words - 1 - w] = (chunk * weights).sum(axis=1, dtype=np.uint64)
    packed.flags.writeable = False
    return packed


def _to_ints(packed):
    if packed.shape[1] == 1:
        return [int(v) for v in packed[:, 0]]
    out = []
    for row in packed:
        v = 0
        for w, word in enumerate(row):
            v |= int(word) << (64 * w)
        out.append(v)
    return out


def make_descriptor(n, p, seed=0, q=None):
    return HashDescriptor(seed, p, default_q(n) if q is None else q, n)


def eval_hash(desc, u):
    """q-bit hash of a p-bit block, returned as an int (first output bit is the MSB)."""
    u = as_bits(u)
    if len(u) != desc.p:
        raise ValueError(f"block has {len(u)} bits, descriptor expects {desc.p}")
    return hash_windows(desc, u)[0]


def eval_hash_bits(desc, u):
    v = eval_hash(desc, u)
    return np.array([(v >> (desc.q - 1 - r)) & 1 for r in range(desc.q)], dtype=np.uint8)


@lru_cache(maxsize=256)
def _byte_tables(seed, p, q, n):
    """For each group of 8 rows of G, the XOR of every subset (256 entries)."""
    G = _matrix(seed, p, q, n)
    groups = -(-p // 8)
    rows = np.zeros((groups * 8, G.shape[1]), dtype=np.uint64)
    rows[:p] = G
    v = np.arange(256)
    tables = np.zeros((groups, 256, G.shape[1]), dtype=np.uint64)
    for c in range(groups):
        for t in range(8):
            sel = ((v >> (7 - t)) & 1).astype(bool)
            tables[c, sel] ^= rows[8 * c + t]
    tables.flags.writeable = False
    return tables


def _window_packed(desc, x, starts=None):
    p = desc.p
    tables = _byte_tables(desc.seed, p, desc.q, desc.n)
    x = as_bits(x)
    words = tables.shape[2]
    if starts is None:
        count = len(x) - p + 1
        starts = np.arange(max(count, 0), dtype=np.int64)
    else:
        starts = np.asarray(starts, dtype=np.int64)
        if len(starts) and (starts.min() < 0 or starts.max() + p > len(x)):
            raise ValueError("window start outside the string")
    if len(starts) == 0:
        return np.zeros((0, words), dtype=np.uint64)
    # byte value of x[i, i+8), zero padded past the end
    padded = np.concatenate([x, np.zeros(8, dtype=np.uint8)])
    byte = window_ints(padded, 8).astype(np.intp)
    acc = np.zeros((len(starts), words), dtype=np.uint64)
    if words == 1:
        acc1 = acc[:, 0]
        for c in range(tables.shape[0]):
            acc1 ^= tables[c, :, 0][byte[starts + 8 * c]]
        # rows past p are zero in the tables, so the padding bits do not matter
        return acc
    for c in range(tables.shape[0]):
        acc ^= tables[c][byte[starts + 8 * c]]
    return acc


def hash_windows(desc, x, starts=None):
    """Hash values (ints) of windows x[s, s+p) for 0-based ``starts`` (all if None)."""
    return _to_ints(_window_packed(desc, x, starts))


def hash_windows_array(desc, x, starts=None):
    """Like :func:`hash_windows` but as a uint64 array (requires q <= 64)."""
    if desc.q > 64:
        raise ValueError("array form needs q <= 64")
    return _window_packed(desc, x, starts)[:, 0].copy()


def hash_blocks(desc, x):
    """Hash of each aligned p-bit block of x (len(x) a multiple of p)."""
    x = as_bits(x)
    if len(x) % desc.p:
        raise ValueError("string length is not a multiple of the block length")
    return hash_windows(desc, x, np.arange(0, len(x), desc.p))


def windows_equal(x, i, j, p):
    """Elementwise test x[i, i+p) == x[j, j+p) for 0-based index arrays."""
    x = as_bits(x)
    i = np.asarray(i, dtype=np.int64)
    j = np.asarray(j, dtype=np.int64)
    eq = np.ones(len(i), dtype=bool)
    if len(i) == 0 or p == 0:
        return eq
    width = min(64, p)
    w = window_ints(x, width)
    offsets = list(range(0, p - width + 1, width))
    if offsets[-1] != p - width:
        offsets.append(p - width)
    for o in offsets:
        eq &= w[i + o] == w[j + o]
    return eq


def verify_collision_free(desc, x):
    """True iff equal hashes of windows of x imply equal windows."""
    x = as_bits(x)
    if desc.p > len(x):
        raise ValueError("block length exceeds the string")
    packed = _window_packed(desc, x)
    if packed.shape[1] == 1:
        keys = packed[:, 0]
        order = np.argsort(keys, kind="stable")
        sk = keys[order]
        same = sk[1:] == sk[:-1]
    else:
        order = np.lexsort(packed.T[::-1])
        sk = packed[order]
        same = np.all(sk[1:] == sk[:-1], axis=1)
    if not same.any():
        return True
    # compare each window against the first window of its bucket
    group_start = np.concatenate(([True], ~same))
    first = np.maximum.accumulate(np.where(group_start, np.arange(len(order)), 0))
    idx = np.nonzero(~group_start)[0]
    return bool(windows_equal(x, order[first[idx]], order[idx], desc.p).all())


def build_collision_free(x, p, q=None, max_attempts=MAX_ATTEMPTS, return_attempts=False):
    """First seed (in the generator's enumeration) whose hash is collision free for x."""
    x = as_bits(x)
    n = len(x)
    if p > n or p < 1:
        raise ValueError(f"block length {p} must lie in [1, {n}]")
    q = default_q(n) if q is None else q
    d = _generator(p, q, n).seed_length
    # candidate 0 is the all-zero seed, whose stream is degenerate
    for attempt in range(max_attempts):
        desc = HashDescriptor(candidate_seed(attempt + 1, d), p, q, n)
        if verify_collision_free(desc, x):
            return (desc, attempt + 1) if return_attempts else desc
    raise HashExhausted(
        f"no collision-free seed among {max_attempts} candidates (n={n}, p={p}, q={q})")
