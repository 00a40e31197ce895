"""Approximate maximum non-overlapping matchings of x-blocks into y.

Blocks of x are named by their 1-based start ``i = 1 + p*l``; y windows by
their 1-based start ``j``.  A pair (i, j) is admissible when the target
hash value v[i] equals the hash of y[j, j+p).
"""

from bisect import bisect_left, bisect_right, insort
from dataclasses import dataclass, field

import numpy as np

from .bits import as_bits, window_ints
from .cfhash import HashDescriptor, hash_windows, windows_equal

BRUTE_FORCE_LIMITS = (12, 24)


class InstanceTooLarge(ValueError):
    pass


@dataclass
class Matching:
    pairs: list = field(default_factory=list)
    p: int = 0
    degree_bound: int = 1

    def __len__(self):
        return len(self.pairs)

    def degree(self, y_len):
        """Largest number of matched windows covering one y position."""
        if not self.pairs:
            return 0
        cover = np.zeros(y_len + 1, dtype=np.int64)
        for _, j in self.pairs:
            cover[j - 1] += 1
            cover[j - 1 + self.p] -= 1
        return int(np.cumsum(cover).max())


class WindowIndex:
    """Hash value of every length-p window of y, grouped for lookup."""

    def __init__(self, keys, p):
        self.p = p
        self.keys = keys
        self.order = np.argsort(keys, kind="stable")
        self.sorted = keys[self.order]

    @classmethod
    def from_descriptor(cls, desc, y):
        y = as_bits(y)
        if len(y) < desc.p:
            return cls(np.zeros(0, dtype=object), desc.p)
        vals = hash_windows(desc, y)
        if desc.q <= 64:
            keys = np.array(vals, dtype=np.uint64)
        else:
            keys = np.array(vals, dtype=object)
        return cls(keys, desc.p)

    @classmethod
    def from_prefix(cls, y, width, p):
        """Index windows of length p by their first ``width`` bits (width <= 64)."""
        y = as_bits(y)
        count = len(y) - p + 1
        if count <= 0:
            return cls(np.zeros(0, dtype=np.uint64), p)
        return cls(window_ints(y, width)[:count], p)

    @classmethod
    def identity(cls, y, p):
        """Windows keyed by their own value (p <= 64); handy for tests."""
        return cls.from_prefix(y, p, p)

    def positions(self, value):
        """0-based starts of windows hashing to ``value``, ascending."""
        if len(self.sorted) == 0:
            return np.zeros(0, dtype=np.int64)
        lo = np.searchsorted(self.sorted, value, side="left")
        hi = np.searchsorted(self.sorted, value, side="right")
        return self.order[lo:hi]


def _index(y, h):
    if isinstance(h, WindowIndex):
        return h
    if isinstance(h, HashDescriptor):
        return WindowIndex.from_descriptor(h, y)
    raise TypeError("h must be a HashDescriptor or a WindowIndex")


def _cast(value, index):
    if index.sorted.dtype == np.uint64:
        return np.uint64(value)
    return value


def _greedy_round(blocks, v, index):
    """One greedy non-overlapping round; returns list of (i, j) 1-based."""
    p = index.p
    starts = []  # sorted 0-based starts of used windows, pairwise disjoint
    pairs = []
    for i in blocks:
        cand = index.positions(_cast(v[i], index))
        if len(cand) == 0:
            continue
        k = 0
        while k < len(cand):
            j = int(cand[k])
            r = bisect_right(starts, j + p - 1) - 1
            if r >= 0 and starts[r] + p > j:
                # skip past the blocking interval
                k = int(np.searchsorted(cand, starts[r] + p, side="left"))
                continue
            insort(starts, j)
            pairs.append((i, j + 1))
            break
    return pairs


def greedy_one_third(S, v, y, h):
    """Greedy maximal non-overlapping matching (a 1/3-approximation).

    Blocks are taken in increasing i; each gets the smallest admissible j
    whose window avoids every window already used.
    """
    index = _index(y, h)
    pairs = _greedy_round(sorted(S), v, index)
    return Matching(pairs, index.p, 1)


def degree3_two_thirds(S, v, y, h):
    """Three greedy rounds, each over the still-unmatched blocks and all of y."""
    index = _index(y, h)
    remaining = sorted(S)
    pairs = []
    for _ in range(3):
        got = _greedy_round(remaining, v, index)
        pairs.extend(got)
        done = {i for i, _ in got}
        remaining = [i for i in remaining if i not in done]
        if not remaining or not got:
            break
    pairs.sort()
    return Matching(pairs, index.p, 3)


def first_fit_all(blocks, v, index):
    """First-fit matching where windows may not reuse any matched y bit.

    Each block in order takes the smallest start whose window is disjoint
    from all previously taken windows.  Returns {i: j} (1-based).
    """
    return dict(_greedy_round(blocks, v, index))


def candidate_pairs(S, v, index):
    return [(i, int(j) + 1) for i in sorted(S) for j in index.positions(_cast(v[i], index))]


def brute_force_opt(S, v, y, h):
    """Exact maximum non-overlapping matching by exhaustive search (tiny instances)."""
    index = _index(y, h)
    max_s, max_pairs = BRUTE_FORCE_LIMITS
    S = sorted(S)
    if len(S) > max_s:
        raise InstanceTooLarge(f"|S| = {len(S)} exceeds {max_s}")
    cands = {i: [int(j) + 1 for j in index.positions(_cast(v[i], index))] for i in S}
    total = sum(len(c) for c in cands.values())
    if total > max_pairs:
        raise InstanceTooLarge(f"{total} candidate pairs exceed {max_pairs}")
    p = index.p
    best = []
    blocks = [i for i in S if cands[i]]

    def search(pos, chosen, used):
        nonlocal best
        if len(chosen) + (len(blocks) - pos) <= len(best):
            return
        if pos == len(blocks):
            best = list(chosen)
            return
        i = blocks[pos]
        for j in cands[i]:
            if all(j + p <= u or u + p <= j for u in used):
                chosen.append((i, j))
                used.append(j)
                search(pos + 1, chosen, used)
                used.pop()
                chosen.pop()
        search(pos + 1, chosen, used)

    search(0, [], [])
    return Matching(sorted(best), p, 1)


def is_maximal(matching, S, v, y, h):
    """No unmatched block has an admissible window disjoint from all used ones."""
    index = _index(y, h)
    p = index.p
    used = sorted(j for _, j in matching.pairs)
    matched = {i for i, _ in matching.pairs}
    for i in S:
        if i in matched:
            continue
        for j0 in index.positions(_cast(v[i], index)):
            j = int(j0) + 1
            r = bisect_right(used, j + p - 1) - 1
            lo = bisect_left(used, j - p + 1)
            if lo > r:
                return False
    return True


def count_wrong_matches(w, x, y):
    """Pairs whose x block and y window differ."""
    if not w.pairs:
        return 0
    x, y = as_bits(x), as_bits(y)
    p = w.p
    i = np.array([a for a, _ in w.pairs], dtype=np.int64) - 1
    j = np.array([b for _, b in w.pairs], dtype=np.int64) - 1
    both = np.concatenate([x, y])
    return int((~windows_equal(both, i, j + len(x), p)).sum())
