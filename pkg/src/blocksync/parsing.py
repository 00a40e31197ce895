"""Locally consistent partition of a symbol string.

Alphabet reduction, landmarks and the partial parsing tree with 'finish'
nodes.  Nodes are tracked by the 0-based start of their leaf interval; the
label of a node is the input symbol at that start.  Every level is a handful
of vectorised numpy passes, so partitions of 10^5 symbols are cheap.
"""

import math
from dataclasses import dataclass

import numpy as np

C0, C1 = 0, 1


class RepetitiveInput(ValueError):
    """Two adjacent symbols are equal where distinct ones are required."""


def _as_symbols(A):
    A = np.asarray(A)
    if A.dtype.kind not in "iu":
        A = A.astype(np.int64)
    if A.size and A.min() < 0:
        raise ValueError("symbols must be non-negative")
    return A.astype(np.uint64)


def _reduce(A, first):
    """One alphabet reduction; ``first`` marks positions that start a run."""
    prev = np.empty_like(A)
    prev[1:] = A[:-1]
    virtual = np.where(A == C0, np.uint64(C1), np.uint64(C0))
    prev = np.where(first, virtual, prev)
    diff = A ^ prev
    low = diff & (~diff + np.uint64(1))
    l = np.bitwise_count(low - np.uint64(1)).astype(np.uint64)
    bit = (A >> l) & np.uint64(1)
    return np.uint64(2) * l + bit


def alphabet_reduce(A):
    """Replace A[i] by 2*l + bit(l, A[i]), l the lowest bit where A[i], A[i-1] differ."""
    A = _as_symbols(A)
    if len(A) > 1 and np.any(A[1:] == A[:-1]):
        raise RepetitiveInput("alphabet reduction needs adjacent symbols to differ")
    first = np.zeros(len(A), dtype=bool)
    if len(A):
        first[0] = True
    return _reduce(A, first)


def _landmark_mask(A, run_id, offset, run_len):
    """Landmark flags for symbols grouped into runs (0-based offsets)."""
    n = len(A)
    mask = np.zeros(n, dtype=bool)
    if n < 3:
        return mask
    inner = (offset >= 2) & (offset <= run_len[run_id] - 2)
    left = np.zeros(n, dtype=bool)
    right = np.zeros(n, dtype=bool)
    left[1:] = A[1:] > A[:-1]
    right[:-1] = A[:-1] > A[1:]
    left_lt = np.zeros(n, dtype=bool)
    right_lt = np.zeros(n, dtype=bool)
    left_lt[1:] = A[1:] < A[:-1]
    right_lt[:-1] = A[:-1] < A[1:]
    maxima = inner & left & right
    minima = inner & left_lt & right_lt
    near = np.zeros(n, dtype=bool)
    near[1:] |= maxima[:-1]
    near[:-1] |= maxima[1:]
    return maxima | (minima & ~near)


def landmarks(A):
    """1-based landmark positions of a non-repetitive string."""
    A = _as_symbols(A)
    if len(A) > 1 and np.any(A[1:] == A[:-1]):
        raise RepetitiveInput("landmarks need adjacent symbols to differ")
    n = len(A)
    mask = _landmark_mask(A, np.zeros(n, dtype=np.int64), np.arange(n),
                          np.array([n]))
    return (np.nonzero(mask)[0] + 1).tolist()


@dataclass(frozen=True)
class PartitionBoundaries:
    indices: np.ndarray  # 1-based, strictly increasing, first 1 and last n+1
    T: int
    levels: int = 0

    @property
    def sizes(self):
        return np.diff(self.indices)

    def __len__(self):
        return len(self.indices) - 1

    def to_varint(self):
        out = bytearray()
        prev = 0
        for v in self.indices.tolist():
            d = v - prev
            prev = v
            while True:
                b = d & 0x7F
                d >>= 7
                out.append(b | (0x80 if d else 0))
                if not d:
                    break
        return bytes(out)

    @classmethod
    def from_varint(cls, data, T):
        vals, cur, shift, prev = [], 0, 0, 0
        for b in data:
            cur |= (b & 0x7F) << shift
            shift += 7
            if not b & 0x80:
                prev += cur
                vals.append(prev)
                cur, shift = 0, 0
        return cls(np.array(vals, dtype=np.int64), T)


def max_levels(T):
    return max(1, math.ceil(math.log2(max(T, 2))))


def partition(T, x, return_levels=False, strict=True):
    """Partition x into blocks by the partial parsing tree with threshold T.

    With ``strict=False`` equal adjacent symbols are tolerated: they simply
    start a new run, which keeps the procedure local on corrupted inputs.
    """
    x = _as_symbols(x)
    n = len(x)
    if T < 1:
        raise ValueError("threshold T must be >= 1")
    if strict and n > 1 and np.any(x[1:] == x[:-1]):
        raise RepetitiveInput("partition input must have adjacent symbols distinct")
    if n == 0:
        return PartitionBoundaries(np.array([1], dtype=np.int64), T, 0)
    starts = np.arange(n, dtype=np.int64)
    levels = 0
    top = max_levels(T)
    while True:
        size = np.diff(np.append(starts, n))
        finish = size >= T
        nonfin = ~finish
        adjacent = np.any(nonfin[1:] & nonfin[:-1]) if len(starts) > 1 else False
        if not adjacent or levels >= top:
            break
        levels += 1
        labels = x[starts]
        m = len(starts)
        # runs of consecutive non-finish nodes; equal adjacent labels also cut
        first = nonfin.copy()
        first[1:] &= finish[:-1] | (labels[1:] == labels[:-1])
        run_id = np.cumsum(first) - 1
        run_start = np.nonzero(first)[0]
        run_len = np.diff(np.append(run_start, m))
        # restrict counts to non-finish members
        idx = np.nonzero(nonfin)[0]
        rid = run_id[idx]
        offset = idx - run_start[rid]
        sub = labels[idx]
        sub_first = first[idx]
        red = _reduce(_reduce(sub, sub_first), sub_first)
        lens = np.zeros(len(run_start), dtype=np.int64)
        np.add.at(lens, rid, 1)
        marks = _landmark_mask(red, rid, offset, lens)
        # the landmark test reads neighbours only inside one run
        new_start = finish.copy()
        new_start[idx[sub_first]] = True
        new_start[idx[marks]] = True
        starts = starts[new_start]
    size = np.diff(np.append(starts, n))
    finish = size >= T
    if not finish.any():
        bounds = np.array([1, n + 1], dtype=np.int64)
    else:
        keep = finish.copy()
        first_fin = int(np.argmax(finish))
        keep[first_fin] = True
        cut = starts[keep] + 1
        cut[0] = 1
        bounds = np.append(cut, n + 1)
    result = PartitionBoundaries(bounds, T, levels)
    return (result, levels) if return_levels else result


def block_window(T):
    """Locality radius, in blocks on each side of an edit."""
    return 100 * max_levels(T)
