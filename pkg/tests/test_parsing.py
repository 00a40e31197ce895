import numpy as np
import pytest

from blocksync.parsing import (PartitionBoundaries, RepetitiveInput, alphabet_reduce,
                               block_window, landmarks, max_levels, partition)


def nonrep(rng, n, alphabet=1 << 20):
    a = rng.integers(0, alphabet, size=n)
    for i in range(1, n):
        while a[i] == a[i - 1]:
            a[i] = rng.integers(0, alphabet)
    return a


def test_alphabet_reduce_keeps_neighbors_distinct(rng):
    a = nonrep(rng, 2000)
    r = alphabet_reduce(a)
    assert np.all(r[1:] != r[:-1])
    assert r.max() < 2 * 20 + 2
    rr = alphabet_reduce(r)
    assert np.all(rr[1:] != rr[:-1]) and rr.max() < 12


def test_alphabet_reduce_example():
    # 5 = 101, 4 = 100 differ first at bit 0, where 4 has a 0 -> 2*0 + 0
    assert alphabet_reduce([5, 4])[1] == 0
    # 4 = 100, 6 = 110 differ first at bit 1, where 6 has a 1 -> 2*1 + 1
    assert alphabet_reduce([4, 6])[1] == 3


def test_repetitive_input_rejected():
    with pytest.raises(RepetitiveInput):
        alphabet_reduce([1, 2, 2])
    with pytest.raises(RepetitiveInput):
        partition(4, [3, 3, 1])


def test_landmarks_are_spaced(rng):
    a = alphabet_reduce(alphabet_reduce(nonrep(rng, 5000)))
    marks = landmarks(a)
    gaps = np.diff(marks)
    assert gaps.min() >= 2
    assert gaps.max() <= 2 * 12 + 2


def test_partition_shape(rng):
    for T in (4, 16, 64):
        x = nonrep(rng, 3000)
        P = partition(T, x)
        idx = P.indices
        assert idx[0] == 1 and idx[-1] == 3001
        assert np.all(np.diff(idx) > 0)
        assert P.sizes.min() >= T
        assert P.levels <= max_levels(T)


def test_short_input_single_block():
    P = partition(64, [1, 2, 3])
    assert list(P.indices) == [1, 4]


def test_partition_is_local(rng):
    x = nonrep(rng, 20000)
    base = partition(32, x).indices
    for _ in range(20):
        pos = int(rng.integers(1, len(x) - 1))
        y = x.copy()
        y[pos] = (int(x[pos - 1]) | int(x[pos + 1])) + 1
        changed = set(base.tolist()) ^ set(partition(32, y).indices.tolist())
        if changed:
            block = np.searchsorted(base, pos + 1, side="right")
            far = [c for c in changed
                   if abs(np.searchsorted(base, c, side="right") - block) > block_window(32)]
            assert not far


def test_non_strict_tolerates_repeats():
    P = partition(4, [1, 1, 2, 3, 3, 4, 5, 6, 7, 8], strict=False)
    assert P.indices[0] == 1 and P.indices[-1] == 11


def test_varint_roundtrip(rng):
    P = partition(8, nonrep(rng, 1000))
    Q = PartitionBoundaries.from_varint(P.to_varint(), 8)
    assert np.array_equal(P.indices, Q.indices)
