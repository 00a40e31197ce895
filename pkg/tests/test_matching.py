import math

import numpy as np
import pytest

from blocksync.bits import bits_to_int, random_bits
from blocksync.matching import (InstanceTooLarge, WindowIndex, brute_force_opt,
                                count_wrong_matches, degree3_two_thirds, first_fit_all,
                                greedy_one_third, is_maximal)


def instance(rng, p=4, blocks=8, ylen=40):
    x = random_bits(p * blocks, rng)
    y = random_bits(ylen, rng)
    # plant a few blocks of x in y so matches exist
    for _ in range(3):
        b = int(rng.integers(0, blocks))
        j = int(rng.integers(0, ylen - p + 1))
        y[j:j + p] = x[b * p:(b + 1) * p]
    S = [1 + b * p for b in range(blocks)]
    v = {i: bits_to_int(x[i - 1:i - 1 + p]) for i in S}
    return x, y, S, v, WindowIndex.identity(y, p)


def test_positions_are_sorted_and_complete():
    y = np.array([1, 0, 1, 0, 1, 0], dtype=np.uint8)
    idx = WindowIndex.identity(y, 2)
    assert list(idx.positions(np.uint64(0b10))) == [0, 2, 4]
    assert list(idx.positions(np.uint64(0b01))) == [1, 3]
    assert len(idx.positions(np.uint64(0b11))) == 0


def test_greedy_takes_smallest_free_window():
    y = np.array([1, 1, 1, 1, 1], dtype=np.uint8)
    idx = WindowIndex.identity(y, 2)
    w = greedy_one_third([1, 3, 5], {1: 3, 3: 3, 5: 3}, y, idx)
    assert w.pairs == [(1, 1), (3, 3)]


def test_first_fit_never_reuses_bits(rng):
    for _ in range(50):
        x, y, S, v, idx = instance(rng)
        got = first_fit_all(S, v, idx)
        starts = sorted(got.values())
        assert all(b - a >= 4 for a, b in zip(starts, starts[1:]))


def test_approximation_ratios(rng):
    for _ in range(200):
        x, y, S, v, idx = instance(rng, p=3, blocks=int(rng.integers(1, 9)), ylen=24)
        try:
            opt = len(brute_force_opt(S, v, y, idx))
        except InstanceTooLarge:
            continue
        g = greedy_one_third(S, v, y, idx)
        d3 = degree3_two_thirds(S, v, y, idx)
        assert len(g) >= math.ceil(opt / 3)
        assert is_maximal(g, S, v, y, idx)
        assert len(d3) >= math.ceil(19 * opt / 27)
        assert d3.degree(len(y)) <= 3
        assert count_wrong_matches(g, x, y) == 0


def test_brute_force_guard(rng):
    x, y, S, v, idx = instance(rng, p=2, blocks=13, ylen=60)
    with pytest.raises(InstanceTooLarge):
        brute_force_opt(S, v, y, idx)
