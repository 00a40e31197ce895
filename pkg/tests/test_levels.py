import numpy as np
import pytest

from blocksync.bits import random_bits
from blocksync.edits import Transpose, apply_op, apply_trace, sample_trace
from blocksync.levels import (LevelSchedule, LevelsSketch, RecoveryFailure, alice_sketch,
                              bob_recover, make_schedule, pad_bits, sketch_breakdown,
                              sketch_byte_length, strip_pad)


def test_schedule_regression():
    assert make_schedule(16384, 4, 64) == LevelSchedule(16384, 16448, 4, 64, 9, (64, 32), 56)
    assert make_schedule(4096, 1, 0) == LevelSchedule(4096, 4224, 1, 0, 1, (128, 64, 32), 48)
    assert make_schedule(65536, 8, 256).b == (128, 64, 32)
    assert make_schedule(1000, 20, 0).passthrough


def test_pad_roundtrip(rng):
    x = random_bits(100, rng)
    xp = np.concatenate([x, pad_bits(100, 128)])
    assert np.array_equal(strip_pad(xp, 100), x)
    xp[-1] = 1
    with pytest.raises(RecoveryFailure):
        strip_pad(xp, 100)


@pytest.fixture(scope="module")
def doc():
    rng = np.random.default_rng(7)
    x = random_bits(4096, rng)
    return x, alice_sketch(x, 2, 32)


def test_identity(doc):
    x, sk = doc
    assert np.array_equal(bob_recover(x, sk), x)


def test_serialization_roundtrip(doc):
    x, sk = doc
    blob = sk.to_bytes()
    assert len(blob) == sketch_byte_length(4096, 2, 32)
    assert LevelsSketch.from_bytes(blob).to_bytes() == blob
    assert np.array_equal(bob_recover(x, blob), x)
    assert sum(sketch_breakdown(sk).values()) < len(blob)


def test_single_transposition(doc):
    x, sk = doc
    y = apply_op(x, Transpose(100, 700, 3000))
    assert np.array_equal(bob_recover(y, sk), x)


def test_random_traces_with_instrumentation(doc):
    x, sk = doc
    for seed in range(10):
        y = apply_trace(x, sample_trace(seed, len(x), 2, 32))
        stats = []
        assert np.array_equal(bob_recover(y, sk, truth=x, stats=stats), x)
        assert stats and all("unrecovered" in s for s in stats)


def test_passthrough(rng):
    x = random_bits(300, rng)
    sk = alice_sketch(x, 5, 10)
    assert sk.schedule.passthrough
    assert np.array_equal(bob_recover(random_bits(10, rng), sk.to_bytes()), x)


def test_garbage_fails_loudly(doc, rng):
    x, sk = doc
    with pytest.raises(RecoveryFailure):
        bob_recover(random_bits(4096, rng), sk)
