import numpy as np
import pytest

from blocksync.bdistinct import (BDistSketch, ChainAmbiguity, _chain,
                                 is_b_distinct, make_params, recover_rand, sketch_byte_length,
                                 sketch_rand, stage1_blocks, stage1_recover, stage1_set,
                                 stage1_sketch)
from blocksync.bits import random_bits
from blocksync.edits import Transpose, apply_op, apply_trace, sample_trace
from blocksync.levels import RecoveryFailure


def de_bruijn(order):
    """Binary de Bruijn sequence: every order-bit window appears once."""
    a = [0] * (2 * order)
    seq = []

    def db(t, p):
        if t > order:
            if order % p == 0:
                seq.extend(a[1:p + 1])
        else:
            a[t] = a[t - p]
            db(t + 1, p)
            for j in range(a[t - p] + 1, 2):
                a[t] = j
                db(t + 1, t)

    db(1, 1)
    return np.array(seq, dtype=np.uint8)


def test_b_distinct_checker():
    s = de_bruijn(8)
    assert is_b_distinct(s, 8)
    assert not is_b_distinct(np.concatenate([s, s[:8]]), 8)
    assert not is_b_distinct(np.zeros(100, dtype=np.uint8), 5)
    x = np.random.default_rng(0).integers(0, 2, 3000).astype(np.uint8)
    for B in (12, 70):
        windows = {x[i:i + B].tobytes() for i in range(len(x) - B + 1)}
        assert is_b_distinct(x, B) == (len(windows) == len(x) - B + 1)
    assert not is_b_distinct(np.tile(x[:200], 3), 100)


def test_params_regression():
    p = make_params(65536, 4, 128)
    assert (p.B, p.T1, p.T2, p.D) == (48, 6, 9216, 72)
    assert p.b == (16384, 8192, 4096, 2048, 1024, 512, 256, 128, 64)
    assert (p.n_padded, p.b_L) == (81920, 32)
    assert make_params(16384, 4, 128).L == 8
    assert make_params(500, 4, 10).passthrough


@pytest.fixture(scope="module")
def doc():
    rng = np.random.default_rng(11)
    n = 1 << 14
    p = make_params(n, 4, 128)
    while True:
        x = random_bits(n, rng)
        if is_b_distinct(x, p.B):
            return x, p, sketch_rand(x, 4, 128)


def test_stage1_chain_is_unique(doc):
    x, p, _ = doc
    V = stage1_set(x, p)
    starts, prefixes = _chain(V, p, p.n)
    bounds = stage1_blocks(x, p)
    assert starts == bounds[:-1].tolist()
    assert len(prefixes) == len(V) + 1


def test_chain_ambiguity_detected(doc):
    x, p, _ = doc
    V = stage1_set(x, p)
    B = p.B
    # a second record with an existing prefix
    dup = (5 << (2 * B)) | (V[0] & ((1 << (2 * B)) - 1))
    with pytest.raises(ChainAmbiguity):
        _chain(V + [dup ^ 1], p, p.n)


def test_stage1_identity_fills_everything(doc):
    x, p, sk = doc
    xt, filled = stage1_recover(x, sk.set_sketch, p)
    assert filled.all() and np.array_equal(xt, x)


def test_stage1_rejects_repetitive(doc):
    _, p, _ = doc
    with pytest.raises(ValueError):
        stage1_sketch(np.zeros(p.n, dtype=np.uint8), p)


def test_identity_and_serialization(doc):
    x, p, sk = doc
    blob = sk.to_bytes()
    assert len(blob) == sketch_byte_length(p.n, 4, 128)
    assert BDistSketch.from_bytes(blob).to_bytes() == blob
    assert np.array_equal(recover_rand(x, blob), x)


def test_transposition_and_traces(doc):
    x, p, sk = doc
    y = apply_op(x, Transpose(1, 3000, 9000))
    assert np.array_equal(recover_rand(y, sk), x)
    for seed in range(5):
        y = apply_trace(x, sample_trace(seed, len(x), 4, 128))
        stats = {}
        assert np.array_equal(recover_rand(y, sk, truth=x, stats=stats), x)
        assert stats["stage1"]["set_difference"] <= p.D


def test_garbage_fails_loudly(doc):
    x, p, sk = doc
    with pytest.raises(RecoveryFailure):
        recover_rand(random_bits(len(x), np.random.default_rng(1)), sk)


def test_passthrough_roundtrip():
    x = random_bits(400, np.random.default_rng(2))
    sk = sketch_rand(x, 4, 10)
    assert sk.params.passthrough
    assert np.array_equal(recover_rand(x[:10], sk.to_bytes()), x)
