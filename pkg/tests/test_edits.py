import numpy as np
import pytest

from blocksync.edits import (BlockEditTrace, Delete, Insert, InvalidOperation, Transpose,
                             apply_op, apply_trace, enumerate_ball, sample_byte_trace,
                             sample_trace)


def test_insert_delete_transpose_text():
    assert apply_op("0000", Insert(3, "11")) == "001100"
    assert apply_op("011010", Delete(2, 3)) == "010"
    # move "11" (positions 3-4) to the front and to the end
    assert apply_op("001100", Transpose(3, 2, 0)) == "110000"
    assert apply_op("110000", Transpose(1, 2, 6)) == "000011"


def test_ops_on_arrays_match_text():
    x = np.array([1, 0, 1, 1, 0], dtype=np.uint8)
    for op in [Insert(6, "01"), Delete(1, 2), Transpose(2, 2, 5)]:
        assert "".join(map(str, apply_op(x, op))) == apply_op("10110", op)


@pytest.mark.parametrize("op", [Insert(7, "1"), Insert(1, ""), Delete(4, 3), Delete(1, 0),
                                Transpose(2, 2, 2), Transpose(4, 3, 0)])
def test_invalid_ops_rejected(op):
    with pytest.raises(InvalidOperation):
        apply_op("10110", op)


def test_trace_roundtrip_and_budget():
    tr = BlockEditTrace([Insert(1, "101"), Delete(2, 2), Transpose(1, 1, 3)], 3, 5)
    assert BlockEditTrace.loads(tr.dumps()) == tr
    tr.validate(6)
    with pytest.raises(InvalidOperation):
        BlockEditTrace(tr.ops, 2, 5).validate(6)
    with pytest.raises(InvalidOperation):
        BlockEditTrace(tr.ops, 3, 4).validate(6)


def test_sample_trace_respects_budgets_and_is_deterministic():
    for seed in range(100):
        tr = sample_trace(seed, 300, 4, 40)
        tr.validate(300)
        assert len(tr.ops) <= 4 and tr.bits_moved <= 40
        assert sample_trace(seed, 300, 4, 40) == tr


def test_byte_trace_keeps_whole_bytes():
    for seed in range(50):
        tr = sample_byte_trace(seed, 64, 3, 64)
        tr.validate(512)
        assert len(apply_trace("0" * 512, tr)) % 8 == 0


def test_ball_small_cases():
    assert enumerate_ball("01", 0, 0) == {"01"}
    ball = enumerate_ball("01", 1, 1)
    # one deletion, one insertion or one transposition
    assert {"0", "1", "001", "101", "011", "010", "10"} <= ball
    assert "" not in ball and "0110" not in ball


def test_ball_is_symmetric():
    x = "10110"
    for y in enumerate_ball(x, 1, 2):
        assert x in enumerate_ball(y, 1, 2)


def test_ball_guard():
    with pytest.raises(ValueError):
        enumerate_ball("0" * 13, 1, 1)
