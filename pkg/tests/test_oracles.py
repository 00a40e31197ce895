import numpy as np
import pytest

from blocksync.bits import as_bits
from blocksync.oracles import (coloring_build, coloring_recover, coloring_sketch, is_proper)


def test_no_budget_one_color():
    table = coloring_build(4, 0, 0)
    assert table.num_colors == 1 and table.max_degree == 0


def test_small_table_is_proper_and_bounded():
    table = coloring_build(4, 1, 1)
    assert is_proper(table)
    assert table.num_colors <= table.max_degree + 1
    # every edge joins strings with intersecting balls
    for u, v in list(table.edges())[:200]:
        assert table.ball(u) & table.ball(v)


def test_exhaustive_recovery_small():
    table = coloring_build(5, 1, 1)
    for x in [v for v in table.color_of if len(v) == 5]:
        c = coloring_sketch(x, table)
        for y in table.ball(x):
            assert "".join(map(str, coloring_recover(y, c, table))) == x


def test_guards():
    with pytest.raises(ValueError):
        coloring_build(11, 1, 1)
    with pytest.raises(ValueError):
        coloring_sketch(as_bits("0" * 9), coloring_build(3, 1, 1))
