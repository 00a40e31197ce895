"""Smallest possible sketch at toy size: color the confusability graph."""

from blocksync import levels
from blocksync.bits import as_bits, to_str
from blocksync.edits import enumerate_ball
from blocksync.oracles import coloring_build, coloring_recover, coloring_sketch

import numpy as np


def main():
    n, k, t = 8, 1, 2
    table = coloring_build(n, k, t)
    print(f"n={n}, k={k}, t={t}: {table.num_colors} colors, {table.sketch_bits}-bit sketch, "
          f"max degree {table.max_degree}")
    x = "10110010"
    c = coloring_sketch(as_bits(x), table)
    y = sorted(enumerate_ball(x, k, t))[17]
    got = to_str(coloring_recover(as_bits(y), c, table))
    print(f"x={x} color={c} y={y} recovered={got}")
    main_bits = levels.alice_sketch(np.zeros(n, dtype=np.uint8), k, t).bit_size
    print(f"general protocol at the same size sends {main_bits} bits")


if __name__ == "__main__":
    main()
