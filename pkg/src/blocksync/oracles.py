"""Optimal-size document exchange at tiny scale by graph coloring.

Every bit string shorter than n_max + t is a vertex.  Two vertices are
adjacent when their (k, t) balls intersect, i.e. some string could have
come from either of them.  Alice sends the color of her string; Bob scans
his own ball for the one string with that color.  Greedy coloring in
lexicographic order keeps the table deterministic.
"""

import math
from dataclasses import dataclass, field
from itertools import product

from .bits import as_bits, to_str
from .edits import enumerate_ball

LIMITS = (10, 1, 2)  # n_max, k, t


class ColoringAmbiguity(RuntimeError):
    """More than one candidate carries the color: the coloring is broken."""


def _vertices(limit):
    out = []
    for length in range(limit):
        out.extend("".join(p) for p in product("01", repeat=length))
    return out


@dataclass
class ColoringTable:
    n_max: int
    k: int
    t: int
    color_of: dict = field(default_factory=dict)
    balls: dict = field(default_factory=dict, repr=False)
    neighbors: dict = field(default_factory=dict, repr=False)

    @property
    def num_colors(self):
        return max(self.color_of.values(), default=-1) + 1

    @property
    def sketch_bits(self):
        return max(1, math.ceil(math.log2(max(self.num_colors, 1))))

    @property
    def max_degree(self):
        return max((len(v) for v in self.neighbors.values()), default=0)

    def edges(self):
        for v, nb in self.neighbors.items():
            for u in nb:
                if v < u:
                    yield v, u

    def ball(self, s):
        if s not in self.balls:
            self.balls[s] = enumerate_ball(s, self.k, self.t)
        return self.balls[s]


def coloring_build(n_max, k, t):
    """Greedy coloring of the ball-intersection graph on strings shorter than n_max + t."""
    lim_n, lim_k, lim_t = LIMITS
    if n_max > lim_n or k > lim_k or t > lim_t or min(n_max, k, t) < 0:
        raise ValueError(f"coloring limited to n_max<={lim_n}, k<={lim_k}, t<={lim_t}")
    verts = _vertices(n_max + t)
    index = {v: i for i, v in enumerate(verts)}
    table = ColoringTable(n_max, k, t)
    # members[w]: bitmask of vertices whose ball holds w
    members = {}
    for v in verts:
        bit = 1 << index[v]
        for w in table.ball(v):
            members[w] = members.get(w, 0) | bit
    adj = [0] * len(verts)
    for mask in members.values():
        m = mask
        while m:
            low = m & -m
            adj[low.bit_length() - 1] |= mask
            m ^= low
    color_mask = {}  # color -> bitmask of vertices holding it
    for i, v in enumerate(verts):
        nb = adj[i] & ~(1 << i)
        c = 0
        while color_mask.get(c, 0) & nb:
            c += 1
        color_mask[c] = color_mask.get(c, 0) | (1 << i)
        table.color_of[v] = c
        table.neighbors[v] = [verts[j] for j in _bits_of(nb)]
    return table


def _bits_of(mask):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def is_proper(table):
    return all(table.color_of[u] != table.color_of[v] for u, v in table.edges())


def coloring_sketch(x, table):
    s = to_str(as_bits(x))
    if s not in table.color_of:
        raise ValueError("string is outside the table domain")
    return table.color_of[s]


def coloring_recover(y, color, table):
    """The unique string within one (k, t) ball of y that has the given color."""
    s = to_str(as_bits(y))
    hits = [c for c in table.ball(s)
            if table.color_of.get(c) == color]
    if len(hits) != 1:
        raise ColoringAmbiguity(f"{len(hits)} candidates carry color {color}")
    return as_bits(hits[0])
