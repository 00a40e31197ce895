"""Deterministic document exchange for block edit errors, level by level.

Alice cuts her (padded) string into blocks that halve in size from b_1
down to b_L.  For each level she certifies a collision-free hash; she sends
the level-1 hash values in full and, for deeper levels, only Reed-Solomon
parity over the hash values.  A final parity over the level-L blocks lets
Bob repair whatever the matchings left blank or got wrong.

Bob keeps a partial string x~ (bits plus a filled mask).  At level i he
hashes his filled blocks, decodes the true hash values with the parity,
clears blocks whose hash disagrees, and refills blank blocks by matching
them into y with the three-round greedy matching.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .bits import as_bits, from_bytes, pack_ints, pack_rows, to_bytes, unpack_ints
from .cfhash import HashDescriptor, build_collision_free, hash_windows, log2_ceil
from .container import SketchFile
from .matching import WindowIndex, degree3_two_thirds
from .rs import DecodeFailure, parity_width, rs_correct, rs_parity

DIST_CONSTANT = 4     # d_i = DIST_CONSTANT * K * i
FINAL_CONSTANT = 4    # d_final = FINAL_CONSTANT * (k + ceil(t / b_L)) * L
ALPHA_INV = 64        # pass-through when k > n / (64 log n)
BETA_INV = 8          # pass-through when t > n / 8
SCHEDULE_DIVISOR = 18  # b_1 <= n / (18 K)


class RecoveryFailure(Exception):
    """Bob could not rebuild the string; the message names the stage."""


def pad_bits(n_true, n_padded):
    pad = np.zeros(n_padded - n_true, dtype=np.uint8)
    pad[0] = 1
    return pad


def strip_pad(x, n_true):
    x = as_bits(x)
    if len(x) <= n_true or x[n_true] != 1 or x[n_true + 1:].any():
        raise RecoveryFailure("padding check failed after final decode")
    return x[:n_true].copy()


@dataclass(frozen=True)
class LevelSchedule:
    n_true: int
    n: int
    k: int
    t: int
    K: int
    b: tuple
    q: int
    c: int = DIST_CONSTANT
    c_final: int = FINAL_CONSTANT
    passthrough: bool = False

    @property
    def L(self):
        return len(self.b)

    @property
    def l(self):
        return tuple(self.n // bi for bi in self.b)

    @property
    def b_L(self):
        return self.b[-1]

    def distance(self, i):
        """RS design distance for the hash values of level i (1-based)."""
        return self.c * self.K * i

    @property
    def final_distance(self):
        return self.c_final * (self.k + -(-self.t // self.b_L)) * self.L

    def level_is_raw(self, i):
        # parity would be no shorter than the data itself
        return self.distance(i) - 1 >= self.l[i - 1]

    @property
    def final_is_raw(self):
        return self.final_distance - 1 >= self.l[-1]


def make_schedule(n, k, t, c=DIST_CONSTANT, c_final=FINAL_CONSTANT):
    if n < 0 or k < 0 or t < 0:
        raise ValueError("n, k and t must be non-negative")
    lg = log2_ceil(n)
    K = max(1, k + -(-t // lg))
    b_L = 1 << math.ceil(math.log2(2 * lg))
    q = 4 * lg
    passthrough = (k * ALPHA_INV * lg > n or t * BETA_INV > n or n < 4 * b_L)
    if passthrough:
        return LevelSchedule(n, n, k, t, K, (), q, c, c_final, True)
    cap = n // (SCHEDULE_DIVISOR * K)
    b1 = b_L
    while b1 * 2 <= cap:
        b1 *= 2
    b = []
    bi = b1
    while bi >= b_L:
        b.append(bi)
        bi //= 2
    n_pad = b1 * (n // b1 + 1)  # room for at least the pad's leading 1
    return LevelSchedule(n, n_pad, k, t, K, tuple(b), q, c, c_final, False)


def _seed_width(sched, i):
    return HashDescriptor(0, sched.b[i - 1], sched.q, sched.n).seed_bits


@dataclass
class LevelsSketch:
    schedule: LevelSchedule
    hash_seeds: list
    v1: list
    z: list                     # z[0] is level 2, ...; raw hash values when level_is_raw
    z_final: list               # parity (or the raw level-L blocks when final_is_raw)
    raw: np.ndarray = None      # pass-through payload
    extra: dict = field(default_factory=dict)

    def descriptors(self):
        s = self.schedule
        return [HashDescriptor(seed, s.b[i], s.q, s.n) for i, seed in enumerate(self.hash_seeds)]

    def to_file(self):
        s = self.schedule
        head = dict(n_true=s.n_true, n_padded=s.n, k=s.k, t=s.t, L=s.L, q=s.q,
                    c=s.c, c_final=s.c_final)
        if s.passthrough:
            return SketchFile("raw", sections=[to_bytes(self.raw)], **head)
        seeds = b"".join(pack_ints([seed], _seed_width(s, i + 1))
                         for i, seed in enumerate(self.hash_seeds))
        sections = [seeds, pack_ints(self.v1, s.q)]
        for i in range(2, s.L + 1):
            zi = self.z[i - 2]
            width = s.q if s.level_is_raw(i) else parity_width(s.l[i - 1], s.distance(i), s.q)
            sections.append(pack_ints(zi, width))
        sections.append(pack_ints(self.z_final, _final_width(s)))
        return SketchFile("levels", sections=sections, **head)

    def to_bytes(self):
        return self.to_file().to_bytes()

    @property
    def bit_size(self):
        return 8 * len(self.to_bytes())

    @classmethod
    def from_file(cls, f):
        if f.variant == "raw":
            sched = LevelSchedule(f.n_true, f.n_padded, f.k, f.t, 0, (), f.q,
                                  f.c, f.c_final, True)
            return cls(sched, [], [], [], [], raw=from_bytes(f.sections[0])[:f.n_true])
        if f.variant != "levels":
            raise ValueError(f"not a levels sketch: {f.variant}")
        s = make_schedule(f.n_true, f.k, f.t, f.c, f.c_final)
        if s.n != f.n_padded or s.L != f.L or s.q != f.q:
            raise ValueError("sketch header disagrees with the recomputed schedule")
        if len(f.sections) != s.L + 2:
            raise ValueError("wrong number of sketch sections")
        seeds, pos = [], 0
        blob = f.sections[0]
        for i in range(1, s.L + 1):
            w = _seed_width(s, i)
            nb = (w + 7) // 8
            seeds.append(unpack_ints(blob[pos:pos + nb], w, 1)[0])
            pos += nb
        v1 = unpack_ints(f.sections[1], s.q, s.l[0])
        z = []
        for i in range(2, s.L + 1):
            if s.level_is_raw(i):
                z.append(unpack_ints(f.sections[i], s.q, s.l[i - 1]))
            else:
                w = parity_width(s.l[i - 1], s.distance(i), s.q)
                z.append(unpack_ints(f.sections[i], w, s.distance(i) - 1))
        count = s.l[-1] if s.final_is_raw else s.final_distance - 1
        z_final = unpack_ints(f.sections[-1], _final_width(s), count)
        return cls(s, seeds, v1, z, z_final)

    @classmethod
    def from_bytes(cls, data):
        return cls.from_file(SketchFile.from_bytes(data))


def _final_width(s):
    if s.final_is_raw:
        return s.b_L
    return parity_width(s.l[-1], s.final_distance, s.b_L)


def alice_sketch(x, k, t, c=DIST_CONSTANT, c_final=FINAL_CONSTANT):
    """Sketch of x for Bob holding a string within (k, t) block edits."""
    x = as_bits(x)
    s = make_schedule(len(x), k, t, c, c_final)
    if s.passthrough:
        return LevelsSketch(s, [], [], [], [], raw=x.copy())
    xp = np.concatenate([x, pad_bits(len(x), s.n)])
    seeds, values = [], []
    for i, bi in enumerate(s.b, 1):
        desc = build_collision_free(xp, bi, q=s.q)
        seeds.append(desc.seed)
        values.append(hash_windows(desc, xp, np.arange(0, s.n, bi)))
    z = []
    for i in range(2, s.L + 1):
        vi = values[i - 1]
        z.append(list(vi) if s.level_is_raw(i) else rs_parity(vi, s.distance(i), s.q))
    blocks = pack_rows(xp.reshape(-1, s.b_L))
    z_final = blocks if s.final_is_raw else rs_parity(blocks, s.final_distance, s.b_L)
    return LevelsSketch(s, seeds, values[0], z, z_final)


def _fill(xt, filled, y, pairs, b):
    for i, j in pairs:
        xt[i - 1:i - 1 + b] = y[j - 1:j - 1 + b]
        filled[i - 1:i - 1 + b] = True


def bob_recover(y, sketch, truth=None, stats=None):
    """Rebuild Alice's string from y and her sketch.

    ``truth`` (Alice's string, tests only) and a ``stats`` list enable
    per-level instrumentation: each level appends a dict of counts.
    """
    if isinstance(sketch, (bytes, bytearray)):
        sketch = LevelsSketch.from_bytes(sketch)
    s = sketch.schedule
    if s.passthrough:
        return sketch.raw.copy()
    y = np.concatenate([as_bits(y), pad_bits(s.n_true, s.n)])
    xp_true = None
    if truth is not None:
        xp_true = np.concatenate([as_bits(truth), pad_bits(s.n_true, s.n)])
    xt = np.zeros(s.n, dtype=np.uint8)
    filled = np.zeros(s.n, dtype=bool)
    descs = sketch.descriptors()
    for i, bi in enumerate(s.b, 1):
        desc = descs[i - 1]
        nb = s.n // bi
        starts = np.arange(0, s.n, bi)
        block_filled = filled.reshape(nb, bi).all(axis=1)
        info = {"level": i, "block": bi, "blocks": nb}
        if i == 1:
            v = list(sketch.v1)
            mismatch = np.zeros(nb, dtype=bool)
        else:
            mine = [0] * nb
            fi = np.nonzero(block_filled)[0]
            for idx, val in zip(fi, hash_windows(desc, xt, starts[fi])):
                mine[idx] = val
            erasures = np.nonzero(~block_filled)[0]
            info["erasures"] = len(erasures)
            if xp_true is not None:
                info["wrong_filled"] = int(sum(
                    1 for idx in fi
                    if not np.array_equal(xt[idx * bi:(idx + 1) * bi], xp_true[idx * bi:(idx + 1) * bi])))
            if s.level_is_raw(i):
                v = list(sketch.z[i - 2])
            else:
                try:
                    v = rs_correct(mine, sketch.z[i - 2], s.distance(i), s.q, erasures)
                except DecodeFailure as exc:
                    raise RecoveryFailure(f"level {i} hash-value decode failed: {exc}") from None
            mismatch = block_filled & (np.array(mine, dtype=object) != np.array(v, dtype=object))
            for idx in np.nonzero(mismatch)[0]:
                filled[idx * bi:(idx + 1) * bi] = False
        S = [1 + idx * bi for idx in range(nb) if not block_filled[idx] or mismatch[idx]]
        vdict = {1 + idx * bi: v[idx] for idx in range(nb)}
        match = degree3_two_thirds(S, vdict, y, WindowIndex.from_descriptor(desc, y))
        _fill(xt, filled, y, match.pairs, bi)
        info.update(S=len(S), matched=len(match), mismatched=int(mismatch.sum()))
        block_filled = filled.reshape(nb, bi).all(axis=1)
        info["unfilled"] = int((~block_filled).sum())
        if xp_true is not None:
            bad = ~block_filled | np.any(
                xt.reshape(nb, bi) != xp_true.reshape(nb, bi), axis=1)
            info["unrecovered"] = int(bad.sum())
            info["wrong_matches"] = int(sum(
                1 for a, _ in match.pairs
                if not np.array_equal(xt[a - 1:a - 1 + bi], xp_true[a - 1:a - 1 + bi])))
        if stats is not None:
            stats.append(info)
    bL = s.b_L
    nb = s.n // bL
    if s.final_is_raw:
        blocks = sketch.z_final
    else:
        block_filled = filled.reshape(nb, bL).all(axis=1)
        symbols = pack_rows(xt.reshape(nb, bL))
        erasures = np.nonzero(~block_filled)[0]
        try:
            blocks = rs_correct(symbols, sketch.z_final, s.final_distance, bL, erasures)
        except DecodeFailure as exc:
            raise RecoveryFailure(f"final block decode failed: {exc}") from None
    raw = pack_ints(blocks, bL)
    return strip_pad(from_bytes(raw)[:s.n], s.n_true)


def sketch_breakdown(sketch):
    """Byte size of each sketch section, keyed by name."""
    f = sketch.to_file()
    if f.variant == "raw":
        return {"raw": len(f.sections[0])}
    names = ["seeds", "v1"] + [f"z{i}" for i in range(2, f.L + 1)] + ["z_final"]
    return dict(zip(names, f.section_sizes()))


def sketch_byte_length(n, k, t, c=DIST_CONSTANT, c_final=FINAL_CONSTANT):
    """Serialized sketch size, which depends only on the parameters."""
    s = make_schedule(n, k, t, c, c_final)
    if s.passthrough:
        return len(LevelsSketch(s, [], [], [], [], raw=np.zeros(n, dtype=np.uint8)).to_bytes())
    z = []
    for i in range(2, s.L + 1):
        z.append([0] * (s.l[i - 1] if s.level_is_raw(i) else s.distance(i) - 1))
    zf = [0] * (s.l[-1] if s.final_is_raw else s.final_distance - 1)
    return len(LevelsSketch(s, [0] * s.L, [0] * s.l[0], z, zf).to_bytes())
