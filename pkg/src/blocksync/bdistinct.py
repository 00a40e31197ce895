"""Two-stage document exchange for B-distinct strings.

Stage I cuts x into blocks with the locally consistent partition, run on
the string of B-bit windows and then again on the block-start symbols.
Each block contributes a record (length, own B-prefix, next B-prefix); Alice
sends a set-reconciliation sketch of the records.  Bob rebuilds the block
layout, writes every prefix and copies whole blocks from y where a unique
block of y has the same prefix and length.

Stage II is the level scheme with the first B bits of a block as its hash:
by B-distinctness those prefixes name x's aligned blocks uniquely.  Bob
matches every block first-fit against unused parts of y and finishes with
Reed-Solomon parity over the smallest blocks.
"""

import math
from dataclasses import dataclass

import numpy as np

from .bits import as_bits, from_bytes, pack_ints, pack_rows, to_bytes, unpack_ints, window_ints
from .cfhash import log2_ceil
from .container import SketchFile
from .levels import RecoveryFailure, pad_bits, strip_pad
from .matching import WindowIndex, first_fit_all
from .parsing import partition
from .rs import DecodeFailure, parity_width, rs_correct, rs_parity
from .setrecon import ReconciliationFailure, SetSketch, set_recon_recover, set_recon_sketch

STAGE2_CONSTANT = 20   # c*: level parity distance c* (k + ceil(t / b_i))
FINAL_CONSTANT = 20    # final parity distance c_final (k + ceil(t / b_L))
SET_CONSTANT = 8       # D = c_D (k loglogloglog + ceil(t / (T T')))
ALPHA_INV = 64
BETA_INV = 8


class ChainAmbiguity(RecoveryFailure):
    """The recovered records do not form a single chain."""


def is_b_distinct(x, B):
    """True iff all length-B windows of x are pairwise distinct."""
    x = as_bits(x)
    if B > len(x):
        raise ValueError("B exceeds the string length")
    count = len(x) - B + 1
    if count <= 1:
        return True
    if B <= 64:
        w = window_ints(x, B)
        return len(np.unique(w)) == count
    width = 64
    offsets = list(range(0, B - width + 1, width))
    if offsets[-1] != B - width:
        offsets.append(B - width)
    w = window_ints(x, width)
    cols = np.stack([w[o:o + count] for o in offsets])
    order = np.lexsort(cols[::-1])
    s = cols[:, order]
    same = np.all(s[:, 1:] == s[:, :-1], axis=0)
    return not same.any()


def _lg(v):
    return max(1, math.ceil(math.log2(max(v, 2))))


@dataclass(frozen=True)
class StageParams:
    n: int
    k: int
    t: int
    B: int
    T1: int          # T', the second partition threshold
    T2: int          # T'', the stage-I output block size
    D: int
    b: tuple         # stage-II level block sizes, halving, all at least B
    n_padded: int
    b_final: int = 0  # block size of the final parity, b_L
    c_star: int = STAGE2_CONSTANT
    c_final: int = FINAL_CONSTANT
    passthrough: bool = False

    @property
    def T(self):
        return self.B

    @property
    def L(self):
        return len(self.b)

    @property
    def b_L(self):
        return self.b_final

    @property
    def l(self):
        return tuple(self.n_padded // bi for bi in self.b)

    @property
    def len_bits(self):
        return _lg(self.n + 1)

    @property
    def record_bits(self):
        return self.len_bits + 2 * self.B

    def distance(self, idx):
        """Parity distance for stage-II level ``idx`` (0-based)."""
        return self.c_star * (self.k + -(-self.t // self.b[idx]))

    @property
    def final_distance(self):
        return self.c_final * (self.k + -(-self.t // self.b_L))

    def level_is_raw(self, idx):
        return self.distance(idx) - 1 >= self.l[idx]

    @property
    def final_is_raw(self):
        return self.final_distance - 1 >= self.l_final

    @property
    def l_final(self):
        return self.n_padded // self.b_final


def make_params(n, k, t, c_star=STAGE2_CONSTANT, c_final=FINAL_CONSTANT):
    lg = _lg(n)
    B = 3 * lg
    T1 = _lg(B)
    lglg = _lg(lg)
    lglglg = _lg(math.log2(max(lg, 2)))
    T2 = B * T1 * lglg ** 2 * lglglg
    D = SET_CONSTANT * (k * lglglg + -(-t // (B * T1)))
    D = max(D, 1)
    b_L = 1 << math.ceil(math.log2(2 * lg))
    passthrough = (k * ALPHA_INV * lg > n or t * BETA_INV > n or n < 4 * max(B, b_L))
    if passthrough:
        return StageParams(n, k, t, B, T1, T2, D, (), n, b_L, c_star, c_final, True)
    top = b_L
    while top < T2 and top * 2 <= n:
        top *= 2
    # a level's hash is the block's first B bits, so levels stop at blocks >= B
    b = []
    bi = top
    while bi >= max(B, b_L):
        b.append(bi)
        bi //= 2
    n_pad = top * (n // top + 1)
    return StageParams(n, k, t, B, T1, T2, D, tuple(b), n_pad, b_L, c_star, c_final, False)


def stage1_blocks(x, params, strict=True):
    """Block boundaries (0-based starts plus len(x)) from the two-pass partition."""
    x = as_bits(x)
    B = params.B
    n = len(x)
    if n < B:
        return np.array([0, n], dtype=np.int64)
    xbar = window_ints(x, B) if B <= 64 else None
    if xbar is None:
        raise ValueError("B above 64 is not supported by the stage-I partition")
    P1 = partition(params.T, xbar, strict=strict).indices  # over windows, 1-based
    xprime = xbar[P1[:-1] - 1]
    P2 = partition(params.T1, xprime, strict=strict).indices
    combined = P1[P2 - 1]  # boundaries on x-bar, 1-based, last is nbar+1
    starts = combined[:-1] - 1
    return np.append(starts, n)


def _records(x, bounds, params):
    """Record ints (len, prefix, next prefix) for all but the last block."""
    B = params.B
    w = window_ints(x, B)
    out = []
    lb = params.len_bits
    for a, b, c in zip(bounds[:-2], bounds[1:-1], bounds[2:]):
        rec = ((int(b - a) << (2 * B)) | (int(w[a]) << B) | int(w[b]))
        out.append(rec)
    if any(r >> (lb + 2 * B) for r in out):
        raise ValueError("block length does not fit the record field")
    return out


def stage1_set(x, params, strict=True):
    x = as_bits(x)
    return _records(x, stage1_blocks(x, params, strict), params)


def stage1_sketch(x, params):
    """Set-reconciliation sketch of Alice's block records."""
    x = as_bits(x)
    if not is_b_distinct(x, params.B):
        raise ValueError("stage I needs a B-distinct string")
    V = stage1_set(x, params)
    return set_recon_sketch(V, params.D, params.record_bits)


def _chain(V, params, n):
    """Order the records into the block layout; returns (starts, prefixes)."""
    B = params.B
    mask = (1 << B) - 1
    recs = [(r >> (2 * B), (r >> B) & mask, r & mask) for r in V]
    if not recs:
        return [0], None
    by_prefix = {}
    nexts = set()
    for ln, pre, nxt in recs:
        if pre in by_prefix:
            raise ChainAmbiguity("two records share a block prefix")
        by_prefix[pre] = (ln, nxt)
        nexts.add(nxt)
    heads = [pre for pre in by_prefix if pre not in nexts]
    if len(heads) != 1:
        raise ChainAmbiguity(f"{len(heads)} candidate chain starts")
    starts, prefixes = [], []
    pos, pre = 0, heads[0]
    for _ in range(len(recs)):
        if pre not in by_prefix:
            raise ChainAmbiguity("record chain breaks before using every record")
        ln, nxt = by_prefix.pop(pre)
        starts.append(pos)
        prefixes.append(pre)
        pos += ln
        pre = nxt
    starts.append(pos)
    prefixes.append(pre)  # the final block's prefix
    if pos + B > n:
        raise ChainAmbiguity("record lengths overrun the string")
    return starts, prefixes


def stage1_recover(y, sketch1, params, truth=None, stats=None):
    """Partial string (bits, filled mask) of length n after stage I."""
    y = as_bits(y)
    n, B = params.n, params.B
    xt = np.zeros(n, dtype=np.uint8)
    filled = np.zeros(n, dtype=bool)
    ybounds = stage1_blocks(y, params, strict=False) if len(y) >= B else np.array([0, len(y)])
    Vp = _records(y, ybounds, params) if len(y) >= B else []
    try:
        V = set_recon_recover(sketch1, Vp)
    except ReconciliationFailure as exc:
        raise RecoveryFailure(f"stage I set reconciliation failed: {exc}") from None
    if stats is not None:
        stats["set_difference"] = len(set(V) ^ set(Vp))
        stats["D"] = params.D
    starts, prefixes = _chain(V, params, n)
    if prefixes is None:
        return xt, filled
    bounds = starts + [n]
    # y blocks by (prefix, length)
    table = {}
    if len(y) >= B:
        wy = window_ints(y, B)
        for a, b in zip(ybounds[:-1], ybounds[1:]):
            if b - a >= B:
                table.setdefault((int(wy[a]), int(b - a)), []).append(int(a))
    for (a, b), pre in zip(zip(bounds[:-1], bounds[1:]), prefixes):
        bits = np.array([(pre >> (B - 1 - r)) & 1 for r in range(B)], dtype=np.uint8)
        xt[a:a + B] = bits
        filled[a:a + B] = True
        hits = table.get((pre, b - a), [])
        if len(hits) == 1:
            j = hits[0]
            xt[a:b] = y[j:j + (b - a)]
            filled[a:b] = True
    if stats is not None and truth is not None:
        tr = as_bits(truth)
        T2 = params.T2
        bad = 0
        for a in range(0, n, T2):
            seg = slice(a, min(a + T2, n))
            if not filled[seg].all() or not np.array_equal(xt[seg], tr[seg]):
                bad += 1
        stats["bad_blocks"] = bad
        stats["blocks"] = -(-n // T2)
    return xt, filled


def _prefix_values(bits, starts, B):
    w = window_ints(bits, B)
    return w[starts]


def stage2_sketch(x, params):
    """Per-level prefix values or their parity, then the final block parity."""
    x = as_bits(x)
    xp = np.concatenate([x, pad_bits(params.n, params.n_padded)])
    B = params.B
    w = window_ints(xp, B)
    levels = []
    for idx, bi in enumerate(params.b):
        v = [int(a) for a in w[np.arange(0, params.n_padded, bi)]]
        levels.append(v if params.level_is_raw(idx) else rs_parity(v, params.distance(idx), B))
    blocks = pack_rows(xp.reshape(-1, params.b_L))
    final = blocks if params.final_is_raw else rs_parity(blocks, params.final_distance, params.b_L)
    return levels, final


def _level_width(params, idx):
    if params.level_is_raw(idx):
        return params.B
    return parity_width(params.l[idx], params.distance(idx), params.B)


def _final_width(params):
    if params.final_is_raw:
        return params.b_L
    return parity_width(params.l_final, params.final_distance, params.b_L)


def stage2_recover(xt, filled, y, levels, final, params, truth=None, stats=None):
    n, N, B = params.n, params.n_padded, params.B
    xt = np.concatenate([xt, pad_bits(n, N)])
    filled = np.concatenate([filled, np.ones(N - n, dtype=bool)])
    y = np.concatenate([as_bits(y), pad_bits(n, N)])
    tp = None
    if truth is not None:
        tp = np.concatenate([as_bits(truth), pad_bits(n, N)])
    for idx, bi in enumerate(params.b):
        nb = N // bi
        starts = np.arange(0, N, bi)
        head = filled.reshape(nb, bi)[:, :B].all(axis=1)
        mine = [0] * nb
        hv = _prefix_values(xt, starts, B)
        for j in np.nonzero(head)[0]:
            mine[j] = int(hv[j])
        if params.level_is_raw(idx):
            v = list(levels[idx])
        else:
            try:
                v = rs_correct(mine, levels[idx], params.distance(idx), B,
                               np.nonzero(~head)[0])
            except DecodeFailure as exc:
                raise RecoveryFailure(f"stage II level {idx + 1} decode failed: {exc}") from None
        wrong = head & (np.array(mine, dtype=object) != np.array(v, dtype=object))
        for j in np.nonzero(wrong)[0]:
            filled[j * bi:(j + 1) * bi] = False
        index = WindowIndex.from_prefix(y, B, bi)
        blocks = [1 + j * bi for j in range(nb)]
        got = first_fit_all(blocks, {1 + j * bi: v[j] for j in range(nb)}, index)
        for i, j in got.items():
            xt[i - 1:i - 1 + bi] = y[j - 1:j - 1 + bi]
            filled[i - 1:i - 1 + bi] = True
        if stats is not None:
            info = {"block": bi, "blocks": nb, "matched": len(got),
                    "unfilled": int((~filled.reshape(nb, bi).all(axis=1)).sum())}
            if tp is not None:
                bad = ~filled.reshape(nb, bi).all(axis=1) | np.any(
                    xt.reshape(nb, bi) != tp.reshape(nb, bi), axis=1)
                info["unrecovered"] = int(bad.sum())
            stats.append(info)
    bL = params.b_L
    nb = N // bL
    if params.final_is_raw:
        blocks = final
    else:
        ok = filled.reshape(nb, bL).all(axis=1)
        try:
            blocks = rs_correct(pack_rows(xt.reshape(nb, bL)), final, params.final_distance,
                                bL, np.nonzero(~ok)[0])
        except DecodeFailure as exc:
            raise RecoveryFailure(f"stage II final decode failed: {exc}") from None
    return strip_pad(from_bytes(pack_ints(blocks, bL))[:N], n)


@dataclass
class BDistSketch:
    params: StageParams
    set_sketch: SetSketch = None
    levels: list = None
    final: list = None
    raw: np.ndarray = None

    def to_file(self):
        p = self.params
        head = dict(n_true=p.n, n_padded=p.n_padded, k=p.k, t=p.t, L=p.L, q=p.B,
                    c=p.c_star, c_final=p.c_final)
        if p.passthrough:
            return SketchFile("raw", sections=[to_bytes(self.raw)], **head)
        sections = [self.set_sketch.to_bytes()]
        for idx, zi in enumerate(self.levels):
            sections.append(pack_ints(zi, _level_width(p, idx)))
        sections.append(pack_ints(self.final, _final_width(p)))
        return SketchFile("bdist", sections=sections, **head)

    def to_bytes(self):
        return self.to_file().to_bytes()

    @property
    def bit_size(self):
        return 8 * len(self.to_bytes())

    @classmethod
    def from_file(cls, f):
        if f.variant == "raw":
            p = StageParams(f.n_true, f.k, f.t, f.q, 0, 0, 0, (), f.n_true, 0,
                            f.c, f.c_final, True)
            return cls(p, raw=from_bytes(f.sections[0])[:f.n_true])
        if f.variant != "bdist":
            raise ValueError(f"not a bdist sketch: {f.variant}")
        p = make_params(f.n_true, f.k, f.t, f.c, f.c_final)
        if p.n_padded != f.n_padded or p.L != f.L or len(f.sections) != p.L + 2:
            raise ValueError("sketch header disagrees with the recomputed parameters")
        s1 = SetSketch.from_bytes(f.sections[0])
        levels = []
        for idx in range(p.L):
            count = p.l[idx] if p.level_is_raw(idx) else p.distance(idx) - 1
            levels.append(unpack_ints(f.sections[1 + idx], _level_width(p, idx), count))
        count = p.l_final if p.final_is_raw else p.final_distance - 1
        final = unpack_ints(f.sections[-1], _final_width(p), count)
        return cls(p, s1, levels, final)

    @classmethod
    def from_bytes(cls, data):
        return cls.from_file(SketchFile.from_bytes(data))


def sketch_rand(x, k, t, c_star=STAGE2_CONSTANT, c_final=FINAL_CONSTANT):
    """Both stages of the sketch for a B-distinct x."""
    x = as_bits(x)
    p = make_params(len(x), k, t, c_star, c_final)
    if p.passthrough:
        return BDistSketch(p, raw=x.copy())
    s1 = stage1_sketch(x, p)
    levels, final = stage2_sketch(x, p)
    return BDistSketch(p, s1, levels, final)


def recover_rand(y, sketch, truth=None, stats=None):
    if isinstance(sketch, (bytes, bytearray)):
        sketch = BDistSketch.from_bytes(sketch)
    p = sketch.params
    if p.passthrough:
        return sketch.raw.copy()
    s1 = {} if stats is not None else None
    xt, filled = stage1_recover(y, sketch.set_sketch, p, truth, s1)
    s2 = [] if stats is not None else None
    out = stage2_recover(xt, filled, y, sketch.levels, sketch.final, p, truth, s2)
    if stats is not None:
        stats["stage1"] = s1
        stats["stage2"] = s2
    return out


def sketch_breakdown(sketch):
    f = sketch.to_file()
    if f.variant == "raw":
        return {"raw": len(f.sections[0])}
    names = ["set"] + [f"level{i + 1}" for i in range(f.L)] + ["final"]
    return dict(zip(names, f.section_sizes()))


def sketch_byte_length(n, k, t, c_star=STAGE2_CONSTANT, c_final=FINAL_CONSTANT):
    """Serialized sketch size, which depends only on the parameters."""
    p = make_params(n, k, t, c_star, c_final)
    if p.passthrough:
        return len(BDistSketch(p, raw=np.zeros(n, dtype=np.uint8)).to_bytes())
    s1 = SetSketch((0,) * (2 * p.D), p.D, p.record_bits, 0)
    levels = [[0] * (p.l[i] if p.level_is_raw(i) else p.distance(i) - 1) for i in range(p.L)]
    final = [0] * (p.l_final if p.final_is_raw else p.final_distance - 1)
    return len(BDistSketch(p, s1, levels, final).to_bytes())
