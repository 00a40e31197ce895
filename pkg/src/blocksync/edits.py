"""Block edit operations, adversary traces and edit-distance references.

Positions are 1-based throughout, with half-open ranges ``x[i, i+l)``.
"""

from dataclasses import dataclass, field

import numpy as np

from .bits import as_bits, to_str


class InvalidOperation(ValueError):
    """An edit operation does not fit the string it is applied to."""


@dataclass(frozen=True)
class Insert:
    pos: int
    payload: str

    kind = "I"

    @property
    def bits(self):
        return len(self.payload)


@dataclass(frozen=True)
class Delete:
    pos: int
    length: int

    kind = "D"

    @property
    def bits(self):
        return self.length


@dataclass(frozen=True)
class Transpose:
    i: int
    l: int
    j: int

    kind = "T"
    bits = 0


def _check(op, n):
    if isinstance(op, Insert):
        if not op.payload:
            raise InvalidOperation("insert payload must be non-empty")
        if not 1 <= op.pos <= n + 1:
            raise InvalidOperation(f"insert pos {op.pos} outside [1, {n + 1}]")
    elif isinstance(op, Delete):
        if op.length < 1:
            raise InvalidOperation("delete length must be >= 1")
        if op.pos < 1 or op.pos + op.length - 1 > n:
            raise InvalidOperation(
                f"delete [{op.pos}, {op.pos + op.length}) exceeds length {n}")
    elif isinstance(op, Transpose):
        if op.l < 1:
            raise InvalidOperation("transpose block length must be >= 1")
        if op.i < 1 or op.i + op.l > n + 1:
            raise InvalidOperation(
                f"transpose block [{op.i}, {op.i + op.l}) exceeds length {n}")
        if not (0 <= op.j <= op.i - 1 or op.i + op.l <= op.j <= n):
            raise InvalidOperation(
                f"transpose destination {op.j} not in [0, {op.i - 1}] or "
                f"[{op.i + op.l}, {n}]")
    else:
        raise TypeError(f"not a block edit operation: {op!r}")


def _join(parts, as_text):
    if as_text:
        return "".join(parts)
    return np.concatenate(parts) if parts else np.zeros(0, dtype=np.uint8)


def apply_op(x, op):
    """Apply one block edit.  Text in gives text out, otherwise a bit array."""
    as_text = isinstance(x, str)
    if not as_text:
        x = as_bits(x)
    n = len(x)
    _check(op, n)
    if isinstance(op, Insert):
        payload = op.payload if as_text else as_bits(op.payload)
        a = op.pos - 1
        return _join([x[:a], payload, x[a:]], as_text)
    if isinstance(op, Delete):
        a = op.pos - 1
        return _join([x[:a], x[a + op.length:]], as_text)
    a, b = op.i - 1, op.i - 1 + op.l
    block = x[a:b]
    rest = _join([x[:a], x[b:]], as_text)
    # j names a symbol of the original string; map it past the removed block
    at = op.j if op.j < op.i else op.j - op.l
    return _join([rest[:at], block, rest[at:]], as_text)


@dataclass
class BlockEditTrace:
    ops: list = field(default_factory=list)
    k_budget: int = 0
    t_budget: int = 0

    @property
    def bits_moved(self):
        return sum(op.bits for op in self.ops)

    def validate(self, n):
        if len(self.ops) > self.k_budget:
            raise InvalidOperation(
                f"{len(self.ops)} ops exceed k budget {self.k_budget}")
        if self.bits_moved > self.t_budget:
            raise InvalidOperation(
                f"{self.bits_moved} inserted/deleted bits exceed t budget {self.t_budget}")
        for idx, op in enumerate(self.ops):
            try:
                _check(op, n)
            except InvalidOperation as exc:
                raise InvalidOperation(f"op {idx}: {exc}") from None
            n += len_delta(op)

    def dumps(self):
        lines = [f"TRACE v1 k={self.k_budget} t={self.t_budget}"]
        for op in self.ops:
            if isinstance(op, Insert):
                lines.append(f"I {op.pos} {op.payload}")
            elif isinstance(op, Delete):
                lines.append(f"D {op.pos} {op.length}")
            else:
                lines.append(f"T {op.i} {op.l} {op.j}")
        return "\n".join(lines) + "\n"

    @classmethod
    def loads(cls, text):
        lines = [ln.strip() for ln in text.strip().splitlines() if ln.strip()]
        if not lines:
            raise ValueError("empty trace")
        head = lines[0].split()
        if head[:2] != ["TRACE", "v1"]:
            raise ValueError(f"bad trace header: {lines[0]!r}")
        meta = dict(item.split("=", 1) for item in head[2:])
        ops = []
        for ln in lines[1:]:
            tag, *args = ln.split()
            if tag == "I":
                ops.append(Insert(int(args[0]), args[1]))
            elif tag == "D":
                ops.append(Delete(int(args[0]), int(args[1])))
            elif tag == "T":
                ops.append(Transpose(int(args[0]), int(args[1]), int(args[2])))
            else:
                raise ValueError(f"unknown op line: {ln!r}")
        return cls(ops, int(meta["k"]), int(meta["t"]))


def len_delta(op):
    if isinstance(op, Insert):
        return len(op.payload)
    if isinstance(op, Delete):
        return -op.length
    return 0


def apply_trace(x, trace):
    for idx, op in enumerate(trace.ops):
        try:
            x = apply_op(x, op)
        except InvalidOperation as exc:
            raise InvalidOperation(f"op {idx}: {exc}") from None
    return x


def _geometric_len(rng, mean, cap):
    if cap < 1:
        return 0
    p = 1.0 / max(mean, 1.0)
    return int(min(rng.geometric(p), cap))


def sample_trace(rng_seed, n, k, t):
    """Draw a valid (k, t) trace against a length-n string.

    Op kinds are uniform among insert/delete/transpose; kinds that cannot fit
    the remaining budget or string are re-drawn, and if none fits the trace
    stops early.
    """
    rng = np.random.default_rng(rng_seed)
    ops = []
    cur, t_left = n, t
    for r in range(k):
        share = t_left / (k - r) if k > r else t_left
        kinds = ["I", "D", "T"]
        rng.shuffle(kinds)
        op = None
        for kind in kinds:
            if kind == "I" and t_left >= 1:
                length = _geometric_len(rng, share, t_left)
                payload = "".join(map(str, rng.integers(0, 2, size=length)))
                op = Insert(int(rng.integers(1, cur + 2)), payload)
            elif kind == "D" and t_left >= 1 and cur >= 1:
                length = _geometric_len(rng, share, min(t_left, cur))
                op = Delete(int(rng.integers(1, cur - length + 2)), length)
            elif kind == "T" and cur >= 2:
                if rng.random() < 0.5:
                    l = _geometric_len(rng, 16, cur - 1)
                else:
                    l = int(rng.integers(1, cur))
                i = int(rng.integers(1, cur - l + 2))
                choices = i - 1 + 1 + (cur - (i + l) + 1)
                pick = int(rng.integers(0, choices))
                j = pick if pick <= i - 1 else i + l + (pick - i)
                op = Transpose(i, l, j)
            if op is not None:
                break
        if op is None:
            break
        ops.append(op)
        cur += len_delta(op)
        t_left -= op.bits
    return BlockEditTrace(ops, k, t)


def edit_distance(x, y):
    """Insertion/deletion distance by the textbook O(|x||y|) table."""
    x, y = to_str(x), to_str(y)
    prev = list(range(len(y) + 1))
    for i, a in enumerate(x, 1):
        cur = [i] + [0] * len(y)
        for j, b in enumerate(y, 1):
            if a == b:
                cur[j] = prev[j - 1]
            else:
                cur[j] = min(prev[j], cur[j - 1]) + 1
        prev = cur
    return prev[-1]


def lcs(x, y):
    """Length of a longest common subsequence (bit-parallel table scan)."""
    x, y = to_str(x), to_str(y)
    m = len(y)
    if m == 0 or not x:
        return 0
    match = {"0": 0, "1": 0}
    for j, b in enumerate(y):
        match[b] |= 1 << j
    full = (1 << m) - 1
    v = full
    for a in x:
        u = v & match[a]
        v = ((v + u) | (v - u)) & full
    return m - v.bit_count()


_BALL_LIMITS = (12, 2, 4)


def _single_ops(s, t_left):
    n = len(s)
    for size in range(1, t_left + 1):
        payloads = [format(v, f"0{size}b") for v in range(1 << size)]
        for a in range(n + 1):
            for p in payloads:
                yield s[:a] + p + s[a:], size
        for a in range(n - size + 1):
            yield s[:a] + s[a + size:], size
    for i in range(n):
        for l in range(1, n - i + 1):
            block, rest = s[i:i + l], s[:i] + s[i + l:]
            for at in range(len(rest) + 1):
                yield rest[:at] + block + rest[at:], 0


def enumerate_ball(x, k, t):
    """Every string reachable from ``x`` by <= k block edits moving <= t bits."""
    x = to_str(x)
    max_n, max_k, max_t = _BALL_LIMITS
    if len(x) > max_n or k > max_k or t > max_t:
        raise ValueError(
            f"ball enumeration limited to |x|<={max_n}, k<={max_k}, t<={max_t}")
    best = {x: 0}
    frontier = {x: 0}
    for _ in range(k):
        nxt = {}
        for s, used in frontier.items():
            for y, cost in _single_ops(s, t - used):
                total = used + cost
                if total < best.get(y, t + 1):
                    best[y] = total
                    nxt[y] = total
        frontier = nxt
    return set(best)


def sample_byte_trace(rng_seed, n_bytes, k, t):
    """A (k, t) trace on the bits of an n_bytes-byte string whose edits fall on byte boundaries.

    The trace is drawn over bytes with a t // 8 byte budget and scaled by 8,
    so corrupted byte files stay whole bytes.
    """
    base = sample_trace(rng_seed, n_bytes, k, t // 8)
    rng = np.random.default_rng([rng_seed, 8])
    ops = []
    for op in base.ops:
        if isinstance(op, Insert):
            payload = "".join(map(str, rng.integers(0, 2, size=8 * len(op.payload))))
            ops.append(Insert(8 * (op.pos - 1) + 1, payload))
        elif isinstance(op, Delete):
            ops.append(Delete(8 * (op.pos - 1) + 1, 8 * op.length))
        else:
            ops.append(Transpose(8 * (op.i - 1) + 1, 8 * op.l, 8 * op.j))
    return BlockEditTrace(ops, k, t)
