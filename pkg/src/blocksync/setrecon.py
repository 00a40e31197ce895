"""Set reconciliation by characteristic-polynomial evaluation.

Alice sends chi_V(z) = prod_{v in V} (z - v) at 2D fixed points plus |V|.
Bob divides by his own chi_V'(z), interpolates the reduced rational function
P/Q (P vanishes on V \\ V', Q on V' \\ V) and factors both.  Arithmetic is
over a Mersenne prime field large enough to hold every element and the
evaluation points ``p-1, p-2, ..., p-2D``.
"""

from dataclasses import dataclass

MERSENNE_EXPONENTS = (31, 61, 89, 107, 127, 521, 607, 1279)


class ReconciliationFailure(Exception):
    """The difference exceeds capacity or the sketch is inconsistent."""


def field_exponent(m, D):
    for e in MERSENNE_EXPONENTS:
        if (1 << m) + 2 * D < (1 << e) - 1:
            return e
    raise ValueError(f"element width {m} too large for set reconciliation")


def eval_points(p, D):
    return [p - i for i in range(1, 2 * D + 1)]


def _char_evals(elements, points, p):
    out = []
    for z in points:
        acc = 1
        for v in elements:
            acc = acc * (z - v) % p
        out.append(acc)
    return out


@dataclass(frozen=True)
class SetSketch:
    evals: tuple
    D: int
    m: int
    size: int

    @property
    def prime_exponent(self):
        return field_exponent(self.m, self.D)

    @property
    def bit_length(self):
        return 32 + 16 + 32 + 2 * self.D * self.prime_exponent

    def to_int_fields(self):
        return (self.D, self.m, self.size, self.evals)

    def to_bytes(self):
        e = self.prime_exponent
        acc = 0
        for v in reversed(self.evals):
            acc = (acc << e) | v
        nbytes = (2 * self.D * e + 7) // 8
        head = (self.D.to_bytes(4, "little") + self.m.to_bytes(2, "little")
                + self.size.to_bytes(4, "little"))
        return head + acc.to_bytes(nbytes, "little")

    @classmethod
    def from_bytes(cls, data):
        D = int.from_bytes(data[0:4], "little")
        m = int.from_bytes(data[4:6], "little")
        size = int.from_bytes(data[6:10], "little")
        e = field_exponent(m, D)
        nbytes = (2 * D * e + 7) // 8
        if len(data) < 10 + nbytes:
            raise ValueError("truncated set sketch")
        acc = int.from_bytes(data[10:10 + nbytes], "little")
        mask = (1 << e) - 1
        evals = tuple((acc >> (e * i)) & mask for i in range(2 * D))
        return cls(evals, D, m, size)

    @staticmethod
    def byte_length(D, m):
        return 10 + (2 * D * field_exponent(m, D) + 7) // 8


def set_recon_sketch(V, D, m):
    """Sketch of the set ``V`` of ``m``-bit integers with difference capacity ``D``."""
    if D < 1:
        raise ValueError("capacity D must be >= 1")
    elems = sorted(set(int(v) for v in V))
    if len(elems) != len(list(V)):
        raise ValueError("set elements must be distinct")
    if elems and (elems[0] < 0 or elems[-1] >> m):
        raise ValueError(f"elements must be {m}-bit non-negative integers")
    p = (1 << field_exponent(m, D)) - 1
    return SetSketch(tuple(_char_evals(elems, eval_points(p, D), p)), D, m, len(elems))


# polynomial helpers over GF(p); coefficient lists, lowest degree first

def _trim(a):
    while a and a[-1] == 0:
        a.pop()
    return a


def _pmul(a, b, p):
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return _trim([c % p for c in out])


def _pdivmod(a, b, p):
    a = list(a)
    db = len(b) - 1
    inv = pow(b[-1], p - 2, p)
    q = [0] * max(len(a) - db, 0)
    for i in range(len(a) - 1, db - 1, -1):
        c = a[i] * inv % p
        if c:
            q[i - db] = c
            for j in range(db + 1):
                a[i - db + j] = (a[i - db + j] - c * b[j]) % p
    return _trim(q), _trim(a[:db])


def _pmod(a, b, p):
    return _pdivmod(a, b, p)[1]


def _monic(a, p):
    inv = pow(a[-1], p - 2, p)
    return [c * inv % p for c in a]


def _pgcd(a, b, p):
    a, b = _trim(list(a)), _trim(list(b))
    while b:
        a, b = b, _pmod(a, b, p)
    return _monic(a, p) if a else a


def _ppowmod(base, e, mod, p):
    result = [1]
    base = _pmod(base, mod, p)
    while e:
        if e & 1:
            result = _pmod(_pmul(result, base, p), mod, p)
        base = _pmod(_pmul(base, base, p), mod, p)
        e >>= 1
    return result


def _peval(a, x, p):
    acc = 0
    for c in reversed(a):
        acc = (acc * x + c) % p
    return acc


def _solve(rows, rhs, p):
    """Some solution of rows @ u = rhs over GF(p), or None if inconsistent."""
    n = len(rows[0]) if rows else 0
    aug = [list(r) + [b] for r, b in zip(rows, rhs)]
    pivots = []
    r = 0
    for c in range(n):
        piv = next((i for i in range(r, len(aug)) if aug[i][c]), None)
        if piv is None:
            continue
        aug[r], aug[piv] = aug[piv], aug[r]
        inv = pow(aug[r][c], p - 2, p)
        aug[r] = [v * inv % p for v in aug[r]]
        for i in range(len(aug)):
            if i != r and aug[i][c]:
                f = aug[i][c]
                aug[i] = [(v - f * w) % p for v, w in zip(aug[i], aug[r])]
        pivots.append(c)
        r += 1
        if r == len(aug):
            break
    for i in range(r, len(aug)):
        if aug[i][n]:
            return None
    u = [0] * n
    for i, c in enumerate(pivots):
        u[c] = aug[i][n]
    return u


def _interpolate(points, ratios, a, b, p):
    """Monic P (deg a), Q (deg b) with P(z) = f Q(z) on the given points."""
    rows, rhs = [], []
    for z, f in zip(points, ratios):
        row = [pow(z, i, p) for i in range(a)]
        row += [(-f * pow(z, j, p)) % p for j in range(b)]
        rows.append(row)
        rhs.append((f * pow(z, b, p) - pow(z, a, p)) % p)
    u = _solve(rows, rhs, p) if rows else []
    if u is None:
        return None
    return u[:a] + [1], u[a:] + [1]


def _split_roots(f, p, salt=1):
    """Roots of a monic squarefree f known to split into linear factors."""
    if len(f) == 1:
        return []
    if len(f) == 2:
        return [(-f[0]) % p]
    a = salt
    while True:
        h = _ppowmod([a, 1], (p - 1) // 2, f, p)
        h = _trim(h + [0]) if h else []
        h = list(h) if h else [0]
        h[0] = (h[0] - 1) % p
        g = _pgcd(f, _trim(h), p)
        if 1 < len(g) < len(f):
            rest, _ = _pdivmod(f, g, p)
            return _split_roots(g, p, a + 1) + _split_roots(_monic(rest, p), p, a + 1)
        a += 1


def _linear_roots(f, p):
    """All roots of f if it is a product of distinct linear factors, else None."""
    if len(f) <= 1:
        return []
    xp = list(_ppowmod([0, 1], p, f, p)) + [0, 0]
    xp[1] = (xp[1] - 1) % p
    if _pmod(_trim(xp), f, p):
        return None
    return _split_roots(f, p)


def set_recon_recover(sketch, V_prime):
    """Alice's set, rebuilt from her sketch and Bob's set ``V_prime``."""
    D, m, p = sketch.D, sketch.m, (1 << sketch.prime_exponent) - 1
    mine = sorted(set(int(v) for v in V_prime))
    if mine and (mine[0] < 0 or mine[-1] >> m):
        raise ValueError(f"elements must be {m}-bit non-negative integers")
    points = eval_points(p, D)
    bob = _char_evals(mine, points, p)
    ratios = [a * pow(b, p - 2, p) % p for a, b in zip(sketch.evals, bob)]
    delta = sketch.size - len(mine)
    if abs(delta) > D:
        raise ReconciliationFailure(f"set sizes differ by {abs(delta)} > capacity {D}")
    if all(r == 1 for r in ratios) and delta == 0:
        return set(mine)
    # difference sizes to try: same parity as delta, doubling up to D
    start = abs(delta)
    top = D if (D - start) % 2 == 0 else D - 1
    sizes = []
    N = start if start else 2
    while N <= top:
        sizes.append(N)
        if N == top:
            break
        N = min(top, start + 2 * max(N - start, 1))
    for N in sizes:
        a, b = (N + delta) // 2, (N - delta) // 2
        sol = _interpolate(points[:N], ratios[:N], a, b, p)
        if sol is None:
            continue
        P, Q = sol
        ok = all(_peval(P, z, p) == f * _peval(Q, z, p) % p
                 for z, f in zip(points, ratios))
        if not ok:
            continue
        g = _pgcd(P, Q, p)
        if len(g) > 1:
            P = _monic(_pdivmod(P, g, p)[0], p)
            Q = _monic(_pdivmod(Q, g, p)[0], p)
        if len(P) - 1 + len(Q) - 1 > D:
            continue
        removed = [v for v in mine if _peval(Q, v, p) == 0]
        if len(removed) != len(Q) - 1:
            raise ReconciliationFailure("denominator roots are not all local elements")
        added = _linear_roots(P, p)
        if added is None:
            raise ReconciliationFailure("numerator does not split into element roots")
        if any(v >> m for v in added) or set(added) & set(mine):
            raise ReconciliationFailure("recovered element outside the element space")
        result = (set(mine) - set(removed)) | set(added)
        if len(result) != sketch.size:
            raise ReconciliationFailure("recovered set size disagrees with the sketch")
        return result
    raise ReconciliationFailure(f"symmetric difference exceeds capacity {D}")
