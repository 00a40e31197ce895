"""Small-bias bit generator with per-index evaluation.

The construction is the powering generator: a seed is a pair of field
elements ``(a, b)`` of GF(2^m) and output bit ``i`` (1-based) is the GF(2)
inner product ``<a^(i-1), b>``.  For any non-empty set S of output positions
the XOR over S is biased by at most ``(n_out - 1) / 2^m``, because
``sum_{i in S} a^(i-1)`` is a non-zero polynomial in ``a`` of degree below
``n_out``.  A generator with bias ``eps`` is therefore eps-almost kappa-wise
independent for every kappa at once, in max norm.
"""

import math
from fractions import Fraction
from functools import lru_cache

import numpy as np

# seed length is 2 * ceil(log2(n_out / eps)); kappa does not enter
SEED_CONSTANT = 2


def clmul(a, b):
    """Carry-less product of two non-negative ints."""
    if a.bit_length() > b.bit_length():
        a, b = b, a
    out = 0
    while a:
        low = a & -a
        out ^= b << (low.bit_length() - 1)
        a ^= low
    return out


def poly_mod(a, f):
    df = f.bit_length() - 1
    while a.bit_length() - 1 >= df:
        a ^= f << (a.bit_length() - 1 - df)
    return a


def _poly_gcd(a, b):
    while b:
        a, b = b, poly_mod(a, b)
    return a


def _prime_factors(m):
    out, p = [], 2
    while p * p <= m:
        if m % p == 0:
            out.append(p)
            while m % p == 0:
                m //= p
        p += 1
    if m > 1:
        out.append(m)
    return out


def _x_pow_2k(k, f):
    r = 2
    for _ in range(k):
        r = poly_mod(clmul(r, r), f)
    return r


def is_irreducible(f):
    """Rabin's test for a GF(2) polynomial given as an int."""
    m = f.bit_length() - 1
    if m < 1:
        return False
    if _x_pow_2k(m, f) != poly_mod(2, f):
        return False
    for r in _prime_factors(m):
        if _poly_gcd(f, _x_pow_2k(m // r, f) ^ 2) != 1:
            return False
    return True


@lru_cache(maxsize=None)
def irreducible_poly(m):
    """Lowest-weight irreducible polynomial of degree m (trinomial first)."""
    top = (1 << m) | 1
    for a in range(1, m):
        f = top | (1 << a)
        if is_irreducible(f):
            return f
    for a in range(1, m):
        for b in range(a + 1, m):
            for c in range(b + 1, m):
                f = top | (1 << a) | (1 << b) | (1 << c)
                if is_irreducible(f):
                    return f
    raise ValueError(f"no irreducible polynomial of degree {m} found")


class GF2m:
    """GF(2^m) over a fixed irreducible modulus, elements as Python ints."""

    def __init__(self, m):
        self.m = m
        self.modulus = irreducible_poly(m)
        self.words = (m + 63) // 64

    def mul(self, a, b):
        return poly_mod(clmul(a, b), self.modulus)

    def pow(self, a, e):
        result = 1
        while e:
            if e & 1:
                result = self.mul(result, a)
            a = self.mul(a, a)
            e >>= 1
        return result

    def times_x(self, a):
        a <<= 1
        if a >> self.m:
            a ^= self.modulus
        return a

    def mul_tables(self, c):
        """Byte tables for multiplication by the constant ``c``.

        Returns an array of shape (nbytes, 256, words) of uint64 so that
        ``c * v`` is the XOR over byte positions j of ``T[j, byte_j(v)]``.
        """
        nbytes = (self.m + 7) // 8
        tables = np.zeros((nbytes, 256, self.words), dtype=np.uint64)
        basis = c
        for j in range(nbytes):
            row = [0] * 256
            for bit in range(8):
                row[1 << bit] = basis
                basis = self.times_x(basis)
            for v in range(3, 256):
                low = v & -v
                if v != low:
                    row[v] = row[v ^ low] ^ row[low]
            tables[j] = _split_words(row, self.words)
        return tables


def _split_words(values, words):
    out = np.zeros((len(values), words), dtype=np.uint64)
    mask = (1 << 64) - 1
    for w in range(words):
        out[:, w] = [(v >> (64 * w)) & mask for v in values]
    return out


def _join_words(arr):
    out = []
    for row in arr:
        v = 0
        for w, word in enumerate(row):
            v |= int(word) << (64 * w)
        out.append(v)
    return out


def _apply_tables(tables, vec):
    """Multiply every element of ``vec`` (shape (N, words)) by the table's constant."""
    out = np.zeros_like(vec)
    for j in range(tables.shape[0]):
        word, shift = divmod(8 * j, 64)
        idx = ((vec[:, word] >> np.uint64(shift)) & np.uint64(0xFF)).astype(np.intp)
        out ^= tables[j][idx]
    return out


class SmallBiasGenerator:
    """Powering small-bias generator with ``n_out`` output bits.

    ``epsilon`` bounds the bias of every non-empty XOR test; ``kappa`` is
    recorded for bookkeeping only since the bound holds for all kappa.
    """

    def __init__(self, n_out, epsilon, kappa=1):
        if n_out < 1:
            raise ValueError("n_out must be positive")
        eps = Fraction(epsilon) if not isinstance(epsilon, float) else Fraction(epsilon).limit_denominator(1 << 200)
        if not 0 < eps < 1:
            raise ValueError("epsilon must lie in (0, 1)")
        if kappa < 1:
            raise ValueError("kappa must be >= 1")
        self.n_out = n_out
        self.epsilon = eps
        self.kappa = kappa
        self.m = field_width(n_out, eps)
        self.field = GF2m(self.m)

    @property
    def seed_length(self):
        return SEED_CONSTANT * self.m

    @property
    def bias_bound(self):
        return Fraction(max(self.n_out - 1, 0), 1 << self.m)

    def split_seed(self, seed):
        if not 0 <= seed < 1 << self.seed_length:
            raise ValueError(f"seed outside [0, 2^{self.seed_length})")
        mask = (1 << self.m) - 1
        return seed >> self.m, seed & mask

    def eval_bit(self, seed, index):
        if not 1 <= index <= self.n_out:
            raise IndexError(f"index {index} outside [1, {self.n_out}]")
        a, b = self.split_seed(seed)
        return (self.field.pow(a, index - 1) & b).bit_count() & 1

    def eval_window(self, seed, start, length):
        """Bits ``start .. start+length-1`` (1-based) as a uint8 array."""
        if length < 0 or start < 1 or start + length - 1 > self.n_out:
            raise IndexError(f"window [{start}, {start + length}) outside [1, {self.n_out}]")
        if length == 0:
            return np.zeros(0, dtype=np.uint8)
        a, b = self.split_seed(seed)
        powers = self._powers(a, start - 1, length)
        return _inner_bits(powers, b, self.field.words)

    def stream(self, seed):
        return self.eval_window(seed, 1, self.n_out)

    def _powers(self, a, first, count):
        """a^first .. a^(first+count-1) as an array of shape (count, words)."""
        f = self.field
        cols = max(1, math.isqrt(count))
        rows = -(-count // cols)
        step = f.pow(a, cols)
        starts = []
        cur = f.pow(a, first)
        for _ in range(rows):
            starts.append(cur)
            cur = f.mul(cur, step)
        tables = f.mul_tables(a)
        block = np.zeros((cols, rows, f.words), dtype=np.uint64)
        vec = _split_words(starts, f.words)
        for c in range(cols):
            block[c] = vec
            vec = _apply_tables(tables, vec)
        # element (r, c) is a^(first + r*cols + c)
        flat = block.transpose(1, 0, 2).reshape(rows * cols, f.words)
        return flat[:count]


def _inner_bits(powers, b, words):
    mask = (1 << 64) - 1
    acc = np.zeros(len(powers), dtype=np.uint8)
    for w in range(words):
        bw = np.uint64((b >> (64 * w)) & mask)
        acc ^= (np.bitwise_count(powers[:, w] & bw) & 1).astype(np.uint8)
    return acc


def field_width(n_out, epsilon):
    """Smallest m with (n_out - 1) / 2^m <= epsilon."""
    eps = Fraction(epsilon)
    need = Fraction(max(n_out - 1, 1)) / eps
    m = max(1, math.ceil(math.log2(need)))
    while Fraction(1 << m) < need:
        m += 1
    while m > 1 and Fraction(1 << (m - 1)) >= need:
        m -= 1
    return m


def seed_length(n_out, kappa, epsilon):
    """Seed length in bits of the generator for these parameters."""
    if kappa < 1:
        raise ValueError("kappa must be >= 1")
    return SEED_CONSTANT * field_width(n_out, epsilon)


def seed_to_hex(seed, d):
    return format(seed, f"0{(d + 3) // 4}x")


_GOLDEN = (math.sqrt(5) - 1) / 2


def candidate_seed(index, d):
    """The ``index``-th seed of a fixed enumeration of {0,1}^d.

    Multiplication by an odd constant is a bijection mod 2^d, so the
    enumeration visits every seed once while consecutive candidates are far
    apart in the field.  Candidate 0 is seed 0.
    """
    mult = int(Fraction(_GOLDEN).limit_denominator(1 << 60) * (1 << d)) | 1
    return (index * mult) % (1 << d)
