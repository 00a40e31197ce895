"""Log/antilog tables for the small fields GF(2^m), 2 <= m <= 16."""

from functools import lru_cache

import numpy as np

# primitive polynomials, lowest-weight choices
PRIMITIVE = {
    2: 0x7, 3: 0xB, 4: 0x13, 5: 0x25, 6: 0x43, 7: 0x89, 8: 0x11D,
    9: 0x211, 10: 0x409, 11: 0x805, 12: 0x1053, 13: 0x201B,
    14: 0x4443, 15: 0x8003, 16: 0x1100B,
}
MAX_M = 16


class Field:
    """GF(2^m) with numpy exp/log tables.

    ``exp`` has length 2*(2^m - 1) so sums of two logs index it directly.
    ``log[0]`` is a sentinel and must be masked by the caller.
    """

    def __init__(self, m):
        if m not in PRIMITIVE:
            raise ValueError(f"field width {m} outside [2, {MAX_M}]")
        self.m = m
        self.size = 1 << m
        self.order = self.size - 1
        exp = np.zeros(2 * self.order, dtype=np.int64)
        log = np.zeros(self.size, dtype=np.int64)
        v = 1
        for i in range(self.order):
            exp[i] = v
            log[v] = i
            v <<= 1
            if v & self.size:
                v ^= PRIMITIVE[m]
        exp[self.order:] = exp[:self.order]
        self.exp = exp
        self.log = log

    def mul(self, a, b):
        if a == 0 or b == 0:
            return 0
        return int(self.exp[self.log[a] + self.log[b]])

    def div(self, a, b):
        if b == 0:
            raise ZeroDivisionError("division by zero in GF(2^m)")
        if a == 0:
            return 0
        return int(self.exp[(self.log[a] - self.log[b]) % self.order])

    def inv(self, a):
        return self.div(1, a)

    def pow_alpha(self, e):
        return int(self.exp[e % self.order])

    def vmul(self, a, b):
        """Elementwise product of broadcastable integer arrays."""
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        out = self.exp[self.log[a] + self.log[b]]
        return np.where((a == 0) | (b == 0), 0, out)

    def vscale(self, a, c):
        """Multiply array ``a`` by the scalar ``c``."""
        a = np.asarray(a, dtype=np.int64)
        if c == 0:
            return np.zeros_like(a)
        out = self.exp[self.log[a] + self.log[c]]
        return np.where(a == 0, 0, out)

    def poly_eval(self, coeffs, x):
        """Horner evaluation; coeffs lowest degree first."""
        acc = 0
        for c in reversed(coeffs):
            acc = self.mul(acc, x) ^ int(c)
        return acc

    def poly_mul(self, a, b):
        out = np.zeros(len(a) + len(b) - 1, dtype=np.int64)
        for i, c in enumerate(a):
            if c:
                out[i:i + len(b)] ^= self.vscale(b, int(c))
        return out


@lru_cache(maxsize=None)
def field(m):
    return Field(m)


def xor_reduce(arr, axis=0):
    return np.bitwise_xor.reduce(arr, axis=axis)
