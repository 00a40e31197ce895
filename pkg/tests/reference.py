"""Slow, independent reference arithmetic used to cross-check the library."""


def gf_mul(a, b, m, poly):
    """Shift-and-add product in GF(2^m) modulo ``poly`` (bit m set)."""
    out = 0
    while b:
        if b & 1:
            out ^= a
        b >>= 1
        a <<= 1
        if a >> m:
            a ^= poly
    return out


def gf_pow(a, e, m, poly):
    out = 1
    for _ in range(e):
        out = gf_mul(out, a, m, poly)
    return out


def poly_mul(p, q, m, poly):
    """Product of coefficient lists (highest degree first)."""
    out = [0] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        for j, b in enumerate(q):
            out[i + j] ^= gf_mul(a, b, m, poly)
    return out


def rs_generator(r, m, poly):
    g = [1]
    for j in range(1, r + 1):
        g = poly_mul(g, [1, gf_pow(2, j, m, poly)], m, poly)
    return g


def rs_parity(data, r, m, poly):
    """Remainder of data(x) * x^r divided by the generator, highest degree first."""
    g = rs_generator(r, m, poly)
    work = list(data) + [0] * r
    for i in range(len(data)):
        coef = work[i]
        if coef:
            for j in range(1, r + 1):
                work[i + j] ^= gf_mul(coef, g[j], m, poly)
    return work[len(data):]


def rs_syndromes(word, r, m, poly):
    """word(alpha^j) for j = 1..r, word highest degree first."""
    out = []
    for j in range(1, r + 1):
        a = gf_pow(2, j, m, poly)
        acc = 0
        for c in word:
            acc = gf_mul(acc, a, m, poly) ^ c
        out.append(acc)
    return out


def char_poly_coeffs(elements, p):
    """Coefficients (lowest degree first) of prod (z - v) mod p."""
    c = [1]
    for v in elements:
        nxt = [0] * (len(c) + 1)
        for i, a in enumerate(c):
            nxt[i + 1] = (nxt[i + 1] + a) % p
            nxt[i] = (nxt[i] - a * v) % p
        c = nxt
    return c


def horner(coeffs, z, p):
    acc = 0
    for a in reversed(coeffs):
        acc = (acc * z + a) % p
    return acc
