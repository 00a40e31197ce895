"""Bit-string helpers.

Bit strings are 1-D ``numpy.uint8`` arrays of zeros and ones.  Most public
functions also accept ``'0'/'1'`` text or any integer sequence and normalise
through :func:`as_bits`.
"""

import numpy as np


def as_bits(x):
    if isinstance(x, np.ndarray):
        if x.dtype == np.uint8 and x.ndim == 1:
            return x
        return np.asarray(x, dtype=np.uint8).reshape(-1)
    if isinstance(x, str):
        if x and set(x) - {"0", "1"}:
            raise ValueError("bit string may only contain '0' and '1'")
        return np.frombuffer(x.encode("ascii"), dtype=np.uint8) - ord("0")
    if isinstance(x, (bytes, bytearray)):
        raise TypeError("use from_bytes() for raw bytes")
    return np.asarray(list(x), dtype=np.uint8).reshape(-1)


def to_str(x):
    return (as_bits(x) + ord("0")).tobytes().decode("ascii")


def from_bytes(data):
    """Unpack raw bytes MSB-first into a bit array."""
    return np.unpackbits(np.frombuffer(bytes(data), dtype=np.uint8))


def to_bytes(x):
    """Pack bits MSB-first, zero padding the final byte."""
    return np.packbits(as_bits(x)).tobytes()


def random_bits(n, rng):
    return rng.integers(0, 2, size=n, dtype=np.uint8)


def bits_to_int(x):
    """Big-endian integer value of a bit string (empty string -> 0)."""
    x = as_bits(x)
    if len(x) == 0:
        return 0
    pad = (-len(x)) % 8
    return int.from_bytes(np.packbits(x).tobytes(), "big") >> pad


def int_to_bits(value, width):
    if value < 0 or value >> width:
        raise ValueError(f"{value} does not fit in {width} bits")
    nbytes = (width + 7) // 8
    raw = np.frombuffer(value.to_bytes(nbytes, "big"), dtype=np.uint8)
    return np.unpackbits(raw)[8 * nbytes - width:]


def window_ints(x, width):
    """Integer value of every length-``width`` window of ``x`` (width <= 64).

    Returns a ``uint64`` array of length ``len(x) - width + 1``; window i is
    read big-endian from ``x[i:i+width]``.
    """
    x = as_bits(x)
    if width > 64:
        raise ValueError("window_ints supports widths up to 64")
    n = len(x) - width + 1
    if n <= 0:
        return np.zeros(0, dtype=np.uint64)
    out = np.zeros(n, dtype=np.uint64)
    xs = x.astype(np.uint64)
    for j in range(width):
        out <<= np.uint64(1)
        out |= xs[j:j + n]
    return out


def pack_rows(rows):
    """Pack a (N, w) 0/1 matrix into a list of Python ints (big-endian rows)."""
    rows = np.asarray(rows, dtype=np.uint8)
    n, w = rows.shape
    if w <= 64:
        weights = (np.uint64(1) << np.arange(w - 1, -1, -1, dtype=np.uint64))
        vals = (rows.astype(np.uint64) * weights).sum(axis=1, dtype=np.uint64)
        return [int(v) for v in vals]
    pad = (-w) % 8
    packed = np.packbits(rows, axis=1)
    return [int.from_bytes(r.tobytes(), "big") >> pad for r in packed]


def pack_ints(values, width):
    """Concatenate fixed-width unsigned ints into bytes (first value first)."""
    acc = 0
    for v in values:
        v = int(v)
        if v < 0 or v >> width:
            raise ValueError(f"{v} does not fit in {width} bits")
        acc = (acc << width) | v
    nbits = width * len(values)
    nbytes = (nbits + 7) // 8
    return (acc << (8 * nbytes - nbits)).to_bytes(nbytes, "big")


def unpack_ints(data, width, count):
    nbits = width * count
    nbytes = (nbits + 7) // 8
    if len(data) < nbytes:
        raise ValueError("truncated integer section")
    acc = int.from_bytes(bytes(data[:nbytes]), "big") >> (8 * nbytes - nbits)
    mask = (1 << width) - 1
    return [(acc >> (width * (count - 1 - i))) & mask for i in range(count)]
