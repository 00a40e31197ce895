"""Systematic Reed-Solomon redundancy with errors-and-erasures decoding.

Symbols wider than the field are split into interleaved lanes: lane ``j``
holds bits ``[j*fw, (j+1)*fw)`` of every symbol and is coded separately.
A symbol error hits the same position in every lane, so each lane sees the
same error pattern and the lane codes together still correct any ``e``
errors and ``s`` erasures with ``2e + s < d``.

Codeword layout: ``data[0..K) + parity[0..d-1)``; array position ``p``
carries the coefficient of ``x^(K + d - 2 - p)``.  The generator has roots
``alpha^1 .. alpha^(d-1)``.
"""

import math
from functools import lru_cache

import numpy as np

from .gf import MAX_M, field


class FieldSizeError(ValueError):
    """Code length does not fit any supported field."""


class DecodeFailure(Exception):
    """No codeword lies within the decoding radius of the received word."""


def field_plan(n_total, width):
    """(field width, lane count) for codes of total length ``n_total``."""
    need = max(2, math.ceil(math.log2(n_total + 1)))
    if need > MAX_M:
        raise FieldSizeError(
            f"code length {n_total} exceeds 2^{MAX_M} - 1; split the data")
    width = max(width, 1)
    lanes = -(-width // need)
    fw = max(need, -(-width // lanes))
    return fw, lanes


def parity_width(n_data, d, width):
    fw, lanes = field_plan(n_data + d - 1, width)
    return fw * lanes


@lru_cache(maxsize=64)
def _generator(m, r):
    f = field(m)
    g = np.array([1], dtype=np.int64)
    for j in range(1, r + 1):
        g = f.poly_mul(g, np.array([f.pow_alpha(j), 1], dtype=np.int64))
    return g  # lowest degree first, monic, length r+1


@lru_cache(maxsize=32)
def _encode_logs(m, k, r):
    """log table of the (k, r) matrix mapping data to parity (-1 for zero)."""
    f = field(m)
    g = _generator(m, r)
    low = g[:r].copy()
    rem = low.copy()  # x^r mod g, lowest degree first
    rows = np.zeros((k, r), dtype=np.int64)
    # data index i carries x^(r + k - 1 - i); fill from the last data symbol up
    for i in range(k - 1, -1, -1):
        rows[i] = rem[::-1]  # parity index j carries x^(r - 1 - j)
        top = rem[r - 1]
        rem = np.concatenate(([0], rem[:-1]))
        if top:
            rem ^= f.vscale(low, int(top))
    logs = f.log[rows]
    logs[rows == 0] = -1
    return logs


def _split_lanes(symbols, fw, lanes, width):
    n = len(symbols)
    out = np.zeros((lanes, n), dtype=np.int64)
    if n == 0:
        return out
    mask = (1 << fw) - 1
    if width <= 62 and lanes * fw <= 62:
        arr = np.asarray(symbols, dtype=np.int64)
        if arr.min() < 0 or (arr >> (lanes * fw)).any():
            raise ValueError("symbol wider than the declared width")
        for j in range(lanes):
            out[j] = (arr >> (j * fw)) & mask
        return out
    for i, s in enumerate(symbols):
        s = int(s)
        if s < 0 or s >> (lanes * fw):
            raise ValueError("symbol wider than the declared width")
        for j in range(lanes):
            out[j, i] = (s >> (j * fw)) & mask
    return out


def _join_lanes(arr, fw):
    lanes, n = arr.shape
    if lanes * fw <= 62:
        acc = np.zeros(n, dtype=np.int64)
        for j in range(lanes):
            acc |= arr[j] << (j * fw)
        return [int(v) for v in acc]
    out = []
    for i in range(n):
        v = 0
        for j in range(lanes):
            v |= int(arr[j, i]) << (j * fw)
        out.append(v)
    return out


def _lane_parity(f, logs, data):
    dl = np.where(data == 0, -1, f.log[data])
    both = (dl[:, None] >= 0) & (logs >= 0)
    prod = np.where(both, f.exp[np.where(both, dl[:, None] + logs, 0)], 0)
    return np.bitwise_xor.reduce(prod, axis=0)


def rs_parity(data, d, width):
    """Parity symbols (``d - 1`` of them) for a systematic RS code.

    ``data`` holds ``width``-bit symbols; parity symbols are
    ``parity_width(len(data), d, width)`` bits wide.
    """
    if d < 1:
        raise ValueError("design distance must be >= 1")
    r = d - 1
    k = len(data)
    if r == 0:
        return []
    fw, lanes = field_plan(k + r, width)
    f = field(fw)
    if k == 0:
        return [0] * r
    logs = _encode_logs(fw, k, r)
    lanes_in = _split_lanes(data, fw, lanes, width)
    out = np.stack([_lane_parity(f, logs, lanes_in[j]) for j in range(lanes)])
    return _join_lanes(out, fw)


def _syndromes(f, word, exps, r):
    nz = np.nonzero(word)[0]
    if len(nz) == 0:
        return np.zeros(r, dtype=np.int64)
    lw = f.log[word[nz]]
    j = np.arange(1, r + 1, dtype=np.int64)
    idx = (lw[:, None] + (exps[nz][:, None] * j[None, :])) % f.order
    return np.bitwise_xor.reduce(f.exp[idx], axis=0)


def _decode_lane(f, word, r, erasures):
    n = len(word)
    exps = np.arange(n - 1, -1, -1, dtype=np.int64)
    synd = _syndromes(f, word, exps, r)
    if not synd.any():
        return word
    rho = len(erasures)
    # erasure locator prod (1 - X x)
    gamma = np.array([1], dtype=np.int64)
    for p in erasures:
        gamma = f.poly_mul(gamma, np.array([1, f.pow_alpha(int(exps[p]))], dtype=np.int64))
    lam = np.zeros(r + 1, dtype=np.int64)
    lam[:len(gamma)] = gamma
    b = lam.copy()
    ell = rho
    for kk in range(rho, r):
        # discrepancy sum_i lam_i S_{kk-i}
        top = min(kk, r)
        coeffs = lam[:top + 1]
        sv = synd[kk - np.arange(top + 1)]
        delta = int(np.bitwise_xor.reduce(f.vmul(coeffs, sv))) if top >= 0 else 0
        shifted = np.concatenate(([0], b[:-1]))
        if delta == 0:
            b = shifted
            continue
        new = lam ^ f.vscale(shifted, delta)
        if 2 * ell <= kk + rho:
            b = f.vscale(lam, f.inv(delta))
            ell = kk + 1 + rho - ell
        else:
            b = shifted
        lam = new
    deg = int(np.max(np.nonzero(lam)[0]))
    if deg != ell or 2 * (ell - rho) + rho > r:
        raise DecodeFailure("too many errors for the design distance")
    lam = lam[:deg + 1]
    # roots at X_p^{-1} for the error positions
    inv_exp = (-exps) % f.order
    powers = (np.arange(deg + 1, dtype=np.int64)[:, None] * inv_exp[None, :]) % f.order
    lam_l = np.where(lam == 0, -1, f.log[lam])
    terms = np.where(lam_l[:, None] >= 0, f.exp[(np.maximum(lam_l, 0)[:, None] + powers) % f.order], 0)
    vals = np.bitwise_xor.reduce(terms, axis=0)
    pos = np.nonzero(vals == 0)[0]
    if len(pos) != deg:
        raise DecodeFailure("error locator does not split over the code positions")
    omega = f.poly_mul(synd, lam)[:r]
    deriv = lam.copy()
    deriv[0::2] = 0
    deriv = deriv[1:]  # lam'(x) = sum_{odd i} lam_i x^{i-1}
    out = word.copy()
    for p in pos:
        xinv = f.pow_alpha(int(inv_exp[p]))
        num = f.poly_eval(omega, xinv)
        den = f.poly_eval(deriv, xinv)
        if den == 0:
            raise DecodeFailure("repeated root in error locator")
        out[p] ^= f.div(num, den)
    if _syndromes(f, out, exps, r).any():
        raise DecodeFailure("correction did not yield a codeword")
    return out


def rs_correct(received, parity, d, width, erasures=()):
    """Corrected data symbols from a received data vector and its parity.

    ``erasures`` lists positions (0-based over data followed by parity) whose
    values are unknown.  Raises :class:`DecodeFailure` when no codeword lies
    within the radius ``2e + s < d``.
    """
    r = d - 1
    k = len(received)
    if len(parity) != r:
        raise ValueError(f"expected {r} parity symbols, got {len(parity)}")
    erasures = sorted(set(int(p) for p in erasures))
    if any(p < 0 or p >= k + r for p in erasures):
        raise ValueError("erasure position out of range")
    if r == 0:
        if erasures:
            raise DecodeFailure("erasures with no redundancy")
        return [int(v) for v in received]
    if len(erasures) > r:
        raise DecodeFailure(f"{len(erasures)} erasures exceed redundancy {r}")
    fw, lanes = field_plan(k + r, width)
    f = field(fw)
    pw = fw * lanes
    erased = set(erasures)
    recv = [0 if i in erased else int(s) for i, s in enumerate(received)]
    par = [0 if (k + i) in erased else int(s) for i, s in enumerate(parity)]
    words = np.concatenate(
        [_split_lanes(recv, fw, lanes, pw), _split_lanes(par, fw, lanes, pw)], axis=1)
    fixed = np.stack([_decode_lane(f, words[j], r, erasures) for j in range(lanes)])
    out = _join_lanes(fixed[:, :k], fw)
    if width < pw and any(v >> width for v in out):
        raise DecodeFailure("corrected symbol exceeds the declared width")
    return out
