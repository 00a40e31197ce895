"""Binary code for block edit errors built on a document-exchange sketch.

The message is masked with a pseudorandom string so that it holds no
buffer pattern and all its B-bit windows differ.  The sketch of the masked
message (plus the mask seed) is cut into indexed chunks protected by a
chunk-level Reed-Solomon code; every chunk is written after a buffer
``0^(l_buf-1) 1``.  Chunk bodies are bit-stuffed (a 1 after every l_buf-2
bits) so no buffer can appear inside an intact chunk.

The decoder finds every buffer, reads the fixed number of bits after it,
places chunks by index and decodes the sketch with erasures for missing or
conflicting chunks.  What is left over is the corrupted message, which the
document-exchange protocol repairs.
"""

import math
import struct
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from . import bdistinct, levels
from .bits import as_bits, from_bytes, pack_ints, to_bytes, unpack_ints
from .levels import RecoveryFailure
from .prg import SmallBiasGenerator, candidate_seed
from .container import SketchFile
from .rs import DecodeFailure, FieldSizeError, parity_width, rs_correct, rs_parity

ARMOR_CONSTANT = 4     # c_a: chunk-level distance 2 c_a (k + ceil(t / log n)) + 1
INDEX_BITS = 16
PAYLOAD_FACTOR = 4     # payload bits per chunk = PAYLOAD_FACTOR * ceil(log2 n), whole bytes
OPS_FACTOR = 3         # one codeword edit becomes at most 3 message edits
MAX_SEED_ATTEMPTS = 256
VARIANTS = ("levels", "bdist")


class DecodeError(RecoveryFailure):
    """The codeword could not be decoded; the message names the stage."""


class SeedExhausted(RuntimeError):
    """No mask seed in the search budget gave a usable masked message."""


def _lg(n):
    return max(1, math.ceil(math.log2(max(n, 2))))


@dataclass(frozen=True)
class CodecParams:
    n: int
    k: int
    t: int
    variant: str = "bdist"
    c_a: int = ARMOR_CONSTANT
    allow_raw: bool = True

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}")
        if self.n < 1 or self.k < 0 or self.t < 0:
            raise ValueError("need n >= 1 and non-negative k, t")

    @property
    def lg(self):
        return _lg(self.n)

    @property
    def l_buf(self):
        return 2 * self.lg

    @property
    def buf(self):
        b = np.zeros(self.l_buf, dtype=np.uint8)
        b[-1] = 1
        return b

    @property
    def B(self):
        return 3 * self.lg

    @property
    def payload_bits(self):
        return 8 * -(-PAYLOAD_FACTOR * self.lg // 8)

    @property
    def symbol_bits(self):
        """Width of the chunk payload field; parity symbols may be wider than data."""
        return parity_width(self.data_chunks, self.distance, self.payload_bits)

    @property
    def body_bits(self):
        return INDEX_BITS + self.symbol_bits

    @property
    def stuff_period(self):
        return self.l_buf - 2

    @property
    def chunk_len(self):
        """Stuffed chunk length (the bits read after each buffer)."""
        return self.body_bits + (self.body_bits - 1) // self.stuff_period

    @property
    def chunk_total(self):
        return self.l_buf + self.chunk_len

    @property
    def chunk_total_bound(self):
        """Chunk length bound independent of the chunk count (payload fields are < P + 16 bits)."""
        body = INDEX_BITS + self.payload_bits + 16
        return self.l_buf + body + (body - 1) // self.stuff_period

    @property
    def k_msg(self):
        return OPS_FACTOR * self.k + 1

    @property
    def t_msg(self):
        return self.t + OPS_FACTOR * self.k * self.chunk_total_bound

    @property
    def distance(self):
        return 2 * self.c_a * (self.k + -(-self.t // self.lg)) + 1

    @property
    def seed_bits(self):
        g1, g2 = _generators(self.n)
        return g1.seed_length, g2.seed_length

    @property
    def backend(self):
        """Sketch actually armored: the chosen variant, or the raw message when smaller."""
        if self.allow_raw and _doc_sketch_bytes(self) >= _raw_sketch_bytes(self.n):
            return "raw"
        return self.variant

    @property
    def sketch_bytes(self):
        if self.backend == "raw":
            return _raw_sketch_bytes(self.n)
        return _doc_sketch_bytes(self)

    @property
    def sk_bytes(self):
        d1, d2 = self.seed_bits
        return self.sketch_bytes + (d1 + 7) // 8 + (d2 + 7) // 8

    @property
    def data_chunks(self):
        return max(1, -(-self.sk_bytes * 8 // self.payload_bits))

    @property
    def parity_chunks(self):
        return self.distance - 1

    @property
    def total_chunks(self):
        return self.data_chunks + self.parity_chunks

    @property
    def codeword_len(self):
        return self.n + self.total_chunks * self.chunk_total


@lru_cache(maxsize=256)
def _doc_sketch_bytes(params):
    mod = levels if params.variant == "levels" else bdistinct
    return mod.sketch_byte_length(params.n, params.k_msg, params.t_msg)


def _raw_sketch(x, k, t):
    x = as_bits(x)
    return SketchFile("raw", len(x), len(x), k, t, sections=[to_bytes(x)]).to_bytes()


@lru_cache(maxsize=64)
def _raw_sketch_bytes(n):
    return len(_raw_sketch(np.zeros(n, dtype=np.uint8), 0, 0))


@lru_cache(maxsize=16)
def _generators(n):
    """The two generators whose outputs are XORed into the mask."""
    return (SmallBiasGenerator(n, Fraction(1, max(n, 2) ** 3)),
            SmallBiasGenerator(n, Fraction(1, max(n, 2) ** 4)))


def prg(seed, n):
    r1, r2 = seed
    g1, g2 = _generators(n)
    return g1.stream(r1) ^ g2.stream(r2)


def seed_candidate(j, n):
    g1, g2 = _generators(n)
    return candidate_seed(j, g1.seed_length), candidate_seed(j + 1, g2.seed_length)


def contains_buf(x, l_buf):
    """True iff some 1 is preceded by at least l_buf - 1 zeros."""
    return len(buf_ends(x, l_buf)) > 0


def buf_ends(x, l_buf):
    """0-based positions of the final 1 of every buffer occurrence."""
    x = as_bits(x)
    ones = np.nonzero(x)[0]
    if len(ones) == 0:
        return ones
    prev = np.concatenate(([-1], ones[:-1]))
    return ones[ones - prev - 1 >= l_buf - 1]


def is_good_mask(masked, params):
    return (not contains_buf(masked, params.l_buf)
            and (params.B > len(masked) or bdistinct.is_b_distinct(masked, params.B)))


def find_good_seed(msg, params, max_attempts=MAX_SEED_ATTEMPTS, return_attempts=False):
    """First seed pair whose mask leaves msg buffer-free and B-distinct."""
    msg = as_bits(msg)
    for j in range(1, max_attempts + 1):
        seed = seed_candidate(j, len(msg))
        if is_good_mask(msg ^ prg(seed, len(msg)), params):
            return (seed, j) if return_attempts else seed
    raise SeedExhausted(f"no good mask seed among {max_attempts} candidates")


def _stuff(body, period):
    groups = [body[i:i + period] for i in range(0, len(body), period)]
    out = []
    for g in groups[:-1]:
        out.append(g)
        out.append(np.ones(1, dtype=np.uint8))
    out.append(groups[-1])
    return np.concatenate(out)


def _unstuff(chunk, period):
    """Body bits, or None when a stuffing bit is not 1."""
    step = period + 1
    marks = chunk[period::step]
    if not marks.all():
        return None
    keep = np.ones(len(chunk), dtype=bool)
    keep[period::step] = False
    return chunk[keep]


def armor_encode(sk, params):
    """Buffered chunk sequence carrying sk under chunk-level RS parity."""
    sk = bytes(sk)
    if not sk:
        raise ValueError("nothing to armor")
    M, P, W = params.data_chunks, params.payload_bits, params.symbol_bits
    if params.total_chunks >= 1 << INDEX_BITS:
        raise FieldSizeError("too many chunks for the index field")
    bits = from_bytes(sk)
    bits = np.concatenate([bits, np.zeros(M * P - len(bits), dtype=np.uint8)])
    data = unpack_ints(to_bytes(bits), P, M)
    parity = rs_parity(data, params.distance, P)
    buf = params.buf
    out = []
    for idx, sym in enumerate(list(data) + list(parity)):
        body = np.concatenate([from_bytes(pack_ints([idx], INDEX_BITS)),
                               from_bytes(pack_ints([sym], W))[:W]])
        out.append(buf)
        out.append(_stuff(body, params.stuff_period))
    return np.concatenate(out)


def scan_buffers(c, params):
    """Buffer occurrences with the chunk bits after each, plus the leftover bits.

    Returns (occurrences, message) where occurrences is a list of
    (end position, chunk bits); chunk bits are shorter than chunk_len when
    the string ends first.
    """
    c = as_bits(c)
    ends = buf_ends(c, params.l_buf)
    removed = np.zeros(len(c) + 1, dtype=np.int64)
    occ = []
    for e in ends.tolist():
        chunk = c[e + 1:e + 1 + params.chunk_len]
        occ.append((e, chunk))
        removed[e - params.l_buf + 1] += 1
        removed[min(len(c), e + 1 + params.chunk_len)] -= 1
    keep = np.cumsum(removed[:-1]) == 0
    return occ, c[keep]


def armor_decode(occurrences, params, stats=None):
    """Rebuild sk from scanned chunks; bad, missing or clashing chunks are erasures."""
    M, P, N = params.data_chunks, params.payload_bits, params.total_chunks
    W = params.symbol_bits
    seen = {}
    clash = set()
    short = bad = 0
    for _, chunk in occurrences:
        if len(chunk) < params.chunk_len:
            short += 1
            continue
        body = _unstuff(chunk, params.stuff_period)
        if body is None:
            bad += 1
            continue
        idx = int(unpack_ints(to_bytes(body[:INDEX_BITS]), INDEX_BITS, 1)[0])
        sym = int(unpack_ints(to_bytes(body[INDEX_BITS:]), W, 1)[0])
        if idx >= N or (idx < M and sym >> P):
            bad += 1
            continue
        if idx in seen and seen[idx] != sym:
            clash.add(idx)
        seen.setdefault(idx, sym)
    word = [0] * N
    erasures = []
    for idx in range(N):
        if idx in seen and idx not in clash:
            word[idx] = seen[idx]
        else:
            erasures.append(idx)
    if stats is not None:
        stats.update(chunks_seen=len(occurrences), short=short, malformed=bad,
                     clashes=len(clash), erasures=len(erasures))
    if len(erasures) >= params.distance:
        raise DecodeError(f"armor: {len(erasures)} chunk erasures exceed the code distance")
    try:
        data = rs_correct(word[:M], word[M:], params.distance, P, erasures)
    except DecodeFailure as exc:
        raise DecodeError(f"armor: chunk decode failed: {exc}") from None
    return pack_ints(data, P)[:params.sk_bytes]


def _split_sk(sk, params):
    d1, d2 = params.seed_bits
    nb1, nb2 = (d1 + 7) // 8, (d2 + 7) // 8
    body = sk[:params.sketch_bytes]
    r1 = int(unpack_ints(sk[params.sketch_bytes:params.sketch_bytes + nb1], 8 * nb1, 1)[0])
    r2 = int(unpack_ints(sk[params.sketch_bytes + nb1:params.sketch_bytes + nb1 + nb2],
                         8 * nb2, 1)[0])
    return body, (r1, r2)


def _doc_sketch(x, params):
    if params.backend == "raw":
        return _raw_sketch(x, params.k_msg, params.t_msg)
    if params.variant == "levels":
        return levels.alice_sketch(x, params.k_msg, params.t_msg).to_bytes()
    return bdistinct.sketch_rand(x, params.k_msg, params.t_msg).to_bytes()


def _doc_recover(y, sk, params, truth=None, stats=None):
    if params.variant == "levels":
        st = [] if stats is not None else None
        out = levels.bob_recover(y, sk, truth=truth, stats=st)
    else:
        st = {} if stats is not None else None
        out = bdistinct.recover_rand(y, sk, truth=truth, stats=st)
    if stats is not None:
        stats["sketch"] = st
    return out


@dataclass
class Codeword:
    bits: np.ndarray
    params: CodecParams
    seed: tuple = None

    @property
    def redundancy(self):
        return len(self.bits) - self.params.n

    def to_bytes(self):
        return codeword_to_bytes(self.bits, self.params)


def encode(msg, k, t, variant="bdist", allow_raw=True):
    msg = as_bits(msg)
    params = CodecParams(len(msg), k, t, variant, allow_raw=allow_raw)
    seed = find_good_seed(msg, params)
    masked = msg ^ prg(seed, len(msg))
    d1, d2 = params.seed_bits
    sk = (_doc_sketch(masked, params)
          + pack_ints([seed[0]], 8 * ((d1 + 7) // 8))
          + pack_ints([seed[1]], 8 * ((d2 + 7) // 8)))
    if len(sk) != params.sk_bytes:
        raise AssertionError("sketch size differs from the parameter formula")
    armored = armor_encode(sk, params)
    return Codeword(np.concatenate([masked, armored]), params, seed)


def decode(c, params, truth=None, stats=None):
    """Message from a corrupted codeword; ``truth`` (the masked message) feeds instrumentation."""
    occ, rest = scan_buffers(c, params)
    st = {} if stats is not None else None
    sk = armor_decode(occ, params, st)
    body, seed = _split_sk(sk, params)
    if stats is not None:
        stats["armor"] = st
        stats["message_part_len"] = len(rest)
    try:
        masked = _doc_recover(rest, body, params, truth=truth, stats=stats)
    except RecoveryFailure as exc:
        raise DecodeError(f"message: {exc}") from None
    except (ValueError, IndexError) as exc:
        raise DecodeError(f"message: malformed sketch ({exc})") from None
    if len(masked) != params.n:
        raise DecodeError("message: recovered length differs from n")
    return masked ^ prg(seed, params.n)


MAGIC = b"BSC1"
_HEADER = struct.Struct("<4sQIIBBQ")


def codeword_to_bytes(bits, params):
    bits = as_bits(bits)
    head = _HEADER.pack(MAGIC, params.n, params.k, params.t,
                        VARIANTS.index(params.variant), int(params.allow_raw), len(bits))
    return head + to_bytes(bits)


def codeword_from_bytes(data):
    data = bytes(data)
    if len(data) < _HEADER.size or data[:4] != MAGIC:
        raise ValueError("not a BSC1 codeword file")
    _, n, k, t, var, allow_raw, nbits = _HEADER.unpack_from(data)
    if var >= len(VARIANTS):
        raise ValueError(f"unknown variant code {var}")
    bits = from_bytes(data[_HEADER.size:])
    if len(bits) < nbits:
        raise ValueError("truncated codeword file")
    return bits[:nbits], CodecParams(n, k, t, VARIANTS[var], allow_raw=bool(allow_raw))
