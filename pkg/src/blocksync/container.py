"""The ``BSX1`` sketch container shared by both protocol variants.

Layout (little-endian): magic, fixed header, section count, then each
section as a 32-bit byte length followed by its bytes.
"""

import struct
from dataclasses import dataclass, field

MAGIC = b"BSX1"
_HEADER = struct.Struct("<4sQQIIHHBHH")
_LEN = struct.Struct("<I")

VARIANTS = {"levels": 0, "bdist": 1, "raw": 2}
VARIANT_NAMES = {v: k for k, v in VARIANTS.items()}


class SketchFormatError(ValueError):
    pass


@dataclass
class SketchFile:
    variant: str
    n_true: int
    n_padded: int
    k: int
    t: int
    L: int = 0
    q: int = 0
    c: int = 0
    c_final: int = 0
    sections: list = field(default_factory=list)

    def to_bytes(self):
        head = _HEADER.pack(MAGIC, self.n_true, self.n_padded, self.k, self.t,
                            self.L, self.q, VARIANTS[self.variant], self.c, self.c_final)
        body = [struct.pack("<H", len(self.sections))]
        for sec in self.sections:
            body.append(_LEN.pack(len(sec)))
            body.append(bytes(sec))
        return head + b"".join(body)

    @classmethod
    def from_bytes(cls, data):
        data = bytes(data)
        if len(data) < _HEADER.size + 2 or data[:4] != MAGIC:
            raise SketchFormatError("not a BSX1 sketch")
        magic, n_true, n_pad, k, t, L, q, var, c, cf = _HEADER.unpack_from(data)
        if var not in VARIANT_NAMES:
            raise SketchFormatError(f"unknown variant code {var}")
        pos = _HEADER.size
        (count,) = struct.unpack_from("<H", data, pos)
        pos += 2
        sections = []
        for _ in range(count):
            if pos + _LEN.size > len(data):
                raise SketchFormatError("truncated section table")
            (size,) = _LEN.unpack_from(data, pos)
            pos += _LEN.size
            if pos + size > len(data):
                raise SketchFormatError("truncated section")
            sections.append(data[pos:pos + size])
            pos += size
        return cls(VARIANT_NAMES[var], n_true, n_pad, k, t, L, q, c, cf, sections)

    def section_sizes(self):
        return [len(s) for s in self.sections]
