"""Command-line front end: sketch, recover, encode, decode, corrupt, stats.

Exit codes: 0 ok, 2 usage, 3 recovery failure, 4 I/O.
"""

import argparse
import csv
import logging
import sys
import time

import numpy as np

from . import bdistinct, ecc, levels
from .bits import from_bytes, random_bits, to_bytes
from .container import SketchFile, SketchFormatError
from .edits import BlockEditTrace, InvalidOperation, apply_trace, sample_byte_trace, sample_trace
from .levels import RecoveryFailure

log = logging.getLogger("blocksync")
EXIT_OK, EXIT_USAGE, EXIT_RECOVERY, EXIT_IO = 0, 2, 3, 4
CSV_COLUMNS = ["n", "k", "t", "variant", "sketch_bits", "redundancy_bits", "recover_ok", "wall_ms"]


class UsageError(Exception):
    pass


def _read(path):
    try:
        with open(path, "rb") as fh:
            return fh.read()
    except OSError as exc:
        raise IOError(f"cannot read {path}: {exc.strerror}") from None


def _write(path, data):
    try:
        with open(path, "wb") as fh:
            fh.write(data)
    except OSError as exc:
        raise IOError(f"cannot write {path}: {exc.strerror}") from None


def _budgets(args):
    if args.k < 0 or args.t < 0:
        raise UsageError("--k and --t must be non-negative")


def make_sketch(x, k, t, variant):
    """Sketch object for the chosen variant (the library call the CLI wraps)."""
    if variant == "levels":
        return levels.alice_sketch(x, k, t)
    p = bdistinct.make_params(len(x), k, t)
    if not p.passthrough and not bdistinct.is_b_distinct(x, p.B):
        raise UsageError(f"input is not {p.B}-distinct; use --variant levels or encode/decode")
    return bdistinct.sketch_rand(x, k, t)


def recover_any(y, data):
    """Recover from a serialized sketch of either variant."""
    f = SketchFile.from_bytes(data)
    if f.variant == "bdist":
        stats = {}
        x = bdistinct.recover_rand(y, bdistinct.BDistSketch.from_file(f), stats=stats)
        log.debug("bdist recovery stats: %s", stats)
        return x
    return levels.bob_recover(y, levels.LevelsSketch.from_file(f))


def breakdown(sketch):
    mod = levels if isinstance(sketch, levels.LevelsSketch) else bdistinct
    return mod.sketch_breakdown(sketch)


def cmd_sketch(args):
    _budgets(args)
    data = _read(args.file)
    if not data:
        raise UsageError("input file is empty")
    sk = make_sketch(from_bytes(data), args.k, args.t, args.variant)
    blob = sk.to_bytes()
    _write(args.out, blob)
    print(f"sketch {len(blob) * 8} bits ({len(blob)} bytes), variant {SketchFile.from_bytes(blob).variant}")
    for name, size in breakdown(sk).items():
        print(f"  {name}: {size} bytes")
    return EXIT_OK


def cmd_recover(args):
    sk = _read(args.sketch)
    y = from_bytes(_read(args.file))
    try:
        x = recover_any(y, sk)
    except SketchFormatError as exc:
        raise UsageError(f"bad sketch file: {exc}") from None
    _write(args.out, to_bytes(x))
    print(f"recovered {len(x)} bits")
    return EXIT_OK


def cmd_encode(args):
    _budgets(args)
    data = _read(args.file)
    if not data:
        raise UsageError("input file is empty")
    cw = ecc.encode(from_bytes(data), args.k, args.t, args.variant)
    blob = cw.to_bytes()
    _write(args.out, blob)
    print(f"codeword {len(cw.bits)} bits, redundancy {cw.redundancy} bits, "
          f"backend {cw.params.backend}")
    return EXIT_OK


def cmd_decode(args):
    blob = _read(args.file)
    try:
        bits, params = ecc.codeword_from_bytes(blob)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    stats = {}
    msg = ecc.decode(bits, params, stats=stats)
    log.debug("decode stats: %s", stats)
    _write(args.out, to_bytes(msg))
    print(f"decoded {len(msg)} bits; codeword {len(bits)} bits, redundancy "
          f"{len(bits) - len(msg)} bits")
    return EXIT_OK


def cmd_corrupt(args):
    """Corrupt a codeword (bit-level edits) or a raw file (byte-aligned edits)."""
    _budgets(args)
    blob = _read(args.file)
    try:
        bits, params = ecc.codeword_from_bytes(blob)
    except ValueError:
        bits, params = from_bytes(blob), None
    if args.replay:
        trace = BlockEditTrace.loads(_read(args.replay).decode())
    elif params is not None:
        trace = sample_trace(args.seed, len(bits), args.k, args.t)
    else:
        trace = sample_byte_trace(args.seed, len(blob), args.k, args.t)
    y = apply_trace(bits, trace)
    if params is not None:
        out = ecc.codeword_to_bytes(y, params)
    elif len(y) % 8:
        raise UsageError("trace leaves a partial byte; raw files need byte-aligned edits")
    else:
        out = to_bytes(y)
    _write(args.out, out)
    if args.trace_out:
        _write(args.trace_out, trace.dumps().encode())
    print(f"applied {len(trace.ops)} ops, {trace.bits_moved} bits inserted/deleted")
    return EXIT_OK


def _sweep_point(n, k, t, variant, seed):
    rng = np.random.default_rng([seed, n, k, t])
    x = random_bits(n, rng)
    if variant == "bdist":
        B = bdistinct.make_params(n, k, t).B
        while not bdistinct.is_b_distinct(x, B):
            x = random_bits(n, rng)
    start = time.perf_counter()
    sk = make_sketch(x, k, t, variant)
    blob = sk.to_bytes()
    y = apply_trace(x, sample_trace(seed, n, k, t))
    try:
        ok = bool(np.array_equal(recover_any(y, blob), x))
    except RecoveryFailure:
        ok = False
    wall = (time.perf_counter() - start) * 1000
    red = ecc.CodecParams(n, k, t, variant).codeword_len - n
    return [n, k, t, variant, 8 * len(blob), red, ok, round(wall, 1)]


def _ints(text):
    try:
        return [int(v) for v in text.split(",") if v]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers: {text!r}") from None


def cmd_stats(args):
    variants = args.variant.split(",")
    for v in variants:
        if v not in ecc.VARIANTS:
            raise UsageError(f"unknown variant {v!r}")
    rows = []
    for n in args.n:
        for k in args.k:
            for t in args.t:
                for v in variants:
                    rows.append(_sweep_point(n, k, t, v, args.seed))
    fh = open(args.out, "w", newline="") if args.out != "-" else sys.stdout
    try:
        w = csv.writer(fh)
        w.writerow(CSV_COLUMNS)
        w.writerows(rows)
    finally:
        if fh is not sys.stdout:
            fh.close()
    return EXIT_OK


def build_parser():
    ap = argparse.ArgumentParser(prog="blocksync",
                                 description="Document exchange and codes for block edit errors.")
    ap.add_argument("-v", "--verbose", action="store_true", help="log recovery statistics to stderr")
    sub = ap.add_subparsers(dest="command", required=True)

    def budgets(p, variant=True):
        p.add_argument("--k", type=int, default=4, help="block edit budget")
        p.add_argument("--t", type=int, default=64, help="inserted/deleted bit budget")
        if variant:
            p.add_argument("--variant", choices=ecc.VARIANTS, default="levels")

    p = sub.add_parser("sketch", help="write Alice's sketch of a file")
    p.add_argument("file")
    budgets(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sketch)

    p = sub.add_parser("recover", help="rebuild the original from a sketch and a corrupted copy")
    p.add_argument("sketch")
    p.add_argument("file")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_recover)

    p = sub.add_parser("encode", help="encode a file into a codeword")
    p.add_argument("file")
    budgets(p)
    p.set_defaults(variant="bdist")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("decode", help="decode a (corrupted) codeword")
    p.add_argument("file")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("corrupt", help="apply a random (k, t) block edit trace")
    p.add_argument("file")
    budgets(p, variant=False)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--trace-out", help="write the applied trace here")
    p.add_argument("--replay", help="apply this trace file instead of sampling one")
    p.set_defaults(func=cmd_corrupt)

    p = sub.add_parser("stats", help="sweep parameters and emit CSV")
    p.add_argument("--n", type=_ints, default=[4096, 8192])
    p.add_argument("--k", type=_ints, default=[4])
    p.add_argument("--t", type=_ints, default=[64])
    p.add_argument("--variant", default="levels", help="comma-separated variants")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_stats)
    return ap


def main(argv=None):
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except (UsageError, InvalidOperation, ValueError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except RecoveryFailure as exc:
        print(f"recovery failed: {exc}", file=sys.stderr)
        return EXIT_RECOVERY
    except IOError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
