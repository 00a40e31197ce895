"""Encode a message, corrupt the codeword with block edits, decode it."""

import argparse

import numpy as np

from blocksync import ecc
from blocksync.bits import random_bits
from blocksync.edits import apply_trace, sample_trace


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=1 << 13)
    ap.add_argument("--k", type=int, default=1)
    ap.add_argument("--t", type=int, default=32)
    ap.add_argument("--variant", choices=ecc.VARIANTS, default="levels")
    ap.add_argument("--no-raw", action="store_true", help="force the sketch backend")
    ap.add_argument("--trials", type=int, default=10)
    args = ap.parse_args()

    rng = np.random.default_rng(1)
    msg = random_bits(args.n, rng)
    cw = ecc.encode(msg, args.k, args.t, args.variant, allow_raw=not args.no_raw)
    p = cw.params
    print(f"message {args.n} bits -> codeword {len(cw.bits)} bits "
          f"(redundancy {cw.redundancy}, backend {p.backend})")
    print(f"  {p.total_chunks} chunks of {p.chunk_total} bits, RS distance {p.distance}")
    ok = 0
    for seed in range(args.trials):
        y = apply_trace(cw.bits, sample_trace(seed, len(cw.bits), args.k, args.t))
        stats = {}
        try:
            ok += np.array_equal(ecc.decode(y, p, stats=stats), msg)
        except ecc.DecodeError as exc:
            print(f"  trial {seed}: {exc}")
            continue
        print(f"  trial {seed}: erasures {stats['armor']['erasures']}")
    print(f"decoded exactly: {ok}/{args.trials}")


if __name__ == "__main__":
    main()
