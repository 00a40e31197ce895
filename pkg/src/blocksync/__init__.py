"""Document exchange and error-correcting codes for block edit errors."""

from .bdistinct import recover_rand, sketch_rand
from .ecc import decode, encode
from .levels import RecoveryFailure, alice_sketch, bob_recover

__version__ = "0.1.0"

__all__ = ["alice_sketch", "bob_recover", "sketch_rand", "recover_rand", "encode", "decode",
           "RecoveryFailure"]
