"""Functional and cost simulator for an in-memory AES/SHA-256 fabric.

The fabric pairs a computational memory (CEM) for word-level logic with a
LUT fabric of RA/CAM arrays for the AES byte substitution and column mixing,
driven by a small custom instruction set.
"""

from .controller import Loop, Machine, Program
from .crypto_ref import Direction, Mode, Variant, key_expand, mode_ref, sha256_ref
from .isa import Instruction, assemble, decode, disassemble, encode
from .perf import PerfParams, PerfReport, finalize, transfer_overhead
from .programs import aes_program, run_aes, run_aes_sharded, run_sha256, sha256_program

__all__ = [
    "Direction", "Instruction", "Loop", "Machine", "Mode", "PerfParams", "PerfReport",
    "Program", "Variant", "aes_program", "assemble", "decode", "disassemble", "encode",
    "finalize", "key_expand", "mode_ref", "run_aes", "run_aes_sharded", "run_sha256",
    "sha256_program", "sha256_ref", "transfer_overhead",
]

__version__ = "0.1.0"
