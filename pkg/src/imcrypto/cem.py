"""Compute-enabled memory: a word-addressed SRAM whose sense amplifiers can
combine two stored words and write the result back without leaving the array.
"""

from __future__ import annotations

import enum
from collections import Counter

from .errors import AddressError

MASK32 = 0xFFFFFFFF
DEFAULT_CAPACITY = 262_144  # 1 MiB of 32-bit words

# Default word-address map used by the program generators.
STATE_BASE = 0x0000
ROUND_KEY_BASE = 0x0100
SHA_K_BASE = 0x0200
SHA_W_BASE = 0x0300
SHA_HASH_BASE = 0x0380
SCRATCH_BASE = 0x0400
DATA_BASE = 0x1000


class WordOp(enum.Enum):
    MOVE = "MOVE"
    ADD = "ADD"
    AND = "AND"
    OR = "OR"
    XOR = "XOR"
    NOT = "NOT"
    CSR = "CSR"
    SR = "SR"
    CSL = "CSL"
    SL = "SL"


def _rotr(x, n):
    n &= 31
    return ((x >> n) | (x << (32 - n))) & MASK32


def _rotl(x, n):
    n &= 31
    return ((x << n) | (x >> (32 - n))) & MASK32


# (value of src1, value of src2) -> result. Shifts take the amount from src1.
_OPS = {
    WordOp.MOVE: lambda a, b: a,
    WordOp.ADD: lambda a, b: (a + b) & MASK32,
    WordOp.AND: lambda a, b: a & b,
    WordOp.OR: lambda a, b: a | b,
    WordOp.XOR: lambda a, b: a ^ b,
    WordOp.NOT: lambda a, b: ~a & MASK32,
    WordOp.CSR: lambda a, b: _rotr(b, a),
    WordOp.SR: lambda a, b: b >> (a & 31),
    WordOp.CSL: lambda a, b: _rotl(b, a),
    WordOp.SL: lambda a, b: (b << (a & 31)) & MASK32,
}
UNARY_OPS = frozenset({WordOp.MOVE, WordOp.NOT})


class CemMemory:
    """Zero-initialised 32-bit word memory with in-place word operations.

    Blocks of 128 bits occupy four consecutive words; byte ``k`` of a block
    lives in word ``k // 4``, most significant byte first.
    """

    def __init__(self, capacity: int = DEFAULT_CAPACITY):
        if capacity < 4:
            raise ValueError("capacity must hold at least one block")
        self.capacity = capacity
        self.words = [0] * capacity
        self.op_counters = Counter()

    def _check(self, addr, span=1):
        if addr < 0 or addr + span > self.capacity:
            raise AddressError(
                f"word address 0x{addr:X} (+{span}) outside capacity 0x{self.capacity:X}"
            )

    def read_word(self, addr: int) -> int:
        self._check(addr)
        return self.words[addr]

    def write_word(self, addr: int, value: int) -> None:
        self._check(addr)
        self.words[addr] = value & MASK32

    def store_block(self, addr: int, block) -> None:
        block = bytes(block)
        if len(block) != 16:
            raise ValueError("a block is 16 bytes")
        self._check(addr, 4)
        for k in range(4):
            self.words[addr + k] = int.from_bytes(block[4 * k : 4 * k + 4], "big")

    def load_block(self, addr: int) -> bytes:
        self._check(addr, 4)
        return b"".join(w.to_bytes(4, "big") for w in self.words[addr : addr + 4])

    def store_bytes(self, addr: int, data) -> None:
        """Store a multiple-of-4 byte string as consecutive big-endian words."""
        data = bytes(data)
        if len(data) % 4:
            raise ValueError("data length must be a multiple of 4")
        n = len(data) // 4
        self._check(addr, max(n, 1))
        self.words[addr : addr + n] = [
            int.from_bytes(data[4 * i : 4 * i + 4], "big") for i in range(n)
        ]

    def load_bytes(self, addr: int, n_words: int) -> bytes:
        self._check(addr, max(n_words, 1))
        return b"".join(w.to_bytes(4, "big") for w in self.words[addr : addr + n_words])

    def word_op(self, op, src1: int, src2: int, dst: int) -> None:
        """``dst <- op(mem[src1], mem[src2])``; unary ops ignore ``src2``."""
        op = WordOp(op)
        self._check(src1)
        self._check(dst)
        if op in UNARY_OPS:
            b = 0
        else:
            self._check(src2)
            b = self.words[src2]
        self.words[dst] = _OPS[op](self.words[src1], b)
        self.op_counters[op.value] += 1

    def xor_block(self, a: int, b: int, dst: int) -> None:
        for k in range(4):
            self.word_op(WordOp.XOR, a + k, b + k, dst + k)

    # -- hex image ----------------------------------------------------------

    def dump_hex(self, length: int | None = None) -> str:
        """One 8-digit word per line; line ``n`` holds word ``n``.

        By default stops after the last non-zero word.
        """
        if length is None:
            length = self.capacity
            while length and self.words[length - 1] == 0:
                length -= 1
        return "".join(f"{w:08x}\n" for w in self.words[:length])

    def load_hex(self, text: str) -> None:
        lines = [ln.strip() for ln in text.splitlines()]
        if len(lines) > self.capacity:
            raise AddressError("hex image larger than memory")
        for addr, ln in enumerate(lines):
            if not ln:
                continue
            if len(ln) != 8:
                raise ValueError(f"line {addr + 1}: expected 8 hex digits, got {ln!r}")
            self.words[addr] = int(ln, 16)


def store_block(mem: CemMemory, addr: int, block) -> None:
    mem.store_block(addr, block)


def load_block(mem: CemMemory, addr: int) -> bytes:
    return mem.load_block(addr)


def word_op(mem: CemMemory, op, src1: int, src2: int, dst: int) -> None:
    mem.word_op(op, src1, src2, dst)


def xor_block(mem: CemMemory, a: int, b: int, dst: int) -> None:
    mem.xor_block(a, b, dst)
