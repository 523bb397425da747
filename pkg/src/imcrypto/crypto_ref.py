"""Reference AES and SHA-256.

These are plain software implementations used as ground truth for every
result the simulated fabric produces. Nothing here is shared with the fabric
datapath except the S-box contents, which the fabric loads into its arrays.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import lru_cache

from .errors import InvalidKeyError, LengthError

RIJNDAEL_POLY = 0x11B


class Variant(enum.IntEnum):
    AES128 = 128
    AES192 = 192
    AES256 = 256

    @property
    def key_bytes(self) -> int:
        return self.value // 8

    @property
    def rounds(self) -> int:
        return {128: 10, 192: 12, 256: 14}[self.value]


class Direction(str, enum.Enum):
    ENC = "enc"
    DEC = "dec"


class Mode(str, enum.Enum):
    ECB = "ecb"
    CBC = "cbc"
    CTR = "ctr"


# ---------------------------------------------------------------------------
# GF(2^8)


def xtime(a: int) -> int:
    a <<= 1
    if a & 0x100:
        a ^= RIJNDAEL_POLY
    return a


def gf_mul(a: int, b: int) -> int:
    """Multiply two field elements modulo x^8 + x^4 + x^3 + x + 1."""
    p = 0
    while b:
        if b & 1:
            p ^= a
        a = xtime(a)
        b >>= 1
    return p


def gf_inv(a: int) -> int:
    # a^254 = a^-1 for a != 0; 0 maps to 0 by convention
    if a == 0:
        return 0
    result, base, e = 1, a, 254
    while e:
        if e & 1:
            result = gf_mul(result, base)
        base = gf_mul(base, base)
        e >>= 1
    return result


def _affine(x: int) -> int:
    r = 0x63
    for s in range(5):
        r ^= ((x << s) | (x >> (8 - s))) & 0xFF
    return r


@lru_cache(maxsize=None)
def sbox_tables() -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Return ``(forward, inverse)`` Rijndael S-boxes, built from GF inversion."""
    forward = tuple(_affine(gf_inv(v)) for v in range(256))
    inverse = [0] * 256
    for v, s in enumerate(forward):
        inverse[s] = v
    return forward, tuple(inverse)


@lru_cache(maxsize=None)
def mul_table(c: int) -> tuple[int, ...]:
    return tuple(gf_mul(c, v) for v in range(256))


# ---------------------------------------------------------------------------
# State


class StateBlock(bytes):
    """16-byte AES state; byte ``4*j + i`` sits at row ``i``, column ``j``."""

    def __new__(cls, data=bytes(16)):
        obj = super().__new__(cls, data)
        if len(obj) != 16:
            raise LengthError(f"state block must be 16 bytes, got {len(obj)}")
        return obj

    def cell(self, i: int, j: int) -> int:
        return self[4 * j + i]

    @classmethod
    def from_grid(cls, grid) -> "StateBlock":
        """Build from a row-major 4x4 nested sequence ``grid[i][j]``."""
        return cls(bytes(grid[k % 4][k // 4] for k in range(16)))

    def grid(self) -> list[list[int]]:
        return [[self.cell(i, j) for j in range(4)] for i in range(4)]


def add_round_key(state, rk) -> list[int]:
    return [a ^ k for a, k in zip(state, rk)]


def sub_bytes(state) -> list[int]:
    fwd = sbox_tables()[0]
    return [fwd[b] for b in state]


def inv_sub_bytes(state) -> list[int]:
    inv = sbox_tables()[1]
    return [inv[b] for b in state]


# row i rotates left by i: output cell (i, j) takes input cell (i, j + i)
_SHIFT = tuple(4 * ((k // 4 + k % 4) % 4) + k % 4 for k in range(16))
_INV_SHIFT = tuple(4 * ((k // 4 - k % 4) % 4) + k % 4 for k in range(16))


def shift_rows(state) -> list[int]:
    return [state[p] for p in _SHIFT]


def inv_shift_rows(state) -> list[int]:
    return [state[p] for p in _INV_SHIFT]


def mix_column(col, coeffs=(2, 3, 1, 1)) -> list[int]:
    tables = [mul_table(c) for c in coeffs]
    out = []
    for i in range(4):
        acc = 0
        for k in range(4):
            acc ^= tables[(k - i) % 4][col[k]]
        out.append(acc)
    return out


def inv_mix_column(col) -> list[int]:
    return mix_column(col, (14, 11, 13, 9))


@lru_cache(maxsize=None)
def _mix_tables(coeffs):
    return tuple(mul_table(c) for c in coeffs)


def _mix_all(state, coeffs):
    c0, c1, c2, c3 = _mix_tables(coeffs)
    out = []
    for j in range(0, 16, 4):
        a0, a1, a2, a3 = state[j : j + 4]
        out += (
            c0[a0] ^ c1[a1] ^ c2[a2] ^ c3[a3],
            c3[a0] ^ c0[a1] ^ c1[a2] ^ c2[a3],
            c2[a0] ^ c3[a1] ^ c0[a2] ^ c1[a3],
            c1[a0] ^ c2[a1] ^ c3[a2] ^ c0[a3],
        )
    return out


def mix_columns(state) -> list[int]:
    return _mix_all(state, (2, 3, 1, 1))


def inv_mix_columns(state) -> list[int]:
    return _mix_all(state, (14, 11, 13, 9))


# ---------------------------------------------------------------------------
# Key schedule


@dataclass(frozen=True)
class KeySchedule:
    variant: Variant
    round_keys: tuple[bytes, ...]

    def __post_init__(self):
        if len(self.round_keys) != self.variant.rounds + 1:
            raise InvalidKeyError("round-key count does not match variant")

    @property
    def rounds(self) -> int:
        return self.variant.rounds


def key_expand(key: bytes, variant=None) -> KeySchedule:
    """Rijndael key expansion. ``variant`` defaults to the one implied by ``len(key)``."""
    key = bytes(key)
    if variant is None:
        try:
            variant = Variant(len(key) * 8)
        except ValueError:
            raise InvalidKeyError(f"no AES variant uses a {len(key)}-byte key") from None
    variant = Variant(variant)
    if len(key) != variant.key_bytes:
        raise InvalidKeyError(
            f"{variant.name} needs a {variant.key_bytes}-byte key, got {len(key)}"
        )
    fwd = sbox_tables()[0]
    nk = len(key) // 4
    total = 4 * (variant.rounds + 1)
    words = [list(key[4 * i : 4 * i + 4]) for i in range(nk)]
    rcon = 1
    for i in range(nk, total):
        t = list(words[i - 1])
        if i % nk == 0:
            t = t[1:] + t[:1]
            t = [fwd[b] for b in t]
            t[0] ^= rcon
            rcon = xtime(rcon)
        elif nk > 6 and i % nk == 4:
            t = [fwd[b] for b in t]
        words.append([a ^ b for a, b in zip(words[i - nk], t)])
    rks = tuple(
        bytes(sum(words[4 * r : 4 * r + 4], [])) for r in range(variant.rounds + 1)
    )
    return KeySchedule(variant, rks)


# ---------------------------------------------------------------------------
# Block cipher


def aes_round_states(block, ks: KeySchedule, direction=Direction.ENC) -> list[StateBlock]:
    """States after the initial key addition and after every round.

    Index 0 is the state after the first AddRoundKey, index ``r`` the state
    after round ``r``; the last entry is the output block.
    """
    states = []
    out = _cipher(block, ks, direction, states)
    states.append(out)
    return states


def _cipher(block, ks, direction, states=None) -> StateBlock:
    direction = Direction(direction)
    state = list(StateBlock(block))
    n = ks.rounds
    rk = ks.round_keys
    keep = states is not None
    if direction is Direction.ENC:
        state = add_round_key(state, rk[0])
        if keep:
            states.append(StateBlock(bytes(state)))
        for r in range(1, n):
            state = mix_columns(shift_rows(sub_bytes(state)))
            state = add_round_key(state, rk[r])
            if keep:
                states.append(StateBlock(bytes(state)))
        state = add_round_key(shift_rows(sub_bytes(state)), rk[n])
    else:
        state = add_round_key(state, rk[n])
        if keep:
            states.append(StateBlock(bytes(state)))
        for r in range(n - 1, 0, -1):
            state = inv_sub_bytes(inv_shift_rows(state))
            state = inv_mix_columns(add_round_key(state, rk[r]))
            if keep:
                states.append(StateBlock(bytes(state)))
        state = add_round_key(inv_sub_bytes(inv_shift_rows(state)), rk[0])
    return StateBlock(bytes(state))


def aes_block_ref(block, ks: KeySchedule, direction=Direction.ENC) -> StateBlock:
    return _cipher(block, ks, direction)


# ---------------------------------------------------------------------------
# Modes


def _xor(a, b) -> bytes:
    return bytes(x ^ y for x, y in zip(a, b))


def ctr_increment(counter: bytes, n: int = 1) -> bytes:
    value = (int.from_bytes(counter, "big") + n) % (1 << 128)
    return value.to_bytes(16, "big")


def mode_ref(mode, ks: KeySchedule, iv, data: bytes, direction=Direction.ENC) -> bytes:
    """ECB/CBC/CTR over ``data``. ``iv`` is ignored for ECB."""
    mode = Mode(mode)
    direction = Direction(direction)
    data = bytes(data)
    if mode is not Mode.CTR and len(data) % 16:
        raise LengthError(f"{mode.value.upper()} needs a multiple of 16 bytes, got {len(data)}")
    if mode is not Mode.ECB:
        if iv is None or len(iv) != 16:
            raise LengthError("IV/counter must be 16 bytes")
        iv = bytes(iv)
    blocks = [data[i : i + 16] for i in range(0, len(data), 16)]
    out = []
    if mode is Mode.ECB:
        out = [aes_block_ref(b, ks, direction) for b in blocks]
    elif mode is Mode.CBC:
        prev = iv
        for b in blocks:
            if direction is Direction.ENC:
                c = aes_block_ref(_xor(b, prev), ks, Direction.ENC)
                out.append(c)
                prev = c
            else:
                out.append(_xor(aes_block_ref(b, ks, Direction.DEC), prev))
                prev = b
    else:
        counter = iv
        for b in blocks:
            stream = aes_block_ref(counter, ks, Direction.ENC)
            out.append(_xor(b, stream))
            counter = ctr_increment(counter)
    return b"".join(out)


# ---------------------------------------------------------------------------
# SHA-256


def _first_primes(n):
    primes, c = [], 2
    while len(primes) < n:
        if all(c % p for p in primes if p * p <= c):
            primes.append(c)
        c += 1
    return primes


def _iroot(x, k):
    lo, hi = 0, 1 << (x.bit_length() // k + 1)
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if mid**k <= x:
            lo = mid
        else:
            hi = mid - 1
    return lo


@lru_cache(maxsize=None)
def sha256_constants() -> tuple[tuple[int, ...], tuple[int, ...]]:
    """``(k, h0)``: fractional parts of cube roots of the first 64 primes and
    square roots of the first 8, as 32-bit words."""
    primes = _first_primes(64)
    k = tuple(_iroot(p << 96, 3) & 0xFFFFFFFF for p in primes)
    h0 = tuple(_iroot(p << 64, 2) & 0xFFFFFFFF for p in primes[:8])
    return k, h0


def rotr32(x: int, n: int) -> int:
    return ((x >> n) | (x << (32 - n))) & 0xFFFFFFFF


def small_sigma0(x):
    return rotr32(x, 7) ^ rotr32(x, 18) ^ (x >> 3)


def small_sigma1(x):
    return rotr32(x, 17) ^ rotr32(x, 19) ^ (x >> 10)


def big_sigma0(x):
    return rotr32(x, 2) ^ rotr32(x, 13) ^ rotr32(x, 22)


def big_sigma1(x):
    return rotr32(x, 6) ^ rotr32(x, 11) ^ rotr32(x, 25)


def choice(e, f, g):
    return (e & f) ^ (~e & g & 0xFFFFFFFF)


def majority(a, b, c):
    return (a & b) ^ (a & c) ^ (b & c)


def sha256_pad(message: bytes) -> bytes:
    message = bytes(message)
    bit_len = 8 * len(message)
    padded = message + b"\x80" + bytes((55 - len(message)) % 64)
    return padded + bit_len.to_bytes(8, "big")


def sha256_schedule(chunk: bytes) -> list[int]:
    w = [int.from_bytes(chunk[4 * i : 4 * i + 4], "big") for i in range(16)]
    for i in range(16, 64):
        w.append((w[i - 16] + small_sigma0(w[i - 15]) + w[i - 7] + small_sigma1(w[i - 2])) & 0xFFFFFFFF)
    return w


def sha256_ref(message: bytes) -> bytes:
    k, h = sha256_constants()
    h = list(h)
    padded = sha256_pad(message)
    for off in range(0, len(padded), 64):
        w = sha256_schedule(padded[off : off + 64])
        a, b, c, d, e, f, g, hh = h
        for i in range(64):
            temp1 = (hh + big_sigma1(e) + choice(e, f, g) + k[i] + w[i]) & 0xFFFFFFFF
            temp2 = (big_sigma0(a) + majority(a, b, c)) & 0xFFFFFFFF
            hh, g, f, e, d, c, b, a = g, f, e, (d + temp1) & 0xFFFFFFFF, c, b, a, (temp1 + temp2) & 0xFFFFFFFF
        h = [(x + y) & 0xFFFFFFFF for x, y in zip(h, (a, b, c, d, e, f, g, hh))]
    return b"".join(x.to_bytes(4, "big") for x in h)
