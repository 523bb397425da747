"""Bi-directional byte shifter: ShiftRows / InvShiftRows as fixed permutations."""

from __future__ import annotations

from .crypto_ref import Direction

ShiftDirection = Direction

# _PERM[d][k] is the source index of output byte k (byte k = row k%4, column k//4)
_PERM = {
    Direction.ENC: tuple(4 * ((k // 4 + k % 4) % 4) + k % 4 for k in range(16)),
    Direction.DEC: tuple(4 * ((k // 4 - k % 4) % 4) + k % 4 for k in range(16)),
}


def permutation(direction) -> tuple[int, ...]:
    return _PERM[Direction(direction)]


def shift_rows(state, direction=Direction.ENC) -> bytes:
    """Rotate row ``i`` by ``i`` bytes, left for encryption and right for decryption."""
    perm = _PERM[Direction(direction)]
    return bytes(state[p] for p in perm)


def _word_plan(perm):
    """Per output column, the (source word, byte mask) pairs realising ``perm``.

    Row permutations keep each byte in its row, so every output word is the
    OR of four masked input words.
    """
    plan = []
    for j in range(4):
        srcs = []
        for i in range(4):
            p = perm[4 * j + i]
            assert p % 4 == i, "shifter only moves bytes within a row"
            srcs.append((p // 4, 0xFF << (24 - 8 * i)))
        plan.append(tuple(srcs))
    return tuple(plan)


_WORD_PLAN = {d: _word_plan(p) for d, p in _PERM.items()}


def shift_words(words, direction=Direction.ENC) -> list[int]:
    """`shift_rows` on a state held as four big-endian column words."""
    return [
        (words[a] & ma) | (words[b] & mb) | (words[c] & mc) | (words[d] & md)
        for (a, ma), (b, mb), (c, mc), (d, md) in _WORD_PLAN[Direction(direction)]
    ]
