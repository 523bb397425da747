"""LUT fabric: four column modules evaluating combined AES steps by lookup.

Each module holds 4 RA/CAM arrays programmed with ``sbox(v)`` and 8 RAM arrays
programmed with ``2*sbox(v)`` and ``3*sbox(v)`` (4 of each, one per input
row). Byte ``i`` of the column addresses array ``i`` of each kind.

Encryption reads all three arrays in RAM mode and XOR-reduces the products
into one MixColumns output column. Decryption searches the RA/CAM arrays in
CAM mode (the matching row *is* the inverse S-box value), XORs in the round
key byte, multiplies by 14/11/13/9 in the encoder and XOR-reduces. The RAM
arrays sit idle during decryption.
"""

from __future__ import annotations

from .crypto_ref import Direction, mul_table, sbox_tables
from .errors import TableError
from .ra_cam import RaCamArray, RamArray

XOR_TREES_PER_MODULE = 2


class LutModule:
    def __init__(self):
        self.racam = [RaCamArray() for _ in range(4)]
        self.ram2x = [RamArray() for _ in range(4)]
        self.ram3x = [RamArray() for _ in range(4)]
        self.xor_tree_passes = 0
        self.encoder_passes = 0
        self.column_reads = 0  # encrypt_word reads every array once
        self._ready = False
        # views of the row storage (arrays reload in place)
        self._rows = tuple(a.rows for a in self.racam + self.ram2x + self.ram3x)
        # encoder stage-3 multipliers
        self._m9, self._m11, self._m13, self._m14 = (mul_table(c) for c in (9, 11, 13, 14))

    @property
    def loaded(self) -> bool:
        return all(a.loaded for a in self.racam + self.ram2x + self.ram3x)

    def load(self, sbox) -> None:
        m2, m3 = mul_table(2), mul_table(3)
        for k in range(4):
            self.racam[k].load(sbox)
            self.ram2x[k].load(m2[s] for s in sbox)
            self.ram3x[k].load(m3[s] for s in sbox)
        self._ready = True

    def _require_loaded(self):
        if not self._ready:
            raise TableError("LUT module tables are not loaded")

    def encrypt_word(self, w: int) -> int:
        """SubBytes then MixColumns on a column packed big-endian in ``w``.

        Every array is read once in RAM mode; the 1x value of each byte fans
        out to two XOR-tree inputs.
        """
        if not self._ready:
            raise TableError("LUT module tables are not loaded")
        S0, S1, S2, S3, D0, D1, D2, D3, T0, T1, T2, T3 = self._rows
        a0, a1, a2, a3 = w >> 24, (w >> 16) & 0xFF, (w >> 8) & 0xFF, w & 0xFF
        s0, s1, s2, s3 = S0[a0], S1[a1], S2[a2], S3[a3]
        self.column_reads += 1
        self.xor_tree_passes += XOR_TREES_PER_MODULE
        return (
            ((D0[a0] ^ T1[a1] ^ s2 ^ s3) << 24)
            | ((s0 ^ D1[a1] ^ T2[a2] ^ s3) << 16)
            | ((s0 ^ s1 ^ D2[a2] ^ T3[a3]) << 8)
            | (T0[a0] ^ s1 ^ s2 ^ D3[a3])
        )

    def decrypt_word(self, w: int, k: int) -> int:
        """InvSubBytes, AddRoundKey and InvMixColumns on a packed column.

        Stage 1 is the CAM search plus row encoding, stage 2 the key XOR and
        stage 3 the constant multiplications; the XOR tree combines them.
        """
        if not self._ready:
            raise TableError("LUT module tables are not loaded")
        r = self.racam
        t0 = r[0].search_single(w >> 24) ^ (k >> 24)
        t1 = r[1].search_single((w >> 16) & 0xFF) ^ ((k >> 16) & 0xFF)
        t2 = r[2].search_single((w >> 8) & 0xFF) ^ ((k >> 8) & 0xFF)
        t3 = r[3].search_single(w & 0xFF) ^ (k & 0xFF)
        self.encoder_passes += 4
        self.xor_tree_passes += XOR_TREES_PER_MODULE
        m9, m11, m13, m14 = self._m9, self._m11, self._m13, self._m14
        return (
            ((m14[t0] ^ m11[t1] ^ m13[t2] ^ m9[t3]) << 24)
            | ((m9[t0] ^ m14[t1] ^ m11[t2] ^ m13[t3]) << 16)
            | ((m13[t0] ^ m9[t1] ^ m14[t2] ^ m11[t3]) << 8)
            | (m11[t0] ^ m13[t1] ^ m9[t2] ^ m14[t3])
        )

    def sbox_word(self, w: int, decrypt: bool = False) -> int:
        """S-box only (final round): RAM read for enc, CAM search for dec."""
        self._require_loaded()
        col = (w >> 24, (w >> 16) & 0xFF, (w >> 8) & 0xFF, w & 0xFF)
        if decrypt:
            self.encoder_passes += 4
            b = self._inv_sbox(col)
        else:
            b = [arr.read_row(a) for arr, a in zip(self.racam, col)]
        return (b[0] << 24) | (b[1] << 16) | (b[2] << 8) | b[3]

    def array_reads(self) -> dict:
        """RAM-mode reads per array, including one per array per column op."""
        n = self.column_reads
        return {
            "racam": [a.reads + n for a in self.racam],
            "ram2x": [a.reads + n for a in self.ram2x],
            "ram3x": [a.reads + n for a in self.ram3x],
        }

    def _inv_sbox(self, col):
        r = self.racam
        return [r[0].search_single(col[0]), r[1].search_single(col[1]),
                r[2].search_single(col[2]), r[3].search_single(col[3])]

    def encrypt_column(self, col) -> list[int]:
        return list(_unpack(self.encrypt_word(_pack(col))))

    def decrypt_column(self, col, rk_col) -> list[int]:
        return list(_unpack(self.decrypt_word(_pack(col), _pack(rk_col))))

    def sub_bytes_column(self, col, direction=Direction.ENC) -> list[int]:
        return list(_unpack(self.sbox_word(_pack(col), Direction(direction) is Direction.DEC)))


def _pack(col) -> int:
    a0, a1, a2, a3 = col
    for b in col:
        if not 0 <= b <= 0xFF:
            raise ValueError(f"column byte {b!r} out of range")
    return (a0 << 24) | (a1 << 16) | (a2 << 8) | a3


def _unpack(w):
    return (w >> 24, (w >> 16) & 0xFF, (w >> 8) & 0xFF, w & 0xFF)


class LutFabric:
    def __init__(self):
        self.modules = [LutModule() for _ in range(4)]

    @property
    def loaded(self) -> bool:
        return all(m.loaded for m in self.modules)

    @property
    def ready(self) -> bool:
        """Cheap check used per instruction: every module went through load()."""
        return all(m._ready for m in self.modules)

    def load_tables(self, sbox=None) -> None:
        """Program every array from ``sbox`` (Rijndael by default)."""
        if sbox is None:
            sbox = sbox_tables()[0]
        sbox = list(sbox)
        if len(sbox) != 256 or sorted(sbox) != list(range(256)):
            raise TableError("S-box must be a bijection on 0..255")
        for m in self.modules:
            m.load(sbox)


def load_tables(fabric: LutFabric, sbox=None) -> None:
    fabric.load_tables(sbox)


def encrypt_column(module: LutModule, col) -> list[int]:
    return module.encrypt_column(col)


def decrypt_column(module: LutModule, col, rk_col) -> list[int]:
    return module.decrypt_column(col, rk_col)


def sub_bytes_column(module: LutModule, col, direction=Direction.ENC) -> list[int]:
    return module.sub_bytes_column(col, direction)
