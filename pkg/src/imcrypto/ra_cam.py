"""256x8 memory arrays used by the LUT fabric.

`RamArray` is the plain 6T-SRAM array (RAM mode only). `RaCamArray` adds the
CAM mode: a search compares a byte against all 256 rows at once and reports
the set of matching rows.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import AddressError, MultiMatchError, NoMatchError

ROWS = 256


@dataclass(frozen=True)
class MatchResult:
    matched_rows: frozenset

    def __len__(self):
        return len(self.matched_rows)


class RamArray:
    """Row-addressed 256-entry byte array with access counters.

    Arrays start as all-zero with ``loaded`` False; the hardware has residual
    state, so reading an unloaded array is allowed. Callers that need real
    table contents check ``loaded`` themselves.
    """

    def __init__(self):
        self.rows = [0] * ROWS
        self.reads = 0
        self.writes = 0
        self.loaded = False

    def _check(self, addr):
        if not 0 <= addr < ROWS:
            raise AddressError(f"row address {addr} outside 0..{ROWS - 1}")

    def write_row(self, addr: int, value: int) -> None:
        self._check(addr)
        self.rows[addr] = value & 0xFF
        self.writes += 1

    def read_row(self, addr: int) -> int:
        self._check(addr)
        self.reads += 1
        return self.rows[addr]

    def load(self, table) -> None:
        """Program all 256 rows, one write per row."""
        table = list(table)
        if len(table) != ROWS:
            raise ValueError(f"table must have {ROWS} entries, got {len(table)}")
        # in place, so views held by the LUT datapath stay valid
        self.rows[:] = [v & 0xFF for v in table]
        self.writes += ROWS
        self.loaded = True

    def snapshot(self) -> tuple:
        return tuple(self.rows)


class RaCamArray(RamArray):
    """Dual-mode RAM/CAM array."""

    def __init__(self):
        super().__init__()
        self.searches = 0
        self._index = {0: set(range(ROWS))}
        self._unique = None  # value -> row for singly-held values, rebuilt lazily

    def write_row(self, addr, value):
        old = self.rows[addr] if 0 <= addr < ROWS else None
        super().write_row(addr, value)
        self._index[old].discard(addr)
        self._index.setdefault(value & 0xFF, set()).add(addr)
        self._unique = None

    def load(self, table):
        super().load(table)
        self._index = {}
        for r, v in enumerate(self.rows):
            self._index.setdefault(v, set()).add(r)
        self._unique = None

    def search(self, pattern: int) -> MatchResult:
        """Parallel compare of ``pattern`` against every row."""
        self.searches += 1
        return MatchResult(frozenset(self._index.get(pattern & 0xFF, ())))

    def search_single(self, pattern: int) -> int:
        """Search and encode in one go: the row index of the unique match."""
        self.searches += 1
        unique = self._unique
        if unique is None:
            unique = self._unique = {v: next(iter(rs)) for v, rs in self._index.items() if len(rs) == 1}
        row = unique.get(pattern)
        if row is not None:
            return row
        rows = self._index.get(pattern)
        if not rows:
            raise NoMatchError(f"no row holds 0x{pattern:02X}")
        if len(rows) > 1:
            raise MultiMatchError(f"{len(rows)} rows hold 0x{pattern:02X}")
        return next(iter(rows))


def write_row(array: RamArray, addr: int, value: int) -> None:
    array.write_row(addr, value)


def read_row(array: RamArray, addr: int) -> int:
    return array.read_row(addr)


def search(array: RaCamArray, pattern: int) -> MatchResult:
    return array.search(pattern)


def encode_single_match(result: MatchResult) -> int:
    """Priority-free encoder: exactly one matching row is required."""
    rows = result.matched_rows
    if not rows:
        raise NoMatchError("search returned no matching row")
    if len(rows) > 1:
        raise MultiMatchError(f"search matched {len(rows)} rows: {sorted(rows)[:8]}")
    return next(iter(rows))
