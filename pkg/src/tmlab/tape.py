"""Tape representations: dense array tape and run-length-encoded tape.

The dense tape backs the reference stepper; it grows by amortized
doubling in both directions from cell 0 and maintains its mark count
incrementally (a full recount is kept as a test oracle).  The RLE tape
stores runs of equal symbols fanning out from the head and backs the
accelerated simulator.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Tuple

# Default cell budget: 1 GiB-equivalent of dense cells.
DEFAULT_CELL_BUDGET = 1 << 30


class SpaceLimitExceeded(Exception):
    """Raised when a write/visit would pass the configured cell budget.

    Signals the simulator to stop with a space-limit outcome; never an
    error surfaced to callers of the run operations.
    """


class DenseTape:
    """A two-way infinite tape over {0, 1} backed by a growable byte array.

    ``extent`` tracks the min/max visited cell indices (cells written,
    plus cells explicitly marked visited via ``touch``).  Unvisited
    cells read as blank.
    """

    __slots__ = ("_buf", "_origin", "_marks", "_lo", "_hi", "max_cells")

    def __init__(self, max_cells: int = DEFAULT_CELL_BUDGET):
        self._buf = bytearray(16)
        self._origin = 8          # physical index of logical cell 0
        self._marks = 0
        self._lo = 0              # min visited logical index
        self._hi = 0              # max visited logical index
        self.max_cells = max_cells

    # -- reading ---------------------------------------------------------

    def cell(self, i: int) -> int:
        p = i + self._origin
        if 0 <= p < len(self._buf):
            return self._buf[p]
        return 0

    @property
    def marks(self) -> int:
        return self._marks

    @property
    def extent(self) -> Tuple[int, int]:
        return (self._lo, self._hi)

    def recount(self) -> int:
        """Full scan of the backing store; oracle for the incremental count."""
        return sum(self._buf)

    # -- writing ---------------------------------------------------------

    def _grow_to(self, i: int) -> int:
        """Ensure logical index i is backed; return its physical index."""
        p = i + self._origin
        size = len(self._buf)
        if 0 <= p < size:
            return p
        newsize = size
        while True:
            newsize *= 2
            shift = (newsize - size) // 2
            if 0 <= i + self._origin + shift < newsize:
                break
        newbuf = bytearray(newsize)
        newbuf[shift:shift + size] = self._buf
        self._buf = newbuf
        self._origin += shift
        return i + self._origin

    def touch(self, lo: int, hi: int) -> None:
        """Mark cells lo..hi visited, enforcing the cell budget."""
        if lo < self._lo:
            self._lo = lo
        if hi > self._hi:
            self._hi = hi
        if self._hi - self._lo + 1 > self.max_cells:
            raise SpaceLimitExceeded(
                f"visited extent exceeds {self.max_cells} cells")

    def write(self, i: int, s: int) -> "DenseTape":
        if s not in (0, 1):
            raise ValueError("symbol must be 0 or 1")
        self.touch(i, i)
        p = self._grow_to(i)
        old = self._buf[p]
        if old != s:
            self._buf[p] = s
            self._marks += s - old
        return self

    # -- structure -------------------------------------------------------

    def copy(self) -> "DenseTape":
        t = DenseTape(self.max_cells)
        t._buf = bytearray(self._buf)
        t._origin = self._origin
        t._marks = self._marks
        t._lo = self._lo
        t._hi = self._hi
        return t

    def cells(self, lo: int, hi: int) -> bytes:
        """Inclusive window of cell values as bytes."""
        return bytes(self.cell(i) for i in range(lo, hi + 1))

    def mark_span(self) -> Optional[Tuple[int, int]]:
        """Indices of the first and last marked cells, or None if blank."""
        first = None
        last = None
        for p, v in enumerate(self._buf):
            if v:
                i = p - self._origin
                if first is None:
                    first = i
                last = i
        if first is None:
            return None
        return (first, last)

    def content_key(self) -> Tuple:
        """Hashable value identifying tape content (ignores visit extent)."""
        span = self.mark_span()
        if span is None:
            return (None, b"")
        lo, hi = span
        return (lo, self.cells(lo, hi))

    def __eq__(self, other) -> bool:
        if not isinstance(other, DenseTape):
            return NotImplemented
        return self.content_key() == other.content_key()

    def __repr__(self) -> str:
        lo, hi = self.extent
        window = "".join(str(self.cell(i)) for i in range(lo, hi + 1))
        return f"DenseTape([{lo}..{hi}] {window!r} marks={self._marks})"


@dataclass
class RleTape:
    """Run-length-encoded tape: runs fan out from the head.

    ``left[-1]`` is the run adjacent to the head on the left, ``right[-1]``
    adjacent on the right; trailing infinite blanks are implicit.  Runs
    are [symbol, length] pairs.  Canonical form: no two adjacent runs
    share a symbol and all lengths are >= 1.
    """

    left: List[List[int]] = field(default_factory=list)
    right: List[List[int]] = field(default_factory=list)
    head_symbol: int = 0

    @staticmethod
    def from_cells(cells, head_index: int = 0) -> "RleTape":
        cells = list(cells)
        if not (0 <= head_index <= max(len(cells) - 1, 0)):
            raise ValueError("head index outside the given cells")
        if not cells:
            cells = [0]
        t = RleTape()
        for s in cells[:head_index]:
            _push_inward(t.left, s, 1)
        t.head_symbol = cells[head_index]
        for s in reversed(cells[head_index + 1:]):
            _push_inward(t.right, s, 1)
        return canonicalize(t)

    def to_cells(self) -> Tuple[List[int], int]:
        """Explicit cells (trimmed of the implicit blanks) and head offset."""
        out: List[int] = []
        for sym, length in self.left:
            out.extend([sym] * length)
        head_at = len(out)
        out.append(self.head_symbol)
        for sym, length in reversed(self.right):
            out.extend([sym] * length)
        return out, head_at

    @property
    def marks(self) -> int:
        total = self.head_symbol
        for sym, length in self.left:
            if sym:
                total += length
        for sym, length in self.right:
            if sym:
                total += length
        return total

    def is_canonical(self) -> bool:
        for side in (self.left, self.right):
            for sym, length in side:
                if length < 1 or sym not in (0, 1):
                    return False
            for a, b in zip(side, side[1:]):
                if a[0] == b[0]:
                    return False
        return True


def _push_inward(side: List[List[int]], sym: int, length: int) -> None:
    """Append a run at the head-adjacent end, merging equal symbols."""
    if length <= 0:
        return
    if side and side[-1][0] == sym:
        side[-1][1] += length
    else:
        side.append([sym, length])


def canonicalize(t: RleTape) -> RleTape:
    """Merge adjacent equal-symbol runs and drop zero-length runs."""

    def canon(side: List[List[int]]) -> List[List[int]]:
        out: List[List[int]] = []
        for sym, length in side:
            if length <= 0:
                continue
            if out and out[-1][0] == sym:
                out[-1][1] += length
            else:
                out.append([sym, length])
        return out

    return RleTape(canon(t.left), canon(t.right), t.head_symbol)
