"""A concrete universal machine: one fixed 2-symbol Machine that runs
any machine of up to 26 states from an encoding of its table and input.

The construction is an interpreter designed over a 21-symbol internal
alphabet and then compiled to 2 symbols, five binary cells per internal
cell.  The encoded tape is laid out left to right as

    [counter] L [state: 26 cells] B1 [program] B2 [simulated tape]

* counter: the simulated step count in binary, least significant bit
  adjacent to L, growing leftward into the blank sea; absent at start
  (zero steps).
* state: the current simulated state in unary marks (state q holds
  q + 1 marks), padded with filler cells.
* program: one block per simulated state, a block marker followed by
  the entries for scanned 0 then scanned 1.  An entry is a defined
  flag, the written symbol, the move direction (0 = left, 1 = right),
  the next state in unary (q' + 1 marks, none for the halt state), and
  an end marker.  Undefined entries carry zeroed fields and no marks.
* simulated tape: one cell per visited tape cell, the scanned one
  carrying a head mark; absent for an empty input word.  The zone
  grows rightward in place; growing leftward shifts the zone one cell
  right first, so recovered cell positions are exact only up to
  translation.

Each simulated step is one interpreter cycle: read the scanned symbol,
select the current state's block by crossing off unary state marks
against block markers, select the entry, then either perform the write
and move, rebuild the state zone from the entry's next-state marks,
and increment the counter (a defined entry), or increment the counter
and stop (a halt transition, whose write and move still run, or an
undefined entry, whose write and move do not).  The counter therefore
equals the simulated step count under the same convention as the
reference stepper: the halting step counts.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, List, Optional, Tuple

from .machine import HALT, LEFT, RIGHT, Machine, Rule, check_word
from .simulate import RunLimits, RunOutcome, run_accelerated

# Internal alphabet; the blank must be symbol 0 so untouched binary
# cells decode to it.
_SYMS = ("_", "L", "C0", "C1", "s", "x", "f", "B1", "P", "Y",
         "e0", "e1", "u", "v", "E", "A", "B2", "t0", "t1", "h0", "h1")
_CODE = {name: i for i, name in enumerate(_SYMS)}
_BITS = 5

# Largest encodable machine: one state more than the text format's
# A..Y, since the state zone holds up to 26 unary marks.
UTM_MAX_STATES = 26
_STATE_CELLS = 26


class EncodingError(ValueError):
    pass


@dataclass(frozen=True)
class UtmEncoding:
    """The binary start tape for the universal machine.

    ``word`` is an input word like any other; running
    ``universal_machine()`` on it reproduces the encoded machine's run
    on the encoded input.  ``decode`` inverts the encoding exactly.
    """

    word: str


# -- interpreter construction ------------------------------------------------


def _interpreter() -> Dict[Tuple, Tuple[str, int, object]]:
    """Transition table of the interpreter over the internal alphabet:
    (state, symbol) -> (written symbol, move, next state or HALT).

    States are tuples.  Walks deliberately omit symbols they can never
    meet, so a logic error strands the compiled machine on an undefined
    entry instead of silently misreading the tape.
    """
    table: Dict[Tuple, Tuple[str, int, object]] = {}

    def rule(state, sym, write, move, nxt):
        key = (state, sym)
        if key in table:
            raise AssertionError(f"duplicate interpreter rule {key}")
        table[key] = (write, move, nxt)

    def skip(state, syms, move):
        for sym in syms:
            rule(state, sym, sym, move, state)

    # fetch: from anywhere left of the head mark, walk right to it and
    # read the scanned symbol; a blank means the tape zone is empty
    # (initial empty word), so mark it as the scanned blank first
    skip(("fetch",), ("C0", "C1", "L", "s", "f", "B1", "P",
                      "e0", "e1", "u", "E", "B2", "t0", "t1"), RIGHT)
    rule(("fetch",), "_", "h0", LEFT, ("match", 0))
    rule(("fetch",), "h0", "h0", LEFT, ("match", 0))
    rule(("fetch",), "h1", "h1", LEFT, ("match", 1))

    for b in (0, 1):
        # match: cross one state mark per block marker until the marks
        # run out; the block crossed last is the current state's
        skip(("match", b), ("t0", "t1", "B2", "E", "u", "e0", "e1",
                            "P", "Y", "B1", "f", "x"), LEFT)
        rule(("match", b), "s", "x", RIGHT, ("cross", b))
        rule(("match", b), "L", "L", RIGHT, ("to-block", b))
        skip(("cross", b), ("x", "f", "B1", "Y", "e0", "e1", "u", "E"),
             RIGHT)
        rule(("cross", b), "P", "Y", LEFT, ("match", b))
        # to-block: the current block's marker is the rightmost crossed
        # one, just left of the first uncrossed marker (or of the zone
        # boundary when the last block is current)
        skip(("to-block", b), ("x", "f", "B1", "Y", "e0", "e1", "u", "E"),
             RIGHT)
        rule(("to-block", b), "P", "P", LEFT, ("to-entry", b))
        rule(("to-block", b), "B2", "B2", LEFT, ("to-entry", b))
        skip(("to-entry", b), ("e0", "e1", "u", "E"), LEFT)
        rule(("to-entry", b), "Y", "Y", RIGHT,
             ("read-flag",) if b == 0 else ("skip-entry",))
    # a scanned 1 selects the block's second entry
    skip(("skip-entry",), ("e0", "e1", "u"), RIGHT)
    rule(("skip-entry",), "E", "E", RIGHT, ("read-flag",))

    # entry fields: defined flag, written symbol, move direction
    rule(("read-flag",), "e0", "e0", LEFT, ("undef-ret",))
    rule(("read-flag",), "e1", "e1", RIGHT, ("read-write",))
    for w in (0, 1):
        rule(("read-write",), f"e{w}", f"e{w}", RIGHT, ("read-dir", w))
        for d, mv in ((0, LEFT), (1, RIGHT)):
            rule(("read-dir", w), f"e{d}", f"e{d}", RIGHT, ("mark", w, mv))
            # flag the active entry's end so the copy phase can find it
            # again after the trip to the tape
            skip(("mark", w, mv), ("u",), RIGHT)
            rule(("mark", w, mv), "E", "A", RIGHT, ("to-tape", w, mv))
            skip(("to-tape", w, mv), ("P", "e0", "e1", "u", "E", "B2",
                                      "t0", "t1"), RIGHT)
            for scanned in (0, 1):
                rule(("to-tape", w, mv), f"h{scanned}", f"t{w}", mv,
                     ("place-r",) if mv == RIGHT else ("place-l",))

    # move right: re-mark the neighbor, growing into the blank sea
    rule(("place-r",), "t0", "h0", LEFT, ("clear",))
    rule(("place-r",), "t1", "h1", LEFT, ("clear",))
    rule(("place-r",), "_", "h0", LEFT, ("clear",))
    # move left: re-mark, or hit the zone boundary and shift the whole
    # zone one cell right to free a blank under the head
    rule(("place-l",), "t0", "h0", LEFT, ("clear",))
    rule(("place-l",), "t1", "h1", LEFT, ("clear",))
    rule(("place-l",), "B2", "B2", RIGHT, ("shift-seek",))
    # copy right to left: read a cell, write it one cell right, step
    # back two; the boundary marker means every cell is copied and the
    # freed first cell becomes the fresh blank under the head
    skip(("shift-seek",), ("t0", "t1"), RIGHT)
    rule(("shift-seek",), "_", "_", LEFT, ("shift-read",))
    for val in (0, 1):
        rule(("shift-read",), f"t{val}", f"t{val}", RIGHT,
             ("shift-put", val))
        for under in ("t0", "t1", "_"):
            rule(("shift-put", val), under, f"t{val}", LEFT,
                 ("shift-skip",))
        rule(("shift-skip",), f"t{val}", f"t{val}", LEFT, ("shift-read",))
        rule(("shift-done",), f"t{val}", "h0", LEFT, ("clear",))
    rule(("shift-read",), "B2", "B2", RIGHT, ("shift-done",))

    # clear: erase the crossed state marks on the way back
    skip(("clear",), ("t0", "t1", "B2", "E", "A", "u", "e0", "e1",
                      "P", "Y", "B1", "f"), LEFT)
    rule(("clear",), "x", "f", LEFT, ("clear",))
    rule(("clear",), "L", "L", RIGHT, ("copy-ret",))

    # copy: move the active entry's next-state marks into the state
    # zone one at a time, crossing them off right to left
    skip(("copy-ret",), ("f", "B1", "Y", "e0", "e1", "u", "E"), RIGHT)
    rule(("copy-ret",), "v", "v", LEFT, ("copy-step",))
    rule(("copy-ret",), "A", "A", LEFT, ("copy-step",))
    rule(("copy-step",), "u", "v", LEFT, ("copy-add",))
    rule(("copy-step",), "e0", "e0", RIGHT, ("restore",))
    rule(("copy-step",), "e1", "e1", RIGHT, ("restore",))
    skip(("copy-add",), ("u", "e0", "e1", "Y", "E", "B1", "f"), LEFT)
    rule(("copy-add",), "s", "s", RIGHT, ("copy-put",))
    rule(("copy-add",), "L", "L", RIGHT, ("copy-put",))
    rule(("copy-put",), "f", "s", RIGHT, ("copy-ret",))

    # restore the crossed marks, then head left: a state mark on the
    # way out means the step is done, reaching the left boundary with
    # none placed means the machine took its halt transition
    rule(("restore",), "v", "u", RIGHT, ("restore",))
    rule(("restore",), "A", "E", LEFT, ("ret-left",))
    skip(("ret-left",), ("e0", "e1", "u", "E", "B1", "f"), LEFT)
    rule(("ret-left",), "Y", "P", LEFT, ("ret-left",))
    rule(("ret-left",), "s", "s", LEFT, ("inc",))
    rule(("ret-left",), "L", "L", LEFT, ("halt-inc",))

    # count the step: binary increment left of L, least bit first
    skip(("inc",), ("s", "L"), LEFT)
    rule(("inc",), "C1", "C0", LEFT, ("inc",))
    rule(("inc",), "C0", "C1", RIGHT, ("fetch",))
    rule(("inc",), "_", "C1", RIGHT, ("fetch",))
    rule(("halt-inc",), "C1", "C0", LEFT, ("halt-inc",))
    rule(("halt-inc",), "C0", "C1", RIGHT, HALT)
    rule(("halt-inc",), "_", "C1", RIGHT, HALT)

    # undefined entry: no write, no move, no next state; restore the
    # crossed block markers on the way out and count the halting step
    skip(("undef-ret",), ("e0", "e1", "u", "E", "B1", "x", "f", "L"), LEFT)
    rule(("undef-ret",), "Y", "P", LEFT, ("undef-ret",))
    rule(("undef-ret",), "C1", "C0", LEFT, ("undef-ret",))
    rule(("undef-ret",), "C0", "C1", RIGHT, HALT)
    rule(("undef-ret",), "_", "C1", RIGHT, HALT)

    return table


def _compile(rules: Dict[Tuple, Tuple[str, int, object]], start) -> Machine:
    """Compile the internal-alphabet interpreter to 2 symbols.

    Each internal cell becomes five binary cells, most significant bit
    first; an internal head position is the block's first cell.  Every
    internal state becomes a tree of read states consuming the five
    bits left to right; the last read transition already writes the new
    symbol's lowest bit, then a shared chain writes the remaining bits
    right to left and carries the head to the neighboring block.
    Internal rules left undefined compile to undefined entries.
    """
    states = sorted({s for s, _ in rules}, key=repr)
    states.remove(start)
    states.insert(0, start)
    table: List[Optional[Rule]] = []

    def alloc() -> int:
        table.extend((None, None))
        return len(table) // 2 - 1

    roots = {s: alloc() for s in states}
    nodes: Dict[Tuple, int] = {}

    def node(state, prefix) -> int:
        if not prefix:
            return roots[state]
        key = (state, prefix)
        if key not in nodes:
            nodes[key] = alloc()
        return nodes[key]

    chains: Dict[Tuple, int] = {}

    def chain(write_sym: str, move: int, nxt) -> int:
        key = (write_sym, move, nxt)
        if key in chains:
            return chains[key]
        bits = [(_CODE[write_sym] >> i) & 1 for i in range(_BITS)]
        target = HALT if nxt == HALT else roots[nxt]
        writers = [alloc() for _ in range(_BITS - 1)]
        hops = [alloc() for _ in range(_BITS - 1)]
        for j, sid in enumerate(writers):
            wr = bits[j + 1]
            mv = move if j == _BITS - 2 else LEFT
            fol = writers[j + 1] if j + 1 < len(writers) else hops[0]
            table[2 * sid] = Rule(wr, mv, fol)
            table[2 * sid + 1] = Rule(wr, mv, fol)
        for j, sid in enumerate(hops):
            fol = hops[j + 1] if j + 1 < len(hops) else target
            table[2 * sid] = Rule(0, move, fol)
            table[2 * sid + 1] = Rule(1, move, fol)
        chains[key] = writers[0]
        return writers[0]

    for state in states:
        for prefix_len in range(_BITS - 1):
            for prefix_bits in range(1 << prefix_len):
                prefix = tuple((prefix_bits >> (prefix_len - 1 - i)) & 1
                               for i in range(prefix_len))
                sid = node(state, prefix)
                for b in (0, 1):
                    table[2 * sid + b] = Rule(b, RIGHT,
                                              node(state, prefix + (b,)))
        for high_bits in range(1 << (_BITS - 1)):
            prefix = tuple((high_bits >> (_BITS - 2 - i)) & 1
                           for i in range(_BITS - 1))
            sid = node(state, prefix)
            for b in (0, 1):
                code = (high_bits << 1) | b
                got = (rules.get((state, _SYMS[code]))
                       if code < len(_SYMS) else None)
                if got is None:
                    table[2 * sid + b] = None
                    continue
                write_sym, move, nxt = got
                table[2 * sid + b] = Rule(_CODE[write_sym] & 1, LEFT,
                                          chain(write_sym, move, nxt))

    return Machine(len(table) // 2, tuple(table))


@lru_cache(maxsize=1)
def universal_machine() -> Machine:
    """The compiled universal machine (a few thousand states)."""
    return _compile(_interpreter(), ("fetch",))


# -- encoding -----------------------------------------------------------------


def _to_bits(cells: List[str]) -> str:
    return "".join(format(_CODE[name], f"0{_BITS}b") for name in cells)


def encode(m: Machine, word: str = "") -> UtmEncoding:
    """Lay (machine, input) out as the universal machine's start tape.

    Injective: ``decode`` recovers both components exactly.
    """
    check_word(word)
    if m.n_states > UTM_MAX_STATES:
        raise EncodingError(
            f"machine has {m.n_states} states; the universal machine "
            f"supports at most {UTM_MAX_STATES}")
    cells = ["L", "s"] + ["f"] * (_STATE_CELLS - 1) + ["B1"]
    for q in range(m.n_states):
        cells.append("P")
        for sym in (0, 1):
            r = m.table[2 * q + sym]
            if r is None:
                cells += ["e0", "e0", "e0", "E"]
            else:
                cells += ["e1", f"e{r.write}",
                          "e0" if r.move == LEFT else "e1"]
                if r.next_state != HALT:
                    cells += ["u"] * (r.next_state + 1)
                cells.append("E")
    cells.append("B2")
    if word:
        cells.append(f"h{word[0]}")
        cells += [f"t{ch}" for ch in word[1:]]
    return UtmEncoding(_to_bits(cells))


def _from_bits(word: str) -> List[str]:
    if len(word) % _BITS:
        raise EncodingError(
            f"encoded tape length is not a multiple of {_BITS}")
    out = []
    for i in range(0, len(word), _BITS):
        code = int(word[i:i + _BITS], 2)
        if code >= len(_SYMS):
            raise EncodingError(f"invalid symbol code {code} at cell "
                                f"{i // _BITS}")
        out.append(_SYMS[code])
    return out


def decode(enc: UtmEncoding) -> Tuple[Machine, str]:
    """Exact inverse of ``encode``; raises EncodingError otherwise."""
    if not enc.word:
        raise EncodingError("empty encoding")
    cells = _from_bits(check_word(enc.word))
    pos = 0

    def expect(name):
        nonlocal pos
        if pos >= len(cells) or cells[pos] != name:
            raise EncodingError(f"expected {name} at cell {pos}")
        pos += 1

    expect("L")
    expect("s")
    for _ in range(_STATE_CELLS - 1):
        expect("f")
    expect("B1")
    rows: List[Optional[Rule]] = []
    while pos < len(cells) and cells[pos] == "P":
        pos += 1
        for _ in (0, 1):
            if pos < len(cells) and cells[pos] == "e0":
                expect("e0")
                expect("e0")
                expect("e0")
                expect("E")
                rows.append(None)
                continue
            expect("e1")
            if pos >= len(cells) or cells[pos] not in ("e0", "e1"):
                raise EncodingError(f"bad symbol field at cell {pos}")
            write = int(cells[pos][1])
            pos += 1
            if pos >= len(cells) or cells[pos] not in ("e0", "e1"):
                raise EncodingError(f"bad direction field at cell {pos}")
            move = LEFT if cells[pos] == "e0" else RIGHT
            pos += 1
            marks = 0
            while pos < len(cells) and cells[pos] == "u":
                marks += 1
                pos += 1
            expect("E")
            rows.append(Rule(write, move, HALT if marks == 0
                             else marks - 1))
    n = len(rows) // 2
    if n == 0:
        raise EncodingError("no program blocks")
    if n > UTM_MAX_STATES:
        raise EncodingError(f"{n} program blocks exceed the "
                            f"{UTM_MAX_STATES}-state limit")
    for r in rows:
        if r is not None and r.next_state >= n:
            raise EncodingError("next-state mark count exceeds the "
                                "block count")
    expect("B2")
    if pos == len(cells):
        return Machine(n, tuple(rows)), ""
    if cells[pos] not in ("h0", "h1"):
        raise EncodingError(f"expected head cell at cell {pos}")
    word = [cells[pos][1]]
    pos += 1
    while pos < len(cells):
        if cells[pos] not in ("t0", "t1"):
            raise EncodingError(f"bad tape cell at {pos}")
        word.append(cells[pos][1])
        pos += 1
    return Machine(n, tuple(rows)), "".join(word)


# -- running and recovery -----------------------------------------------------


@dataclass(frozen=True)
class SimulatedOutcome:
    """What the universal machine's final tape says about the simulated
    run: exact step and mark counts, plus the visited tape region
    (positions recovered up to translation)."""

    halted: bool
    steps: Optional[int]
    marks: Optional[int]
    tape: Optional[str]


DEFAULT_UTM_LIMITS = RunLimits(max_steps=500_000_000, max_cells=1 << 24)


def run_via_utm(enc: UtmEncoding,
                lim: RunLimits = DEFAULT_UTM_LIMITS) -> RunOutcome:
    """Run the universal machine on an encoded tape.

    The outcome is the universal machine's own: it halts exactly when
    the simulated machine halts, and runs into the limits otherwise.
    Pass the outcome to ``recover`` for the simulated counts.
    """
    return run_accelerated(universal_machine(), enc.word, lim,
                           want_snapshot=True)


def recover(outcome: RunOutcome) -> SimulatedOutcome:
    """Read the simulated machine's exact step and mark counts off the
    universal machine's final tape."""
    if not outcome.halted:
        return SimulatedOutcome(False, None, None, None)
    snap = outcome.snapshot
    if snap is None or snap.truncated:
        raise EncodingError("final tape snapshot unavailable or "
                            "truncated; the run is too wide to recover")

    def cell(i: int) -> str:
        bits = 0
        for j in range(_BITS):
            bits = (bits << 1) | snap.cell(_BITS * i + j)
        if bits >= len(_SYMS):
            raise EncodingError(f"invalid symbol code {bits} at cell {i}")
        return _SYMS[bits]

    if cell(0) != "L":
        raise EncodingError("left boundary marker missing")
    steps = 0
    j = 0
    while True:
        sym = cell(-1 - j)
        if sym == "C1":
            steps |= 1 << j
        elif sym != "C0":
            break
        j += 1
    i = 1
    while cell(i) != "B2":
        i += 1
    i += 1
    tape = []
    while True:
        sym = cell(i)
        if sym == "_":
            break
        if sym not in ("t0", "t1", "h0", "h1"):
            raise EncodingError(f"bad tape cell {sym} at {i}")
        tape.append(sym[1])
        i += 1
    return SimulatedOutcome(True, steps, tape.count("1"), "".join(tape))
