"""Direct and accelerated simulation producing exact run outcomes.

The direct stepper is the reference: a tight loop over a dense byte
tape.  The accelerated stepper runs on a run-length-encoded tape and
skips uniform runs: when the head crosses a (symbol, length-k) run
under a self-repeating transition it advances k steps at once, with
arbitrary-precision step accounting.  Both produce field-identical
RunOutcome values (kind, steps, marks, final state, extent) wherever
both complete; the test suite holds them to that bisimulation.

Limits are outcomes, not errors: exceeding the step, cell, or
wall-clock budget yields StepLimit / SpaceLimit / TimeLimit.
"""

from __future__ import annotations

import enum
import time
from dataclasses import dataclass
from typing import Optional, Tuple

from .machine import (HALT, Configuration, Machine, StepKind, check_word,
                      initial_configuration, state_letter, step)
from .tape import RleTape

DEFAULT_MAX_STEPS = 10 ** 8
DEFAULT_MAX_CELLS = 1 << 26
SNAPSHOT_CELL_CAP = 1 << 16

# Sentinel next-state for undefined table slots in the flattened tables.
_UNDEF = -2

# How often the wall clock is polled, in steps.
_CLOCK_MASK = 0x3FFF


@dataclass(frozen=True)
class RunLimits:
    max_steps: int = DEFAULT_MAX_STEPS
    max_cells: int = DEFAULT_MAX_CELLS
    wall_clock: Optional[float] = None   # seconds

    def __post_init__(self):
        if self.max_steps < 1:
            raise ValueError("max_steps must be >= 1")
        if self.max_cells < 1:
            raise ValueError("max_cells must be >= 1")


DEFAULT_LIMITS = RunLimits()


class OutcomeKind(enum.Enum):
    HALTED = "halted"
    STEP_LIMIT = "step-limit"
    SPACE_LIMIT = "space-limit"
    TIME_LIMIT = "time-limit"


@dataclass(frozen=True)
class TapeSnapshot:
    """Window of final tape cells; ``origin`` is the index of cells[0]."""

    origin: int
    cells: bytes
    head: int
    truncated: bool

    def cell(self, i: int) -> int:
        j = i - self.origin
        if 0 <= j < len(self.cells):
            return self.cells[j]
        return 0

    def render(self) -> str:
        return "".join(str(c) for c in self.cells)


@dataclass(frozen=True)
class RunOutcome:
    kind: OutcomeKind
    steps: int
    marks: int
    final_state: str            # "Z" after a halt via Z, else a state letter
    halt_kind: Optional[StepKind]
    halt_source: Optional[str]  # state the halting step was taken from
    halted_via_gadget: bool
    extent: Tuple[int, int]
    snapshot: Optional[TapeSnapshot]

    @property
    def halted(self) -> bool:
        return self.kind is OutcomeKind.HALTED

    def brief(self) -> str:
        return (f"{self.kind.value} steps={self.steps} marks={self.marks} "
                f"state={self.final_state}")


def _flatten(m: Machine):
    n = m.n_states
    write = [0] * (2 * n)
    move = [0] * (2 * n)
    nxt = [_UNDEF] * (2 * n)
    for idx, rule in enumerate(m.table):
        if rule is not None:
            write[idx] = rule.write
            move[idx] = rule.move
            nxt[idx] = rule.next_state
    return write, move, nxt


def _mk_outcome(kind, steps, marks, state, halt_kind, halt_source,
                gadget_states, lo, hi, cell_at, want_snapshot):
    snapshot = None
    if want_snapshot:
        width = hi - lo + 1
        truncated = width > SNAPSHOT_CELL_CAP
        w_hi = lo + SNAPSHOT_CELL_CAP - 1 if truncated else hi
        cells = bytes(cell_at(i) for i in range(lo, w_hi + 1))
        head = cell_at(None)
        snapshot = TapeSnapshot(lo, cells, head, truncated)
    via_gadget = (kind is OutcomeKind.HALTED and halt_source is not None
                  and halt_source in gadget_states)
    final_letter = ("Z" if halt_kind is StepKind.HALTED_BY_Z
                    else state_letter(state))
    return RunOutcome(
        kind=kind, steps=steps, marks=marks, final_state=final_letter,
        halt_kind=halt_kind,
        halt_source=state_letter(halt_source) if halt_source is not None
        else None,
        halted_via_gadget=via_gadget, extent=(lo, hi), snapshot=snapshot)


def run_direct(m: Machine, word: str = "", lim: RunLimits = DEFAULT_LIMITS,
               gadget_states: frozenset = frozenset(),
               want_snapshot: bool = True) -> RunOutcome:
    """Reference stepper: one transition per loop iteration."""
    check_word(word)
    write, move, nxt = _flatten(m)
    max_steps = lim.max_steps
    max_cells = lim.max_cells
    deadline = (time.monotonic() + lim.wall_clock
                if lim.wall_clock is not None else None)

    size = 1 << 12
    while size < 4 * (len(word) + 2):
        size *= 2
    tape = bytearray(size)
    origin = size // 2
    for i, ch in enumerate(word):
        tape[origin + i] = int(ch)
    marks = word.count("1")

    head = origin                       # physical head
    lo = origin                         # physical visited bounds
    hi = origin + max(len(word) - 1, 0)
    state = 0
    steps = 0

    def finish(kind, halt_kind=None, halt_source=None):
        return _mk_outcome(kind, steps, marks, state, halt_kind, halt_source,
                           gadget_states, lo - origin, hi - origin,
                           lambda i: (head - origin) if i is None
                           else (tape[i + origin]
                                 if 0 <= i + origin < len(tape) else 0),
                           want_snapshot)

    if hi - lo + 1 > max_cells:
        return finish(OutcomeKind.SPACE_LIMIT)

    while steps < max_steps:
        idx = 2 * state + tape[head]
        s2 = nxt[idx]
        if s2 == _UNDEF:
            steps += 1
            src = state
            return finish(OutcomeKind.HALTED, StepKind.HALTED_BY_UNDEFINED,
                          src)
        w = write[idx]
        old = tape[head]
        if old != w:
            tape[head] = w
            marks += w - old
        head += move[idx]
        steps += 1
        if head < lo:
            lo = head
        elif head > hi:
            hi = head
        if s2 < 0:   # HALT
            src = state
            state = s2
            if hi - lo + 1 > max_cells:
                # the halting move itself may cross the budget; the
                # completed halt takes precedence (the machine is done)
                pass
            return finish(OutcomeKind.HALTED, StepKind.HALTED_BY_Z, src)
        state = s2
        if hi - lo + 1 > max_cells:
            return finish(OutcomeKind.SPACE_LIMIT)
        if head == 0 or head == len(tape) - 1:
            newsize = len(tape) * 2
            shift = (newsize - len(tape)) // 2
            newtape = bytearray(newsize)
            newtape[shift:shift + len(tape)] = tape
            tape = newtape
            origin += shift
            head += shift
            lo += shift
            hi += shift
        if deadline is not None and steps & _CLOCK_MASK == 0:
            if time.monotonic() > deadline:
                return finish(OutcomeKind.TIME_LIMIT)

    return finish(OutcomeKind.STEP_LIMIT)


def run_accelerated(m: Machine, word: str = "",
                    lim: RunLimits = DEFAULT_LIMITS,
                    gadget_states: frozenset = frozenset(),
                    want_snapshot: bool = True) -> RunOutcome:
    """Run-length stepper with uniform-run skipping.

    Observably identical to run_direct; internal iteration count is
    typically far below the step count on sweep-heavy machines.
    """
    check_word(word)
    write, move, nxt = _flatten(m)
    max_steps = lim.max_steps
    max_cells = lim.max_cells
    deadline = (time.monotonic() + lim.wall_clock
                if lim.wall_clock is not None else None)

    # Runs fan out from the head: side[-1] is adjacent to the head.
    left = []
    right = []
    for ch in word[1:][::-1]:
        s = int(ch)
        if right and right[-1][0] == s:
            right[-1][1] += 1
        else:
            right.append([s, 1])
    head_sym = int(word[0]) if word else 0
    marks = word.count("1")

    pos = 0
    lo = 0
    hi = max(len(word) - 1, 0)
    state = 0
    steps = 0
    iters = 0

    def snapshot_cells():
        tape_cells, head_off = RleTape(
            [r[:] for r in left], [r[:] for r in right], head_sym).to_cells()
        first = pos - head_off

        def cell_at(i):
            if i is None:
                return pos
            j = i - first
            if 0 <= j < len(tape_cells):
                return tape_cells[j]
            return 0

        return cell_at

    def finish(kind, halt_kind=None, halt_source=None):
        cell_at = snapshot_cells() if want_snapshot else (
            lambda i: pos if i is None else 0)
        return _mk_outcome(kind, steps, marks, state, halt_kind, halt_source,
                           gadget_states, lo, hi, cell_at, want_snapshot)

    if hi - lo + 1 > max_cells:
        return finish(OutcomeKind.SPACE_LIMIT)

    while steps < max_steps:
        idx = 2 * state + head_sym
        s2 = nxt[idx]
        if s2 == _UNDEF:
            steps += 1
            return finish(OutcomeKind.HALTED, StepKind.HALTED_BY_UNDEFINED,
                          state)
        w = write[idx]
        d = move[idx]

        c = 1
        if s2 == state:
            adj = right if d == 1 else left
            if adj and adj[-1][0] == head_sym:
                c += adj[-1][1]
        remaining = max_steps - steps
        if c > remaining:
            c = remaining
        space_hit = False
        if d == 1:
            offend = (lo + max_cells) - pos
        else:
            offend = pos - (hi - max_cells)
        if c >= offend:
            c = offend
            space_hit = True

        if d == 1:
            if left and left[-1][0] == w:
                left[-1][1] += c
            else:
                left.append([w, c])
            take = c - 1
            if take:
                right[-1][1] -= take
                if right[-1][1] == 0:
                    right.pop()
            if right:
                top = right[-1]
                head_sym_new = top[0]
                if top[1] == 1:
                    right.pop()
                else:
                    top[1] -= 1
            else:
                head_sym_new = 0
            pos += c
            if pos > hi:
                hi = pos
        else:
            if right and right[-1][0] == w:
                right[-1][1] += c
            else:
                right.append([w, c])
            take = c - 1
            if take:
                left[-1][1] -= take
                if left[-1][1] == 0:
                    left.pop()
            if left:
                top = left[-1]
                head_sym_new = top[0]
                if top[1] == 1:
                    left.pop()
                else:
                    top[1] -= 1
            else:
                head_sym_new = 0
            pos -= c
            if pos < lo:
                lo = pos
        marks += c * (w - head_sym)
        head_sym = head_sym_new
        steps += c

        if s2 < 0:   # HALT (bulk never applies: Z is not a source state)
            src = state
            state = s2
            return finish(OutcomeKind.HALTED, StepKind.HALTED_BY_Z, src)
        state = s2
        if space_hit:
            return finish(OutcomeKind.SPACE_LIMIT)
        iters += 1
        if deadline is not None and iters & _CLOCK_MASK == 0:
            if time.monotonic() > deadline:
                return finish(OutcomeKind.TIME_LIMIT)

    return finish(OutcomeKind.STEP_LIMIT)


# Accelerated runs this short are re-checked against the direct stepper
# when mode is "auto".
AUTO_VERIFY_STEPS = 50_000


def run(m: Machine, word: str = "", lim: RunLimits = DEFAULT_LIMITS,
        mode: str = "auto", gadget_states: frozenset = frozenset(),
        want_snapshot: bool = True) -> RunOutcome:
    """Front door: mode is "direct", "accel", or "auto".

    Auto mode runs accelerated and, for small runs, re-verifies with the
    direct stepper; a disagreement is an internal fault and raises.
    """
    if mode == "direct":
        return run_direct(m, word, lim, gadget_states, want_snapshot)
    if mode == "accel":
        return run_accelerated(m, word, lim, gadget_states, want_snapshot)
    if mode != "auto":
        raise ValueError(f"unknown mode {mode!r}")
    fast = run_accelerated(m, word, lim, gadget_states, want_snapshot)
    if fast.steps <= AUTO_VERIFY_STEPS:
        ref = run_direct(m, word, lim, gadget_states, want_snapshot)
        if (ref.kind, ref.steps, ref.marks, ref.final_state) != (
                fast.kind, fast.steps, fast.marks, fast.final_state):
            raise AssertionError(
                f"engine disagreement: direct {ref.brief()} vs "
                f"accelerated {fast.brief()}")
    return fast


def trace(m: Machine, word: str = "", first_k: int = 1):
    """The first k configurations (fewer if the machine halts earlier)."""
    if first_k < 1:
        raise ValueError("k must be >= 1")
    configs = [initial_configuration(m, word)]
    current = configs[0]
    while len(configs) < first_k:
        result = step(m, current)
        if result.kind is not StepKind.NEXT:
            break
        configs.append(result.config)
        current = result.config
    return configs


def outcome_record(machine_text: str, word: str, outcome: RunOutcome,
                   elapsed: Optional[float] = None) -> dict:
    """Flat serialization of an outcome (steps as a decimal string)."""
    rec = {
        "machine": machine_text,
        "input": word,
        "kind": outcome.kind.value,
        "steps": str(outcome.steps),
        "marks": outcome.marks,
        "final_state": outcome.final_state,
        "halted_via_gadget": outcome.halted_via_gadget,
        "extent": list(outcome.extent),
    }
    if elapsed is not None:
        rec["elapsed"] = round(elapsed, 6)
    return rec
