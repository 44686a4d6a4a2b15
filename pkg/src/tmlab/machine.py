"""Two-symbol Turing machine model and single-step operational semantics.

Machines have states A, B, ... (internally 0, 1, ...), a two-symbol
alphabet (0 = blank, 1 = mark), and a partial transition table.  The
distinguished halt state Z never appears as a source state.  Undefined
entries are legal: reaching one halts the machine without writing or
moving.  Both halting forms (explicit transition into Z, or a missing
entry) count as one step in run tallies; only the Z form executes its
write and move.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import NamedTuple, Optional

# Sentinel state index for the halt state Z.
HALT = -1

LEFT = -1
RIGHT = 1

# Z is reserved for halt, so source states may use A..Y only.
MAX_STATES = 25


class Rule(NamedTuple):
    """One transition: write a symbol, move one cell, change state."""

    write: int          # 0 or 1
    move: int           # LEFT (-1) or RIGHT (+1)
    next_state: int     # 0-based state index, or HALT


def state_letter(index: int) -> str:
    """Display letter for a state index; HALT renders as Z."""
    if index == HALT:
        return "Z"
    if 0 <= index < MAX_STATES:
        return chr(ord("A") + index)
    return f"S{index}"


@dataclass(frozen=True)
class Machine:
    """An n-state two-symbol machine with a partial transition table.

    ``table`` has exactly ``2 * n_states`` slots indexed by
    ``2 * state + symbol``; ``None`` marks an undefined entry.
    """

    n_states: int
    table: tuple

    def __post_init__(self):
        if self.n_states < 1:
            raise ValueError("machine needs at least one state")
        if len(self.table) != 2 * self.n_states:
            raise ValueError(
                f"table must have {2 * self.n_states} slots, "
                f"got {len(self.table)}")
        for slot, rule in enumerate(self.table):
            if rule is None:
                continue
            if not isinstance(rule, Rule):
                raise TypeError(f"slot {slot}: expected Rule or None")
            if rule.write not in (0, 1):
                raise ValueError(f"slot {slot}: write must be 0 or 1")
            if rule.move not in (LEFT, RIGHT):
                raise ValueError(f"slot {slot}: move must be LEFT or RIGHT")
            if rule.next_state != HALT and not (
                    0 <= rule.next_state < self.n_states):
                raise ValueError(
                    f"slot {slot}: next state {rule.next_state} is not a "
                    f"listed state or Z")

    def rule(self, state: int, symbol: int) -> Optional[Rule]:
        return self.table[2 * state + symbol]

    def defined_count(self) -> int:
        return sum(1 for r in self.table if r is not None)

    def states_with_halt_rule(self):
        """Indices of states owning a transition into Z."""
        return [s for s in range(self.n_states)
                for a in (0, 1)
                if (r := self.table[2 * s + a]) is not None
                and r.next_state == HALT]


def make_machine(n_states: int, rules: dict) -> Machine:
    """Build a Machine from a {(state, symbol): (write, move, next)} map."""
    table = [None] * (2 * n_states)
    for (state, symbol), entry in rules.items():
        if not (0 <= state < n_states) or symbol not in (0, 1):
            raise ValueError(f"bad rule key ({state}, {symbol})")
        table[2 * state + symbol] = Rule(*entry)
    return Machine(n_states, tuple(table))


def check_word(word: str) -> str:
    """Validate an input word: a finite string over {0, 1}."""
    for i, ch in enumerate(word):
        if ch not in "01":
            raise ValueError(f"input word has invalid symbol {ch!r} at {i}")
    return word


@dataclass
class Configuration:
    """A machine configuration: control state, head position, tape."""

    state: int
    head: int
    tape: "DenseTape"

    def copy(self) -> "Configuration":
        return Configuration(self.state, self.head, self.tape.copy())


class StepKind(enum.Enum):
    NEXT = "next"
    HALTED_BY_Z = "halted-by-z"
    HALTED_BY_UNDEFINED = "halted-by-undefined"


class StepResult(NamedTuple):
    kind: StepKind
    config: Optional[Configuration]


def initial_configuration(m: Machine, word: str = "") -> Configuration:
    """State A, head at cell 0, word written from cell 0, blanks elsewhere."""
    from .tape import DenseTape

    check_word(word)
    tape = DenseTape()
    for i, ch in enumerate(word):
        tape.write(i, int(ch))
    if word:
        tape.touch(0, len(word) - 1)
    else:
        tape.touch(0, 0)
    return Configuration(0, 0, tape)


def step(m: Machine, c: Configuration) -> StepResult:
    """Apply one transition; pure (the input configuration is not mutated).

    A transition into Z executes its write and move before reporting
    HALTED_BY_Z.  A missing entry reports HALTED_BY_UNDEFINED and leaves
    the configuration untouched.
    """
    if c.state == HALT:
        raise ValueError("Z configurations admit no successor")
    symbol = c.tape.cell(c.head)
    rule = m.table[2 * c.state + symbol]
    if rule is None:
        return StepResult(StepKind.HALTED_BY_UNDEFINED, c.copy())
    nxt = c.copy()
    nxt.tape.write(c.head, rule.write)
    nxt.head = c.head + rule.move
    nxt.tape.touch(nxt.head, nxt.head)
    nxt.state = rule.next_state
    if rule.next_state == HALT:
        return StepResult(StepKind.HALTED_BY_Z, nxt)
    return StepResult(StepKind.NEXT, nxt)
