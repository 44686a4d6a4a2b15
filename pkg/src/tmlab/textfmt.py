"""Bit-exact parser and serializer for the compact machine text format.

Grammar (the community-standard encoding for two-symbol machines):

    text   = group ("_" group)*          one group per state, A, B, ...
    group  = code code                   for read symbol 0, then 1
    code   = write direction next        3 characters
           | "---"                       undefined entry
    write     = "0" | "1"
    direction = "L" | "R"
    next      = state letter "A".."Y" within the group count, or "Z" (halt)

A machine with n states serializes to exactly 6n + (n - 1) characters.
Parse errors carry the character offset of the offending position.

The corpus file format is UTF-8 lines

    name<TAB>text[<TAB>steps<TAB>marks][<TAB>status]

where status is one of halts, certified-nonhalting, holdout (default
halts); expected steps/marks may be present only for halting entries.
Lines starting with '#' are comments.
"""

from __future__ import annotations

import importlib.resources
from dataclasses import dataclass
from typing import List, Optional

from .machine import HALT, LEFT, MAX_STATES, RIGHT, Machine, Rule

STATUS_HALTS = "halts"
STATUS_CERTIFIED_NONHALTING = "certified-nonhalting"
STATUS_HOLDOUT = "holdout"
STATUSES = (STATUS_HALTS, STATUS_CERTIFIED_NONHALTING, STATUS_HOLDOUT)

UNDEFINED_CODE = "---"


class ParseError(ValueError):
    """Malformed machine text; ``offset`` points inside the offending code."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (offset {offset})")
        self.offset = offset


def parse(text: str) -> Machine:
    """Parse standard machine text into a Machine."""
    if not text:
        raise ParseError("empty machine text", 0)
    groups = text.split("_")
    n = len(groups)
    if n > MAX_STATES:
        offset = sum(len(g) + 1 for g in groups[:MAX_STATES])
        raise ParseError(
            f"{n} groups, but state letters allow at most {MAX_STATES}",
            offset)
    table = [None] * (2 * n)
    offset = 0
    for g, group in enumerate(groups):
        if len(group) != 6:
            at = offset + min(len(group), 6)
            raise ParseError(
                f"group {g + 1} must be 6 characters, got {len(group)}", at)
        for half in (0, 1):
            code = group[3 * half:3 * half + 3]
            at = offset + 3 * half
            if code == UNDEFINED_CODE:
                continue
            if code[0] not in "01":
                raise ParseError(f"bad write symbol {code[0]!r}", at)
            if code[1] not in "LR":
                raise ParseError(f"bad direction {code[1]!r}", at + 1)
            letter = code[2]
            if letter == "Z":
                nxt = HALT
            elif "A" <= letter <= "Y":
                nxt = ord(letter) - ord("A")
                if nxt >= n:
                    raise ParseError(
                        f"state letter {letter!r} beyond group count {n}",
                        at + 2)
            else:
                raise ParseError(f"unknown state letter {letter!r}", at + 2)
            table[2 * g + half] = Rule(
                int(code[0]), LEFT if code[1] == "L" else RIGHT, nxt)
        offset += 7
    return Machine(n, tuple(table))


def serialize(m: Machine) -> str:
    """Exact inverse of parse; requires letter-encodable state count."""
    if m.n_states > MAX_STATES:
        raise ValueError(
            f"{m.n_states} states exceed the letter encoding ({MAX_STATES})")
    groups = []
    for q in range(m.n_states):
        codes = []
        for a in (0, 1):
            rule = m.table[2 * q + a]
            if rule is None:
                codes.append(UNDEFINED_CODE)
            else:
                letter = "Z" if rule.next_state == HALT else chr(
                    ord("A") + rule.next_state)
                codes.append(
                    f"{rule.write}{'L' if rule.move == LEFT else 'R'}{letter}")
        groups.append("".join(codes))
    return "_".join(groups)


@dataclass(frozen=True)
class CorpusEntry:
    name: str
    text: str
    expected_steps: Optional[int] = None
    expected_marks: Optional[int] = None
    status: str = STATUS_HALTS

    def __post_init__(self):
        if self.status not in STATUSES:
            raise ValueError(f"unknown status {self.status!r}")
        has_expected = (self.expected_steps is not None
                        or self.expected_marks is not None)
        if has_expected and self.status != STATUS_HALTS:
            raise ValueError("expected counts only valid for halting entries")

    def machine(self) -> Machine:
        return parse(self.text)


def parse_corpus(lines, source: str = "<corpus>") -> List[CorpusEntry]:
    entries: List[CorpusEntry] = []
    seen_texts = {}
    for lineno, raw in enumerate(lines, start=1):
        line = raw.rstrip("\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) < 2:
            raise ValueError(
                f"{source}:{lineno}: expected name<TAB>text, got {line!r}")
        name, text = fields[0], fields[1]
        rest = fields[2:]
        steps = marks = None
        status = STATUS_HALTS
        if len(rest) >= 2 and rest[0].isdigit() and rest[1].isdigit():
            steps, marks = int(rest[0]), int(rest[1])
            rest = rest[2:]
        if rest:
            status = rest.pop(0)
        if rest:
            raise ValueError(f"{source}:{lineno}: trailing fields {rest}")
        try:
            parse(text)
        except ParseError as e:
            raise ValueError(
                f"{source}:{lineno}: bad machine text: {e}") from e
        if text in seen_texts:
            raise ValueError(
                f"{source}:{lineno}: duplicate machine text also on line "
                f"{seen_texts[text]}")
        seen_texts[text] = lineno
        try:
            entries.append(CorpusEntry(name, text, steps, marks, status))
        except ValueError as e:
            raise ValueError(f"{source}:{lineno}: {e}") from e
    return entries


def load_corpus(path) -> List[CorpusEntry]:
    """Load a corpus TSV file; duplicate machine texts are rejected."""
    with open(path, encoding="utf-8") as fh:
        return parse_corpus(fh, source=str(path))


def load_bundled_corpus() -> List[CorpusEntry]:
    """The corpus shipped with the package (champions, holdouts, fixtures)."""
    ref = importlib.resources.files("tmlab").joinpath("data/machines.tsv")
    return parse_corpus(ref.read_text(encoding="utf-8").splitlines(),
                        source="tmlab/data/machines.tsv")


def bundled_entry(name: str) -> CorpusEntry:
    for entry in load_bundled_corpus():
        if entry.name == name:
            return entry
    raise KeyError(f"no bundled corpus entry named {name!r}")
