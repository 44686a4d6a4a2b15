"""Sound, certificate-producing partial halting deciders and the
exhaustive small-class enumeration that serves as the repository's own
ground-truth oracle.

Six decider classes are implemented:

* cyclers: the exact configuration (state, head, tape content) recurs;
* translated cyclers: the configuration recurs shifted along the tape
  by a fixed offset, with identical content over the window the head
  can ever revisit;
* structural halt unreachability: no halting or undefined entry is
  reachable in the state graph, whatever the tape holds;
* inductive sweeps: the tape settles into a segment formula in n that
  one symbolically simulated macro period maps to the formula at n + 1;
* backward closure: every predecessor chain into a halting event dies
  by a write/read contradiction within a bounded depth;
* closed tape languages: a finite automaton over configurations whose
  rejected set contains the start, is closed under stepping, and
  excludes every halting entry.

A NeverHalts verdict always carries a certificate that
``replay_certificate`` validates independently of the decider that
produced it.  Unknown is an honest answer, never a proof.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterator, List, Optional, Tuple

from .machine import (HALT, LEFT, RIGHT, Machine, Rule, StepKind, check_word,
                      initial_configuration, step)
from .simulate import RunLimits, run_accelerated
from .textfmt import serialize

# -- certificates ---------------------------------------------------------


@dataclass(frozen=True)
class ExactCycle:
    """Configuration at step start+period equals the one at step start."""

    start: int
    period: int


@dataclass(frozen=True)
class TranslatedCycle:
    """Configuration recurs shifted by ``offset`` cells after ``period``
    steps, with identical tape content over the revisitable window."""

    start: int
    period: int
    offset: int


@dataclass(frozen=True)
class HaltUnreachable:
    """No halting event is reachable from the start state: every state
    the machine could ever enter has both entries defined with
    non-halting targets, so no undefined entry and no halt transition
    can ever fire."""

    reachable: Tuple[int, ...]


@dataclass(frozen=True)
class InductiveSweep:
    """Self-similar expanding sweep: at ``base_step`` the tape matches
    the segment formula at n = 0, and one symbolically simulated macro
    period maps the formula configuration for n to the one for n + 1,
    for every n at once.

    ``segments`` lists (word, coef, const) blocks left to right, each
    denoting ``word`` repeated coef*n + const times; the head stands on
    the blank cell just beyond the last segment, in ``state``.  For
    side = -1 the formula describes the left-right mirror image of the
    real tape."""

    side: int
    state: int
    base_step: int
    segments: Tuple[Tuple[str, int, int], ...]


@dataclass(frozen=True)
class BackwardClosure:
    """Every chain of predecessor steps leading to a halting event dies
    by a write/read contradiction within ``depth`` backward steps, so no
    configuration whatsoever (on any tape) reaches a halt."""

    depth: int


@dataclass(frozen=True)
class TapeClosure:
    """A regular tape language separating the reachable configurations
    from every halting one.

    ``dfa`` reads the half-tape left of the head from the blank sea
    inward (entry 2*d + symbol, state 0 absorbing blanks); ``edges``
    and ``accept`` form a nondeterministic automaton over pairs
    (DFA state d, machine state q), numbered d * n + q plus a final
    sink, that reads the scanned symbol and the right half-tape
    outward and accepts exactly the futures that can reach a halting
    or undefined entry.  Closure of ``edges`` under the machine's
    steps makes acceptance spread backward along every run, so a
    rejected start configuration can never halt.  ``mirrored`` marks a
    proof about the left-right mirror image of the machine."""

    mirrored: bool
    dfa: Tuple[int, ...]
    edges: Tuple[Tuple[int, int, int], ...]
    accept: Tuple[int, ...]


Certificate = object
# ExactCycle | TranslatedCycle | HaltUnreachable | InductiveSweep
# | BackwardClosure | TapeClosure


def certificate_to_dict(cert) -> dict:
    if isinstance(cert, ExactCycle):
        return {"kind": "exact-cycle", "start": cert.start,
                "period": cert.period}
    if isinstance(cert, TranslatedCycle):
        return {"kind": "translated-cycle", "start": cert.start,
                "period": cert.period, "offset": cert.offset}
    if isinstance(cert, HaltUnreachable):
        return {"kind": "halt-unreachable",
                "reachable": list(cert.reachable)}
    if isinstance(cert, InductiveSweep):
        return {"kind": "inductive-sweep", "side": cert.side,
                "state": cert.state, "base_step": cert.base_step,
                "segments": [list(seg) for seg in cert.segments]}
    if isinstance(cert, BackwardClosure):
        return {"kind": "backward-closure", "depth": cert.depth}
    if isinstance(cert, TapeClosure):
        return {"kind": "tape-closure", "mirrored": cert.mirrored,
                "dfa": list(cert.dfa),
                "edges": [list(e) for e in cert.edges],
                "accept": list(cert.accept)}
    raise TypeError(f"not a certificate: {cert!r}")


def certificate_from_dict(d: dict):
    if d["kind"] == "exact-cycle":
        return ExactCycle(d["start"], d["period"])
    if d["kind"] == "translated-cycle":
        return TranslatedCycle(d["start"], d["period"], d["offset"])
    if d["kind"] == "halt-unreachable":
        return HaltUnreachable(tuple(d["reachable"]))
    if d["kind"] == "inductive-sweep":
        return InductiveSweep(d["side"], d["state"], d["base_step"],
                              tuple((w, a, b)
                                    for w, a, b in d["segments"]))
    if d["kind"] == "backward-closure":
        return BackwardClosure(d["depth"])
    if d["kind"] == "tape-closure":
        return TapeClosure(
            bool(d["mirrored"]), tuple(d["dfa"]),
            tuple((src, sym, dst) for src, sym, dst in d["edges"]),
            tuple(d["accept"]))
    raise ValueError(f"unknown certificate kind {d.get('kind')!r}")


# -- verdicts -------------------------------------------------------------


class VerdictKind(enum.Enum):
    HALTS = "halts"
    NEVER_HALTS = "never-halts"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class Verdict:
    kind: VerdictKind
    steps: Optional[int] = None
    marks: Optional[int] = None
    certificate: Optional[object] = None
    budget_spent: Optional[dict] = None

    @staticmethod
    def halts(steps: int, marks: int) -> "Verdict":
        return Verdict(VerdictKind.HALTS, steps=steps, marks=marks)

    @staticmethod
    def never_halts(cert) -> "Verdict":
        if cert is None:
            raise ValueError("NeverHalts requires a certificate")
        return Verdict(VerdictKind.NEVER_HALTS, certificate=cert)

    @staticmethod
    def unknown(budget_spent: dict) -> "Verdict":
        return Verdict(VerdictKind.UNKNOWN, budget_spent=budget_spent)

    def to_dict(self) -> dict:
        d = {"kind": self.kind.value}
        if self.kind is VerdictKind.HALTS:
            d["steps"] = str(self.steps)
            d["marks"] = self.marks
        elif self.kind is VerdictKind.NEVER_HALTS:
            d["certificate"] = certificate_to_dict(self.certificate)
        else:
            d["budget_spent"] = self.budget_spent
        return d


DEFAULT_DECIDER_LIMITS = RunLimits(max_steps=10_000, max_cells=1 << 14)

# bound on stored record events before the translated-cycler search
# gives up; keeps memory proportional to tape width times this
_MAX_EVENTS = 8192


# -- structural halt reachability -----------------------------------------


def _reachable_states(m: Machine):
    """States reachable from the start over defined transitions,
    ignoring scanned symbols (a sound over-approximation of the states
    the machine can ever enter)."""
    reach = {0}
    frontier = [0]
    while frontier:
        q = frontier.pop()
        for a in (0, 1):
            rule = m.rule(q, a)
            if rule is not None and rule.next_state >= 0 \
                    and rule.next_state not in reach:
                reach.add(rule.next_state)
                frontier.append(rule.next_state)
    return reach


def _halt_candidates(m: Machine, word: str):
    """Halting events (state, symbol) that could conceivably fire.

    An undefined entry or halt transition of state q can fire only if q
    is enterable: reachable with an in-edge from a reachable state, or
    q is the start state scanning the known first symbol at step 0.
    """
    reach = _reachable_states(m)
    has_in_edge = set()
    for q in reach:
        for a in (0, 1):
            rule = m.rule(q, a)
            if rule is not None and rule.next_state >= 0:
                has_in_edge.add(rule.next_state)
    first_symbol = int(word[0]) if word else 0
    for q in sorted(reach):
        for a in (0, 1):
            rule = m.rule(q, a)
            if rule is None or rule.next_state == HALT:
                if q in has_in_edge or (q == 0 and a == first_symbol):
                    yield q, a


def decide_halt_unreachable(m: Machine, word: str = "") -> Verdict:
    """NeverHalts when no halting event is reachable, else Unknown.

    Purely structural: costs O(states), needs no simulation budget.
    """
    check_word(word)
    for _ in _halt_candidates(m, word):
        return Verdict.unknown({"analysis": "halt-reachable"})
    return Verdict.never_halts(
        HaltUnreachable(tuple(sorted(_reachable_states(m)))))


# -- backward reasoning ----------------------------------------------------

_BACKWARD_DEPTH = 64
_BACKWARD_NODES = 4096


def _backward_closure_depth(m: Machine, depth_cap: int,
                            node_cap: int) -> Optional[int]:
    """Smallest depth at which every predecessor chain of every halting
    event has died, or None if some chain is still alive at the caps.

    A chain node is (state, head, constraints), the constraints mapping
    cell offsets to the symbols they must hold for the remaining chain
    to halt.  Stepping backward through a rule p --a/w,d--> q moves the
    head back by d, requires that cell to hold w (what p wrote), and
    rewinds it to a (what p read).  A node consistent with the initial
    configuration counts as alive: only contradictions kill a chain.
    """
    reach = _reachable_states(m)
    into = [[] for _ in range(m.n_states)]
    for q in sorted(reach):
        for a in (0, 1):
            rule = m.rule(q, a)
            if rule is not None and rule.next_state >= 0:
                into[rule.next_state].append((q, a, rule.write, rule.move))
    frontier = [(q, 0, {0: a})
                for q in sorted(reach) for a in (0, 1)
                if (m.rule(q, a) is None
                    or m.rule(q, a).next_state == HALT)
                and (into[q] or q == 0)]
    if not frontier:
        return 0
    nodes = 0
    for depth in range(1, depth_cap + 1):
        successors = []
        for q, h, need in frontier:
            if q == 0 and all(v == 0 for v in need.values()):
                return None
            for p, a, w, d in into[q]:
                h2 = h - d
                have = need.get(h2)
                if have is not None and have != w:
                    continue
                need2 = dict(need)
                need2[h2] = a
                successors.append((p, h2, need2))
                nodes += 1
                if nodes > node_cap:
                    return None
        if not successors:
            return depth
        frontier = successors
    return None


def decide_backward(m: Machine, word: str = "") -> Verdict:
    """NeverHalts when bounded backward search proves no configuration
    at all can reach a halting event, else Unknown.

    Sound for every start word: a halting run's final steps would form
    a consistent predecessor chain, and all such chains die.
    """
    check_word(word)
    depth = _backward_closure_depth(m, _BACKWARD_DEPTH, _BACKWARD_NODES)
    if depth is None:
        return Verdict.unknown({"depth": _BACKWARD_DEPTH,
                                "nodes": _BACKWARD_NODES})
    return Verdict.never_halts(BackwardClosure(depth))


# -- cyclers --------------------------------------------------------------


def _flat(m: Machine):
    n = m.n_states
    write = [0] * (2 * n)
    move = [0] * (2 * n)
    nxt = [-2] * (2 * n)
    for idx, rule in enumerate(m.table):
        if rule is not None:
            write[idx], move[idx], nxt[idx] = rule
    return write, move, nxt


def decide_cyclers(m: Machine, budget: RunLimits = DEFAULT_DECIDER_LIMITS,
                   word: str = "") -> Verdict:
    """Halts / NeverHalts(ExactCycle) / Unknown within the budget.

    Sound: an exact configuration recurrence proves the machine loops
    forever.  The search keys configurations by (state, head, tape
    content trimmed to its marked span), so blank-only padding never
    hides a recurrence.
    """
    check_word(word)
    write, move, nxt = _flat(m)
    max_steps = budget.max_steps
    max_cells = budget.max_cells

    size = 256
    while size < 4 * (len(word) + 2):
        size *= 2
    tape = bytearray(size)
    origin = size // 2
    for i, ch in enumerate(word):
        tape[origin + i] = int(ch)
    marks = word.count("1")
    head = origin
    state = 0

    seen = {}
    t = 0
    while True:
        first = tape.find(1)
        if first < 0:
            key = (state, head - origin, 0, b"")
        else:
            last = tape.rfind(1)
            key = (state, head - origin, first - origin,
                   bytes(tape[first:last + 1]))
        prior = seen.get(key)
        if prior is not None:
            return Verdict.never_halts(ExactCycle(prior, t - prior))
        seen[key] = t
        if t >= max_steps:
            return Verdict.unknown({"max_steps": max_steps})
        idx = 2 * state + tape[head]
        s2 = nxt[idx]
        if s2 == -2:
            return Verdict.halts(t + 1, marks)
        old = tape[head]
        w = write[idx]
        if old != w:
            tape[head] = w
            marks += w - old
        head += move[idx]
        t += 1
        if s2 < 0:
            return Verdict.halts(t, marks)
        state = s2
        if head == 0 or head == len(tape) - 1:
            if len(tape) >= 4 * max_cells:
                return Verdict.unknown(
                    {"max_steps": t, "max_cells": max_cells})
            shift = len(tape) // 2
            tape = bytearray(shift) + tape + bytearray(shift)
            origin += shift
            head += shift


# -- translated cyclers ---------------------------------------------------


@dataclass
class _RecordEvent:
    side: int                 # +1 right, -1 left
    state: int
    step: int
    pos: int
    span: Optional[Tuple[int, bytes]]   # (first-mark index, content) or None
    clean: bool               # no marks beyond the head on the record side
    seg_min: int              # min head pos from this event to the next
    seg_max: int


def decide_translated_cyclers(m: Machine,
                              budget: RunLimits = DEFAULT_DECIDER_LIMITS,
                              word: str = "") -> Verdict:
    """Halts / NeverHalts(TranslatedCycle) / Unknown within the budget.

    Candidate pairs are record events: steps at which the head stands
    strictly beyond every previously visited cell on one side.  For two
    same-state, same-side records t1 < t2 with head offset d, the
    machine provably never halts if the tape segments the head can ever
    revisit agree after shifting by d and everything beyond the record
    head is blank at both times.
    """
    check_word(word)
    write, move, nxt = _flat(m)
    max_steps = budget.max_steps
    max_cells = budget.max_cells

    size = 256
    while size < 4 * (len(word) + 2):
        size *= 2
    tape = bytearray(size)
    origin = size // 2
    for i, ch in enumerate(word):
        tape[origin + i] = int(ch)
    marks = word.count("1")
    head = origin
    state = 0

    events: List[_RecordEvent] = []
    by_key = {}   # (side, state) -> indices into events

    def snapshot_span():
        first = tape.find(1)
        if first < 0:
            return None
        last = tape.rfind(1)
        return (first - origin, bytes(tape[first:last + 1]))

    def add_event(side: int, t: int):
        pos = head - origin
        span = snapshot_span()
        if span is None:
            clean = True
        elif side == RIGHT:
            clean = span[0] + len(span[1]) - 1 <= pos
        else:
            clean = span[0] >= pos
        # spans are only consulted for clean events; skip the copy otherwise
        ev = _RecordEvent(side, state, t, pos, span if clean else None,
                          clean, pos, pos)
        idx = len(events)
        events.append(ev)
        key = (side, state)
        for j in by_key.get(key, ()):
            cert = try_pair(events[j], ev, j, idx)
            if cert is not None:
                return cert
        by_key.setdefault(key, []).append(idx)
        return None

    def try_pair(e1: _RecordEvent, e2: _RecordEvent, i1: int, i2: int):
        if not (e1.clean and e2.clean):
            return None
        d = e2.pos - e1.pos
        if d == 0 or (d > 0) != (e1.side == RIGHT):
            return None
        reach_min = min(ev.seg_min for ev in events[i1:i2])
        reach_max = max(ev.seg_max for ev in events[i1:i2])
        if e1.side == RIGHT:
            win_lo, win_hi = reach_min, e1.pos
        else:
            win_lo, win_hi = e1.pos, reach_max
        w1 = _span_window(e1.span, win_lo, win_hi)
        w2 = _span_window(e2.span, win_lo + d, win_hi + d)
        if w1 == w2:
            return TranslatedCycle(e1.step, e2.step - e1.step, d)
        return None

    lo = origin
    hi = origin + max(len(word) - 1, 0)
    cert = add_event(RIGHT, 0) or add_event(LEFT, 0)
    if cert is not None:
        return Verdict.never_halts(cert)

    t = 0
    while t < max_steps:
        idx = 2 * state + tape[head]
        s2 = nxt[idx]
        if s2 == -2:
            return Verdict.halts(t + 1, marks)
        old = tape[head]
        w = write[idx]
        if old != w:
            tape[head] = w
            marks += w - old
        head += move[idx]
        t += 1
        if s2 < 0:
            return Verdict.halts(t, marks)
        state = s2
        if events:
            last = events[-1]
            p = head - origin
            if p < last.seg_min:
                last.seg_min = p
            elif p > last.seg_max:
                last.seg_max = p
        if head > hi:
            hi = head
            if hi - lo + 1 > max_cells or len(events) >= _MAX_EVENTS:
                return Verdict.unknown({"max_steps": t,
                                        "max_cells": max_cells})
            cert = add_event(RIGHT, t)
            if cert is not None:
                return Verdict.never_halts(cert)
        elif head < lo:
            lo = head
            if hi - lo + 1 > max_cells or len(events) >= _MAX_EVENTS:
                return Verdict.unknown({"max_steps": t,
                                        "max_cells": max_cells})
            cert = add_event(LEFT, t)
            if cert is not None:
                return Verdict.never_halts(cert)
        if head == 0 or head == len(tape) - 1:
            shift = len(tape) // 2
            tape = bytearray(shift) + tape + bytearray(shift)
            origin += shift
            head += shift
            lo += shift
            hi += shift
    return Verdict.unknown({"max_steps": max_steps})


def _span_window(span, lo: int, hi: int) -> bytes:
    """Cells lo..hi (inclusive) given a (first-index, content) mark span."""
    if hi < lo:
        return b""
    out = bytearray(hi - lo + 1)
    if span is not None:
        first, content = span
        for i in range(max(lo, first), min(hi, first + len(content) - 1) + 1):
            out[i - lo] = content[i - first]
    return bytes(out)


# -- expanding sweeps ------------------------------------------------------
#
# Machines that bounce between tape frontiers with ever longer sweeps
# never repeat a configuration, translated or not, so the cycle
# deciders cannot touch them.  They are certified here by induction: a
# formula tape with affine repeat counts (word repeated coef*n + const
# times) is guessed from record snapshots, then one macro period is
# simulated symbolically.  Each engine move is exact for every n >= 0
# at once: ordinary steps touch only concrete cells, a whole block is
# crossed when one probe copy is crossed entering and leaving in the
# same state, and a bounce peels a single copy off a block.  Reaching
# the formula for n + 1 therefore proves the machine maps C(n) to
# C(n+1) for all n, and C(0) is checked against the real tape.

_SWEEP_STEP_BUDGET = 1 << 17
_SWEEP_OP_BUDGET = 4096
_SWEEP_WINDOW_CAP = 1 << 16
_SWEEP_PROBE_BUDGET = 50_000
_SWEEP_ATTEMPTS = 24
_SWEEP_EVENTS_KEPT = 48


def _mirror_machine(m: Machine) -> Machine:
    table = tuple(None if r is None else Rule(r.write, -r.move, r.next_state)
                  for r in m.table)
    return Machine(m.n_states, table)


def _primitive_root(word: bytes) -> Tuple[bytes, int]:
    """Shortest u with word == u * k; returns (u, k)."""
    L = len(word)
    for d in range(1, L + 1):
        if L % d == 0 and word == word[:d] * (L // d):
            return word[:d], L // d
    return word, 1


def _greedy_blocks(data: bytes, p: int):
    """Deterministic left-to-right parse into maximal period-p repeats;
    cells not starting a repeat become singleton blocks."""
    out = []
    i = 0
    L = len(data)
    while i < L:
        w = data[i:i + p]
        if len(w) == p:
            r = 1
            while data[i + r * p: i + (r + 1) * p] == w:
                r += 1
            if r >= 2:
                out.append((bytes(w), r))
                i += r * p
                continue
        out.append((data[i:i + 1], 1))
        i += 1
    return out


def _fit_segments(snaps, p: int):
    """Affine fit over three same-structure block parses, oldest first.

    Returns ((word, coef, const), ...) with const from the oldest
    snapshot, or None when the structures differ or growth is not
    linear."""
    parses = [_greedy_blocks(s, p) for s in snaps]
    if not parses[0]:
        return None
    if any(len(q) != len(parses[0]) for q in parses[1:]):
        return None
    segs = []
    grows = False
    for (w1, c1), (w2, c2), (w3, c3) in zip(*parses):
        if w1 != w2 or w2 != w3:
            return None
        a = c2 - c1
        if a < 0 or c3 - c2 != a:
            return None
        grows = grows or a > 0
        segs.append((w1, a, c1))
    return tuple(segs) if grows else None


def _norm_items(items, trim_left: bool, trim_right: bool):
    """Canonical contiguous item list: primitive block words, absorbed
    same-content neighbors, merged runs, outer blanks trimmed only at
    the designated open ends."""
    work = []
    for it in items:
        if it[0] == "c":
            if len(it[1]):
                work.append(["c", bytes(it[1])])
            continue
        _, w, a, c = it
        u, k = _primitive_root(w)
        a, c = a * k, c * k
        if a == 0:
            if c:
                work.append(["c", u * c])
            continue
        # fix the block's phase: rotate the word to its greatest
        # rotation and peel the split prefix and suffix off as cells,
        # so equal tapes written with offset phases compare equal
        j = max(range(len(u)), key=lambda i: u[i:] + u[:i])
        if j:
            work.append(["c", u[:j]])
            work.append(["s", u[j:] + u[:j], a, c - 1])
            work.append(["c", u[j:]])
        else:
            work.append(["s", u, a, c])
    for _ in range(4):
        changed = False
        merged = []
        for it in work:
            if merged and merged[-1][0] == "c" and it[0] == "c":
                merged[-1][1] += it[1]
                changed = True
            elif (merged and it[0] == "s" and merged[-1][0] == "s"
                    and merged[-1][1] == it[1]):
                merged[-1][2] += it[2]
                merged[-1][3] += it[3]
                changed = True
            else:
                merged.append(it)
        work = merged
        for i, it in enumerate(work):
            if it[0] != "s":
                continue
            u = it[1]
            if i > 0 and work[i - 1][0] == "c":
                prev = work[i - 1]
                if len(u) == 1:
                    n = 0
                    while n < len(prev[1]) and prev[1][-1 - n] == u[0]:
                        n += 1
                    if n:
                        prev[1] = prev[1][:-n]
                        it[3] += n
                        changed = True
                else:
                    while prev[1].endswith(u):
                        prev[1] = prev[1][:-len(u)]
                        it[3] += 1
                        changed = True
            if i + 1 < len(work) and work[i + 1][0] == "c":
                nxt = work[i + 1]
                if len(u) == 1:
                    n = 0
                    while n < len(nxt[1]) and nxt[1][n] == u[0]:
                        n += 1
                    if n:
                        nxt[1] = nxt[1][n:]
                        it[3] += n
                        changed = True
                else:
                    while nxt[1].startswith(u):
                        nxt[1] = nxt[1][len(u):]
                        it[3] += 1
                        changed = True
        work = [it for it in work if it[0] == "s" or len(it[1])]
        if not changed:
            break
    if trim_left:
        while work:
            it = work[0]
            if it[0] == "s" and not any(it[1]):
                work.pop(0)
            elif it[0] == "c":
                stripped = it[1].lstrip(b"\x00")
                if stripped:
                    it[1] = stripped
                    break
                work.pop(0)
            else:
                break
    if trim_right:
        while work:
            it = work[-1]
            if it[0] == "s" and not any(it[1]):
                work.pop()
            elif it[0] == "c":
                stripped = it[1].rstrip(b"\x00")
                if stripped:
                    it[1] = stripped
                    break
                work.pop()
            else:
                break
    return tuple(tuple(it) for it in work)


def _sweep_canonical(left, win, win_head, right):
    """Head-relative canonical form of a zipper configuration.

    The tape is contiguous by construction, so (items left of the head
    cell, head cell, items right of it) pins every cell for every n."""
    a_items = list(left)
    if win_head:
        a_items.append(("c", bytes(win[:win_head])))
    b_items = []
    if win_head + 1 < len(win):
        b_items.append(("c", bytes(win[win_head + 1:])))
    b_items.extend(reversed(right))
    return (_norm_items(a_items, True, False), win[win_head],
            _norm_items(b_items, False, True))


def _probe(write, move, nxt, state, word, enter_at):
    """Run one concrete copy of a block word from the given entry cell.

    Returns (exit_side, exit_state, transformed, steps) when the head
    leaves the copy, or None on a halt or a probe that will not leave
    (the copy's configuration space is finite, so a long probe loops)."""
    buf = bytearray(word)
    pos = enter_at
    st = state
    for t in range(_SWEEP_PROBE_BUDGET):
        if pos < 0:
            return (LEFT, st, bytes(buf), t)
        if pos >= len(buf):
            return (RIGHT, st, bytes(buf), t)
        idx = 2 * st + buf[pos]
        s2 = nxt[idx]
        if s2 == -2 or s2 < 0:
            return None
        buf[pos] = write[idx]
        pos += move[idx]
        st = s2
    return None


def _formula_zipper(segments, shift: int):
    """Zipper for the formula at n + shift: content on the left, head
    on the blank cell just beyond it."""
    left = []
    for w, a, c in segments:
        cnt = c + a * shift
        if a == 0:
            left.append(("c", w * cnt))
        else:
            left.append(("s", w, a, cnt))
    return left, bytearray(1), 0, []


def _verify_sweep(m: Machine, state0: int, segments) -> bool:
    """Symbolically simulate one macro period from the formula at n and
    accept on reaching the formula at n + 1.  Every accepted move is
    valid for all n >= 0 simultaneously, so acceptance proves the
    machine never halts once the base configuration is real."""
    if not segments:
        return False
    for w, a, c in segments:
        if not w or a < 0 or c < 1:
            return False
    write, move, nxt = _flat(m)
    target = _sweep_canonical(*_formula_zipper(segments, 1))
    left, win, win_head, right = _formula_zipper(segments, 0)
    state = state0
    steps = 0
    ops = 0
    while steps < _SWEEP_STEP_BUDGET and ops < _SWEEP_OP_BUDGET \
            and len(win) < _SWEEP_WINDOW_CAP:
        if win_head < 0 or win_head >= len(win):
            pulling_left = win_head < 0
            stack = left if pulling_left else right
            if not stack:
                if pulling_left:
                    win[:0] = b"\x00"
                    win_head += 1
                else:
                    win.append(0)
                continue
            item = stack.pop()
            if item[0] == "c":
                if pulling_left:
                    win[:0] = item[1]
                    win_head += len(item[1])
                else:
                    win.extend(item[1])
                continue
            _, w, a, cnt = item
            enter_at = len(w) - 1 if pulling_left else 0
            got = _probe(write, move, nxt, state, w, enter_at)
            ops += 1
            if got is None:
                return False
            exit_side, exit_state, w2, probe_steps = got
            steps += probe_steps
            crossed = exit_side == (LEFT if pulling_left else RIGHT)
            if crossed and exit_state == state:
                # uniform crossing of every copy; the crossed block now
                # lies between the head and the old window, and the
                # head's next cell comes from the far side
                other = right if pulling_left else left
                if len(win):
                    other.append(("c", bytes(win)))
                other.append(("s", w2, a, cnt))
                win = bytearray()
                win_head = -1 if pulling_left else 0
                continue
            # a failed plain crossing may still cross with context: a
            # short stretch of adjacent window cells rides along with
            # the head, re-formed behind it after each copy, so the
            # rule inducts over copies with no count change
            shifted = False
            for j in range(1, min(len(win), 2 * len(w) + 2) + 1):
                if pulling_left:
                    ctx = bytes(win[:j])
                    got2 = _probe(write, move, nxt, state, w + ctx,
                                  len(w) - 1)
                    ops += 1
                    if got2 is None:
                        continue
                    side2, state2, buf2, st2 = got2
                    if side2 != LEFT or state2 != state \
                            or buf2[:j] != ctx:
                        continue
                    steps += st2
                    if len(win) > j:
                        right.append(("c", bytes(win[j:])))
                    right.append(("s", buf2[j:], a, cnt))
                    win = bytearray(ctx)
                    win_head = -1
                else:
                    ctx = bytes(win[-j:])
                    got2 = _probe(write, move, nxt, state, ctx + w, j)
                    ops += 1
                    if got2 is None:
                        continue
                    side2, state2, buf2, st2 = got2
                    if side2 != RIGHT or state2 != state \
                            or buf2[len(w):] != ctx:
                        continue
                    steps += st2
                    if len(win) > j:
                        left.append(("c", bytes(win[:-j])))
                    left.append(("s", buf2[:len(w)], a, cnt))
                    win = bytearray(ctx)
                    win_head = j
                shifted = True
                break
            if shifted:
                continue
            # no uniform rule: peel the nearest copy off concretely and
            # carry on (back into the window on a bounce, onward into
            # the remaining copies on a non-uniform crossing); the
            # remaining count must stay positive for every n
            if cnt < 2:
                return False
            stack.append(("s", w, a, cnt - 1))
            if crossed:
                if pulling_left:
                    win[:0] = w2
                else:
                    win.extend(w2)
                    win_head += len(w2)
            elif pulling_left:
                win[:0] = w2
                win_head += len(w2) + 1
            else:
                win.extend(w2)
                win_head -= 1
            state = exit_state
            continue
        if state == state0 and steps > 0 and not right \
                and not any(win[win_head:]):
            ops += 1
            if _sweep_canonical(left, win, win_head, right) == target:
                return True
        idx = 2 * state + win[win_head]
        s2 = nxt[idx]
        if s2 == -2 or s2 < 0:
            return False
        win[win_head] = write[idx]
        win_head += move[idx]
        steps += 1
        state = s2
    return False


def _collect_records(m: Machine, budget: RunLimits, keep: int):
    """Record events (step, state, head, oriented content) per side, or
    a Halts verdict if the machine halts while collecting.

    Content is the byte string from the outermost mark through the cell
    next to the head, reversed for left-side events so both sides read
    in sweep orientation (head just beyond the right end)."""
    write, move, nxt = _flat(m)
    max_steps = budget.max_steps
    size = 1 << 10
    tape = bytearray(size)
    origin = size // 2
    head = origin
    state = 0
    marks = 0
    lo = hi = origin
    from collections import deque
    events = {RIGHT: deque(maxlen=keep), LEFT: deque(maxlen=keep)}
    t = 0
    while t < max_steps:
        idx = 2 * state + tape[head]
        s2 = nxt[idx]
        if s2 == -2:
            return Verdict.halts(t + 1, marks)
        old = tape[head]
        w = write[idx]
        if old != w:
            tape[head] = w
            marks += w - old
        head += move[idx]
        t += 1
        if s2 < 0:
            return Verdict.halts(t, marks)
        state = s2
        if head > hi:
            hi = head
            first = tape.find(1)
            content = bytes(tape[first:head]) if 0 <= first < head else b""
            events[RIGHT].append((t, state, content))
        elif head < lo:
            lo = head
            last = tape.rfind(1)
            content = bytes(tape[head + 1:last + 1][::-1]) if last > head \
                else b""
            events[LEFT].append((t, state, content))
        if head == 0 or head == len(tape) - 1:
            shift = len(tape) // 2
            tape = bytearray(shift) + tape + bytearray(shift)
            origin += shift
            head += shift
            lo += shift
            hi += shift
    return events


def decide_sweeps(m: Machine,
                  budget: RunLimits = DEFAULT_DECIDER_LIMITS) -> Verdict:
    """Halts / NeverHalts(InductiveSweep) / Unknown, from a blank tape.

    The guess is heuristic (snapshots of record events fitted to linear
    block growth); only formulas that pass the symbolic one-period
    verification are ever turned into verdicts, so a bad guess costs
    time, never soundness.
    """
    events = _collect_records(m, budget, _SWEEP_EVENTS_KEPT)
    if isinstance(events, Verdict):
        return events
    attempts = 0
    for side in (RIGHT, LEFT):
        evs = list(events[side])
        groups = {}
        for i, (t, state, content) in enumerate(evs):
            groups.setdefault(state, []).append(i)
        ordered = sorted(groups.items(), key=lambda kv: -len(kv[1]))
        oriented = m if side == RIGHT else _mirror_machine(m)
        for state, idxs in ordered:
            for stride in (1, 2, 3, 4):
                if len(idxs) < 2 * stride + 1:
                    continue
                trip = [evs[idxs[-1 - 2 * stride]], evs[idxs[-1 - stride]],
                        evs[idxs[-1]]]
                snaps = [e[2] for e in trip]
                for p in (1, 2, 3, 4):
                    segs = _fit_segments(snaps, p)
                    if segs is None:
                        continue
                    attempts += 1
                    if _verify_sweep(oriented, state, segs):
                        cert = InductiveSweep(
                            side, state, trip[0][0],
                            tuple(("".join(str(b) for b in w), a, c)
                                  for w, a, c in segs))
                        return Verdict.never_halts(cert)
                    if attempts >= _SWEEP_ATTEMPTS:
                        return Verdict.unknown(
                            {"max_steps": budget.max_steps,
                             "attempts": attempts})
    return Verdict.unknown({"max_steps": budget.max_steps,
                            "attempts": attempts})


# -- closed tape languages -------------------------------------------------

# largest left-context DFA size tried; 2 states already settle the
# n <= 3 class and 4 keeps the full search well under a second
_CTL_DFA_STATES = 4


def _context_dfas(k: int) -> Iterator[Tuple[int, ...]]:
    """Every k-state binary DFA as a flat table (entry 2*d + symbol),
    one per isomorphism class: state 0 absorbs the blank sea
    (table[0] = 0) and new states are numbered in order of first use,
    so relabelled duplicates never appear."""
    table = [0]

    def rec(used: int) -> Iterator[Tuple[int, ...]]:
        if len(table) == 2 * k:
            if used == k:
                yield tuple(table)
            return
        for t in range(min(used + 1, k)):
            table.append(t)
            yield from rec(used + (t == used))
            table.pop()

    yield from rec(1)


def _halt_nfa(flat, n: int, dfa: Tuple[int, ...], k: int):
    """Least halt-reaching automaton for a machine under a left-context
    DFA: transition sets ``delta`` and blank-tail acceptors ``accept``.

    State d * n + q stands for the machine in state q with the tape
    left of the head driven to DFA state d; the sink U = k * n stands
    for a halting event already reached.  The automaton reads the
    scanned symbol followed by the right half-tape outward and must
    accept whenever that future can halt, which pins down its edges:

    * a halting or undefined entry (q, s) sends d*n + q to U on s, and
      U accepts everything;
    * a right rule (q, s) -> (w, R, q2) sends d*n + q on s to the pair
      for q2 with w absorbed into the left context;
    * a left rule (q, s) -> (w, L, q2) uncovers an unknown cell x, so
      for every DFA predecessor (p, x) of d, whatever the pair for q2
      under p reaches by reading x then w is also reached from
      d*n + q on s.

    ``accept`` holds the states that accept an all-blank tail: U plus
    everything with a 0-edge into ``accept``.  Both sets are the least
    fixpoints of these rules."""
    write, move, nxt = flat
    U = k * n
    pre = [[] for _ in range(k)]
    for d in range(k):
        for x in (0, 1):
            pre[dfa[2 * d + x]].append((d, x))
    delta = [(set(), set()) for _ in range(U + 1)]
    delta[U][0].add(U)
    delta[U][1].add(U)
    lefts = []
    for q in range(n):
        for s in (0, 1):
            idx = 2 * q + s
            q2 = nxt[idx]
            if q2 < 0:
                for d in range(k):
                    delta[d * n + q][s].add(U)
            elif move[idx] == RIGHT:
                for d in range(k):
                    delta[d * n + q][s].add(dfa[2 * d + write[idx]] * n + q2)
            else:
                lefts.append((q, s, write[idx], q2))
    changed = True
    while changed:
        changed = False
        for q, s, w, q2 in lefts:
            for d in range(k):
                grow = set()
                for p, x in pre[d]:
                    for y in delta[p * n + q2][x]:
                        grow |= delta[y][w]
                tgt = delta[d * n + q][s]
                if not grow <= tgt:
                    tgt |= grow
                    changed = True
    accept = {U}
    changed = True
    while changed:
        changed = False
        for z in range(U + 1):
            if z not in accept and delta[z][0] & accept:
                accept.add(z)
                changed = True
    return delta, accept


def _nfa_rejects_start(delta, accept, dfa, n: int, word: str,
                       mirrored: bool) -> bool:
    """True when no run over the start configuration's future accepts.

    The start tape puts the word right of the head; under a mirror
    proof it lies left of the head read backwards, with its first
    symbol scanned."""
    if mirrored and word:
        d = 0
        for ch in word[:0:-1]:
            d = dfa[2 * d + int(ch)]
        states = {d * n}
        future = word[0]
    else:
        states = {0}
        future = word
    for ch in future:
        sym = int(ch)
        states = {dst for z in states for dst in delta[z][sym]}
    return not any(z in accept for z in states)


def decide_tape_closure(m: Machine, word: str = "",
                        max_dfa_states: int = _CTL_DFA_STATES) -> Verdict:
    """NeverHalts when some left-context DFA, on the machine or its
    mirror image, yields a halt-reaching automaton that rejects the
    start configuration; Unknown once every DFA up to the size cap has
    failed.  Smaller DFAs are tried first, so certificates stay small.
    """
    check_word(word)
    tried = 0
    for k in range(1, max_dfa_states + 1):
        for mirrored in (False, True):
            mm = _mirror_machine(m) if mirrored else m
            flat = _flat(mm)
            for dfa in _context_dfas(k):
                tried += 1
                delta, accept = _halt_nfa(flat, mm.n_states, dfa, k)
                if _nfa_rejects_start(delta, accept, dfa, mm.n_states,
                                      word, mirrored):
                    edges = tuple(sorted(
                        (z, sym, dst)
                        for z, by_sym in enumerate(delta)
                        for sym in (0, 1) for dst in by_sym[sym]))
                    return Verdict.never_halts(TapeClosure(
                        mirrored, dfa, edges, tuple(sorted(accept))))
    return Verdict.unknown({"dfa_states": max_dfa_states,
                            "dfas_tried": tried})


# -- certificate replay ---------------------------------------------------


def replay_certificate(m: Machine, cert, word: str = "") -> bool:
    """Validate a certificate independently of the decider that made it.

    Cycle certificates are checked by re-simulation with the reference
    single-step semantics; reachability certificates by verifying the
    claimed state set is closed and admits no halting event.  A decider
    bug cannot vouch for itself.
    """
    if isinstance(cert, ExactCycle):
        return _replay_exact(m, cert, word)
    if isinstance(cert, TranslatedCycle):
        return _replay_translated(m, cert, word)
    if isinstance(cert, HaltUnreachable):
        return _replay_halt_unreachable(m, cert, word)
    if isinstance(cert, InductiveSweep):
        return _replay_sweep(m, cert, word)
    if isinstance(cert, BackwardClosure):
        return _replay_backward(m, cert, word)
    if isinstance(cert, TapeClosure):
        return _replay_tape_closure(m, cert, word)
    return False


def _config_key(c) -> Tuple:
    return (c.state, c.head, c.tape.content_key())


def _advance(m: Machine, c, k: int):
    """k reference steps; returns (config, head-history) or None on halt."""
    heads = []
    for _ in range(k):
        heads.append(c.head)
        result = step(m, c)
        if result.kind is not StepKind.NEXT:
            return None
        c = result.config
    return c, heads


def _replay_exact(m: Machine, cert: ExactCycle, word: str) -> bool:
    if cert.start < 0 or cert.period < 1:
        return False
    c = initial_configuration(m, word)
    got = _advance(m, c, cert.start)
    if got is None:
        return False
    c1, _ = got
    got = _advance(m, c1, cert.period)
    if got is None:
        return False
    c2, _ = got
    return _config_key(c1) == _config_key(c2)


def _replay_translated(m: Machine, cert: TranslatedCycle, word: str) -> bool:
    if cert.start < 0 or cert.period < 1 or cert.offset == 0:
        return False
    c = initial_configuration(m, word)
    got = _advance(m, c, cert.start)
    if got is None:
        return False
    c1, _ = got
    got = _advance(m, c1, cert.period)
    if got is None:
        return False
    c2, heads = got
    if c2.state != c1.state or c2.head - c1.head != cert.offset:
        return False
    d = cert.offset
    span1 = c1.tape.mark_span()
    span2 = c2.tape.mark_span()
    if d > 0:
        # nothing beyond the record head on the right, at both times
        if span1 is not None and span1[1] > c1.head:
            return False
        if span2 is not None and span2[1] > c2.head:
            return False
        win_lo, win_hi = min(heads), c1.head
    else:
        if span1 is not None and span1[0] < c1.head:
            return False
        if span2 is not None and span2[0] < c2.head:
            return False
        win_lo, win_hi = c1.head, max(heads)
    w1 = c1.tape.cells(win_lo, win_hi)
    w2 = c2.tape.cells(win_lo + d, win_hi + d)
    return w1 == w2


def _replay_sweep(m: Machine, cert: InductiveSweep, word: str) -> bool:
    """Re-derive the sweep proof: the formula at n = 0 must match the
    reference-simulated configuration at the base step, and the
    symbolic one-period closure must verify.  Sweep certificates only
    speak about blank-tape runs."""
    if word or cert.side not in (LEFT, RIGHT) or cert.base_step < 0:
        return False
    if not 0 <= cert.state < m.n_states:
        return False
    try:
        segments = tuple((bytes(int(ch) for ch in w), a, c)
                         for w, a, c in cert.segments)
    except (ValueError, TypeError):
        return False
    if not segments or not any(a for _, a, _ in segments):
        return False
    for w, a, c in segments:
        if not w or any(b not in (0, 1) for b in w) or a < 0 or c < 1:
            return False
    c0 = initial_configuration(m, "")
    got = _advance(m, c0, cert.base_step)
    if got is None:
        return False
    c1, _ = got
    if c1.state != cert.state:
        return False
    span = c1.tape.mark_span()
    if cert.side == RIGHT:
        if span is not None and span[1] >= c1.head:
            return False
        content = c1.tape.cells(span[0], c1.head - 1) if span else b""
        oriented = m
    else:
        if span is not None and span[0] <= c1.head:
            return False
        content = c1.tape.cells(c1.head + 1, span[1])[::-1] if span else b""
        oriented = _mirror_machine(m)
    base = _sweep_canonical([("c", content)], bytearray(1), 0, [])
    instance = b"".join(w * c for w, _, c in segments)
    if base != _sweep_canonical([("c", instance)], bytearray(1), 0, []):
        return False
    return _verify_sweep(oriented, cert.state, segments)


def _replay_halt_unreachable(m: Machine, cert: HaltUnreachable,
                             word: str) -> bool:
    """The claimed set must contain the start state, be closed under
    defined transitions, and admit no fireable halting event; that
    makes it a superset of every state the machine can enter."""
    states = set(cert.reachable)
    if 0 not in states:
        return False
    targeted = set()
    for q in states:
        if not 0 <= q < m.n_states:
            return False
        for a in (0, 1):
            rule = m.rule(q, a)
            if rule is not None and rule.next_state >= 0:
                if rule.next_state not in states:
                    return False
                targeted.add(rule.next_state)
    first_symbol = int(word[0]) if word else 0
    for q in states:
        for a in (0, 1):
            rule = m.rule(q, a)
            if rule is None or rule.next_state == HALT:
                if q in targeted or (q == 0 and a == first_symbol):
                    return False
    return True


def _replay_backward(m: Machine, cert: BackwardClosure, word: str) -> bool:
    """Re-run the bounded backward search at the certified depth and
    confirm every predecessor chain dies.  The proof covers every start
    configuration, so the word plays no part."""
    if not 0 <= cert.depth <= _BACKWARD_DEPTH:
        return False
    got = _backward_closure_depth(m, cert.depth, _BACKWARD_NODES)
    return got is not None and got <= cert.depth


def _replay_tape_closure(m: Machine, cert: TapeClosure, word: str) -> bool:
    """Check the claimed automaton really is a closed halt-reaching
    over-approximation that rejects the start.  No search is re-run;
    the closure conditions from ``_halt_nfa`` are verified directly on
    the certified edge and acceptor sets, where any closed supersets
    of the least fixpoints are equally sound."""
    try:
        check_word(word)
    except ValueError:
        return False
    dfa = cert.dfa
    if (not isinstance(dfa, tuple) or len(dfa) < 2 or len(dfa) % 2
            or dfa[0] != 0):
        return False
    k = len(dfa) // 2
    if not all(isinstance(d, int) and 0 <= d < k for d in dfa):
        return False
    mm = _mirror_machine(m) if cert.mirrored else m
    n = mm.n_states
    U = k * n
    delta = [(set(), set()) for _ in range(U + 1)]
    for edge in cert.edges:
        if not (isinstance(edge, tuple) and len(edge) == 3):
            return False
        z, sym, dst = edge
        if not (isinstance(z, int) and 0 <= z <= U and sym in (0, 1)
                and isinstance(dst, int) and 0 <= dst <= U):
            return False
        delta[z][sym].add(dst)
    accept = set(cert.accept)
    if not all(isinstance(z, int) and 0 <= z <= U for z in accept):
        return False
    if U not in accept or U not in delta[U][0] or U not in delta[U][1]:
        return False
    write, move, nxt = _flat(mm)
    for q in range(n):
        for s in (0, 1):
            idx = 2 * q + s
            q2 = nxt[idx]
            if q2 < 0:
                if any(U not in delta[d * n + q][s] for d in range(k)):
                    return False
            elif move[idx] == RIGHT:
                w = write[idx]
                if any(dfa[2 * d + w] * n + q2 not in delta[d * n + q][s]
                       for d in range(k)):
                    return False
            else:
                w = write[idx]
                for p in range(k):
                    for x in (0, 1):
                        tgt = delta[dfa[2 * p + x] * n + q][s]
                        for y in delta[p * n + q2][x]:
                            if not delta[y][w] <= tgt:
                                return False
    if any(z not in accept and delta[z][0] & accept
           for z in range(U + 1)):
        return False
    return _nfa_rejects_start(delta, accept, dfa, n, word, cert.mirrored)


# -- busy-beaver threshold ------------------------------------------------


class ThresholdKind(enum.Enum):
    ABOVE = "above"
    NOT_ABOVE = "not-above"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class ThresholdAnswer:
    kind: ThresholdKind
    evidence: Verdict

    def to_dict(self) -> dict:
        return {"kind": self.kind.value, "evidence": self.evidence.to_dict()}


def busy_beaver_threshold(m: Machine, k: int,
                          budget: RunLimits = RunLimits()) -> ThresholdAnswer:
    """Is the machine a busy beaver leaving strictly more than k marks?

    Above: halts within budget with marks > k.  NotAbove: halts with
    marks <= k, or is a certified non-halter (the busy-beaver class
    contains only halting machines).  Unknown otherwise.
    """
    outcome = run_accelerated(m, "", budget, want_snapshot=False)
    if outcome.halted:
        verdict = Verdict.halts(outcome.steps, outcome.marks)
        kind = (ThresholdKind.ABOVE if outcome.marks > k
                else ThresholdKind.NOT_ABOVE)
        return ThresholdAnswer(kind, verdict)
    decider_budget = RunLimits(
        max_steps=min(budget.max_steps, DEFAULT_DECIDER_LIMITS.max_steps),
        max_cells=min(budget.max_cells, DEFAULT_DECIDER_LIMITS.max_cells))
    for decide in (decide_cyclers, decide_translated_cyclers):
        verdict = decide(m, decider_budget)
        if verdict.kind is VerdictKind.NEVER_HALTS:
            return ThresholdAnswer(ThresholdKind.NOT_ABOVE, verdict)
    return ThresholdAnswer(
        ThresholdKind.UNKNOWN,
        Verdict.unknown({"max_steps": budget.max_steps,
                         "max_cells": budget.max_cells}))


# -- enumeration in tree normal form --------------------------------------

DEFAULT_ENUMERATION_LIMITS = RunLimits(max_steps=100_000, max_cells=1 << 20)


@dataclass(frozen=True)
class EnumerationReport:
    n: int
    sigma: Optional[int]
    s: Optional[int]
    sigma_champions: Tuple[str, ...]
    s_champions: Tuple[str, ...]
    holdouts: Tuple[str, ...]
    machine_count: int
    halted_count: int
    nonhalting_count: int
    budget: dict

    @property
    def champions(self) -> Tuple[str, ...]:
        return tuple(sorted(set(self.sigma_champions) |
                            set(self.s_champions)))

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "sigma": self.sigma,
            "s": self.s,
            "champions": list(self.champions),
            "sigma_champions": list(self.sigma_champions),
            "s_champions": list(self.s_champions),
            "holdouts": list(self.holdouts),
            "machine_count": self.machine_count,
            "halted_count": self.halted_count,
            "nonhalting_count": self.nonhalting_count,
            "budget": self.budget,
        }


def _simulate_to_event(table, n, max_steps):
    """Run from blank tape until an undefined entry is reached, the
    machine halts via Z, or the step budget runs out.

    Returns ("undefined", state, symbol, steps-so-far, marks) |
            ("halted", steps, marks) | ("running",).
    """
    write = [0] * (2 * n)
    move = [0] * (2 * n)
    nxt = [-2] * (2 * n)
    for idx, rule in enumerate(table):
        if rule is not None:
            write[idx], move[idx], nxt[idx] = rule
    size = 1 << 10
    tape = bytearray(size)
    head = size // 2
    state = 0
    marks = 0
    t = 0
    while t < max_steps:
        sym = tape[head]
        idx = 2 * state + sym
        s2 = nxt[idx]
        if s2 == -2:
            return ("undefined", state, sym, t, marks)
        w = write[idx]
        if sym != w:
            tape[head] = w
            marks += w - sym
        head += move[idx]
        t += 1
        if s2 < 0:
            return ("halted", t, marks)
        state = s2
        if head == 0 or head == len(tape) - 1:
            shift = len(tape) // 2
            tape = bytearray(shift) + tape + bytearray(shift)
            head += shift
    return ("running",)


def certify_nonhalting(m: Machine, decider_limits: RunLimits,
                        word: str = "") -> Optional[Verdict]:
    """NeverHalts from the first decider that proves it, cheapest
    first; None when all come back Unknown (or a decider sees a
    halt).  Cyclers run before the backward decider so that plainly
    periodic machines carry recurrence certificates.  The sweep decider
    only covers blank-tape starts and is skipped for nonempty words."""
    verdict = decide_halt_unreachable(m, word)
    if verdict.kind is VerdictKind.NEVER_HALTS:
        return verdict
    for decide in (decide_cyclers, decide_translated_cyclers):
        verdict = decide(m, decider_limits, word)
        if verdict.kind is VerdictKind.NEVER_HALTS:
            return verdict
    verdict = decide_backward(m, word)
    if verdict.kind is VerdictKind.NEVER_HALTS:
        return verdict
    if not word:
        verdict = decide_sweeps(m, decider_limits)
        if verdict.kind is VerdictKind.NEVER_HALTS:
            return verdict
    verdict = decide_tape_closure(m, word)
    if verdict.kind is VerdictKind.NEVER_HALTS:
        return verdict
    return None


def decide_machine(m: Machine, word: str = "",
                   limits: RunLimits = DEFAULT_ENUMERATION_LIMITS,
                   decider_limits: RunLimits = DEFAULT_DECIDER_LIMITS,
                   ) -> Verdict:
    """The full pipeline on one machine: simulate within ``limits``,
    then try every decider class.  Halts and NeverHalts are proofs
    (the latter with a replayable certificate); Unknown reports the
    budgets that were exhausted."""
    outcome = run_accelerated(m, word, limits, want_snapshot=False)
    if outcome.halted:
        return Verdict.halts(outcome.steps, outcome.marks)
    verdict = certify_nonhalting(m, decider_limits, word)
    if verdict is not None:
        return verdict
    return Verdict.unknown({"max_steps": limits.max_steps,
                            "max_cells": limits.max_cells,
                            "decider_max_steps": decider_limits.max_steps,
                            "decider_max_cells": decider_limits.max_cells})


def iter_tnf(n: int, limits: RunLimits = DEFAULT_ENUMERATION_LIMITS,
             decider_limits: RunLimits = DEFAULT_DECIDER_LIMITS,
             ) -> Iterator[Tuple[Machine, Verdict]]:
    """Enumerate the n-state class in tree normal form with verdicts.

    Tree normal form: for n >= 2 the first transition is fixed to
    write-1-move-R-state-B; states are numbered in first-use order; an
    undefined entry reached during simulation branches into the halt
    fill (1RZ) and every defined fill whose target is an in-use state
    or the next fresh one.  The last undefined entry only ever receives
    the halt fill: filling it otherwise would leave no reachable halt,
    and such machines cannot halt, so they are irrelevant to the
    busy-beaver question.  Every halting machine has a representative
    in this tree.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if n == 1:
        root: List[Optional[Rule]] = [None, None]
        highest = 0
    else:
        root = [None] * (2 * n)
        root[0] = Rule(1, RIGHT, 1)
        highest = 1
    yield from _dfs(n, root, highest, limits, decider_limits)


def enumerate_machines(n: int,
                       limits: RunLimits = DEFAULT_ENUMERATION_LIMITS,
                       decider_limits: RunLimits = DEFAULT_DECIDER_LIMITS,
                       jobs: int = 1) -> EnumerationReport:
    """Exhaustive busy-beaver enumeration of the n-state class.

    sigma and s are maxima over machines proven to halt; they are exact
    for the class exactly when ``holdouts`` is empty.  Reports are
    deterministic: champion and holdout lists are sorted by machine
    text regardless of traversal or scheduling order.
    """
    if jobs > 1:
        pairs = _enumerate_parallel(n, limits, decider_limits, jobs)
    else:
        pairs = ((serialize(m), v) for m, v in iter_tnf(n, limits,
                                                        decider_limits))
    sigma = s = None
    sigma_champs: List[str] = []
    s_champs: List[str] = []
    holdouts: List[str] = []
    total = halted = nonhalting = 0
    for text, verdict in pairs:
        total += 1
        if verdict.kind is VerdictKind.HALTS:
            halted += 1
            if sigma is None or verdict.marks > sigma:
                sigma, sigma_champs = verdict.marks, [text]
            elif verdict.marks == sigma:
                sigma_champs.append(text)
            if s is None or verdict.steps > s:
                s, s_champs = verdict.steps, [text]
            elif verdict.steps == s:
                s_champs.append(text)
        elif verdict.kind is VerdictKind.NEVER_HALTS:
            nonhalting += 1
        else:
            holdouts.append(text)
    return EnumerationReport(
        n=n, sigma=sigma, s=s,
        sigma_champions=tuple(sorted(sigma_champs)),
        s_champions=tuple(sorted(s_champs)),
        holdouts=tuple(sorted(holdouts)),
        machine_count=total, halted_count=halted,
        nonhalting_count=nonhalting,
        budget={"max_steps": limits.max_steps,
                "max_cells": limits.max_cells,
                "decider_max_steps": decider_limits.max_steps,
                "decider_max_cells": decider_limits.max_cells})


def _enumerate_parallel(n, limits, decider_limits, jobs):
    """Partition the TNF tree at the root's children across processes;
    results are merged deterministically by the caller's sorting."""
    import concurrent.futures

    specs = _root_subtrees(n)
    args = [(n, spec, limits.max_steps, limits.max_cells,
             decider_limits.max_steps, decider_limits.max_cells)
            for spec in specs]
    out = []
    with concurrent.futures.ProcessPoolExecutor(max_workers=jobs) as pool:
        for chunk in pool.map(_subtree_worker, args):
            out.extend(chunk)
    return out


def _root_subtrees(n: int):
    """Serializable (table, highest_used) roots partitioning the tree."""
    if n == 1:
        return [((None, None), 0)]
    subtree_roots = []
    root = [None] * (2 * n)
    root[0] = Rule(1, RIGHT, 1)
    event = _simulate_to_event(root, n, 10)
    assert event[0] == "undefined"
    _, q, a, t, marks = event
    idx = 2 * q + a
    # the halt fill of the first branch point, then each defined fill
    halt_table = list(root)
    halt_table[idx] = Rule(1, RIGHT, HALT)
    subtree_roots.append((tuple(halt_table), 1, True))
    targets = range(min(2, n - 1) + 1)
    for w in (0, 1):
        for d in (LEFT, RIGHT):
            for s2 in targets:
                table = list(root)
                table[idx] = Rule(w, d, s2)
                subtree_roots.append((tuple(table), max(1, s2), False))
    return subtree_roots


def _subtree_worker(args):
    n, spec, ms, mc, dms, dmc = args
    limits = RunLimits(max_steps=ms, max_cells=mc)
    decider_limits = RunLimits(max_steps=dms, max_cells=dmc)
    if len(spec) == 2:   # n == 1 whole tree
        return [(serialize(m), v)
                for m, v in iter_tnf(n, limits, decider_limits)]
    table, highest_used, is_halt_leaf = spec
    if is_halt_leaf:
        event = _simulate_to_event(list(table), n, limits.max_steps)
        assert event[0] == "halted"
        _, steps, marks = event
        return [(serialize(Machine(n, tuple(table))),
                 Verdict.halts(steps, marks))]
    gen = _dfs(n, list(table), highest_used, limits, decider_limits)
    return [(serialize(m), v) for m, v in gen]


# steps of simulation before trying to certify a node as non-halting;
# a certificate proves no undefined entry is ever reached, so certified
# nodes provably have no children and the full budget is saved
_BRANCH_PRESIM = 512


def _dfs(n, table, highest_used, limits, decider_limits):
    """DFS over the subtree rooted at a partially filled table."""
    event = _simulate_to_event(table, n, min(_BRANCH_PRESIM,
                                             limits.max_steps))
    if event[0] == "running":
        m = Machine(n, tuple(table))
        verdict = certify_nonhalting(m, decider_limits)
        if verdict is not None:
            yield m, verdict
            return
        event = _simulate_to_event(table, n, limits.max_steps)
        if event[0] == "running":
            yield m, Verdict.unknown({"max_steps": limits.max_steps})
            return
    if event[0] == "halted":
        _, steps, marks = event
        yield Machine(n, tuple(table)), Verdict.halts(steps, marks)
        return
    _, q, a, t, marks = event
    idx = 2 * q + a
    defined = sum(1 for r in table if r is not None)
    # halt fill: 1RZ executes at step t+1 and writes a mark over symbol a
    table[idx] = Rule(1, RIGHT, HALT)
    yield Machine(n, tuple(table)), Verdict.halts(t + 1, marks + (1 - a))
    if defined < 2 * n - 1:
        targets = range(min(highest_used + 1, n - 1) + 1)
        for w in (0, 1):
            for d in (LEFT, RIGHT):
                for s2 in targets:
                    table[idx] = Rule(w, d, s2)
                    yield from _dfs(n, table, max(highest_used, s2),
                                    limits, decider_limits)
    table[idx] = None
