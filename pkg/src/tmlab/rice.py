"""Honest semi-decision procedures for four undecidable properties:
accepting anything, rejecting anything, accepting exactly one input,
and halting on the same inputs as another machine.

Acceptance here means halting (the machines have no accept states) and
rejection means certified non-halting.  Each procedure can prove one
direction with a witness that replays from scratch; the other direction
is never claimed, no matter the budget.

Search is deterministic: words in length-lexicographic order, per-word
step budgets doubled every round, smallest witness wins.  Trailing
blanks are invisible (blank is 0, so "10" and "1" start from the same
tape); the search therefore enumerates only canonical words, the empty
word and words ending in 1, and witnesses are always distinct inputs.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from typing import Iterator, Optional, Sequence, Tuple

from .deciders import (DEFAULT_DECIDER_LIMITS, certificate_to_dict,
                       certify_nonhalting, replay_certificate)
from .machine import Machine
from .simulate import RunLimits, run_accelerated

# Total simulated-step allowance shared by all rounds of one call.
# Decider calls are charged at their full step cap.
DEFAULT_RICE_BUDGET = 1_000_000

_BASE_STEPS = 64
_MAX_CELLS = 1 << 20

PROBLEMS = ("accepts-anything", "rejects-anything", "single-accept",
            "same-halting-set")


class RiceKind(enum.Enum):
    PROVED_YES = "proved-yes"
    PROVED_NO = "proved-no"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class RiceVerdict:
    """Outcome of one semi-decision: a proof with replayable witnesses,
    or Unknown carrying the budgets that ran out."""

    kind: RiceKind
    witnesses: Tuple[str, ...] = ()
    evidence: Optional[dict] = None
    budget_spent: Optional[dict] = None

    @property
    def proved(self) -> bool:
        return self.kind is not RiceKind.UNKNOWN

    def to_dict(self) -> dict:
        out: dict = {"kind": self.kind.value}
        if self.witnesses:
            out["witnesses"] = list(self.witnesses)
        if self.evidence is not None:
            ev = dict(self.evidence)
            for key in ("steps", "witness_steps"):
                if key in ev:
                    ev[key] = ([str(s) for s in ev[key]]
                               if isinstance(ev[key], tuple) else str(ev[key]))
            if "certificate" in ev:
                ev["certificate"] = certificate_to_dict(ev["certificate"])
            out["evidence"] = ev
        if self.budget_spent is not None:
            out["budget_spent"] = self.budget_spent
        return out


def canonical_words(max_len: int) -> Iterator[str]:
    """Empty word, then words ending in 1, in length-lex order."""
    yield ""
    for n in range(1, max_len + 1):
        for bits in itertools.product("01", repeat=n - 1):
            yield "".join(bits) + "1"


class _Meter:
    """Tracks the shared step allowance across dovetail rounds."""

    def __init__(self, budget: int):
        if budget < 1:
            raise ValueError("budget must be >= 1")
        self.budget = budget
        self.spent = 0
        self.round = 0
        self.per_word = _BASE_STEPS

    def exhausted(self) -> bool:
        return self.spent >= self.budget

    def next_round(self) -> None:
        self.round += 1
        self.per_word *= 2

    def charge(self, steps: int) -> None:
        self.spent += max(steps, 1)

    def report(self) -> dict:
        return {"budget": self.budget, "steps_spent": self.spent,
                "rounds": self.round, "max_word_len": self.round,
                "last_per_word_steps": self.per_word}


def _run_word(m: Machine, word: str, meter: _Meter):
    out = run_accelerated(m, word, RunLimits(meter.per_word, _MAX_CELLS),
                          want_snapshot=False)
    meter.charge(out.steps)
    return out


def _certify(m: Machine, word: str, meter: _Meter):
    meter.charge(DEFAULT_DECIDER_LIMITS.max_steps)
    verdict = certify_nonhalting(m, DEFAULT_DECIDER_LIMITS, word)
    return None if verdict is None else verdict.certificate


def semi_decide_emptiness(m: Machine,
                          budget: int = DEFAULT_RICE_BUDGET) -> RiceVerdict:
    """Does the machine accept (halt on) any input at all?

    ProvedYes with the smallest halting word and its exact step count;
    never ProvedNo, since accepting nothing is not witnessable.
    """
    meter = _Meter(budget)
    while not meter.exhausted():
        for word in canonical_words(meter.round):
            out = _run_word(m, word, meter)
            if out.halted:
                return RiceVerdict(RiceKind.PROVED_YES, (word,),
                                   {"steps": out.steps})
            if meter.exhausted():
                break
        meter.next_round()
    return RiceVerdict(RiceKind.UNKNOWN, budget_spent=meter.report())


def semi_decide_all_strings(m: Machine,
                            budget: int = DEFAULT_RICE_BUDGET) -> RiceVerdict:
    """Does the machine reject (provably never halt on) any input?

    ProvedYes with the smallest word carrying a non-halting
    certificate; never ProvedNo, since halting on everything is not
    witnessable.
    """
    meter = _Meter(budget)
    # certification is deterministic, so a word that halted or failed
    # to certify can never become a witness
    hopeless = set()
    while not meter.exhausted():
        for word in canonical_words(meter.round):
            if word in hopeless:
                continue
            out = _run_word(m, word, meter)
            if not out.halted:
                cert = _certify(m, word, meter)
                if cert is not None:
                    return RiceVerdict(RiceKind.PROVED_YES, (word,),
                                       {"certificate": cert})
            hopeless.add(word)
            if meter.exhausted():
                break
        meter.next_round()
    return RiceVerdict(RiceKind.UNKNOWN, budget_spent=meter.report())


def semi_decide_password(m: Machine,
                         budget: int = DEFAULT_RICE_BUDGET) -> RiceVerdict:
    """Does the machine accept exactly one input?

    ProvedNo with the two smallest halting words (refuting "only
    one"); never ProvedYes, since both "exactly one" and "none" need
    universal knowledge no finite search has.
    """
    meter = _Meter(budget)
    accepted: dict = {}
    while not meter.exhausted():
        for word in canonical_words(meter.round):
            if word in accepted:
                continue
            out = _run_word(m, word, meter)
            if out.halted:
                accepted[word] = out.steps
                if len(accepted) == 2:
                    pair = tuple(sorted(accepted,
                                        key=lambda w: (len(w), w)))
                    return RiceVerdict(
                        RiceKind.PROVED_NO, pair,
                        {"witness_steps": tuple(accepted[w] for w in pair)})
            if meter.exhausted():
                break
        meter.next_round()
    report = meter.report()
    report["halters_found"] = len(accepted)
    return RiceVerdict(RiceKind.UNKNOWN, budget_spent=report)


def semi_decide_equivalence(m1: Machine, m2: Machine,
                            budget: int = DEFAULT_RICE_BUDGET) -> RiceVerdict:
    """Do the two machines halt on exactly the same inputs?

    ProvedNo with a word on which one machine demonstrably halts and
    the other carries a non-halting certificate; never ProvedYes.  A
    word where one halts and the other merely outlives the budget is
    reported inside Unknown's evidence, not as proof.
    """
    meter = _Meter(budget)
    # words that can no longer yield a proof: both machines halted, or
    # one halted and the certifier already failed on the other (the
    # halting side cannot flip, and certification is deterministic)
    resolved = set()
    asymmetry: Optional[dict] = None
    while not meter.exhausted():
        for word in canonical_words(meter.round):
            if word in resolved:
                continue
            out1 = _run_word(m1, word, meter)
            out2 = _run_word(m2, word, meter)
            if out1.halted == out2.halted:
                if out1.halted:
                    resolved.add(word)
            else:
                halted_first = out1.halted
                steps = out1.steps if halted_first else out2.steps
                other = m2 if halted_first else m1
                cert = _certify(other, word, meter)
                if cert is not None:
                    return RiceVerdict(
                        RiceKind.PROVED_NO, (word,),
                        {"halts": 0 if halted_first else 1, "steps": steps,
                         "certificate": cert})
                resolved.add(word)
                if asymmetry is None:
                    asymmetry = {"word": word,
                                 "halts": 0 if halted_first else 1,
                                 "steps": str(steps),
                                 "note":
                                     "other side only outlived the budget"}
            if meter.exhausted():
                break
        meter.next_round()
    evidence = (asymmetry if asymmetry is not None
                else {"note": "no difference found within budget"})
    return RiceVerdict(RiceKind.UNKNOWN, evidence=evidence,
                       budget_spent=meter.report())


def replay_rice(problem: str, machines: Sequence[Machine],
                verdict: RiceVerdict) -> bool:
    """Re-validate a Proved verdict from scratch.

    Halting witnesses are re-run for exactly the claimed number of
    steps; non-halting witnesses re-validate their certificate.  An
    Unknown verdict has nothing to replay and returns False.
    """
    if problem not in PROBLEMS:
        raise ValueError(f"unknown problem {problem!r}")
    ev = verdict.evidence or {}

    def halts_in(m: Machine, word: str, steps) -> bool:
        if not isinstance(steps, int) or steps < 1:
            return False
        out = run_accelerated(m, word, RunLimits(steps, _MAX_CELLS),
                              want_snapshot=False)
        return out.halted and out.steps == steps

    if problem == "accepts-anything":
        return (verdict.kind is RiceKind.PROVED_YES
                and len(verdict.witnesses) == 1
                and halts_in(machines[0], verdict.witnesses[0],
                             ev.get("steps")))
    if problem == "rejects-anything":
        return (verdict.kind is RiceKind.PROVED_YES
                and len(verdict.witnesses) == 1
                and "certificate" in ev
                and replay_certificate(machines[0], ev["certificate"],
                                       verdict.witnesses[0]))
    if problem == "single-accept":
        if verdict.kind is not RiceKind.PROVED_NO:
            return False
        if len(verdict.witnesses) != 2 or len(set(verdict.witnesses)) != 2:
            return False
        steps = ev.get("witness_steps")
        if not isinstance(steps, tuple) or len(steps) != 2:
            return False
        return all(halts_in(machines[0], w, s)
                   for w, s in zip(verdict.witnesses, steps))
    if verdict.kind is not RiceKind.PROVED_NO or len(verdict.witnesses) != 1:
        return False
    word = verdict.witnesses[0]
    side = ev.get("halts")
    if side not in (0, 1) or "certificate" not in ev:
        return False
    halter, other = ((machines[0], machines[1]) if side == 0
                     else (machines[1], machines[0]))
    return (halts_in(halter, word, ev.get("steps"))
            and replay_certificate(other, ev["certificate"], word))
