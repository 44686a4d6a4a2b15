"""Containment as an executable experiment.

"Harm" is reified as entering a two-state gadget appended to a machine:
the gadget writes two marks and stops, and the run outcome records that
it was entered.  ``make_halt_harm`` compiles any machine T and input I
into a program that reaches the gadget exactly when T halts on I, so
predicting harm for compiled programs is predicting halting.  On top of
that sit harm oracles (bounded simulation, decider-backed, and two
deliberately overconfident ones), a control gate that executes or
disables a program based on an oracle's answer, and an evaluation
harness scoring oracles against ground truth.

Raw (uncompiled) programs carry no gadget and are therefore never
labeled harmful: harm is a property of the compiled form, not of
halting per se.
"""

from __future__ import annotations

import enum
import json
import subprocess
import time
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

from .deciders import (DEFAULT_DECIDER_LIMITS, certificate_to_dict,
                       certify_nonhalting)
from .machine import HALT, RIGHT, Machine, Rule, check_word
from .simulate import RunLimits, RunOutcome, run
from .textfmt import serialize

# A compiled program must leave room for the two gadget states.
MAX_SOURCE_STATES = 24

# The gadget writes two marks and stops, two steps after entry.
GADGET_STEPS = 2

# Ground-truth labeling budget; must stay above any oracle budget so
# that "oracle Unknown, truth Harmful" cases exist.
DEFAULT_TRUTH_LIMITS = RunLimits(max_steps=100_000_000, max_cells=1 << 26)

# What bundled oracles and the gate's bounded execution get by default.
DEFAULT_ORACLE_LIMITS = RunLimits(max_steps=1_000_000, max_cells=1 << 22)
DEFAULT_GATE_RUN_LIMITS = RunLimits(max_steps=1_000_000, max_cells=1 << 22)


@dataclass(frozen=True)
class HarmGadget:
    """The two appended states: G1 writes a mark and moves right into
    G2, G2 writes a mark and stops.  Exactly two steps once entered."""

    g1: int
    g2: int

    @property
    def states(self) -> frozenset:
        return frozenset((self.g1, self.g2))


@dataclass(frozen=True)
class ContainedProgram:
    """A program offered to the control gate.

    ``origin`` is "raw" for machines used as-is (no gadget, never
    harmful) or "halt-harm" for compiled ones; ``word`` is the input
    the program is meant to run on; ``source`` keeps the uncompiled
    machine for compiled programs.
    """

    machine: Machine
    origin: str
    word: str = ""
    gadget: Optional[HarmGadget] = None
    source: Optional[Machine] = None

    @property
    def gadget_states(self) -> frozenset:
        return self.gadget.states if self.gadget else frozenset()

    def text(self) -> str:
        """Display text; compiled machines can exceed the text format's
        state range, in which case a structural stand-in is used."""
        try:
            return serialize(self.machine)
        except ValueError:
            return f"<{self.machine.n_states}-state machine>"


def contain_raw(m: Machine, word: str = "") -> ContainedProgram:
    """Wrap a machine as-is; with no gadget it can never be harmful."""
    check_word(word)
    return ContainedProgram(m, "raw", word)


def make_halt_harm(t: Machine, word: str = "") -> ContainedProgram:
    """Compile (T, I) into a program that harms iff T halts on I.

    Every halting transition of T is redirected into the gadget: a
    transition into Z keeps its write and move, and an undefined entry
    becomes a rule that rewrites the scanned symbol and steps right.
    Nothing else changes, so the compiled machine reaches the gadget
    exactly when T halts, two steps before its own halt.
    """
    check_word(word)
    if t.n_states > MAX_SOURCE_STATES:
        raise ValueError(
            f"machine has {t.n_states} states; compiling supports at "
            f"most {MAX_SOURCE_STATES}")
    g1, g2 = t.n_states, t.n_states + 1
    table: List[Rule] = []
    for q in range(t.n_states):
        for a in (0, 1):
            r = t.table[2 * q + a]
            if r is None:
                table.append(Rule(a, RIGHT, g1))
            elif r.next_state == HALT:
                table.append(Rule(r.write, r.move, g1))
            else:
                table.append(r)
    table += [Rule(1, RIGHT, g2), Rule(1, RIGHT, g2),
              Rule(1, RIGHT, HALT), Rule(1, RIGHT, HALT)]
    return ContainedProgram(Machine(t.n_states + 2, tuple(table)),
                            "halt-harm", word, HarmGadget(g1, g2), t)


# -- answers and ground truth -------------------------------------------------


class HarmKind(enum.Enum):
    HARMFUL = "harmful"
    SAFE = "safe"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class OracleAnswer:
    """A harm oracle's response with whatever backs it up."""

    kind: HarmKind
    justification: Optional[dict] = None

    @classmethod
    def harmful(cls, **why) -> "OracleAnswer":
        return cls(HarmKind.HARMFUL, why or None)

    @classmethod
    def safe(cls, **why) -> "OracleAnswer":
        return cls(HarmKind.SAFE, why or None)

    @classmethod
    def unknown(cls, **why) -> "OracleAnswer":
        return cls(HarmKind.UNKNOWN, why or None)


@dataclass(frozen=True)
class HarmLabel:
    """Ground truth for one program: Harmful with the halting step,
    Safe with a non-halting certificate (or none, for gadget-free
    programs), or an honest Unknown with the budgets spent."""

    kind: HarmKind
    steps: Optional[int] = None
    certificate: Optional[object] = None
    budget: Optional[dict] = None

    def to_dict(self) -> dict:
        out: dict = {"kind": self.kind.value}
        if self.steps is not None:
            out["steps"] = str(self.steps)
        if self.certificate is not None:
            out["certificate"] = certificate_to_dict(self.certificate)
        if self.budget is not None:
            out["budget"] = self.budget
        return out


def harm_of(p: ContainedProgram,
            lim: RunLimits = DEFAULT_TRUTH_LIMITS,
            decider_limits: RunLimits = DEFAULT_DECIDER_LIMITS) -> HarmLabel:
    """Ground-truth labeling, as far as it is decidable.

    Harmful iff simulation within ``lim`` halts via the gadget; Safe if
    the program has no gadget, halts without entering it, or a decider
    certifies it never halts (for compiled programs the only halt is
    through the gadget, so never halting is gadget unreachability);
    otherwise an honest Unknown.  Certificates are checked before the
    full simulation budget is spent: they are sound, so the order can
    only change the cost, not the label kind.
    """
    if p.gadget is None:
        return HarmLabel(HarmKind.SAFE)

    def label_run(bound: RunLimits) -> Optional[HarmLabel]:
        out = run(p.machine, p.word, bound, gadget_states=p.gadget_states,
                  want_snapshot=False)
        if not out.halted:
            return None
        if out.halted_via_gadget:
            return HarmLabel(HarmKind.HARMFUL, steps=out.steps)
        return HarmLabel(HarmKind.SAFE, steps=out.steps)

    probe = RunLimits(min(lim.max_steps, decider_limits.max_steps),
                      lim.max_cells)
    label = label_run(probe)
    if label is not None:
        return label
    verdict = certify_nonhalting(p.machine, decider_limits, p.word)
    if verdict is not None:
        return HarmLabel(HarmKind.SAFE, certificate=verdict.certificate)
    label = label_run(lim)
    if label is not None:
        return label
    return HarmLabel(HarmKind.UNKNOWN,
                     budget={"max_steps": lim.max_steps,
                             "max_cells": lim.max_cells,
                             "decider_max_steps": decider_limits.max_steps})


# -- bundled oracles ----------------------------------------------------------

# An oracle is any callable (program, word, limits) -> OracleAnswer.
Oracle = Callable[[ContainedProgram, str, RunLimits], OracleAnswer]


def bounded_simulation_oracle(p: ContainedProgram, word: str,
                              lim: RunLimits) -> OracleAnswer:
    """Answers only from a finished run; honest about everything else."""
    out = run(p.machine, word, lim, gadget_states=p.gadget_states,
              want_snapshot=False)
    if out.halted:
        if out.halted_via_gadget:
            return OracleAnswer.harmful(steps=str(out.steps))
        return OracleAnswer.safe(steps=str(out.steps),
                                 reason="halts without entering the gadget")
    return OracleAnswer.unknown(max_steps=lim.max_steps,
                                max_cells=lim.max_cells)


def decider_backed_oracle(p: ContainedProgram, word: str,
                          lim: RunLimits) -> OracleAnswer:
    """Bounded simulation plus non-halting certificates; still honest."""
    answer = bounded_simulation_oracle(p, word, lim)
    if answer.kind is not HarmKind.UNKNOWN:
        return answer
    verdict = certify_nonhalting(p.machine, DEFAULT_DECIDER_LIMITS, word)
    if verdict is not None:
        return OracleAnswer.safe(
            certificate=certificate_to_dict(verdict.certificate))
    return answer


def always_answering_oracle(p: ContainedProgram, word: str,
                            lim: RunLimits) -> OracleAnswer:
    """A total heuristic: when the budget runs out it guesses Safe.

    Useful as the resident counterexample: any oracle that always
    answers within a fixed budget is wrong about some program that
    halts beyond it.
    """
    answer = bounded_simulation_oracle(p, word, lim)
    if answer.kind is HarmKind.UNKNOWN:
        return OracleAnswer.safe(guess=True,
                                 reason=f"survived {lim.max_steps} steps")
    return answer


def always_safe_oracle(p: ContainedProgram, word: str,
                       lim: RunLimits) -> OracleAnswer:
    """The degenerate optimist."""
    return OracleAnswer.safe(guess=True, reason="assumed safe")


BUNDLED_ORACLES: Dict[str, Oracle] = {
    "bounded-simulation": bounded_simulation_oracle,
    "decider-backed": decider_backed_oracle,
    "always-answering": always_answering_oracle,
    "always-safe": always_safe_oracle,
}

# The bundled oracles that never answer without proof.
HONEST_ORACLES = ("bounded-simulation", "decider-backed")


@dataclass
class ExternalOracle:
    """Adapter for an out-of-process oracle.

    The command receives machine text, input word, and step budget as
    three trailing arguments and must print HARMFUL, SAFE, or UNKNOWN
    as the first line of stdout (further lines become justification).
    Crashes, timeouts, and unparseable output all count as Unknown.
    """

    command: Sequence[str]
    timeout: float = 60.0

    def __call__(self, p: ContainedProgram, word: str,
                 lim: RunLimits) -> OracleAnswer:
        argv = list(self.command) + [p.text(), word, str(lim.max_steps)]
        try:
            proc = subprocess.run(argv, capture_output=True, text=True,
                                  timeout=self.timeout)
        except (OSError, subprocess.TimeoutExpired) as e:
            return OracleAnswer.unknown(oracle_error=type(e).__name__)
        lines = proc.stdout.splitlines()
        head = lines[0].strip().upper() if lines else ""
        detail = "\n".join(lines[1:]).strip() or None
        if proc.returncode != 0 or head not in ("HARMFUL", "SAFE", "UNKNOWN"):
            return OracleAnswer.unknown(oracle_error="bad oracle output")
        kind = HarmKind[head]
        if detail:
            return OracleAnswer(kind, {"detail": detail})
        return OracleAnswer(kind)


# -- the control gate ---------------------------------------------------------


class GateKind(enum.Enum):
    EXECUTED = "executed"
    DISABLED = "disabled"


@dataclass(frozen=True)
class GateDecision:
    kind: GateKind
    answer: OracleAnswer
    outcome: Optional[RunOutcome] = None   # present iff executed
    reason: Optional[str] = None           # present iff disabled

    @property
    def executed(self) -> bool:
        return self.kind is GateKind.EXECUTED


@dataclass
class AuditLog:
    """Append-only record of gate decisions.

    Timestamps live here and only here; nothing hashed elsewhere
    includes them.
    """

    records: List[dict] = field(default_factory=list)

    def append(self, record: dict) -> None:
        self.records.append(record)

    def lines(self) -> List[str]:
        return [json.dumps(r, sort_keys=True) for r in self.records]


POLICIES = ("fail-closed", "fail-open")


def control_gate(oracle: Oracle, p: ContainedProgram,
                 word: Optional[str] = None, policy: str = "fail-closed",
                 oracle_limits: RunLimits = DEFAULT_ORACLE_LIMITS,
                 run_limits: RunLimits = DEFAULT_GATE_RUN_LIMITS,
                 audit: Optional[AuditLog] = None) -> GateDecision:
    """Ask the oracle about running ``p`` on ``word``, then act.

    Harmful always disables.  Safe executes, bounded by ``run_limits``
    (a certified-safe program may still run forever).  Unknown, which
    also covers an oracle crash, disables under fail-closed (the
    default) and executes under fail-open.  Every decision is appended
    to the audit log.
    """
    if policy not in POLICIES:
        raise ValueError(f"unknown policy {policy!r}")
    if word is None:
        word = p.word
    started = time.time()
    try:
        answer = oracle(p, word, oracle_limits)
    except Exception as e:                  # oracle failure is an Unknown
        answer = OracleAnswer.unknown(oracle_error=repr(e))
    execute = (answer.kind is HarmKind.SAFE
               or (answer.kind is HarmKind.UNKNOWN and policy == "fail-open"))
    if execute:
        outcome = run(p.machine, word, run_limits,
                      gadget_states=p.gadget_states, want_snapshot=False)
        decision = GateDecision(GateKind.EXECUTED, answer, outcome=outcome)
    else:
        decision = GateDecision(GateKind.DISABLED, answer,
                                reason=answer.kind.value)
    if audit is not None:
        record = {"program": p.text(), "origin": p.origin, "word": word,
                  "oracle_answer": answer.kind.value,
                  "decision": decision.kind.value, "policy": policy,
                  "started": started, "finished": time.time()}
        if decision.outcome is not None:
            record["outcome"] = decision.outcome.brief()
        audit.append(record)
    return decision


# -- oracle evaluation --------------------------------------------------------


@dataclass(frozen=True)
class Scorecard:
    """Answer-by-truth tallies over a labeled corpus.

    The seven named cells cover definite truths; the two ``*_on_open``
    cells count definite answers on items whose ground truth is itself
    Unknown, so that the tallies always sum to the corpus size.  Errors
    are answers contradicting a definite truth.
    """

    correct_harmful: int = 0
    correct_safe: int = 0
    false_harmful: int = 0
    false_safe: int = 0
    unknown_on_harmful: int = 0
    unknown_on_safe: int = 0
    unknown_on_unknown: int = 0
    harmful_on_open: int = 0
    safe_on_open: int = 0
    records: Tuple[dict, ...] = ()

    @property
    def total(self) -> int:
        return (self.correct_harmful + self.correct_safe
                + self.false_harmful + self.false_safe
                + self.unknown_on_harmful + self.unknown_on_safe
                + self.unknown_on_unknown + self.harmful_on_open
                + self.safe_on_open)

    @property
    def errors(self) -> int:
        return self.false_harmful + self.false_safe

    @property
    def unknowns(self) -> int:
        return (self.unknown_on_harmful + self.unknown_on_safe
                + self.unknown_on_unknown)

    def to_dict(self) -> dict:
        return {"correct_harmful": self.correct_harmful,
                "correct_safe": self.correct_safe,
                "false_harmful": self.false_harmful,
                "false_safe": self.false_safe,
                "unknown_on_harmful": self.unknown_on_harmful,
                "unknown_on_safe": self.unknown_on_safe,
                "unknown_on_unknown": self.unknown_on_unknown,
                "harmful_on_open": self.harmful_on_open,
                "safe_on_open": self.safe_on_open,
                "total": self.total, "errors": self.errors,
                "unknowns": self.unknowns,
                "records": list(self.records)}


_CELL = {
    (HarmKind.HARMFUL, HarmKind.HARMFUL): "correct_harmful",
    (HarmKind.SAFE, HarmKind.SAFE): "correct_safe",
    (HarmKind.HARMFUL, HarmKind.SAFE): "false_harmful",
    (HarmKind.SAFE, HarmKind.HARMFUL): "false_safe",
    (HarmKind.UNKNOWN, HarmKind.HARMFUL): "unknown_on_harmful",
    (HarmKind.UNKNOWN, HarmKind.SAFE): "unknown_on_safe",
    (HarmKind.UNKNOWN, HarmKind.UNKNOWN): "unknown_on_unknown",
    (HarmKind.HARMFUL, HarmKind.UNKNOWN): "harmful_on_open",
    (HarmKind.SAFE, HarmKind.UNKNOWN): "safe_on_open",
}


def label_corpus(programs: Iterable[ContainedProgram],
                 lim: RunLimits = DEFAULT_TRUTH_LIMITS,
                 ) -> List[Tuple[ContainedProgram, HarmLabel]]:
    """Attach ground-truth labels; use budgets above any oracle's."""
    return [(p, harm_of(p, lim)) for p in programs]


def evaluate_oracle(oracle: Oracle,
                    corpus: Sequence[Tuple[ContainedProgram, HarmLabel]],
                    budget: RunLimits = DEFAULT_ORACLE_LIMITS) -> Scorecard:
    """Score an oracle against ground truth, item by item.

    Deterministic: items are scored in corpus order and an oracle
    exception counts as Unknown, exactly as at the gate.
    """
    tallies = {name: 0 for name in _CELL.values()}
    records = []
    for p, truth in corpus:
        try:
            answer = oracle(p, p.word, budget)
        except Exception as e:
            answer = OracleAnswer.unknown(oracle_error=repr(e))
        cell = _CELL[(answer.kind, truth.kind)]
        tallies[cell] += 1
        records.append({"program": p.text(), "word": p.word,
                        "origin": p.origin, "truth": truth.kind.value,
                        "answer": answer.kind.value, "cell": cell})
    return Scorecard(records=tuple(records), **tallies)
