"""tmlab: a laboratory for two-symbol Turing machines.

Simulation (direct and run-length accelerated), halting deciders with
replayable certificates, busy-beaver enumeration, a universal machine,
a halting-to-harm containment harness, honest semi-decision procedures
for undecidable properties, and an append-only result store.
"""

from .machine import (HALT, LEFT, MAX_STATES, RIGHT, Machine, Rule,
                      make_machine, state_letter)
from .textfmt import (CorpusEntry, ParseError, bundled_entry, load_corpus,
                      load_bundled_corpus, parse, serialize)
from .simulate import (OutcomeKind, RunLimits, RunOutcome, TapeSnapshot, run,
                       run_accelerated, run_direct, trace)
from .deciders import (EnumerationReport, ThresholdAnswer, ThresholdKind,
                       Verdict, VerdictKind, busy_beaver_threshold,
                       certify_nonhalting, decide_machine, enumerate_machines,
                       replay_certificate)
from .utm import (EncodingError, SimulatedOutcome, UtmEncoding, decode,
                  encode, recover, run_via_utm, universal_machine)
from .contain import (AuditLog, BUNDLED_ORACLES, ContainedProgram,
                      ExternalOracle, GateDecision, HarmKind, HarmLabel,
                      HONEST_ORACLES, OracleAnswer, Scorecard, control_gate,
                      evaluate_oracle, harm_of, label_corpus, make_halt_harm)
from .rice import (PROBLEMS, RiceKind, RiceVerdict, replay_rice,
                   semi_decide_all_strings, semi_decide_emptiness,
                   semi_decide_equivalence, semi_decide_password)
from .store import ResultRecord, Store, StoreError, TOOL_VERSION
from .fuzz import machine_stream, random_machine, random_word

__version__ = TOOL_VERSION

__all__ = [
    "HALT", "LEFT", "MAX_STATES", "RIGHT", "Machine", "Rule",
    "make_machine", "state_letter",
    "CorpusEntry", "ParseError", "bundled_entry", "load_corpus",
    "load_bundled_corpus", "parse", "serialize",
    "OutcomeKind", "RunLimits", "RunOutcome", "TapeSnapshot", "run",
    "run_accelerated", "run_direct", "trace",
    "EnumerationReport", "ThresholdAnswer", "ThresholdKind", "Verdict",
    "VerdictKind", "busy_beaver_threshold", "certify_nonhalting",
    "decide_machine", "enumerate_machines", "replay_certificate",
    "EncodingError", "SimulatedOutcome", "UtmEncoding", "decode", "encode",
    "recover", "run_via_utm", "universal_machine",
    "AuditLog", "BUNDLED_ORACLES", "ContainedProgram", "ExternalOracle",
    "GateDecision", "HarmKind", "HarmLabel", "HONEST_ORACLES",
    "OracleAnswer", "Scorecard", "control_gate", "evaluate_oracle",
    "harm_of", "label_corpus", "make_halt_harm",
    "PROBLEMS", "RiceKind", "RiceVerdict", "replay_rice",
    "semi_decide_all_strings", "semi_decide_emptiness",
    "semi_decide_equivalence", "semi_decide_password",
    "ResultRecord", "Store", "StoreError", "TOOL_VERSION",
    "machine_stream", "random_machine", "random_word",
    "__version__",
]
