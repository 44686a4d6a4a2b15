"""Command-line front end: run machines, decide halting, enumerate
busy-beaver classes, drive the universal machine, build and evaluate
containment, and probe the four semi-decidable properties.

Exit codes are part of the contract: 0 for a definite result, 1 for an
operational error (bad text, bad flags, I/O), and 2 when the honest
answer is Unknown, so scripts can branch on undecidedness.

With --json each subcommand prints exactly the line it would append to
a result store (see --store), so piped output and stored records never
diverge.  Subcommands taking a machine accept "-" to read one machine
text per line from stdin.
"""

from __future__ import annotations

import argparse
import json
import os
import shlex
import sys
import time
from multiprocessing import Pool
from typing import List, Optional

from . import rice as rice_mod
from .contain import (AuditLog, BUNDLED_ORACLES, DEFAULT_ORACLE_LIMITS,
                      ExternalOracle, POLICIES, control_gate, evaluate_oracle,
                      harm_of, make_halt_harm)
from .deciders import (DEFAULT_DECIDER_LIMITS, DEFAULT_ENUMERATION_LIMITS,
                       ThresholdKind, VerdictKind, busy_beaver_threshold,
                       decide_machine, enumerate_machines)
from .fuzz import random_machine
from .machine import state_letter
from .simulate import (DEFAULT_MAX_CELLS, DEFAULT_MAX_STEPS, RunLimits, run,
                       run_accelerated, run_direct, trace)
from .store import ResultRecord, Store, StoreError
from .textfmt import ParseError, load_bundled_corpus, parse, serialize
from .utm import DEFAULT_UTM_LIMITS, encode, recover, run_via_utm, \
    universal_machine

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_UNKNOWN = 2

# Overrides the default machine list for corpus-driven subcommands.
CORPUS_ENV = "TMLAB_CORPUS"


class _Fail(Exception):
    """Operational error carrying a machine-readable code."""

    def __init__(self, code: str, detail: str):
        super().__init__(detail)
        self.code = code
        self.detail = detail


class _Parser(argparse.ArgumentParser):
    # exit 2 is reserved for honest Unknowns, so flag errors must not
    # use argparse's default status
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error[usage]: {message}", file=sys.stderr)
        raise SystemExit(EXIT_ERROR)


def _add_output_flags(p):
    p.add_argument("--json", action="store_true",
                   help="print the result-store record line")
    p.add_argument("--store", metavar="DIR",
                   help="also append the record to the store rooted at DIR")


def _add_sim_flags(p, steps=DEFAULT_MAX_STEPS, cells=DEFAULT_MAX_CELLS):
    p.add_argument("--max-steps", type=int, default=steps, metavar="N",
                   help=f"step budget (default {steps})")
    p.add_argument("--max-cells", type=int, default=cells, metavar="N",
                   help=f"tape cell budget (default {cells})")


def _limits(args) -> RunLimits:
    try:
        return RunLimits(args.max_steps, args.max_cells)
    except ValueError as e:
        raise _Fail("limits", str(e)) from None


def _emit(args, record: ResultRecord, human: str) -> None:
    print(record.to_line() if args.json else human)
    if getattr(args, "store", None):
        Store(args.store).append(record)


def _machine_texts(text: str) -> List[str]:
    if text != "-":
        return [text]
    lines = [ln.strip() for ln in sys.stdin]
    return [ln for ln in lines if ln and not ln.startswith("#")]


def _corpus_texts(args) -> List[str]:
    path = args.corpus or os.environ.get(CORPUS_ENV)
    if path:
        try:
            with open(path, encoding="utf-8") as fh:
                lines = [ln.strip() for ln in fh]
        except OSError as e:
            raise _Fail("io", str(e)) from None
        return [ln for ln in lines if ln and not ln.startswith("#")]
    if not sys.stdin.isatty():
        return _machine_texts("-")
    return [e.text for e in load_bundled_corpus()]


def _pmap(jobs: int, fn, items: list) -> list:
    if jobs > 1 and len(items) > 1:
        with Pool(jobs) as pool:
            return pool.map(fn, items)
    return [fn(item) for item in items]


# -- run ---------------------------------------------------------------------


def _run_one(job):
    text, word, max_steps, max_cells, mode = job
    m = parse(text)
    out = run(m, word, RunLimits(max_steps, max_cells), mode=mode,
              want_snapshot=False)
    return {"kind": out.kind.value, "steps": str(out.steps),
            "marks": out.marks, "final_state": out.final_state,
            "halted_via_gadget": out.halted_via_gadget,
            "extent": list(out.extent), "mode": mode}


def _cmd_run(args) -> int:
    _limits(args)
    texts = _machine_texts(args.machine)
    jobs = [(t, args.word, args.max_steps, args.max_cells, args.accel)
            for t in texts]
    worst = EXIT_OK
    for text, payload in zip(texts, _pmap(args.jobs, _run_one, jobs)):
        rec = ResultRecord(kind="run", machine=text, word=args.word,
                           payload=payload,
                           budgets={"max_steps": args.max_steps,
                                    "max_cells": args.max_cells})
        human = (f"{text}: {payload['kind']} steps={payload['steps']} "
                 f"marks={payload['marks']} state={payload['final_state']}")
        _emit(args, rec, human)
        if payload["kind"] != "halted":
            worst = EXIT_UNKNOWN
    return worst


# -- trace -------------------------------------------------------------------


def _render_config(c, step_no: int) -> dict:
    lo, hi = c.tape.extent
    lo, hi = min(lo, c.head), max(hi, c.head)
    cells = "".join(str(b) for b in c.tape.cells(lo, hi))
    return {"step": step_no, "state": state_letter(c.state), "head": c.head,
            "origin": lo, "tape": cells}


def _cmd_trace(args) -> int:
    m = parse(args.machine)
    configs = trace(m, args.word, args.max_steps)
    events = [_render_config(c, i) for i, c in enumerate(configs)]
    rec = ResultRecord(kind="trace", machine=args.machine, word=args.word,
                       payload={"configs": events},
                       budgets={"max_steps": args.max_steps})
    lines = []
    for ev in events:
        tape = ev["tape"]
        at = ev["head"] - ev["origin"]
        shown = tape[:at] + "[" + tape[at] + "]" + tape[at + 1:]
        lines.append(f"{ev['step']:>6}  {ev['state']}  {shown}")
    _emit(args, rec, "\n".join(lines))
    return EXIT_OK


# -- decide ------------------------------------------------------------------


def _decide_one(job):
    text, word, max_steps, max_cells, decider_steps = job
    m = parse(text)
    verdict = decide_machine(
        m, word, RunLimits(max_steps, max_cells),
        RunLimits(decider_steps, DEFAULT_DECIDER_LIMITS.max_cells))
    return verdict.to_dict()


def _cmd_decide(args) -> int:
    _limits(args)
    texts = _machine_texts(args.machine)
    jobs = [(t, args.word, args.max_steps, args.max_cells, args.decider_steps)
            for t in texts]
    worst = EXIT_OK
    for text, payload in zip(texts, _pmap(args.jobs, _decide_one, jobs)):
        rec = ResultRecord(kind="decide", machine=text, word=args.word,
                           payload=payload,
                           budgets={"max_steps": args.max_steps,
                                    "max_cells": args.max_cells,
                                    "decider_steps": args.decider_steps})
        if payload["kind"] == "halts":
            human = (f"{text}: halts steps={payload['steps']} "
                     f"marks={payload['marks']}")
        elif payload["kind"] == "never-halts":
            human = (f"{text}: never halts "
                     f"({payload['certificate']['kind']} certificate)")
        else:
            human = f"{text}: unknown at budget {payload['budget_spent']}"
            worst = EXIT_UNKNOWN
        _emit(args, rec, human)
    return worst


# -- beaver-verify / beaver-enumerate -----------------------------------------


def _cmd_beaver_verify(args) -> int:
    m = parse(args.machine)
    answer = busy_beaver_threshold(
        m, args.threshold, RunLimits(args.budget, args.max_cells))
    payload = answer.to_dict()
    payload["threshold"] = args.threshold
    rec = ResultRecord(kind="beaver-verify", machine=args.machine,
                       payload=payload,
                       budgets={"max_steps": args.budget,
                                "max_cells": args.max_cells})
    ev = payload["evidence"]
    if answer.kind is ThresholdKind.UNKNOWN:
        human = (f"{args.machine}: unknown whether marks exceed "
                 f"{args.threshold} (budget {args.budget} steps)")
    elif ev["kind"] == "halts":
        human = (f"{args.machine}: {payload['kind']} threshold "
                 f"{args.threshold}, halts with marks={ev['marks']} "
                 f"steps={ev['steps']}")
    else:
        human = (f"{args.machine}: not-above threshold {args.threshold}, "
                 f"never halts ({ev['certificate']['kind']})")
    _emit(args, rec, human)
    return EXIT_UNKNOWN if answer.kind is ThresholdKind.UNKNOWN else EXIT_OK


def _cmd_beaver_enumerate(args) -> int:
    report = enumerate_machines(
        args.n, RunLimits(args.max_steps, args.max_cells),
        RunLimits(args.decider_steps, DEFAULT_DECIDER_LIMITS.max_cells),
        jobs=args.jobs)
    rec = ResultRecord(kind="enumeration", machine="",
                       payload=report.to_dict(),
                       budgets={"max_steps": args.max_steps,
                                "max_cells": args.max_cells,
                                "decider_steps": args.decider_steps})
    human = (f"n={report.n}: sigma={report.sigma} s={report.s} over "
             f"{report.machine_count} machines "
             f"({report.halted_count} halt, "
             f"{report.nonhalting_count} never halt, "
             f"{len(report.holdouts)} holdouts)")
    if report.champions:
        human += "\nchampions:\n  " + "\n  ".join(report.champions)
    if report.holdouts:
        human += "\nholdouts:\n  " + "\n  ".join(report.holdouts)
    _emit(args, rec, human)
    return EXIT_UNKNOWN if report.holdouts else EXIT_OK


# -- utm -----------------------------------------------------------------------


def _cmd_utm(args) -> int:
    m = parse(args.machine)
    enc = encode(m, args.word)
    out = run_via_utm(enc, RunLimits(args.max_steps, args.max_cells))
    sim = recover(out)
    payload = {"halted": sim.halted, "steps": str(sim.steps),
               "marks": sim.marks, "tape": sim.tape,
               "utm_steps": str(out.steps),
               "interpreter_states": universal_machine().n_states}
    rec = ResultRecord(kind="utm", machine=args.machine, word=args.word,
                       payload=payload,
                       budgets={"max_steps": args.max_steps,
                                "max_cells": args.max_cells})
    if sim.halted:
        human = (f"{args.machine}: halted steps={sim.steps} "
                 f"marks={sim.marks} (interpreter ran {out.steps} steps)")
    else:
        human = (f"{args.machine}: still running after {sim.steps} simulated "
                 f"steps (interpreter budget {args.max_steps} exhausted)")
    _emit(args, rec, human)
    return EXIT_OK if sim.halted else EXIT_UNKNOWN


# -- contain-build / contain-eval ----------------------------------------------


def _cmd_contain_build(args) -> int:
    for text in _machine_texts(args.machine):
        p = make_halt_harm(parse(text), args.word)
        payload = {"text": p.text(), "states": p.machine.n_states,
                   "origin": p.origin,
                   "gadget": sorted(state_letter(q)
                                    for q in p.gadget_states)}
        rec = ResultRecord(kind="contain-build", machine=text,
                           word=args.word, payload=payload, budgets={})
        human = (f"{text} -> {payload['states']}-state contained program, "
                 f"gadget states {'/'.join(payload['gadget'])}\n"
                 f"  {payload['text']}")
        _emit(args, rec, human)
    return EXIT_OK


def _label_one(job):
    text, word, truth_steps, max_cells = job
    p = make_halt_harm(parse(text), word)
    return p, harm_of(p, RunLimits(truth_steps, max_cells))


def _cmd_contain_eval(args) -> int:
    texts = _corpus_texts(args)
    if not texts:
        raise _Fail("corpus", "no machines to evaluate")
    if args.oracle_cmd:
        oracle = ExternalOracle(shlex.split(args.oracle_cmd))
        oracle_name = args.oracle_cmd
    else:
        oracle = BUNDLED_ORACLES[args.oracle]
        oracle_name = args.oracle
    jobs = [(t, "", args.truth_steps, args.max_cells) for t in texts]
    labeled = _pmap(args.jobs, _label_one, jobs)
    card = evaluate_oracle(oracle, labeled,
                           RunLimits(args.budget, args.max_cells))
    audit_note = ""
    if args.audit:
        audit = AuditLog()
        for p, _ in labeled:
            control_gate(oracle, p, policy=args.policy,
                         oracle_limits=RunLimits(args.budget, args.max_cells),
                         audit=audit)
        with open(args.audit, "w", encoding="utf-8") as fh:
            fh.write("\n".join(audit.lines()) + "\n")
        audit_note = f"\naudit: {len(audit.records)} records -> {args.audit}"
    payload = {"oracle": oracle_name, "policy": args.policy,
               "scorecard": card.to_dict()}
    rec = ResultRecord(kind="contain-eval", machine="",
                       payload=payload,
                       budgets={"oracle_steps": args.budget,
                                "truth_steps": args.truth_steps,
                                "max_cells": args.max_cells})
    human = (f"oracle={oracle_name} policy={args.policy}: "
             f"{card.total} programs, {card.errors} errors, "
             f"{card.unknowns} unknowns\n"
             + "\n".join(f"  {k}={v}" for k, v in card.to_dict().items()
                         if k not in ("records", "total", "errors",
                                      "unknowns") and v)
             + audit_note)
    _emit(args, rec, human)
    return EXIT_OK


# -- rice ----------------------------------------------------------------------


def _cmd_rice(args) -> int:
    m = parse(args.machine)
    if args.problem == "same-halting-set":
        if not args.other:
            raise _Fail("usage", "same-halting-set needs a second machine")
        verdict = rice_mod.semi_decide_equivalence(m, parse(args.other),
                                                   args.budget)
    else:
        if args.other:
            raise _Fail("usage",
                        f"{args.problem} takes exactly one machine")
        fn = {"accepts-anything": rice_mod.semi_decide_emptiness,
              "rejects-anything": rice_mod.semi_decide_all_strings,
              "single-accept": rice_mod.semi_decide_password}[args.problem]
        verdict = fn(m, args.budget)
    payload = verdict.to_dict()
    payload["problem"] = args.problem
    if args.other:
        payload["other"] = args.other
    rec = ResultRecord(kind="rice", machine=args.machine, payload=payload,
                       budgets={"steps": args.budget})
    if verdict.proved:
        wl = ", ".join(repr(w) for w in verdict.witnesses)
        human = f"{args.problem}: {verdict.kind.value} with witness {wl}"
    else:
        human = (f"{args.problem}: unknown after spending "
                 f"{verdict.budget_spent['steps_spent']} of "
                 f"{args.budget} steps")
    _emit(args, rec, human)
    return EXIT_OK if verdict.proved else EXIT_UNKNOWN


# -- bench -----------------------------------------------------------------------


def _cmd_bench(args) -> int:
    import random

    rng = random.Random(args.seed)
    machines = [random_machine(rng, args.states) for _ in range(args.count)]
    lim = _limits(args)
    timings = {}
    outcomes = {}
    for name, engine in (("direct", run_direct), ("accelerated",
                                                  run_accelerated)):
        start = time.perf_counter()
        outs = [engine(m, "", lim, want_snapshot=False) for m in machines]
        timings[name] = time.perf_counter() - start
        outcomes[name] = outs
    mismatches = sum(
        1 for a, b in zip(outcomes["direct"], outcomes["accelerated"])
        if (a.kind, a.steps, a.marks) != (b.kind, b.steps, b.marks))
    total = sum(o.steps for o in outcomes["direct"])
    payload = {"count": args.count, "states": args.states,
               "seed": args.seed, "total_steps": str(total),
               "mismatches": mismatches}
    rec = ResultRecord(kind="bench", machine="", payload=payload,
                       budgets={"max_steps": args.max_steps,
                                "max_cells": args.max_cells})
    rates = {name: (total / t if t > 0 else float("inf"))
             for name, t in timings.items()}
    human = (f"{args.count} machines x {args.states} states, "
             f"{total} steps each engine\n"
             f"  direct:      {timings['direct']:.3f}s "
             f"({rates['direct']:,.0f} steps/s)\n"
             f"  accelerated: {timings['accelerated']:.3f}s "
             f"({rates['accelerated']:,.0f} steps/s)\n"
             f"  mismatches:  {mismatches}")
    _emit(args, rec, human)
    return EXIT_OK if mismatches == 0 else EXIT_ERROR


# -- wiring ----------------------------------------------------------------------


def _build_parser() -> _Parser:
    top = _Parser(prog="tmlab", description=__doc__,
                  formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = top.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="simulate one machine (or - for stdin)")
    p.add_argument("machine")
    p.add_argument("--word", default="", help="input word over {0,1}")
    p.add_argument("--accel", choices=("auto", "direct", "rle"),
                   default="auto", help="simulator selection")
    p.add_argument("--jobs", type=int, default=1)
    _add_sim_flags(p)
    _add_output_flags(p)
    p.set_defaults(fn=_cmd_run)

    p = sub.add_parser("trace", help="print the first configurations")
    p.add_argument("machine")
    p.add_argument("--word", default="")
    p.add_argument("--max-steps", type=int, default=20, metavar="N",
                   help="number of configurations to show (default 20)")
    _add_output_flags(p)
    p.set_defaults(fn=_cmd_trace)

    p = sub.add_parser("decide",
                       help="prove halts / never-halts, or report unknown")
    p.add_argument("machine")
    p.add_argument("--word", default="")
    p.add_argument("--decider-steps", type=int,
                   default=DEFAULT_DECIDER_LIMITS.max_steps, metavar="N")
    p.add_argument("--jobs", type=int, default=1)
    _add_sim_flags(p, steps=DEFAULT_ENUMERATION_LIMITS.max_steps,
                   cells=DEFAULT_ENUMERATION_LIMITS.max_cells)
    _add_output_flags(p)
    p.set_defaults(fn=_cmd_decide)

    p = sub.add_parser("beaver-verify",
                       help="check whether a machine beats a marks threshold")
    p.add_argument("machine")
    p.add_argument("--threshold", type=int, required=True, metavar="K")
    p.add_argument("--budget", type=int, default=1_000_000, metavar="N",
                   help="step budget (default 1000000)")
    p.add_argument("--max-cells", type=int, default=DEFAULT_MAX_CELLS,
                   metavar="N")
    _add_output_flags(p)
    p.set_defaults(fn=_cmd_beaver_verify)

    p = sub.add_parser("beaver-enumerate",
                       help="enumerate an n-state class and report sigma, s")
    p.add_argument("n", type=int)
    p.add_argument("--decider-steps", type=int,
                   default=DEFAULT_DECIDER_LIMITS.max_steps, metavar="N")
    p.add_argument("--jobs", type=int, default=1)
    _add_sim_flags(p, steps=DEFAULT_ENUMERATION_LIMITS.max_steps,
                   cells=DEFAULT_ENUMERATION_LIMITS.max_cells)
    _add_output_flags(p)
    p.set_defaults(fn=_cmd_beaver_enumerate)

    p = sub.add_parser("utm",
                       help="run a machine inside the universal machine")
    p.add_argument("machine")
    p.add_argument("--word", default="")
    _add_sim_flags(p, steps=DEFAULT_UTM_LIMITS.max_steps,
                   cells=DEFAULT_UTM_LIMITS.max_cells)
    _add_output_flags(p)
    p.set_defaults(fn=_cmd_utm)

    p = sub.add_parser("contain-build",
                       help="append the harm gadget to a machine")
    p.add_argument("machine")
    p.add_argument("--word", default="")
    _add_output_flags(p)
    p.set_defaults(fn=_cmd_contain_build)

    p = sub.add_parser(
        "contain-eval",
        help="score an oracle over contained programs "
             f"(stdin, --corpus, ${CORPUS_ENV}, or the bundled corpus)")
    p.add_argument("--corpus", metavar="PATH")
    p.add_argument("--oracle", choices=sorted(BUNDLED_ORACLES),
                   default="decider-backed")
    p.add_argument("--oracle-cmd", metavar="CMD",
                   help="external oracle command (overrides --oracle)")
    p.add_argument("--policy", choices=POLICIES, default="fail-closed")
    p.add_argument("--budget", type=int,
                   default=DEFAULT_ORACLE_LIMITS.max_steps, metavar="N",
                   help="oracle step budget")
    p.add_argument("--truth-steps", type=int, default=2_000_000, metavar="N",
                   help="ground-truth labeling step budget")
    p.add_argument("--max-cells", type=int,
                   default=DEFAULT_ORACLE_LIMITS.max_cells, metavar="N")
    p.add_argument("--audit", metavar="FILE",
                   help="gate every program under --policy and write the "
                        "audit log here")
    p.add_argument("--jobs", type=int, default=1)
    _add_output_flags(p)
    p.set_defaults(fn=_cmd_contain_eval)

    p = sub.add_parser("rice",
                       help="semi-decide one of the four undecidable "
                            "properties")
    p.add_argument("problem", choices=rice_mod.PROBLEMS)
    p.add_argument("machine")
    p.add_argument("other", nargs="?",
                   help="second machine (same-halting-set only)")
    p.add_argument("--budget", type=int,
                   default=rice_mod.DEFAULT_RICE_BUDGET, metavar="N")
    _add_output_flags(p)
    p.set_defaults(fn=_cmd_rice)

    p = sub.add_parser("bench",
                       help="time the two engines on seeded random machines")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=int, default=50)
    p.add_argument("--states", type=int, default=4)
    _add_sim_flags(p, steps=100_000)
    _add_output_flags(p)
    p.set_defaults(fn=_cmd_bench)

    return top


def main(argv: Optional[List[str]] = None) -> int:
    args = _build_parser().parse_args(argv)
    if getattr(args, "accel", None) == "rle":
        args.accel = "accel"
    try:
        return args.fn(args)
    except _Fail as e:
        print(f"error[{e.code}]: {e.detail}", file=sys.stderr)
    except ParseError as e:
        print(f"error[parse]: {e}", file=sys.stderr)
    except StoreError as e:
        print(f"error[store]: {e}", file=sys.stderr)
    except ValueError as e:
        print(f"error[value]: {e}", file=sys.stderr)
    except BrokenPipeError:
        pass
    except OSError as e:
        print(f"error[io]: {e}", file=sys.stderr)
    return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
