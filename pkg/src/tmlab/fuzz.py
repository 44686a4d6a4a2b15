"""Seeded random machine and word generation for differential testing
and benchmarks.  Everything is driven by a caller-supplied
random.Random so runs are reproducible from the seed alone.
"""

from __future__ import annotations

import random
from typing import Iterator, Optional

from .machine import HALT, LEFT, RIGHT, Machine, Rule

HALT_WEIGHT = 0.10
UNDEFINED_WEIGHT = 0.10


def random_machine(rng: random.Random, n_states: int,
                   halt_weight: float = HALT_WEIGHT,
                   undefined_weight: float = UNDEFINED_WEIGHT) -> Machine:
    """A uniform-ish random machine: each slot is undefined, a halt
    transition, or a jump to a uniform state, at the given weights."""
    if n_states < 1:
        raise ValueError("n_states must be >= 1")
    table = []
    for _ in range(2 * n_states):
        roll = rng.random()
        if roll < undefined_weight:
            table.append(None)
            continue
        nxt = (HALT if roll < undefined_weight + halt_weight
               else rng.randrange(n_states))
        table.append(Rule(rng.randint(0, 1), rng.choice((LEFT, RIGHT)), nxt))
    return Machine(n_states, tuple(table))


def random_word(rng: random.Random, max_len: int) -> str:
    n = rng.randint(0, max_len)
    return "".join(rng.choice("01") for _ in range(n))


def machine_stream(seed: int, n_states: Optional[int] = None,
                   max_states: int = 5) -> Iterator[Machine]:
    """Endless machines from one seed; fixed n_states or sizes cycling
    uniformly up to max_states."""
    rng = random.Random(seed)
    while True:
        n = n_states if n_states is not None else rng.randint(1, max_states)
        yield random_machine(rng, n)
