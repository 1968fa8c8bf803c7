"""Secret sharing from a sequence table.

Party 0 is the dealer; the key is the dealer's row.  Agents ``1..N-1``
announce their symbols publicly in a per-round order and the key digit is
whichever symbol nobody announced.  An honest agent that hears its own
symbol announced by someone else stops the protocol.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from ..errors import InvalidInputError
from ..measurement import as_generator
from .table import SequenceTable

HONEST = "honest"
FALSE_SHARE = "declare-false-share"
SSP_STRATEGIES = (HONEST, FALSE_SHARE)


@dataclass
class SspRound:
    round: int
    order: tuple[int, ...]
    declarations: tuple[int, ...]
    aborted: bool
    detected_by: int | None
    key_digit: int | None
    correct: bool
    lied: bool
    honest_remaining: int | None = None  # honest undeclared agents when the first lie was told

    def to_dict(self) -> dict:
        return {
            "round": self.round,
            "order": list(self.order),
            "declarations": list(self.declarations),
            "aborted": self.aborted,
            "detected_by": self.detected_by,
            "key_digit": self.key_digit,
            "correct": self.correct,
            "lied": self.lied,
            "honest_remaining": self.honest_remaining,
        }


@dataclass
class SspResult:
    rounds: list[SspRound] = field(default_factory=list)

    @property
    def key(self) -> list[int]:
        return [r.key_digit for r in self.rounds if not r.aborted]

    @property
    def detection_rate(self) -> float | None:
        lying = [r for r in self.rounds if r.lied]
        if not lying:
            return None
        return sum(r.aborted for r in lying) / len(lying)


def rotating_orders(n: int, rounds: int) -> list[tuple[int, ...]]:
    """Declaration orders that shift by one agent every round."""
    agents = list(range(1, n))
    k = len(agents)
    return [tuple(agents[(j + i) % k] for i in range(k)) for j in range(rounds)]


def _check_order(order: Sequence[int], n: int) -> tuple[int, ...]:
    order = tuple(int(x) for x in order)
    if sorted(order) != list(range(1, n)):
        raise InvalidInputError(f"declaration order must be a permutation of agents 1..{n - 1}: {order}")
    return order


def ssp_run(
    table: SequenceTable,
    behaviors: Mapping[int, str] | None = None,
    orders: Sequence[Sequence[int]] | None = None,
    rng=0,
    rounds: Sequence[int] | None = None,
) -> SspResult:
    """Run the key reconstruction over the given rounds (default: every position).

    ``behaviors`` maps agent index to a strategy name; missing agents are
    honest.  A dishonest agent announces a symbol drawn uniformly from the
    ones that are still unannounced and are neither its own nor held by a
    fellow dishonest agent.  ``orders`` defaults to :func:`rotating_orders`.
    """
    n = table.num_parties
    behaviors = dict(behaviors or {})
    for party, strat in behaviors.items():
        if strat not in SSP_STRATEGIES:
            raise InvalidInputError(f"unknown SSP strategy {strat!r}")
        if not 1 <= party < n:
            raise InvalidInputError("only agents 1..N-1 declare; the dealer is party 0")
    positions = list(range(table.length)) if rounds is None else [int(r) for r in rounds]
    if orders is None:
        orders = rotating_orders(n, len(positions))
    if len(orders) < len(positions):
        raise InvalidInputError("need one declaration order per round")
    gen = as_generator(rng)
    liars = {p for p, s in behaviors.items() if s == FALSE_SHARE}

    result = SspResult()
    for j, order in zip(positions, orders):
        order = _check_order(order, n)
        col = table.column(j)
        holder = {sym: party for party, sym in enumerate(col)}
        declared: list[int] = []
        aborted, detected_by, lied, remaining = False, None, False, None
        for idx, agent in enumerate(order):
            sym = col[agent]
            if agent in liars:
                blocked = set(declared) | {col[p] for p in liars}
                options = [x for x in range(n) if x not in blocked]
                if options:
                    if not lied:
                        remaining = sum(1 for a in order[idx + 1:] if a not in liars)
                    lied = True
                    sym = int(gen.choice(options))
            if sym in declared:
                aborted, detected_by = True, -1  # public collision: everyone sees it
                declared.append(sym)
                break
            owner = holder[sym]
            declared.append(sym)
            if owner != agent and owner != 0 and owner not in liars:
                aborted, detected_by = True, owner
                break
        if aborted:
            digit, correct = None, False
        else:
            (digit,) = set(range(n)) - set(declared)
            correct = digit == col[0]
        result.rounds.append(
            SspRound(j, order, tuple(declared), aborted, detected_by, digit, correct, lied, remaining)
        )
    return result


def ssp_detection_trial(r: int, trials: int, rng=0) -> float:
    """Detection rate of one lie told while ``r`` honest agents are still to declare.

    Uses ``N = r + 2`` parties (dealer, liar, ``r`` honest agents) with the
    liar announcing first.
    """
    if r < 1:
        raise InvalidInputError("r must be >= 1")
    n = r + 2
    gen = as_generator(rng)
    table = SequenceTable(gen.permuted(np.tile(np.arange(n)[:, None], (1, trials)), axis=0))
    order = tuple(range(1, n))
    res = ssp_run(table, {1: FALSE_SHARE}, [order] * trials, gen)
    return res.detection_rate
