"""Victim assignment for the N-strangers problem."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from ..errors import InvalidInputError
from .table import SequenceTable


@dataclass(frozen=True)
class NspAssignment:
    round: int
    victims: tuple[int, ...]
    self_assigned: tuple[int, ...]

    def is_bijection(self) -> bool:
        return sorted(self.victims) == list(range(len(self.victims)))

    def to_dict(self) -> dict:
        return {"round": self.round, "victims": list(self.victims), "self_assigned": list(self.self_assigned)}


def nsp_assign(table: SequenceTable, round: int) -> NspAssignment:
    """Party ``i`` must act on victim ``table.rows[i][round]``.

    Parties whose victim is their own (``i -> i``) are flagged; they should
    sit this round out and join another group.
    """
    if not 0 <= round < table.length:
        raise InvalidInputError(f"round {round} outside 0..{table.length - 1}")
    victims = table.column(round)
    flagged = tuple(i for i, v in enumerate(victims) if v == i)
    return NspAssignment(round, victims, flagged)


def self_assignment_rate(table: SequenceTable, party: int = 0) -> float:
    return float(np.mean(table.rows[party] == party))


def conditional_completions(n: int, known: Mapping[int, int]) -> list[tuple[int, ...]]:
    """All columns consistent with the symbols ``known`` to a coalition.

    Every column is a uniformly random permutation, so each completion
    returned is equally likely from the coalition's point of view.
    """
    for party, sym in known.items():
        if not (0 <= party < n and 0 <= sym < n):
            raise InvalidInputError("party and symbol must lie in 0..N-1")
    return [
        p for p in itertools.permutations(range(n))
        if all(p[party] == sym for party, sym in known.items())
    ]
