"""Distribute-and-test: sacrifice a random subset of rounds to check the shared states."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import InvalidInputError
from ..measurement import as_generator
from .table import SequenceTable, generate_table

TAMPER_KINDS = ("collision", "product")


@dataclass(frozen=True)
class TamperModel:
    """Each round is corrupted independently with probability ``q``.

    ``collision`` copies party 0's symbol onto party 1 (never a valid
    column); ``product`` replaces the column with independent uniform
    symbols, as if the particles had been swapped for a product state.
    """

    q: float = 0.0
    kind: str = "collision"

    def __post_init__(self):
        if not 0 <= self.q <= 1:
            raise InvalidInputError("tamper fraction must lie in [0, 1]")
        if self.kind not in TAMPER_KINDS:
            raise InvalidInputError(f"tamper kind must be one of {TAMPER_KINDS}")


@dataclass
class DistributionTest:
    accepted: bool
    tested: int
    tampered: int
    failed_positions: list[int] = field(default_factory=list)
    usable: SequenceTable | None = None

    def to_dict(self) -> dict:
        return {
            "accepted": self.accepted,
            "tested": self.tested,
            "tampered": self.tampered,
            "failed_positions": self.failed_positions,
            "usable_length": 0 if self.usable is None else self.usable.length,
        }


def apply_tamper(table: SequenceTable, model: TamperModel, rng) -> tuple[SequenceTable, np.ndarray]:
    gen = as_generator(rng)
    rows = table.rows.copy()
    hit = np.flatnonzero(gen.random(table.length) < model.q)
    if model.kind == "collision":
        rows[1, hit] = rows[0, hit]
    else:
        rows[:, hit] = gen.integers(table.num_parties, size=(table.num_parties, hit.size))
    return SequenceTable(rows), hit


def distribute_and_test(
    rounds: int,
    test_fraction: float,
    tamper: TamperModel | None = None,
    rng=0,
    n: int = 3,
    source: str = "direct",
) -> DistributionTest:
    """Share ``rounds`` states, publicly compare a random ``test_fraction`` of them.

    Accept iff every compared column is a permutation of ``0..N-1``; the
    compared rounds are discarded either way.
    """
    if not 0 < test_fraction < 1:
        raise InvalidInputError("test_fraction must lie strictly between 0 and 1")
    if rounds < 1:
        raise InvalidInputError("rounds must be >= 1")
    gen = as_generator(rng)
    table = generate_table(n, rounds, source, gen)
    tampered = np.empty(0, dtype=np.int64)
    if tamper is not None and tamper.q > 0:
        table, tampered = apply_tamper(table, tamper, gen)
    k = max(1, int(round(test_fraction * rounds)))
    tested = np.sort(gen.choice(rounds, size=k, replace=False))
    ok = table.column_is_permutation()[tested]
    failed = tested[~ok].tolist()
    return DistributionTest(
        accepted=not failed,
        tested=k,
        tampered=int(tampered.size),
        failed_positions=failed,
        usable=table.drop(tested),
    )


def abort_lower_bound(q: float, test_fraction: float, rounds: int) -> float:
    """Abort probability when every tested tampered column is caught."""
    return 1.0 - (1.0 - q) ** (test_fraction * rounds)
