"""Per-party symbol sequences produced by repeated collective measurements."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InvalidInputError, ResourceLimitError
from ..measurement import as_generator, random_direction, sample_outcomes
from ..qcore import NN_CAP, make_nn_supersinglet

SOURCES = ("quantum", "direct")


@dataclass(frozen=True, eq=False)
class SequenceTable:
    """``rows[k, j]`` is party ``k``'s symbol at position ``j``."""

    rows: np.ndarray

    def __post_init__(self):
        rows = np.asarray(self.rows, dtype=np.int64)
        if rows.ndim != 2 or rows.shape[0] < 2:
            raise InvalidInputError("table needs shape (N, L) with N >= 2")
        rows.setflags(write=False)
        object.__setattr__(self, "rows", rows)

    @property
    def num_parties(self) -> int:
        return self.rows.shape[0]

    @property
    def length(self) -> int:
        return self.rows.shape[1]

    def column(self, j: int) -> tuple[int, ...]:
        return tuple(int(x) for x in self.rows[:, j])

    def column_is_permutation(self) -> np.ndarray:
        """Boolean mask over positions: does the column hold each symbol once?"""
        n = self.num_parties
        srt = np.sort(self.rows, axis=0)
        return np.all(srt == np.arange(n)[:, None], axis=0)

    def columns_as_codes(self) -> np.ndarray:
        """Each column encoded as a base-``N`` integer, site 0 most significant."""
        n = self.num_parties
        weights = n ** np.arange(n - 1, -1, -1, dtype=np.int64)
        return weights @ self.rows

    def drop(self, positions) -> "SequenceTable":
        keep = np.ones(self.length, dtype=bool)
        keep[np.asarray(positions, dtype=np.int64)] = False
        return SequenceTable(self.rows[:, keep])

    def to_dict(self) -> dict:
        return {"num_parties": self.num_parties, "length": self.length, "rows": self.rows.tolist()}


def generate_table(
    n: int,
    length: int,
    source: str = "quantum",
    rng=0,
    cap: int = NN_CAP,
    direction: str = "random",
) -> SequenceTable:
    """Build an ``N x L`` table.

    ``source="quantum"`` measures ``|S_N^(N)>`` once per position, along a
    freshly drawn direction unless ``direction="fixed"`` (z axis).
    ``source="direct"`` draws uniform random permutations without any state.
    """
    if n < 2 or length < 1:
        raise InvalidInputError("need N >= 2 and L >= 1")
    if source not in SOURCES:
        raise InvalidInputError(f"source must be one of {SOURCES}")
    gen = as_generator(rng)
    if source == "direct":
        return SequenceTable(gen.permuted(np.tile(np.arange(n)[:, None], (1, length)), axis=0))
    if n > cap:
        raise ResourceLimitError(
            f"N={n} exceeds the state cap {cap} (d^N = {n ** n} amplitudes); use source='direct'"
        )
    state = make_nn_supersinglet(n, cap)
    if direction == "fixed":
        cols = sample_outcomes(state, (0.0, 0.0), length, gen)
    elif direction == "random":
        cols = np.vstack([sample_outcomes(state, random_direction(gen), 1, gen) for _ in range(length)])
    else:
        raise InvalidInputError("direction must be 'random' or 'fixed'")
    return SequenceTable(cols.T)
