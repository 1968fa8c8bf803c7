"""Born-rule sampling of collective spin measurements."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .qcore import StateVector, apply_collective, direction_rotation, index_digits

RNG_ALGORITHM = "PCG64"


class SeededRng:
    """Reproducible random stream; the only source of randomness in the package.

    Child streams for independent batches come from :meth:`spawn`, which uses
    numpy's ``SeedSequence`` splitting, so results do not depend on the order
    in which batches run.
    """

    algorithm = RNG_ALGORITHM

    def __init__(self, seed: int | np.random.SeedSequence = 0):
        if isinstance(seed, np.random.SeedSequence):
            self._seq = seed
            self.seed = int(seed.entropy) if isinstance(seed.entropy, int) else 0
        else:
            self.seed = int(seed) & 0xFFFFFFFFFFFFFFFF
            self._seq = np.random.SeedSequence(self.seed)
        self.generator = np.random.Generator(np.random.PCG64(self._seq))

    def spawn(self, n: int) -> list["SeededRng"]:
        return [SeededRng(s) for s in self._seq.spawn(n)]

    def __repr__(self):
        return f"SeededRng(seed={self.seed}, algorithm={self.algorithm!r})"


def as_generator(rng) -> np.random.Generator:
    """Accept a :class:`SeededRng`, a numpy Generator or an int seed."""
    if isinstance(rng, SeededRng):
        return rng.generator
    if isinstance(rng, np.random.Generator):
        return rng
    return SeededRng(rng).generator


@dataclass(frozen=True)
class OutcomeRecord:
    direction: tuple[float, float]
    outcomes: tuple[int, ...] = field(default_factory=tuple)

    def is_permutation(self) -> bool:
        return sorted(self.outcomes) == list(range(len(self.outcomes)))

    def to_dict(self) -> dict:
        return {"direction": [float(x) for x in self.direction], "outcomes": list(self.outcomes)}


def outcome_distribution(state: StateVector, direction: Sequence[float] = (0.0, 0.0)) -> np.ndarray:
    """Joint outcome probabilities for measuring every site's spin along ``direction``.

    Entry ``k`` of the result is the probability of the joint outcome whose
    digits (row-major) are the per-site local basis indices, index ``i``
    meaning spin ``s - i`` along the direction.
    """
    rot = direction_rotation(state.local_dim, direction)
    rotated = apply_collective(state, rot.conj().T)
    probs = np.abs(rotated.amplitudes) ** 2
    return probs / probs.sum()


def sample_outcomes(
    state: StateVector, direction: Sequence[float], size: int, rng
) -> np.ndarray:
    """``size`` joint outcomes as an integer array of shape ``(size, N)``.

    Inverse-CDF sampling over the full joint table.
    """
    gen = as_generator(rng)
    cdf = np.cumsum(outcome_distribution(state, direction))
    cdf[-1] = 1.0
    idx = np.searchsorted(cdf, gen.random(size), side="right")
    idx = np.minimum(idx, cdf.size - 1)
    digits = np.empty((size, state.num_sites), dtype=np.int64)
    rest = idx.copy()
    for k in range(state.num_sites - 1, -1, -1):
        rest, digits[:, k] = np.divmod(rest, state.local_dim)
    return digits


def measure_joint(state: StateVector, direction: Sequence[float], rng) -> OutcomeRecord:
    row = sample_outcomes(state, direction, 1, rng)[0]
    return OutcomeRecord(tuple(float(x) for x in direction), tuple(int(x) for x in row))


def random_direction(rng) -> tuple[float, float]:
    """Direction drawn uniformly from the sphere, as (polar, azimuthal)."""
    gen = as_generator(rng)
    theta = math.acos(1.0 - 2.0 * gen.random())
    phi = 2.0 * math.pi * gen.random()
    return theta, phi


def marginal(probs: np.ndarray, num_sites: int, local_dim: int, site: int) -> np.ndarray:
    t = probs.reshape((local_dim,) * num_sites)
    axes = tuple(k for k in range(num_sites) if k != site)
    return t.sum(axis=axes)


def permutation_outcomes(probs: np.ndarray, num_sites: int, local_dim: int, atol: float = 1e-12):
    """Joint outcomes carrying probability above ``atol``, with their weights."""
    nz = np.flatnonzero(probs > atol)
    return {index_digits(int(i), local_dim, num_sites): float(probs[i]) for i in nz}
