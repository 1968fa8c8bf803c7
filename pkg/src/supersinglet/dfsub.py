"""Decoherence-free subspaces spanned by products of two-qubit singlets.

Any product of singlets is invariant under ``U (x) ... (x) U``, and so is
every superposition of such products.  One product per noncrossing perfect
matching of the ``N`` qubits gives exactly ``C_{N/2}`` vectors, and their
linear independence is checked numerically via the Gram matrix rank.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInputError, ResourceLimitError
from .qcore import StateVector

DF_CAP = 12
RANK_RTOL = 1e-8

Matching = tuple[tuple[int, int], ...]


def _check_even(n: int) -> None:
    if n < 2 or n % 2:
        raise InvalidInputError("N must be even and >= 2")


def df_dimension(n: int) -> int:
    """``N! / ((N/2)! (N/2 + 1)!)``, the Catalan number ``C_{N/2}``."""
    _check_even(n)
    k = n // 2
    return math.comb(n, k) // (k + 1)


def noncrossing_pairings(n: int) -> list[Matching]:
    """Noncrossing perfect matchings of ``0..N-1`` on a line.

    Point 0 pairs with some ``j`` leaving an even block inside and one
    outside; recurse on both.
    """
    _check_even(n)
    return _noncrossing(tuple(range(n)))


def _noncrossing(points: tuple[int, ...]) -> list[Matching]:
    if not points:
        return [()]
    first = points[0]
    out = []
    for j in range(1, len(points), 2):
        for inner in _noncrossing(points[1:j]):
            for outer in _noncrossing(points[j + 1:]):
                out.append(((first, points[j]),) + inner + outer)
    return out


def singlet_product(n: int, matching: Matching) -> StateVector:
    """Tensor product of ``(|01> - |10>)/sqrt(2)`` over the pairs of ``matching``."""
    bits = (np.arange(2 ** n)[:, None] >> np.arange(n - 1, -1, -1)) & 1
    amps = np.ones(2 ** n)
    for i, j in matching:
        amps *= (bits[:, j] - bits[:, i]) / math.sqrt(2)
    return StateVector(amps, n, 2)


def gram_rank(vectors: list[StateVector], rtol: float = RANK_RTOL) -> int:
    mat = np.array([v.amplitudes for v in vectors])
    gram = mat.conj() @ mat.T
    sv = np.linalg.svd(gram, compute_uv=False)
    return int(np.sum(sv > rtol * sv[0]))


@dataclass
class DfBasis:
    N: int
    matchings: list[Matching]
    vectors: list[StateVector] = field(repr=False)
    rank: int

    def matrix(self) -> np.ndarray:
        """Basis vectors as columns."""
        return np.array([v.amplitudes for v in self.vectors]).T

    def projection_residual(self, state: StateVector) -> float:
        """Norm of the part of ``state`` outside the span."""
        mat = self.matrix()
        coef, *_ = np.linalg.lstsq(mat, state.amplitudes, rcond=None)
        return float(np.linalg.norm(mat @ coef - state.amplitudes))

    def combine(self, coefficients) -> StateVector:
        v = self.matrix() @ np.asarray(coefficients, dtype=complex)
        return StateVector(v / np.linalg.norm(v), self.N, 2)


def df_basis(n: int, cap: int = DF_CAP) -> DfBasis:
    _check_even(n)
    if n > cap:
        raise ResourceLimitError(f"N={n} exceeds cap {cap}: vectors have 2^N = {2 ** n} amplitudes")
    matchings = noncrossing_pairings(n)
    vectors = [singlet_product(n, m) for m in matchings]
    return DfBasis(n, matchings, vectors, gram_rank(vectors))


@dataclass(frozen=True)
class EfficiencyReport:
    N: int
    dimension: int
    encoded_qubits: float
    efficiency: float
    asymptotic_estimate: float

    def to_dict(self) -> dict:
        return {
            "N": self.N,
            # large dimensions overflow JSON-safe integers; emit as string
            "dimension": str(self.dimension),
            "log2_dimension": self.encoded_qubits,
            "efficiency": self.efficiency,
            "asymptotic_estimate": self.asymptotic_estimate,
        }


def log2_dimension_lgamma(n: int) -> float:
    """``log2 d(N)`` from log-gamma, independent of the exact integer."""
    _check_even(n)
    k = n // 2
    return (math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(k + 2)) / math.log(2)


def encoding_efficiency(n: int) -> EfficiencyReport:
    """Logical qubits per physical qubit, with the ``N - 1.5 log2 N`` estimate."""
    dim = df_dimension(n)
    bits = math.log2(dim)  # exact for arbitrarily large ints
    return EfficiencyReport(n, dim, bits, bits / n, n - 1.5 * math.log2(n))
