"""Dense state vectors, spin operators and the supersinglet families.

Kets are stored as flat complex arrays of length ``d**N`` in row-major order,
site 0 being the most significant digit, so that ``|0 1 2>`` of three qutrits
sits at index ``0*9 + 1*3 + 2``.  Local basis index ``i`` is the spin
eigenstate with ``S_z = s - i`` where ``s = (d - 1) / 2``.

Local operators are plain ``(d, d)`` complex numpy arrays.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InvalidInputError, ResourceLimitError

# Size caps; see ``make_nn_supersinglet`` / ``make_qubit_supersinglet``.
NN_CAP = 7
QUBIT_CAP = 16


@dataclass(frozen=True, eq=False)
class StateVector:
    """Pure state of ``num_sites`` identical ``local_dim``-level systems."""

    amplitudes: np.ndarray
    num_sites: int
    local_dim: int

    def __post_init__(self):
        amps = np.ascontiguousarray(self.amplitudes, dtype=complex).ravel()
        if self.num_sites < 1 or self.local_dim < 2:
            raise InvalidInputError("need num_sites >= 1 and local_dim >= 2")
        if amps.size != self.local_dim ** self.num_sites:
            raise InvalidInputError(
                f"expected {self.local_dim ** self.num_sites} amplitudes, got {amps.size}"
            )
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def tensor(self) -> np.ndarray:
        """View the amplitudes as an ``N``-index tensor."""
        return self.amplitudes.reshape((self.local_dim,) * self.num_sites)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def overlap(self, other: "StateVector") -> complex:
        """Inner product ``<self|other>``."""
        _check_same_space(self, other)
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def fidelity(self, other: "StateVector") -> float:
        return abs(self.overlap(other))

    def equals(self, other: "StateVector", atol: float = 1e-9, strict: bool = False) -> bool:
        """Compare states; by default up to a global phase.

        ``strict=True`` compares amplitudes entrywise instead.
        """
        if (self.num_sites, self.local_dim) != (other.num_sites, other.local_dim):
            return False
        if strict:
            return bool(np.allclose(self.amplitudes, other.amplitudes, rtol=0, atol=atol))
        return self.fidelity(other) >= 1 - atol

    def ket(self, digits: Sequence[int]) -> complex:
        """Amplitude of the basis ket with the given per-site indices."""
        return complex(self.amplitudes[basis_index(digits, self.local_dim)])

    def support(self, atol: float = 1e-12) -> dict[tuple[int, ...], complex]:
        """Nonzero amplitudes keyed by their digit tuples."""
        out = {}
        for idx in np.flatnonzero(np.abs(self.amplitudes) > atol):
            out[index_digits(int(idx), self.local_dim, self.num_sites)] = complex(self.amplitudes[idx])
        return out

    def to_dict(self) -> dict:
        return {
            "num_sites": self.num_sites,
            "local_dim": self.local_dim,
            "amplitudes": [[float(a.real), float(a.imag)] for a in self.amplitudes],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "StateVector":
        try:
            amps = np.array([complex(re, im) for re, im in doc["amplitudes"]])
            return cls(amps, int(doc["num_sites"]), int(doc["local_dim"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidInputError(f"malformed state document: {exc}") from exc


def _check_same_space(a: StateVector, b: StateVector) -> None:
    if (a.num_sites, a.local_dim) != (b.num_sites, b.local_dim):
        raise InvalidInputError("states live in different spaces")


def basis_index(digits: Sequence[int], d: int) -> int:
    idx = 0
    for x in digits:
        idx = idx * d + int(x)
    return idx


def index_digits(idx: int, d: int, n: int) -> tuple[int, ...]:
    out = []
    for _ in range(n):
        idx, r = divmod(idx, d)
        out.append(r)
    return tuple(reversed(out))


def _check_permutation(p: Sequence[int]) -> list[int]:
    images = [int(x) for x in p]
    if sorted(images) != list(range(len(images))):
        raise InvalidInputError(f"not a permutation of 0..{len(images) - 1}: {tuple(p)}")
    return images


def permutation_sign(p: Sequence[int]) -> int:
    """Parity of a permutation, +1 for even and -1 for odd.

    Uses the cycle decomposition: a cycle of length ``k`` is ``k - 1``
    transpositions.
    """
    images = _check_permutation(p)
    seen = [False] * len(images)
    sign = 1
    for start in range(len(images)):
        if seen[start]:
            continue
        length = 0
        j = start
        while not seen[j]:
            seen[j] = True
            j = images[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def make_pair_singlet(d: int) -> StateVector:
    """Two-site singlet ``sum_i (-1)^i |i, d-1-i> / sqrt(d)``."""
    if d < 2:
        raise InvalidInputError("d must be >= 2")
    amps = np.zeros(d * d, dtype=complex)
    for i in range(d):
        amps[i * d + (d - 1 - i)] = (-1) ** i
    return StateVector(amps / math.sqrt(d), 2, d)


def make_nn_supersinglet(n: int, cap: int = NN_CAP) -> StateVector:
    """Totally antisymmetric state of ``n`` particles with ``n`` levels each."""
    if n < 2:
        raise InvalidInputError("N must be >= 2")
    if n > cap:
        raise ResourceLimitError(
            f"N={n} exceeds cap {cap}: the state needs d^N = {n}^{n} = {n ** n} amplitudes"
        )
    amps = np.zeros(n ** n, dtype=complex)
    for perm in itertools.permutations(range(n)):
        amps[basis_index(perm, n)] = permutation_sign(perm)
    return StateVector(amps / math.sqrt(math.factorial(n)), n, n)


def make_qubit_supersinglet(n: int, cap: int = QUBIT_CAP) -> StateVector:
    """Total-spin-zero state of ``n`` qubits (``n`` even).

    Each balanced bitstring gets ``z! (n/2 - z)! (-1)^(n/2 - z)``, where ``z``
    counts zeros in the first half, normalised by ``(n/2)! sqrt(n/2 + 1)``.
    """
    if n < 2 or n % 2:
        raise InvalidInputError("N must be even and >= 2")
    if n > cap:
        raise ResourceLimitError(
            f"N={n} exceeds cap {cap}: the state needs 2^N = {2 ** n} amplitudes"
        )
    half = n // 2
    norm = math.factorial(half) * math.sqrt(half + 1)
    amps = np.zeros(2 ** n, dtype=complex)
    for ones in itertools.combinations(range(n), half):
        bits = [0] * n
        for k in ones:
            bits[k] = 1
        z = half - sum(bits[:half])
        coeff = math.factorial(z) * math.factorial(half - z) * (-1) ** (half - z)
        amps[basis_index(bits, 2)] = coeff / norm
    return StateVector(amps, n, 2)


def spin_matrices(d: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Spin-``(d-1)/2`` matrices ``(Sx, Sy, Sz)`` in the local basis order."""
    if d < 2:
        raise InvalidInputError("d must be >= 2")
    s = (d - 1) / 2
    m = s - np.arange(d)
    # raising operator: <m+1|S+|m> sits one row above the diagonal
    jp = np.diag(np.sqrt(s * (s + 1) - m[1:] * (m[1:] + 1)), k=1).astype(complex)
    jm = jp.conj().T
    sx = (jp + jm) / 2
    sy = (jp - jm) / 2j
    sz = np.diag(m).astype(complex)
    return sx, sy, sz


def direction_vector(direction: Sequence[float]) -> np.ndarray:
    """Unit vector for ``(polar, azimuthal)`` angles."""
    theta, phi = (float(x) for x in direction)
    return np.array([math.sin(theta) * math.cos(phi), math.sin(theta) * math.sin(phi), math.cos(theta)])


def spin_component(d: int, axis: Sequence[float]) -> np.ndarray:
    sx, sy, sz = spin_matrices(d)
    nx, ny, nz = axis
    return nx * sx + ny * sy + nz * sz


def rotation_operator(d: int, axis: Sequence[float], angle: float) -> np.ndarray:
    """``exp(-i angle axis.S)`` built from the eigendecomposition of ``axis.S``."""
    axis = np.asarray(axis, dtype=float)
    if axis.shape != (3,) or abs(np.linalg.norm(axis) - 1) > 1e-9:
        raise InvalidInputError("axis must be a unit 3-vector")
    w, v = np.linalg.eigh(spin_component(d, axis))
    return (v * np.exp(-1j * angle * w)) @ v.conj().T


def direction_rotation(d: int, direction: Sequence[float]) -> np.ndarray:
    """Rotation taking the z axis onto ``direction`` (polar, azimuthal)."""
    theta, phi = (float(x) for x in direction)
    return rotation_operator(d, (-math.sin(phi), math.cos(phi), 0.0), theta)


def apply_local(state: StateVector, op: np.ndarray, site: int) -> StateVector:
    op = _check_operator(state, op)
    t = np.tensordot(op, state.tensor(), axes=([1], [site]))
    return StateVector(np.moveaxis(t, 0, site), state.num_sites, state.local_dim)


def apply_product(state: StateVector, ops: Sequence[np.ndarray]) -> StateVector:
    """Apply ``ops[0] (x) ops[1] (x) ...`` site by site."""
    if len(ops) != state.num_sites:
        raise InvalidInputError("need one operator per site")
    t = state.tensor()
    for k, op in enumerate(ops):
        op = _check_operator(state, op)
        t = np.moveaxis(np.tensordot(op, t, axes=([1], [k])), 0, k)
    return StateVector(t, state.num_sites, state.local_dim)


def apply_collective(state: StateVector, op: np.ndarray) -> StateVector:
    """Apply the same local operator on every site, never forming the full matrix."""
    return apply_product(state, [op] * state.num_sites)


def collective_generator(state: StateVector, op: np.ndarray) -> StateVector:
    """Apply ``sum_k op^(k)``, e.g. a total spin component."""
    total = np.zeros(state.dim, dtype=complex)
    for k in range(state.num_sites):
        total += apply_local(state, op, k).amplitudes
    return StateVector(total, state.num_sites, state.local_dim)


def _check_operator(state: StateVector, op) -> np.ndarray:
    op = np.asarray(op, dtype=complex)
    if op.shape != (state.local_dim, state.local_dim):
        raise InvalidInputError(
            f"operator shape {op.shape} does not match local dimension {state.local_dim}"
        )
    return op


def invariance_overlap(state: StateVector, op: np.ndarray) -> complex:
    return complex(np.vdot(state.amplitudes, apply_collective(state, op).amplitudes))


def invariance_deviation(state: StateVector, op: np.ndarray) -> float:
    """Distance between ``op^{(x)N}|psi>`` and ``|psi>``, minimised over a global phase.

    Equal to ``sqrt(2 - 2|<psi|op^{(x)N}|psi>|)`` for unit vectors, but
    evaluated as a vector norm at the optimal phase: the square root form
    turns rounding in the overlap into errors of order 1e-8.
    """
    moved = apply_collective(state, op).amplitudes
    ov = np.vdot(state.amplitudes, moved)
    phase = ov / abs(ov) if abs(ov) > 0 else 1.0
    return float(np.linalg.norm(moved / phase - state.amplitudes))


def invariance_phase(state: StateVector, op: np.ndarray) -> float:
    """Phase picked up under the collective operation, in radians."""
    return float(np.angle(invariance_overlap(state, op)))


def swap_sites(state: StateVector, i: int, j: int) -> StateVector:
    t = np.swapaxes(state.tensor(), i, j)
    return StateVector(t, state.num_sites, state.local_dim)


def total_spin_squared(state: StateVector) -> StateVector:
    """``(S_total)^2 |psi>``."""
    out = np.zeros(state.dim, dtype=complex)
    for comp in spin_matrices(state.local_dim):
        once = collective_generator(state, comp)
        out += collective_generator(once, comp).amplitudes
    return StateVector(out, state.num_sites, state.local_dim)


def random_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random ``d x d`` unitary via QR of a complex Ginibre matrix."""
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / math.sqrt(2)
    q, r = np.linalg.qr(z)
    ph = np.diag(r) / np.abs(np.diag(r))
    return q * ph


def random_rotation(d: int, rng: np.random.Generator) -> np.ndarray:
    """Spin rotation about a uniformly random axis by a uniform angle in [0, 4 pi)."""
    v = rng.standard_normal(3)
    return rotation_operator(d, v / np.linalg.norm(v), rng.uniform(0, 4 * math.pi))


def random_collective_op(state: StateVector, rng: np.random.Generator) -> np.ndarray:
    """A random operation the state should be invariant under.

    Arbitrary unitaries for ``|S_N^(N)>`` and qubit states; for
    ``|S_2^(d)>`` with ``d > 2`` only spin rotations leave it unchanged.
    """
    if state.num_sites == state.local_dim or state.local_dim == 2:
        return random_unitary(state.local_dim, rng)
    return random_rotation(state.local_dim, rng)


def product_state(digits: Sequence[int], d: int) -> StateVector:
    amps = np.zeros(d ** len(digits), dtype=complex)
    amps[basis_index(digits, d)] = 1.0
    return StateVector(amps, len(digits), d)


def supersinglet(family: str, n: int, d: int | None = None, cap: int | None = None) -> StateVector:
    """Dispatch by family name: ``"NN"``, ``"qubit"`` or ``"pair"``."""
    family = family.lower()
    if family == "nn":
        return make_nn_supersinglet(n, cap if cap is not None else NN_CAP)
    if family == "qubit":
        return make_qubit_supersinglet(n, cap if cap is not None else QUBIT_CAP)
    if family == "pair":
        if n != 2:
            raise InvalidInputError("pair singlets have N = 2")
        return make_pair_singlet(d if d is not None else 2)
    raise InvalidInputError(f"unknown family {family!r}; choose NN, qubit or pair")
