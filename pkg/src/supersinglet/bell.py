"""Peres observables, N-party correlation functions and CHSH-type maximisation.

The correlation functions for the totally antisymmetric state ``|S_N^(N)>``
depend only on the angle between the two measurement directions.  Two
closed forms are provided for the case where two parties use the second
setting: :func:`corr_closed_m2` is the published expression and
:func:`corr_exact_m2` is the exact one derived from the determinant
expansion ``<A...AB B> = det(A) e_2(AB) / C(N, 2)``.  They coincide at
``N = 4`` only.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import minimize

from .errors import ConsistencyError, InvalidInputError
from .qcore import StateVector, apply_product, direction_vector, spin_component

SINGULAR_TOL = 1e-8
CLOSED_FORMS = ("published", "exact")


@dataclass(frozen=True)
class PeresObservable:
    """Spin measurement along ``direction`` with outcomes folded to +1/-1."""

    direction: tuple[float, float]
    local_dim: int

    def matrix(self) -> np.ndarray:
        return peres_operator(self.local_dim, self.direction)


@dataclass(frozen=True)
class CorrelationSpec:
    """One observable per party; the last ``m`` parties use the B-side setting."""

    observables: tuple[PeresObservable, ...]
    m: int = 0

    def __post_init__(self):
        if not 0 <= self.m <= len(self.observables):
            raise InvalidInputError("need 0 <= m <= N")

    @classmethod
    def split(cls, n: int, d: int, a_side, b_side, m: int) -> "CorrelationSpec":
        a = PeresObservable(tuple(a_side), d)
        b = PeresObservable(tuple(b_side), d)
        return cls(tuple([a] * (n - m) + [b] * m), m)


@dataclass
class ViolationResult:
    N: int
    m: int
    value: float
    angles: tuple[float, float, float, float]
    form: str = "published"
    evaluations: int = field(default=0, repr=False)

    def to_dict(self) -> dict:
        return {
            "N": self.N,
            "m": self.m,
            "value": round(float(self.value), 12),
            "angles": [round(float(a), 12) for a in self.angles],
            "form": self.form,
        }


def peres_operator(d: int, direction: Sequence[float]) -> np.ndarray:
    """``sum_m (-1)^(s-m) |m><m|`` for the spin component along ``direction``."""
    if d < 2:
        raise InvalidInputError("d must be >= 2")
    s = (d - 1) / 2
    w, v = np.linalg.eigh(spin_component(d, direction_vector(direction)))
    signs = np.where(np.rint(s - w).astype(int) % 2 == 0, 1.0, -1.0)
    return (v * signs) @ v.conj().T


def correlation_bruteforce(state: StateVector, spec: CorrelationSpec, imag_tol: float = 1e-10) -> float:
    """Expectation of the product of the per-party observables, by direct application."""
    if len(spec.observables) != state.num_sites:
        raise InvalidInputError("need one observable per party")
    ops = []
    for obs in spec.observables:
        if obs.local_dim != state.local_dim:
            raise InvalidInputError("observable dimension does not match state")
        ops.append(obs.matrix())
    val = complex(np.vdot(state.amplitudes, apply_product(state, ops).amplitudes))
    if abs(val.imag) > imag_tol:
        raise ConsistencyError(f"expectation has imaginary part {val.imag:.3e}")
    return val.real


def planar_spec(n: int, theta: float, m: int, d: int | None = None) -> CorrelationSpec:
    """A-side along z, B-side tilted by ``theta`` in the x-z plane."""
    return CorrelationSpec.split(n, d or n, (0.0, 0.0), (float(theta), 0.0), m)


def _sign(n: int) -> int:
    return -1 if (n // 2) % 2 else 1


def _dirichlet(k: int, theta):
    """``sin(k theta) / sin(theta)`` with the removable singularities filled in."""
    theta = np.asarray(theta, dtype=float)
    s = np.sin(theta)
    near = np.abs(s) < SINGULAR_TOL
    safe = np.where(near, 1.0, s)
    ratio = np.sin(k * theta) / safe
    limit = k * np.cos(k * theta) / np.cos(theta)
    out = np.where(near, limit, ratio)
    return out if out.ndim else float(out)


def corr_closed_m1(n: int, theta):
    """Correlation with one party on the B-side setting."""
    if n < 2:
        raise InvalidInputError("N must be >= 2")
    return _sign(n) / n * _dirichlet(n, theta)


def corr_closed_m2(n: int, theta):
    """Published two-party B-side correlation; exact for ``N = 4`` only."""
    if n < 4:
        raise InvalidInputError("m = 2 closed form requires N >= 4")
    return _sign(n) / (n + 2) * (1.0 + _dirichlet(n + 1, theta))


def corr_exact_m2(n: int, theta):
    """Exact two-party B-side correlation for ``|S_N^(N)>`` with Peres observables."""
    if n < 3:
        raise InvalidInputError("m = 2 requires N >= 3")
    theta = np.asarray(theta, dtype=float)
    out = _sign(n) * (_dirichlet(n, theta) ** 2 - _dirichlet(n, 2 * theta)) / (n * (n - 1))
    return out if np.ndim(out) else float(out)


def correlation_function(n: int, m: int, form: str = "published"):
    """The closed-form correlation ``E(theta)`` used by :func:`chsh_value`."""
    if form not in CLOSED_FORMS:
        raise InvalidInputError(f"form must be one of {CLOSED_FORMS}")
    if m == 1:
        if n < 2:
            raise InvalidInputError("m = 1 requires N >= 2")
        return lambda t: corr_closed_m1(n, t)
    if m == 2:
        if n < 4:
            raise InvalidInputError("m = 2 is supported for N >= 4 only")
        if form == "exact":
            return lambda t: corr_exact_m2(n, t)
        return lambda t: corr_closed_m2(n, t)
    raise InvalidInputError(f"unsupported m={m}; choose 1 or 2")


def chsh_value(n: int, m: int, angles: Sequence[float], form: str = "published") -> float:
    """``|E(AB) + E(Ab) + E(aB) - E(ab)|`` for planar settings ``(A, a, B, b)``."""
    e = correlation_function(n, m, form)
    A, a, B, b = (float(x) for x in angles)
    if not all(math.isfinite(x) for x in (A, a, B, b)):
        raise InvalidInputError("angles must be finite")
    return abs(float(e(B - A) + e(b - A) + e(B - a) - e(b - a)))


def _axis_grid(n: int, points: int, zoom_points: int) -> np.ndarray:
    # The correlation peaks within ~pi/N of 0 and pi; a uniform grid alone misses it at large N.
    base = np.linspace(0.0, 2 * np.pi, points, endpoint=False)
    width = min(np.pi / 2, 8 * np.pi / n)
    local = np.linspace(-width, width, zoom_points)
    grid = np.concatenate([base, local % (2 * np.pi), (np.pi + local) % (2 * np.pi)])
    return np.unique(np.round(grid, 15))


def maximize_violation(
    n: int,
    m: int,
    form: str = "published",
    grid_points: int = 120,
    zoom_points: int = 121,
    refine_starts: int = 4,
    xtol: float = 1e-7,
) -> ViolationResult:
    """Maximise the CHSH functional over planar settings with ``A`` fixed at 0.

    A grid search over ``a`` with ``B`` and ``b`` optimised exactly on the
    same grid (the objective splits into a ``B`` part and a ``b`` part once
    ``a`` is fixed), followed by Nelder-Mead refinement from the best few
    grid points.  Fully deterministic.
    """
    if grid_points < 60:
        raise InvalidInputError("grid_points must be >= 60")
    e = correlation_function(n, m, form)
    grid = _axis_grid(n, grid_points, zoom_points)
    e_grid = e(grid)
    cands = []
    for ia, a in enumerate(grid):
        e_shift = e(grid - a)
        g = e_grid + e_shift  # E(B) + E(B - a)
        h = e_grid - e_shift  # E(b) - E(b - a)
        hi = g.max() + h.max()
        lo = g.min() + h.min()
        if hi >= -lo:
            cands.append((hi, ia, grid[int(np.argmax(g))], grid[int(np.argmax(h))]))
        else:
            cands.append((-lo, ia, grid[int(np.argmin(g))], grid[int(np.argmin(h))]))
    # highest value first, lowest grid index wins ties
    cands.sort(key=lambda c: (-c[0], c[1]))

    def neg(x):
        return -chsh_value(n, m, (0.0, x[0], x[1], x[2]), form)

    best_val = cands[0][0]
    best_x = np.array([grid[cands[0][1]], cands[0][2], cands[0][3]])
    evaluations = grid.size ** 2
    for val, ia, B, b in cands[:refine_starts]:
        x0 = np.array([grid[ia], B, b])
        res = minimize(neg, x0, method="Nelder-Mead",
                       options={"xatol": xtol, "fatol": 1e-13, "maxiter": 4000})
        evaluations += res.nfev
        if -res.fun > best_val:
            best_val, best_x = -res.fun, res.x
    angles = (0.0,) + tuple(float(x % (2 * np.pi)) for x in best_x)
    value = chsh_value(n, m, angles, form)
    return ViolationResult(n, m, value, angles, form, evaluations)
