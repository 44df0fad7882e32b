"""
Exact numerics behind the gate's figures of merit.

Covers the N-qubit success probability by branch enumeration, the
single-qubit success formula and its feasibility-constrained maximum, the
unitarity overlap bound on any retrieval from the doubled-angle program, the
uniform average of program projectors, and the mean program length of the
retry scheme.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.optimize import brentq

from .errors import CapacityError, DomainError, PreconditionError, ValidationError
from .protocol import (
    TWO_PI,
    canonical_angle,
    coherent_branches,
    encode_program,
    failure_bits,
    rotation_z,
    success_probability,
)
from .statevec import StateVector, bloch_state, fidelity_up_to_phase

MAX_EXACT_QUBITS = 16
MAX_BOUND_QUBITS = 30
MAX_DENSITY_QUBITS = 10

# Generic reference data state: neither a U_alpha eigenstate nor equatorial.
REFERENCE_THETA = 1.0
REFERENCE_PHI = 0.5

INV_PHI = (math.sqrt(5) - 1) / 2


def reference_data() -> StateVector:
    return bloch_state(REFERENCE_THETA, REFERENCE_PHI)


def _check_range(n: int, hi: int, what: str) -> int:
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)):
        raise ValidationError(f"{what} must be an integer, got {n!r}")
    if not 1 <= n <= hi:
        raise CapacityError(f"{what}={n} outside [1, {hi}]")
    return int(n)


# -- success probability of the cascade ------------------------------------

def exact_success_probability(alpha: float, n: int, data: StateVector | None = None) -> float:
    """Total probability of the non-all-ones outcomes, by branch enumeration."""
    n = _check_range(n, MAX_EXACT_QUBITS, "n")
    d = reference_data() if data is None else data
    return success_probability(d, encode_program(alpha, n))


def branch_table(alpha: float, n: int, data: StateVector | None = None) -> list[dict]:
    """Per-outcome rows: bits, probability, heralded success, data fidelity with U_α|d>."""
    n = _check_range(n, MAX_EXACT_QUBITS, "n")
    d = reference_data() if data is None else data
    a = canonical_angle(alpha)
    target = StateVector._wrap(rotation_z(a) @ d.amplitudes)
    rows = []
    for bits, prob, out in coherent_branches(d, encode_program(a, n)):
        rows.append(
            {
                "bits": bits,
                "probability": prob,
                "success": bits != failure_bits(n),
                "fidelity_with_target": fidelity_up_to_phase(out, target),
            }
        )
    return rows


# -- single-qubit program ---------------------------------------------------

@dataclass(frozen=True)
class SingleQubitGateParams:
    """Success probabilities at α = 0 and α = π and Re<U_0|U_π> of a 1-qubit gate."""

    p0: float
    p_pi: float
    overlap_re: float = 0.0

    def __post_init__(self):
        for name in ("p0", "p_pi"):
            v = getattr(self, name)
            if not (0.0 < v <= 1.0):
                raise DomainError(f"{name} must lie in (0, 1], got {v!r}")
        if not -1.0 <= self.overlap_re <= 1.0:
            raise DomainError(f"overlap_re must lie in [-1, 1], got {self.overlap_re!r}")

    @property
    def feasible(self) -> bool:
        # orthogonality of the two success/failure branches forces
        # sqrt(p0 p_pi) <= sqrt((1-p0)(1-p_pi))
        return feasibility_margin(self.p0, self.p_pi) >= -1e-12

    @property
    def average_success(self) -> float:
        """Mean of p_alpha over α when overlap_re = 0."""
        return math.sqrt(self.p0 * self.p_pi)


def feasibility_margin(p0: float, p_pi: float) -> float:
    return math.sqrt((1 - p0) * (1 - p_pi)) - math.sqrt(p0 * p_pi)


def single_qubit_p_alpha(alpha, params: SingleQubitGateParams):
    """Success probability at angle α implied by normalization of the program.

    Accepts a scalar or an array of angles.
    """
    a = np.asarray(alpha, dtype=float)
    c, s = np.cos(a / 2), np.sin(a / 2)
    denom = (
        c**2 / params.p0
        + s**2 / params.p_pi
        + 2 * c * s * params.overlap_re / math.sqrt(params.p0 * params.p_pi)
    )
    bad = denom <= 0
    if np.any(bad):
        where = float(np.atleast_1d(a)[np.argmax(np.atleast_1d(bad))])
        raise DomainError(f"parameters {params} give a non-positive denominator at alpha={where!r}")
    out = 1.0 / denom
    return float(out) if out.ndim == 0 else out


def average_over_alpha(params: SingleQubitGateParams, grid_points: int = 256) -> float:
    """Uniform-grid average of single_qubit_p_alpha over [0, 2π)."""
    grid = TWO_PI * np.arange(grid_points) / grid_points
    return float(np.mean(single_qubit_p_alpha(grid, params)))


def golden_section_max(f: Callable[[float], float], lo: float, hi: float, tol: float = 1e-10) -> float:
    """Maximizer of a unimodal ``f`` on [lo, hi], located to within ``tol``."""
    a, b = lo, hi
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
    return float((a + b) / 2)


def _max_feasible_p_pi(p0: float) -> float:
    # feasibility_margin is decreasing in p_pi, so the best p_pi sits on the boundary
    if feasibility_margin(p0, 1.0) >= 0:
        return 1.0
    return brentq(lambda q: feasibility_margin(p0, q), 1e-15, 1.0, xtol=1e-15, rtol=4 * np.finfo(float).eps)


def single_qubit_max_avg(step: float = 1e-2, tol: float = 1e-8) -> tuple[SingleQubitGateParams, float]:
    """Largest average success of a one-qubit programmable gate.

    Scans a (p0, p_pi) grid of spacing ``step`` for the best feasible point,
    then refines p0 by golden-section search along the feasibility boundary.
    """
    grid = np.arange(1, round(1 / step) + 1) * step
    P0, PP = np.meshgrid(grid, grid, indexing="ij")
    ok = np.sqrt(P0 * PP) <= np.sqrt((1 - P0) * (1 - PP)) + 1e-12
    score = np.where(ok, np.sqrt(P0 * PP), -np.inf)
    i, _ = np.unravel_index(np.argmax(score), score.shape)
    lo = max(grid[i] - step, step / 2)
    hi = min(grid[i] + step, 1 - step / 2)
    p0 = golden_section_max(lambda x: math.sqrt(x * _max_feasible_p_pi(x)), lo, hi, tol)
    best = SingleQubitGateParams(p0, _max_feasible_p_pi(p0), 0.0)
    return best, best.average_success


# -- retrieval bound for the doubled-angle program --------------------------

def bound_product(delta, n: int):
    """|<β'|β>| * |<U^N_{α'}|U^N_α>| with δ = α - α' and β' = π + β + δ.

    Evaluated as |sin(δ/2) ∏_{l=1}^{n} cos(2^{l-1} δ/2)|. Any retrieval with
    constant success probability p must satisfy bound_product <= 1 - p.
    """
    n = _check_range(n, MAX_BOUND_QUBITS, "n")
    x = np.asarray(delta, dtype=float) / 2
    out = np.sin(x)
    for l in range(n):
        out = out * np.cos(np.ldexp(x, l))
    out = np.abs(out)
    return float(out) if out.ndim == 0 else out


def bound_product_telescoped(delta, n: int):
    """Closed form |sin(2^{n-1} δ)| / 2^n of :func:`bound_product`."""
    n = _check_range(n, MAX_BOUND_QUBITS, "n")
    out = np.abs(np.sin(np.ldexp(np.asarray(delta, dtype=float), n - 1))) / 2.0**n
    return float(out) if out.ndim == 0 else out


_POINTS_PER_LOBE = 64
_MAX_GRID = 1 << 20


def retrieval_bound(n: int) -> float:
    """Ceiling 1 - max_δ bound_product(δ, n) on the success probability.

    The maximization scans δ on a uniform grid with 64 points per lobe of
    width π/2^{n-1}, then refines the best grid point by golden-section
    search. When the full interval (0, 2π) would need more than 2^20 points
    (n > 14) only its first 2^20 / 64 lobes are scanned; the result is still
    a valid ceiling.
    """
    n = _check_range(n, MAX_BOUND_QUBITS, "n")
    lobe = math.pi / 2.0 ** (n - 1)
    points = min(_POINTS_PER_LOBE << n, _MAX_GRID)
    width = min(TWO_PI, points / _POINTS_PER_LOBE * lobe)
    grid = width * (np.arange(1, points) / points)
    values = bound_product(grid, n)
    k = int(np.argmax(values))
    h = grid[1] - grid[0]
    lo, hi = max(grid[k] - h, 1e-300), grid[k] + h
    x = golden_section_max(lambda t: bound_product(t, n), lo, hi, tol=h * 1e-9)
    best = max(float(values[k]), bound_product(x, n))
    return 1.0 - best


# -- program ensemble --------------------------------------------------------

@dataclass(frozen=True, eq=False)
class DensityMatrix:
    matrix: np.ndarray

    def __post_init__(self):
        m = self.matrix
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValidationError(f"density matrix must be square, got shape {m.shape}")
        if np.max(np.abs(m - m.conj().T)) > 1e-10:
            raise ValidationError("density matrix is not Hermitian")
        if abs(np.trace(m) - 1) > 1e-10:
            raise ValidationError(f"density matrix trace is {np.trace(m)!r}")
        m.setflags(write=False)

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    def max_deviation_from_mixed(self) -> float:
        """Largest entry of |ρ - I/dim|."""
        return float(np.max(np.abs(self.matrix - np.eye(self.dimension) / self.dimension)))

    def entropy_bits(self) -> float:
        w = np.linalg.eigvalsh(self.matrix)
        w = w[w > 1e-15]
        return float(-np.sum(w * np.log2(w)))


def program_density_average(n: int, grid_points: int | None = None) -> DensityMatrix:
    """Uniform-grid average over α of |U^N_α><U^N_α|.

    Matrix elements are trigonometric polynomials in α of degree below 2^n,
    so any grid of at least 2^{n+1} equispaced points averages them exactly.
    """
    n = _check_range(n, MAX_DENSITY_QUBITS, "n")
    g = (1 << (n + 2)) if grid_points is None else int(grid_points)
    if g < 1 << (n + 1):
        raise PreconditionError(f"grid_points={g} below the required 2^(n+1) = {1 << (n + 1)}")
    cols = np.stack([encode_program(TWO_PI * k / g, n).state.amplitudes for k in range(g)], axis=1)
    rho = cols @ cols.conj().T / g
    return DensityMatrix(rho)


# -- retry-until-success program length --------------------------------------

def expected_program_length(max_terms: int = 60) -> float:
    """Partial sum of Σ_N N 2^{-N}: the mean number of one-qubit programs used."""
    if max_terms < 1:
        raise ValidationError(f"max_terms must be >= 1, got {max_terms}")
    return math.fsum(math.ldexp(k, -k) for k in range(1, max_terms + 1))


def program_length_tail(max_terms: int) -> float:
    """Upper bound on 2 - expected_program_length(max_terms)."""
    return math.ldexp(max_terms + 2, -max_terms)
