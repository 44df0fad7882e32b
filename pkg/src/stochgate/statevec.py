"""
Dense statevector simulation for small qubit registers.

Conventions
-----------
Qubit ``k`` is bit ``k`` of the amplitude index (little-endian), so for two
qubits the basis order is ``|q1 q0> = 00, 01, 10, 11`` read as indices
0, 1, 2, 3 with qubit 0 varying fastest.

Measurement outcomes over a list of qubits ``[q_a, q_b, ...]`` are bitstrings
whose first character is the value of ``q_a``. Outcomes are ordered
lexicographically by that string, which is also the order used for the
cumulative inversion of the random draw in :func:`measure_subset`.

States are never rephased. Use :func:`fidelity_up_to_phase` when a global
phase should be ignored.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
import math
from math import sqrt
from typing import Iterable, Sequence

import numpy as np

from .errors import CapacityError, ConsistencyError, ValidationError

MAX_QUBITS = 24
NORM_TOL = 1e-10
UNITARY_TOL = 1e-8
ZERO_BRANCH_TOL = 1e-14

_S = 1 / sqrt(2)
I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
H = np.array([[_S, _S], [_S, -_S]], dtype=complex)
for _m in (I2, X, Z, H):
    _m.setflags(write=False)


@dataclass(frozen=True, eq=False)
class StateVector:
    """Normalized pure state of ``num_qubits`` qubits.

    The amplitude array is copied on construction and marked read-only.
    """

    amplitudes: np.ndarray
    num_qubits: int

    def __init__(self, amplitudes, *, validate: bool = True):
        amps = np.array(amplitudes, dtype=complex).reshape(-1)
        if validate:
            _check_amplitudes(amps)
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "num_qubits", amps.size.bit_length() - 1)

    @classmethod
    def _wrap(cls, amps: np.ndarray) -> "StateVector":
        # Trusted fast path for arrays produced by the gate kernels.
        obj = cls.__new__(cls)
        amps.setflags(write=False)
        object.__setattr__(obj, "amplitudes", amps)
        object.__setattr__(obj, "num_qubits", amps.size.bit_length() - 1)
        return obj

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def __len__(self) -> int:
        return self.amplitudes.size

    def __repr__(self) -> str:
        return f"StateVector(num_qubits={self.num_qubits}, amplitudes={self.amplitudes!r})"


def _check_amplitudes(amps: np.ndarray) -> None:
    size = amps.size
    if size == 0 or size & (size - 1):
        raise ValidationError(f"amplitude count {size} is not a power of two")
    if size.bit_length() - 1 > MAX_QUBITS:
        raise CapacityError(f"{size.bit_length() - 1} qubits exceeds the cap of {MAX_QUBITS}")
    if not np.all(np.isfinite(amps)):
        raise ValidationError("amplitudes must be finite")
    norm2 = float(np.vdot(amps, amps).real)
    if abs(norm2 - 1.0) > NORM_TOL:
        raise ValidationError(f"state is not normalized (norm^2 = {norm2!r})")


def basis_state(num_qubits: int, index: int = 0) -> StateVector:
    """Computational basis state ``|index>`` on ``num_qubits`` qubits."""
    if num_qubits < 0 or num_qubits > MAX_QUBITS:
        raise CapacityError(f"num_qubits={num_qubits} outside [0, {MAX_QUBITS}]")
    dim = 1 << num_qubits
    if not 0 <= index < dim:
        raise ValidationError(f"basis index {index} out of range for {num_qubits} qubits")
    amps = np.zeros(dim, dtype=complex)
    amps[index] = 1.0
    return StateVector._wrap(amps)


def bloch_state(theta: float, phi: float) -> StateVector:
    """cos(theta/2)|0> + e^{i phi} sin(theta/2)|1>."""
    if not (np.isfinite(theta) and np.isfinite(phi)):
        raise ValidationError("Bloch angles must be finite")
    amps = np.array([np.cos(theta / 2), np.exp(1j * phi) * np.sin(theta / 2)], dtype=complex)
    return StateVector._wrap(amps)


def random_state(num_qubits: int, rng: np.random.Generator) -> StateVector:
    """Haar-random pure state (normalized complex Gaussian vector)."""
    dim = 1 << num_qubits
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return StateVector._wrap(v / np.linalg.norm(v))


def as_unitary2(u) -> np.ndarray:
    """Return ``u`` as a 2x2 complex array, raising if it is not unitary."""
    m = np.asarray(u, dtype=complex)
    if m.shape != (2, 2):
        raise ValidationError(f"expected a 2x2 matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValidationError("matrix entries must be finite")
    dev = np.max(np.abs(m.conj().T @ m - I2))
    if dev > UNITARY_TOL:
        raise ValidationError(f"matrix is not unitary (max |U^dag U - I| = {dev:.3g})")
    return m


def _check_qubit(q: int, n: int) -> int:
    if isinstance(q, bool) or not isinstance(q, (int, np.integer)):
        raise ValidationError(f"qubit index must be an integer, got {q!r}")
    if not 0 <= q < n:
        raise ValidationError(f"qubit index {q} out of range for {n} qubits")
    return int(q)


def _check_distinct(qubits: Sequence[int], n: int) -> tuple[int, ...]:
    qs = tuple(qubits)
    try:
        return _validated(qs, n)
    except TypeError:  # unhashable entries
        raise ValidationError(f"qubit indices must be integers, got {qubits!r}") from None


@lru_cache(maxsize=1024)
def _validated(qs: tuple, n: int) -> tuple[int, ...]:
    out = tuple(_check_qubit(q, n) for q in qs)
    if len(set(out)) != len(out):
        raise ValidationError(f"qubit indices must be distinct, got {list(out)}")
    return out


def tensor(a: StateVector, b: StateVector) -> StateVector:
    """``a ⊗ b`` with the qubits of ``a`` on the low indices."""
    n = a.num_qubits + b.num_qubits
    if n > MAX_QUBITS:
        raise CapacityError(f"tensor product would have {n} qubits (cap {MAX_QUBITS})")
    return StateVector._wrap(np.outer(b.amplitudes, a.amplitudes).ravel())


def tensor_all(states: Iterable[StateVector]) -> StateVector:
    """Left-to-right tensor product; the first state holds qubit 0."""
    it = iter(states)
    out = next(it)
    for s in it:
        out = tensor(out, s)
    return out


def apply_single(u, q: int, s: StateVector) -> StateVector:
    """Apply the 2x2 unitary ``u`` to qubit ``q`` of ``s``."""
    m = as_unitary2(u)
    n = s.num_qubits
    q = _check_qubit(q, n)
    psi = s.amplitudes.reshape(1 << (n - q - 1), 2, 1 << q)
    out = np.einsum("ij,ajb->aib", m, psi)
    return StateVector._wrap(out.reshape(-1))


@lru_cache(maxsize=256)
def _mcx_pairs(n: int, controls: tuple[int, ...], target: int) -> tuple[np.ndarray, np.ndarray]:
    idx = np.arange(1 << n, dtype=np.int64)
    cmask = 0
    for c in controls:
        cmask |= 1 << c
    sel = ((idx & cmask) == cmask) & ((idx >> target) & 1 == 0)
    lo = idx[sel]
    hi = lo | (1 << target)
    lo.setflags(write=False)
    hi.setflags(write=False)
    return lo, hi


def apply_mcx(controls: Sequence[int], target: int, s: StateVector) -> StateVector:
    """Multi-controlled X: flip ``target`` where every control bit is 1.

    An empty control list is a plain X on ``target``.
    """
    n = s.num_qubits
    qs = _check_distinct([*controls, target], n)
    lo, hi = _mcx_pairs(n, tuple(sorted(qs[:-1])), qs[-1])
    psi = s.amplitudes
    out = psi.copy()
    out[lo] = psi[hi]
    out[hi] = psi[lo]
    return StateVector._wrap(out)


def inner_product(a: StateVector, b: StateVector) -> complex:
    """<a|b>, conjugate-linear in ``a``."""
    if a.dim != b.dim:
        raise ValidationError(f"dimension mismatch: {a.num_qubits} vs {b.num_qubits} qubits")
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def fidelity_up_to_phase(a: StateVector, b: StateVector) -> float:
    """|<a|b>|, clipped to [0, 1]."""
    return min(1.0, abs(inner_product(a, b)))


@lru_cache(maxsize=256)
def _outcome_index(n: int, qubits: tuple[int, ...]) -> np.ndarray:
    # outcome label of every basis index; qubits[0] is the most significant bit
    idx = np.arange(1 << n, dtype=np.int64)
    k = len(qubits)
    lab = np.zeros_like(idx)
    for pos, q in enumerate(qubits):
        lab |= ((idx >> q) & 1) << (k - 1 - pos)
    lab.setflags(write=False)
    return lab


def _bits(label: int, k: int) -> str:
    return format(label, f"0{k}b") if k else ""


def branch_probabilities(s: StateVector, qubits: Sequence[int]) -> np.ndarray:
    """Born probabilities of every outcome on ``qubits``, in lexicographic order."""
    n = s.num_qubits
    qs = _check_distinct(qubits, n)
    p = np.abs(s.amplitudes) ** 2
    return np.bincount(_outcome_index(n, qs), weights=p, minlength=1 << len(qs))


def _collapse(s: StateVector, qs: tuple[int, ...], label: int, prob: float) -> StateVector:
    keep = _outcome_index(s.num_qubits, qs) == label
    out = np.where(keep, s.amplitudes, 0.0) / sqrt(prob)
    return StateVector._wrap(out)


def sample_outcome(probs: np.ndarray, random_draw: float) -> int:
    """Invert the cumulative distribution ``probs`` at ``random_draw``."""
    if not 0.0 <= random_draw < 1.0:
        raise ValidationError(f"random_draw must lie in [0, 1), got {random_draw!r}")
    if probs.size <= 64:
        # scalar loop beats cumsum/searchsorted on the small registers used here
        ps = probs.tolist()
        x = random_draw * math.fsum(ps)
        acc = 0.0
        label = len(ps) - 1
        for i, p in enumerate(ps):
            acc += p
            if acc > x:
                label = i
                break
    else:
        cum = np.cumsum(probs)
        label = min(int(np.searchsorted(cum, random_draw * cum[-1], side="right")), probs.size - 1)
    if probs[label] < ZERO_BRANCH_TOL:
        raise ConsistencyError(f"drew outcome {label} with weight {probs[label]:.3g}")
    return label


def measure_subset(
    s: StateVector, qubits: Sequence[int], random_draw: float
) -> tuple[str, float, StateVector]:
    """Projective Z-basis measurement of ``qubits`` driven by ``random_draw``.

    The outcome is chosen by inverting the cumulative Born distribution
    (lexicographic outcome order) at ``random_draw``. Returns the outcome
    bitstring, its exact probability and the renormalized collapsed state on
    all qubits.
    """
    qs = _check_distinct(qubits, s.num_qubits)
    probs = branch_probabilities(s, qs)
    label = sample_outcome(probs, random_draw)
    prob = float(probs[label])
    return _bits(label, len(qs)), prob, _collapse(s, qs, label, prob)


def enumerate_branches(
    s: StateVector, qubits: Sequence[int]
) -> list[tuple[str, float, StateVector]]:
    """Every outcome on ``qubits`` with nonzero probability, in lexicographic order."""
    qs = _check_distinct(qubits, s.num_qubits)
    probs = branch_probabilities(s, qs)
    return [
        (_bits(label, len(qs)), float(p), _collapse(s, qs, label, float(p)))
        for label, p in enumerate(probs)
        if p >= ZERO_BRANCH_TOL
    ]


@lru_cache(maxsize=1024)
def _slice_indices(n: int, fixed: tuple[tuple[int, int], ...]) -> np.ndarray:
    free = [q for q in range(n) if q not in dict(fixed)]
    base = 0
    for q, v in fixed:
        base |= v << q
    sub = np.arange(1 << len(free), dtype=np.int64)
    idx = np.full_like(sub, base)
    for pos, q in enumerate(free):
        idx |= ((sub >> pos) & 1) << q
    idx.setflags(write=False)
    return idx


def slice_state(s: StateVector, fixed: dict[int, int]) -> StateVector:
    """Renormalized state of the unfixed qubits given Z-basis values for ``fixed``.

    For a state already collapsed onto ``fixed`` this is the exact reduced
    state of the remaining qubits. Remaining qubits keep their relative order.
    """
    qs = _check_distinct(list(fixed), s.num_qubits)
    for q in qs:
        if fixed[q] not in (0, 1):
            raise ValidationError(f"fixed value for qubit {q} must be 0 or 1, got {fixed[q]!r}")
    sub = s.amplitudes[_slice_indices(s.num_qubits, tuple((q, int(fixed[q])) for q in qs))]
    nrm = sqrt(float(np.vdot(sub, sub).real))
    if nrm < sqrt(ZERO_BRANCH_TOL):
        raise ConsistencyError(f"slice {fixed} has zero weight")
    return StateVector._wrap(sub / nrm)
