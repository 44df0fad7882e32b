"""
Storing a z-rotation in equatorial qubits and retrieving it stochastically.

Register layout used throughout: the data qubit is qubit 0 and program qubit
``l`` (1-indexed, holding angle ``2**(l-1) * alpha``) is qubit ``l``.

Doubled program angles are built from the exact float product
``2**(l-1) * alpha`` rather than being reduced mod 2π. A heralded success
of the retry scheme then returns exactly ``U_alpha|d>`` including its phase;
coherent N-qubit branches add a global phase from the unused program qubits.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import CapacityError, ConsistencyError, ValidationError
from .statevec import (
    StateVector,
    apply_mcx,
    apply_single,
    branch_probabilities,
    enumerate_branches,
    sample_outcome,
    tensor,
)

TWO_PI = 2.0 * math.pi
MAX_PROGRAM_QUBITS = 20
DEFAULT_MAX_ATTEMPTS = 64


def canonical_angle(alpha: float) -> float:
    """Reduce ``alpha`` to [0, 2π)."""
    if not math.isfinite(alpha):
        raise ValidationError(f"angle must be finite, got {alpha!r}")
    r = math.fmod(alpha, TWO_PI)
    if r < 0.0:
        r += TWO_PI
    return 0.0 if r >= TWO_PI else r + 0.0  # + 0.0 turns -0.0 into 0.0


def rotation_z(alpha: float) -> np.ndarray:
    """U_alpha = exp(i alpha σz / 2) = diag(e^{iα/2}, e^{-iα/2}).

    The angle is used as given: ``rotation_z(2π)`` is ``-I``.
    """
    h = np.exp(0.5j * alpha)
    return np.array([[h, 0.0], [0.0, h.conjugate()]], dtype=complex)


def rotation_z_power(alpha: float, k: int) -> np.ndarray:
    """U_alpha**k for integer ``k`` (negative ``k`` gives powers of the adjoint)."""
    return rotation_z(k * alpha)


def _equatorial(theta: float) -> StateVector:
    h = np.exp(0.5j * theta) / math.sqrt(2.0)
    return StateVector._wrap(np.array([h, h.conjugate()], dtype=complex))


def equatorial_state(theta: float) -> StateVector:
    """(e^{iθ/2}|0> + e^{-iθ/2}|1>)/√2."""
    if not math.isfinite(theta):
        raise ValidationError(f"angle must be finite, got {theta!r}")
    return _equatorial(theta)


@dataclass(frozen=True)
class ProgramRegister:
    """N-qubit program; qubit ``l-1`` of ``state`` holds angle ``2**(l-1)*alpha``."""

    n: int
    alpha: float
    state: StateVector

    def __post_init__(self):
        if self.state.num_qubits != self.n:
            raise ValidationError(f"program state has {self.state.num_qubits} qubits, expected {self.n}")


def _check_n(n: int, limit: int = MAX_PROGRAM_QUBITS) -> int:
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)):
        raise ValidationError(f"program size must be an integer, got {n!r}")
    if not 1 <= n <= limit:
        raise CapacityError(f"program size {n} outside [1, {limit}]")
    return int(n)


def program_angles(alpha: float, n: int) -> list[float]:
    return [math.ldexp(alpha, l) for l in range(n)]


def encode_program(alpha: float, n: int) -> ProgramRegister:
    """|α> ⊗ |2α> ⊗ ... ⊗ |2^{n-1}α>, with α reduced to [0, 2π) first."""
    n = _check_n(n)
    a = canonical_angle(alpha)
    h = np.exp(0.5j * np.ldexp(a, np.arange(n))) / math.sqrt(2.0)
    # qubit l is bit l of the index, so each new qubit doubles the vector
    amps = np.ones(1, dtype=complex)
    for x in h.tolist():
        amps = np.concatenate((amps * x, amps * x.conjugate()))
    return ProgramRegister(n, a, StateVector._wrap(amps))


def twirl_program(p: ProgramRegister, alpha0: float) -> ProgramRegister:
    """Apply U_{α0} ⊗ U_{α0}^2 ⊗ ... ⊗ U_{α0}^{2^{N-1}} to the program.

    Maps ``encode_program(α, N)`` to ``encode_program(α+α0, N)`` up to a
    global sign.
    """
    state = p.state
    for q, theta in enumerate(program_angles(alpha0, p.n)):
        state = apply_single(rotation_z(theta), q, state)
    return ProgramRegister(p.n, canonical_angle(p.alpha + alpha0), state)


def _check_data(d: StateVector) -> None:
    if d.num_qubits != 1:
        raise ValidationError(f"data register must be one qubit, got {d.num_qubits}")


def cascade(data: StateVector, program: ProgramRegister) -> StateVector:
    """Coherent retrieval circuit on data (qubit 0) and program (qubits 1..N).

    Gate ``l`` is an X on program qubit ``l`` controlled by the data qubit and
    program qubits ``1..l-1``: a CNOT for ``l = 1``, a Toffoli for ``l = 2``.
    """
    _check_data(data)
    joint = tensor(data, program.state)
    for l in range(1, program.n + 1):
        joint = apply_mcx(list(range(l)), l, joint)
    return joint


def failure_bits(n: int) -> str:
    return "1" * n


@dataclass(frozen=True)
class CascadeOutcome:
    bits: str
    prob: float
    collapsed_data: StateVector
    success: bool


def _data_given(joint: StateVector, bits: str) -> StateVector:
    # data is qubit 0, so the slice is the adjacent amplitude pair at the
    # index where program qubit l carries bits[l-1]
    base = int(bits[::-1], 2) << 1
    a0, a1 = joint.amplitudes[base : base + 2].tolist()
    nrm = math.sqrt(abs(a0) ** 2 + abs(a1) ** 2)
    if nrm < 1e-7:
        raise ConsistencyError(f"program outcome {bits} has zero weight")
    return StateVector._wrap(np.array([a0 / nrm, a1 / nrm]))


def classify_and_collapse(joint: StateVector, n: int, random_draw: float) -> CascadeOutcome:
    """Measure the program qubits of a cascade output and read off the data qubit.

    The run failed iff every program qubit reads 1.
    """
    if joint.num_qubits != n + 1:
        raise ValidationError(f"joint state has {joint.num_qubits} qubits, expected {n + 1}")
    # Sampling from the Born distribution and slicing the uncollapsed joint
    # state gives the same data state as measure_subset followed by a slice.
    probs = branch_probabilities(joint, range(1, n + 1))
    label = sample_outcome(probs, random_draw)
    bits = format(label, f"0{n}b")
    return CascadeOutcome(bits, float(probs[label]), _data_given(joint, bits), bits != failure_bits(n))


def coherent_branches(data: StateVector, program: ProgramRegister) -> list[tuple[str, float, StateVector]]:
    """Exact (bits, probability, data state) for every outcome of the cascade."""
    joint = cascade(data, program)
    return [
        (bits, prob, _data_given(collapsed, bits))
        for bits, prob, collapsed in enumerate_branches(joint, range(1, program.n + 1))
    ]


def success_probability(data: StateVector, program: ProgramRegister) -> float:
    """Total weight of the heralded-success outcomes of the cascade."""
    probs = branch_probabilities(cascade(data, program), range(1, program.n + 1))
    return float(math.fsum(probs[:-1]))


def sequential_branches(data: StateVector, program: ProgramRegister) -> list[tuple[str, float, StateVector]]:
    """Exact branches of the measure-after-each-step variant of the gate.

    Step ``l`` applies a CNOT from the data qubit to program qubit ``l`` and
    measures that qubit; the next step runs only if it read 1. Program qubits
    left unused after a success are measured at the end so outcomes can be
    compared bit for bit with :func:`coherent_branches`.
    """
    _check_data(data)
    n = program.n
    out: list[tuple[str, float, StateVector]] = []
    # frontier: (bits so far, probability, joint state)
    frontier = [("", 1.0, tensor(data, program.state))]
    for l in range(1, n + 1):
        nxt = []
        for prefix, p, joint in frontier:
            joint = apply_mcx([0], l, joint)
            for b, pb, collapsed in enumerate_branches(joint, [l]):
                bits = prefix + b
                if b == "1" and l < n:
                    nxt.append((bits, p * pb, collapsed))
                    continue
                rest = list(range(l + 1, n + 1))
                tail = enumerate_branches(collapsed, rest) if rest else [("", 1.0, collapsed)]
                for tb, pt, final in tail:
                    full = bits + tb
                    out.append((full, p * pb * pt, _data_given(final, full)))
        frontier = nxt
    out.sort(key=lambda br: br[0])
    return out


def _seeded(seed):
    # integer seeds get a fresh generator; anything with .random() is used as is
    if hasattr(seed, "random"):
        return seed
    return np.random.default_rng(seed)


def run_once(d: StateVector, alpha: float, n: int, seed) -> CascadeOutcome:
    """Encode, run the cascade and measure, with the draw taken from ``seed``."""
    _check_data(d)
    program = encode_program(alpha, n)
    return classify_and_collapse(cascade(d, program), program.n, _seeded(seed).random())


@dataclass(frozen=True)
class AdaptiveRunStats:
    attempts: int
    program_qubits_consumed: int
    final_data: StateVector
    succeeded: bool


def run_adaptive(
    d: StateVector, alpha: float, seed, max_attempts: int = DEFAULT_MAX_ATTEMPTS
) -> AdaptiveRunStats:
    """Retry the one-qubit gate with fresh programs until it succeeds.

    Attempt ``l`` uses the program ``|2^{l-1} α>``; a failure leaves the data
    in ``U_α^{(2^l - 1)†}|d>``, which the next attempt corrects. If
    ``max_attempts`` are exhausted the residual state is returned with
    ``succeeded=False``.
    """
    _check_data(d)
    if max_attempts < 1:
        raise ValidationError(f"max_attempts must be >= 1, got {max_attempts}")
    rng = _seeded(seed)
    a = canonical_angle(alpha)
    current = d
    for attempt in range(1, max_attempts + 1):
        theta = math.ldexp(a, attempt - 1)
        program = ProgramRegister(1, canonical_angle(theta), _equatorial(theta))
        outcome = classify_and_collapse(cascade(current, program), 1, rng.random())
        current = outcome.collapsed_data
        if outcome.success:
            return AdaptiveRunStats(attempt, attempt, current, True)
    return AdaptiveRunStats(max_attempts, max_attempts, current, False)
