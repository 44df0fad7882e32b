"""
Remote execution of an arbitrary one-qubit unitary from stored rotations.

Alice writes each of three z-rotation angles into equatorial program qubits
and teleports them to Bob; Bob runs the retry-until-success gate on his data
qubit and applies the fixed Hadamards himself. Teleportation is modelled
only by its cost: one ebit and one classical bit per program qubit.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.stats import unitary_group

from .analysis import expected_program_length
from .protocol import DEFAULT_MAX_ATTEMPTS, TWO_PI, _seeded, canonical_angle, rotation_z, run_adaptive
from .statevec import H, StateVector, apply_single, as_unitary2

DEGENERATE_TOL = 1e-12


@dataclass(frozen=True)
class SU2Decomposition:
    """u = e^{i global_phase} Rz(a) H Rz(b) H Rz(c) with Rz = rotation_z."""

    global_phase: float
    a: float
    b: float
    c: float

    def matrix(self) -> np.ndarray:
        core = rotation_z(self.a) @ H @ rotation_z(self.b) @ H @ rotation_z(self.c)
        return np.exp(1j * self.global_phase) * core

    @property
    def rotations(self) -> tuple[float, float, float]:
        """Angles in the order they act on the data: c first, a last."""
        return self.c, self.b, self.a


def euler_zxz(u) -> SU2Decomposition:
    """Split a 2x2 unitary into z, x (as H Rz H) and z rotations.

    Branches: b in [0, π], a and c in [0, 2π). When b is 0 or π the split is
    not unique and c is set to 0.
    """
    m = as_unitary2(u)
    # remove det phase: v in SU(2), v = [[x, y], [-y*, x*]]
    v = m / np.sqrt(np.linalg.det(m))
    x, y = v[0, 0], v[0, 1]
    b = 2.0 * math.atan2(abs(y), abs(x))
    if abs(y) <= DEGENERATE_TOL:
        b, a, c = 0.0, 2.0 * np.angle(x), 0.0
    elif abs(x) <= DEGENERATE_TOL:
        b, a, c = math.pi, 2.0 * (np.angle(y) - math.pi / 2), 0.0
    else:
        a = np.angle(x) + np.angle(y) - math.pi / 2
        c = np.angle(x) - np.angle(y) + math.pi / 2
    a, c = canonical_angle(float(a)), canonical_angle(float(c))
    core = rotation_z(a) @ H @ rotation_z(b) @ H @ rotation_z(c)
    # the leftover phase also absorbs the sign flips from reducing a and c
    phase = float(np.angle(np.vdot(core, m)))
    return SU2Decomposition(phase % TWO_PI, a, b, c)


@dataclass(frozen=True)
class ResourceTally:
    ebits: int = 0
    cbits: int = 0
    program_qubits: int = 0

    def __add__(self, other: "ResourceTally") -> "ResourceTally":
        return ResourceTally(
            self.ebits + other.ebits,
            self.cbits + other.cbits,
            self.program_qubits + other.program_qubits,
        )

    @classmethod
    def for_program_qubits(cls, k: int) -> "ResourceTally":
        # one teleported equatorial qubit costs one ebit and one classical bit
        return cls(k, k, k)


class RemoteRun(NamedTuple):
    final: StateVector
    tally: ResourceTally
    succeeded: bool


def simulate_remote(u, d: StateVector, seed, max_attempts: int = DEFAULT_MAX_ATTEMPTS) -> RemoteRun:
    """Apply ``u`` to Bob's qubit ``d`` using only stored z-rotations.

    Every rotation runs at least one attempt, even at angle 0. On success
    ``final`` equals ``u|d>`` up to the decomposition's global phase.
    """
    dec = euler_zxz(u)
    rng = _seeded(seed)
    state = d
    tally = ResourceTally()
    for k, angle in enumerate(dec.rotations):
        if k:
            state = apply_single(H, 0, state)
        run = run_adaptive(state, angle, rng, max_attempts)
        tally = tally + ResourceTally.for_program_qubits(run.program_qubits_consumed)
        state = run.final_data
        if not run.succeeded:
            return RemoteRun(state, tally, False)
    return RemoteRun(state, tally, True)


def expected_resources(rotations: int = 3, max_terms: int = 60) -> tuple[float, float]:
    """Mean (ebits, cbits) to remotely apply ``rotations`` stored z-rotations."""
    mean_len = expected_program_length(max_terms)
    return rotations * mean_len, rotations * mean_len


def haar_unitary(rng) -> np.ndarray:
    """Haar-random 2x2 unitary."""
    return unitary_group.rvs(2, random_state=_seeded(rng))
