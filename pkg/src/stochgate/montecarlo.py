"""
Seeded Monte Carlo drivers over many independent protocol runs.

Trial ``i`` of a batch with master seed ``s`` always uses the generator
seeded with :func:`trial_seed` ``(s, i)``, and chunk results are merged with
integer sums and minima only, so the aggregate does not depend on how trials
are split across worker processes.
"""
from __future__ import annotations

import math
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .protocol import rotation_z, run_adaptive, run_once
from .remote import simulate_remote
from .statevec import StateVector, fidelity_up_to_phase

MAX_MASTER_SEED = (1 << 31) - 1
MAX_TRIALS = 1 << 32


def trial_seed(master: int, index: int) -> int:
    if not 0 <= master <= MAX_MASTER_SEED:
        raise ValueError(f"master seed must lie in [0, {MAX_MASTER_SEED}]")
    if not 0 <= index < MAX_TRIALS:
        raise ValueError(f"trial index {index} out of range")
    return (master << 32) | index


@dataclass
class Moments:
    """Running count, sum and sum of squares of integer observations."""

    count: int = 0
    total: int = 0
    total_sq: int = 0

    def add(self, x: int) -> None:
        self.count += 1
        self.total += x
        self.total_sq += x * x

    def merge(self, other: "Moments") -> "Moments":
        return Moments(self.count + other.count, self.total + other.total, self.total_sq + other.total_sq)

    @property
    def mean(self) -> float:
        return self.total / self.count

    @property
    def std_error(self) -> float:
        if self.count < 2:
            return math.inf
        var = (self.total_sq - self.total * self.total / self.count) / (self.count - 1)
        return math.sqrt(max(var, 0.0) / self.count)


@dataclass
class OnceStats:
    trials: int = 0
    successes: int = 0
    outcomes: Counter = field(default_factory=Counter)
    min_success_fidelity: float = 1.0

    def merge(self, other: "OnceStats") -> "OnceStats":
        return OnceStats(
            self.trials + other.trials,
            self.successes + other.successes,
            self.outcomes + other.outcomes,
            min(self.min_success_fidelity, other.min_success_fidelity),
        )

    @property
    def frequency(self) -> float:
        return self.successes / self.trials

    @property
    def std_error(self) -> float:
        f = self.frequency
        return math.sqrt(f * (1 - f) / self.trials)


@dataclass
class AdaptiveStats:
    attempts: Moments = field(default_factory=Moments)
    histogram: Counter = field(default_factory=Counter)
    failures: int = 0
    min_success_fidelity: float = 1.0

    def merge(self, other: "AdaptiveStats") -> "AdaptiveStats":
        return AdaptiveStats(
            self.attempts.merge(other.attempts),
            self.histogram + other.histogram,
            self.failures + other.failures,
            min(self.min_success_fidelity, other.min_success_fidelity),
        )


@dataclass
class RemoteStats:
    ebits: Moments = field(default_factory=Moments)
    cbits: Moments = field(default_factory=Moments)
    successes: int = 0
    min_success_fidelity: float = 1.0

    def merge(self, other: "RemoteStats") -> "RemoteStats":
        return RemoteStats(
            self.ebits.merge(other.ebits),
            self.cbits.merge(other.cbits),
            self.successes + other.successes,
            min(self.min_success_fidelity, other.min_success_fidelity),
        )


def _once_chunk(args) -> OnceStats:
    amps, alpha, n, seed, start, stop = args
    d = StateVector(amps)
    target = StateVector._wrap(rotation_z(alpha) @ d.amplitudes)
    st = OnceStats()
    for i in range(start, stop):
        out = run_once(d, alpha, n, trial_seed(seed, i))
        st.trials += 1
        st.outcomes[out.bits] += 1
        if out.success:
            st.successes += 1
            st.min_success_fidelity = min(st.min_success_fidelity, fidelity_up_to_phase(out.collapsed_data, target))
    return st


def _adaptive_chunk(args) -> AdaptiveStats:
    amps, alpha, max_attempts, seed, start, stop = args
    d = StateVector(amps)
    target = StateVector._wrap(rotation_z(alpha) @ d.amplitudes)
    st = AdaptiveStats()
    for i in range(start, stop):
        run = run_adaptive(d, alpha, trial_seed(seed, i), max_attempts)
        st.attempts.add(run.attempts)
        st.histogram[run.attempts] += 1
        if run.succeeded:
            st.min_success_fidelity = min(st.min_success_fidelity, fidelity_up_to_phase(run.final_data, target))
        else:
            st.failures += 1
    return st


def _remote_chunk(args) -> RemoteStats:
    u, amps, max_attempts, seed, start, stop = args
    d = StateVector(amps)
    target = StateVector._wrap(np.asarray(u) @ d.amplitudes)
    st = RemoteStats()
    for i in range(start, stop):
        run = simulate_remote(u, d, trial_seed(seed, i), max_attempts)
        st.ebits.add(run.tally.ebits)
        st.cbits.add(run.tally.cbits)
        if run.succeeded:
            st.successes += 1
            st.min_success_fidelity = min(st.min_success_fidelity, fidelity_up_to_phase(run.final, target))
    return st


def _run(fn, head: tuple, seed: int, trials: int, workers: int):
    if trials < 1:
        raise ValueError("trials must be >= 1")
    workers = max(1, min(workers, trials))
    bounds = np.linspace(0, trials, workers + 1).astype(int)
    jobs = [(*head, seed, int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:])]
    if workers == 1:
        parts = [fn(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(fn, jobs))
    out = parts[0]
    for p in parts[1:]:
        out = out.merge(p)
    return out


def simulate_once_batch(d: StateVector, alpha: float, n: int, seed: int, trials: int, workers: int = 1) -> OnceStats:
    return _run(_once_chunk, (d.amplitudes, alpha, n), seed, trials, workers)


def simulate_adaptive_batch(
    d: StateVector, alpha: float, seed: int, trials: int, max_attempts: int = 64, workers: int = 1
) -> AdaptiveStats:
    return _run(_adaptive_chunk, (d.amplitudes, alpha, max_attempts), seed, trials, workers)


def simulate_remote_batch(
    u, d: StateVector, seed: int, trials: int, max_attempts: int = 64, workers: int = 1
) -> RemoteStats:
    return _run(_remote_chunk, (np.asarray(u, dtype=complex), d.amplitudes, max_attempts), seed, trials, workers)
