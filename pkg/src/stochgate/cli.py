"""Command-line front end: ``stochgate <command> [options]``.

Commands
--------
simulate    Monte Carlo of the N-qubit cascade (encode, retrieve, measure).
exact       Exact success probability and per-outcome table.
adaptive    Monte Carlo of the retry-until-success one-qubit scheme.
optimal1q   Best average success of any one-qubit programmable gate.
bound       Overlap bound sweep over δ and the implied success ceiling.
entropy     Deviation of the averaged program projector from I/2^n.
remote      Remote application of an SU(2) target; ebit/cbit accounting.
avg-length  Mean program length of the retry scheme.

Output is JSON (default, stable key order) or CSV on stdout, or in the file
given by ``--out``. Exit codes: 0 ok, 1 usage, 2 validation, 3 capacity.
Reports are deterministic for fixed arguments apart from the
``duration_seconds`` field of JSON output.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from importlib import resources
from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__
from .analysis import (
    bound_product,
    branch_table,
    exact_success_probability,
    expected_program_length,
    feasibility_margin,
    program_density_average,
    program_length_tail,
    retrieval_bound,
    single_qubit_max_avg,
)
from .errors import CapacityError, StochGateError
from .montecarlo import (
    MAX_MASTER_SEED,
    simulate_adaptive_batch,
    simulate_once_batch,
    simulate_remote_batch,
)
from .protocol import DEFAULT_MAX_ATTEMPTS, MAX_PROGRAM_QUBITS, canonical_angle
from .remote import euler_zxz, expected_resources, haar_unitary
from .statevec import H, I2, X, bloch_state

SCHEMA_VERSION = "1.0"
COMMANDS = ("simulate", "exact", "adaptive", "optimal1q", "bound", "entropy", "remote", "avg-length")
DEFAULT_ALPHA = math.pi / 4
DEFAULT_SEED = 0

EXIT_OK, EXIT_USAGE, EXIT_VALIDATION, EXIT_CAPACITY = 0, 1, 2, 3

TARGETS = {"identity": I2, "hadamard": H, "x": X}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}")


def _finite(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"malformed number {text!r}") from None
    if not math.isfinite(v):
        raise argparse.ArgumentTypeError(f"value must be finite, got {text!r}")
    return v


def _int_in(lo: int, hi: int):
    def parse(text: str) -> int:
        try:
            v = int(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"malformed integer {text!r}") from None
        if not lo <= v <= hi:
            raise argparse.ArgumentTypeError(f"{v} outside [{lo}, {hi}]")
        return v

    return parse


@dataclass(frozen=True)
class RunConfig:
    command: str
    alpha: float = DEFAULT_ALPHA
    n: int = 3
    trials: int = 10_000
    seed: int = DEFAULT_SEED
    data_theta: float = 1.0
    data_phi: float = 0.5
    format: str = "json"
    out: str | None = None
    workers: int = 1
    max_attempts: int = DEFAULT_MAX_ATTEMPTS
    points: int = 1000
    grid_points: int | None = None
    max_terms: int = 60
    target: str = "random"
    target_seed: int = 0

    def echo(self) -> dict:
        # output sink and parallelism do not affect the payload
        d = asdict(self)
        for k in ("out", "workers"):
            d.pop(k)
        return d


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--alpha", type=_finite, default=DEFAULT_ALPHA, help="rotation angle in radians")
    common.add_argument("--n", type=_int_in(1, MAX_PROGRAM_QUBITS), default=3, help="program qubits")
    common.add_argument("--trials", type=_int_in(1, 10**9), default=10_000)
    common.add_argument("--seed", type=_int_in(0, MAX_MASTER_SEED), default=DEFAULT_SEED)
    common.add_argument("--data-theta", type=_finite, default=1.0, help="data state polar angle")
    common.add_argument("--data-phi", type=_finite, default=0.5, help="data state azimuth")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--out", default=None, help="write the report here instead of stdout")
    common.add_argument("--workers", type=_int_in(1, 256), default=1)

    parser = _Parser(prog="stochgate", description="Stochastic programmable gate for z-rotations.")
    parser.add_argument("--version", action="version", version=f"stochgate {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        p = sub.add_parser(name, parents=[common])
        if name in ("adaptive", "remote"):
            p.add_argument("--max-attempts", type=_int_in(1, 1024), default=DEFAULT_MAX_ATTEMPTS)
        if name == "bound":
            p.add_argument("--points", type=_int_in(2, 1_000_000), default=1000, help="sweep grid size over [0, 2π]")
        if name == "entropy":
            p.add_argument("--grid-points", type=_int_in(1, 1 << 22), default=None)
        if name == "avg-length":
            p.add_argument("--max-terms", type=_int_in(1, 10_000), default=60)
        if name == "remote":
            p.add_argument("--target", choices=("random", *TARGETS), default="random")
            p.add_argument("--target-seed", type=_int_in(0, MAX_MASTER_SEED), default=0)
    return parser


def parse_args(argv: list[str]) -> RunConfig:
    ns = build_parser().parse_args(argv)
    fields = {k: v for k, v in vars(ns).items()}
    return RunConfig(**fields)


@dataclass
class RunReport:
    command: str
    config: dict
    results: dict
    tables: dict = field(default_factory=dict)
    csv_table: str | None = None
    csv_columns: list[str] | None = None
    duration_seconds: float = 0.0

    def payload(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "command": self.command,
            "config": self.config,
            "results": self.results,
            "tables": self.tables,
        }


def _table(columns: list[str], rows: list[list]) -> dict:
    return {"columns": columns, "rows": rows}


def _target_matrix(cfg: RunConfig) -> np.ndarray:
    if cfg.target == "random":
        return haar_unitary(np.random.default_rng(cfg.target_seed))
    return TARGETS[cfg.target]


def _z(mean: float, expected: float, se: float) -> float | None:
    return None if se == 0 or not math.isfinite(se) else (mean - expected) / se


def _simulate(cfg: RunConfig, d) -> RunReport:
    alpha = canonical_angle(cfg.alpha)
    st = simulate_once_batch(d, alpha, cfg.n, cfg.seed, cfg.trials, cfg.workers)
    expected = 1 - 2.0**-cfg.n
    results = {
        "n": cfg.n,
        "alpha": alpha,
        "trials": st.trials,
        "successes": st.successes,
        "success_frequency": st.frequency,
        "std_error": st.std_error,
        "expected_success_probability": expected,
        "z_score": _z(st.frequency, expected, st.std_error),
        "min_success_fidelity": st.min_success_fidelity,
    }
    rows = [[b, st.outcomes[b]] for b in sorted(st.outcomes)]
    return RunReport("simulate", cfg.echo(), results, {"outcomes": _table(["bits", "count"], rows)})


def _exact(cfg: RunConfig, d) -> RunReport:
    alpha = canonical_angle(cfg.alpha)
    p = exact_success_probability(alpha, cfg.n, d)
    rows = branch_table(alpha, cfg.n, d)
    results = {
        "n": cfg.n,
        "alpha": alpha,
        "success_probability": p,
        "failure_probability": 1 - p,
        "expected_success_probability": 1 - 2.0**-cfg.n,
    }
    cols = ["bits", "probability", "success", "fidelity_with_target"]
    table = _table(cols, [[r[c] for c in cols] for r in rows])
    report = RunReport("exact", cfg.echo(), results, {"branches": table})
    report.csv_columns = ["n", "alpha", "success_probability"]
    return report


def _adaptive(cfg: RunConfig, d) -> RunReport:
    alpha = canonical_angle(cfg.alpha)
    st = simulate_adaptive_batch(d, alpha, cfg.seed, cfg.trials, cfg.max_attempts, cfg.workers)
    mean, se = st.attempts.mean, st.attempts.std_error
    results = {
        "alpha": alpha,
        "trials": st.attempts.count,
        "mean_attempts": mean,
        "std_error": se,
        "expected_length": expected_program_length(),
        "z_score": _z(mean, 2.0, se),
        "failures": st.failures,
        "max_attempts_observed": max(st.histogram),
        "min_success_fidelity": st.min_success_fidelity,
    }
    rows = [[k, st.histogram[k]] for k in sorted(st.histogram)]
    report = RunReport("adaptive", cfg.echo(), results, {"attempts": _table(["attempts", "count"], rows)})
    report.csv_table = "attempts"
    return report


def _optimal1q(cfg: RunConfig, d) -> RunReport:
    best, value = single_qubit_max_avg()
    results = {
        "p0": best.p0,
        "p_pi": best.p_pi,
        "overlap_re": best.overlap_re,
        "max_avg_probability": value,
        "feasibility_margin": feasibility_margin(best.p0, best.p_pi),
    }
    return RunReport("optimal1q", cfg.echo(), results)


def _bound(cfg: RunConfig, d) -> RunReport:
    deltas = 2 * math.pi * np.arange(cfg.points) / (cfg.points - 1)
    values = bound_product(deltas, cfg.n)
    ceiling = retrieval_bound(cfg.n)
    results = {"n": cfg.n, "retrieval_bound": ceiling, "max_bound_product": 1 - ceiling}
    if cfg.n <= 16:
        achieved = exact_success_probability(cfg.alpha, cfg.n, d)
        results["exact_success_probability"] = achieved
        results["gap"] = ceiling - achieved
    rows = [[float(x), float(v)] for x, v in zip(deltas, values)]
    report = RunReport("bound", cfg.echo(), results, {"sweep": _table(["delta", "bound_product"], rows)})
    report.csv_table = "sweep"
    return report


def _entropy(cfg: RunConfig, d) -> RunReport:
    rho = program_density_average(cfg.n, cfg.grid_points)
    results = {
        "n": cfg.n,
        "grid_points": cfg.grid_points or (1 << (cfg.n + 2)),
        "max_deviation": rho.max_deviation_from_mixed(),
        "entropy_bits": rho.entropy_bits(),
        "trace": float(np.trace(rho.matrix).real),
    }
    return RunReport("entropy", cfg.echo(), results)


def _remote(cfg: RunConfig, d) -> RunReport:
    u = _target_matrix(cfg)
    dec = euler_zxz(u)
    st = simulate_remote_batch(u, d, cfg.seed, cfg.trials, cfg.max_attempts, cfg.workers)
    exp_e, exp_c = expected_resources()
    results = {
        "target_re": u.real.tolist(),
        "target_im": u.imag.tolist(),
        "decomposition": {"global_phase": dec.global_phase, "a": dec.a, "b": dec.b, "c": dec.c},
        "trials": st.ebits.count,
        "successes": st.successes,
        "mean_ebits": st.ebits.mean,
        "ebits_std_error": st.ebits.std_error,
        "mean_cbits": st.cbits.mean,
        "cbits_std_error": st.cbits.std_error,
        "expected_ebits": exp_e,
        "expected_cbits": exp_c,
        "min_success_fidelity": st.min_success_fidelity,
    }
    return RunReport("remote", cfg.echo(), results)


def _avg_length(cfg: RunConfig, d) -> RunReport:
    rows = [[k, expected_program_length(k)] for k in range(1, cfg.max_terms + 1)]
    results = {
        "max_terms": cfg.max_terms,
        "expected_length": expected_program_length(cfg.max_terms),
        "tail_bound": program_length_tail(cfg.max_terms),
    }
    report = RunReport("avg-length", cfg.echo(), results, {"partial_sums": _table(["terms", "partial_sum"], rows)})
    report.csv_table = "partial_sums"
    return report


DISPATCH = {
    "simulate": _simulate,
    "exact": _exact,
    "adaptive": _adaptive,
    "optimal1q": _optimal1q,
    "bound": _bound,
    "entropy": _entropy,
    "remote": _remote,
    "avg-length": _avg_length,
}


def execute(cfg: RunConfig) -> RunReport:
    t0 = time.perf_counter()
    d = bloch_state(cfg.data_theta, cfg.data_phi)
    report = DISPATCH[cfg.command](cfg, d)
    report.duration_seconds = time.perf_counter() - t0
    return report


def load_schema() -> dict:
    """JSON schema that every report of the current ``SCHEMA_VERSION`` satisfies."""
    text = resources.files(__package__).joinpath(f"schemas/report-{SCHEMA_VERSION}.json").read_text("utf-8")
    return json.loads(text)


def _csv_cell(v) -> str:
    if isinstance(v, float):
        return repr(v)  # shortest round-trip form
    if isinstance(v, bool):
        return "true" if v else "false"
    return str(v)


def render(report: RunReport, fmt: str = "json") -> str:
    if fmt == "json":
        doc = report.payload()
        doc["duration_seconds"] = report.duration_seconds
        return json.dumps(doc, sort_keys=True, indent=2) + "\n"
    if fmt != "csv":
        raise ValueError(f"unknown format {fmt!r}")
    if report.csv_table is not None:
        t = report.tables[report.csv_table]
        columns, rows = t["columns"], t["rows"]
    else:
        columns = report.csv_columns or [
            k for k, v in report.results.items() if v is None or isinstance(v, (int, float, bool))
        ]
        rows = [[report.results[k] for k in columns]]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow(["" if v is None else _csv_cell(v) for v in row])
    return buf.getvalue()


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        cfg = parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    try:
        text = render(execute(cfg), cfg.format)
    except CapacityError as exc:
        print(f"stochgate: capacity error: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except (StochGateError, ValueError) as exc:
        print(f"stochgate: validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
