"""Type I error experiment engine: runs (scenario x n x test) grids with
deterministic parallelism and emits rejection-rate summaries.

Reproducibility contract (frozen):
  * replicate rep of cell (scenario, n) draws its sample from the stream
    derive_stream(master_seed, spec.stream_code, n, rep);
  * a permutation test inside that replicate uses the seed
    derive_test_seed(master_seed, stream, method), a splitmix64 mix;
  * every test in a cell row consumes the same replicate samples, so
    cross-test comparisons are seed-matched;
  * replicates are the unit of parallelism and rejection counting is
    order-independent, so results do not depend on the worker count.
"""

import csv
import io
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from spearperm.core import DegenerateSampleError, InvalidInputError
from spearperm.hypotests import Alternative, Method, _as_alternative, _as_method, run_test
from spearperm.scenarios import RngState, ScenarioSpec, sample_scenario

__all__ = [
    "PRESETS",
    "GridConfig",
    "SimulationSummary",
    "derive_stream",
    "derive_test_seed",
    "estimate_type1_error",
    "run_grid",
    "summaries_to_csv",
    "summaries_to_json",
    "plot_series",
    "plot_series_to_csv",
]

CSV_COLUMNS = ("scenario", "n", "method", "alpha", "reps", "B",
               "rejection_rate", "mc_se", "seed")

# replicate counts and permutation counts: full-scale study vs CI-speed runs
PRESETS = {
    "paper": {"reps": 10_000, "permutations": 1_000},
    "desk": {"reps": 2_000, "permutations": 500},
}

_MASK64 = 2**64 - 1

# frozen method codes for seed derivation; independent of grid composition
_METHOD_CODES = {
    Method.T: 1,
    Method.FISHER_Z: 2,
    Method.FISHER_YATES: 3,
    Method.ASYMP_NORM: 4,
    Method.PERMUTE: 5,
    Method.STU_PERMUTE: 6,
}


@dataclass(frozen=True)
class GridConfig:
    """One experiment grid: every (scenario, n, test) cell is simulated."""

    scenarios: tuple
    sample_sizes: tuple
    tests: tuple
    alpha: float = 0.05
    reps: int = PRESETS["paper"]["reps"]
    permutations: int = PRESETS["paper"]["permutations"]
    master_seed: int = 0
    alternative: Alternative = Alternative.GREATER
    add_one_correction: bool = False

    def __post_init__(self):
        object.__setattr__(self, "scenarios", tuple(self.scenarios))
        object.__setattr__(self, "sample_sizes", tuple(int(n) for n in self.sample_sizes))
        object.__setattr__(self, "tests", tuple(_as_method(m) for m in self.tests))
        object.__setattr__(self, "alternative", _as_alternative(self.alternative))
        if not self.scenarios or not self.sample_sizes or not self.tests:
            raise InvalidInputError("grid needs scenarios, sample sizes and tests")
        if not 0.0 < self.alpha < 1.0:
            raise InvalidInputError(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.reps < 1:
            raise InvalidInputError("reps must be >= 1")
        if self.permutations < 1:
            raise InvalidInputError("permutation count must be >= 1")


@dataclass(frozen=True)
class SimulationSummary:
    """Rejection-rate estimate for one (scenario, n, method) cell."""

    scenario: str
    n: int
    method: Method
    alpha: float
    reps: int
    permutations: int
    rejection_rate: float
    mc_se: float
    seed: int
    degenerate_count: int = 0

    def csv_row(self):
        return (
            self.scenario,
            str(self.n),
            self.method.value,
            repr(self.alpha),
            str(self.reps),
            str(self.permutations),
            repr(self.rejection_rate),
            repr(self.mc_se),
            str(self.seed),
        )


def derive_stream(master_seed, scenario_idx, n_idx, rep_idx) -> RngState:
    """Map (master seed, scenario index, n index, replicate index) to the
    replicate's (seed, stream) pair.

    Frozen encoding: stream = scenario_idx << 48 | n_idx << 32 | rep_idx,
    injective for scenario_idx, n_idx < 2**16 and rep_idx < 2**32. The
    harness passes the scenario's stream_code and the raw sample size n, so
    a cell's streams do not depend on grid composition.
    """
    for name, value, bound in (
        ("scenario_idx", scenario_idx, 2**16),
        ("n_idx", n_idx, 2**16),
        ("rep_idx", rep_idx, 2**32),
    ):
        if not 0 <= value < bound:
            raise InvalidInputError(f"{name} must lie in [0, {bound}), got {value}")
    stream = (scenario_idx << 48) | (n_idx << 32) | rep_idx
    return RngState(seed=master_seed, stream=stream)


def _mix64(z):
    """splitmix64 finalizer; the frozen scrambler behind derive_test_seed."""
    z = (z + 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def derive_test_seed(master_seed, stream, method) -> int:
    """Permutation seed for one test inside one replicate; depends only on
    (master_seed, stream, method), never on which other tests run."""
    method = _as_method(method)
    return _mix64(_mix64(master_seed ^ _mix64(stream)) ^ _METHOD_CODES[method])


def _replicate_chunk(args):
    """Run replicates rep_lo..rep_hi-1 of one cell row; returns per-method
    (rejections, degenerates) counts. Module-level so it pickles."""
    (spec, n, methods, alpha, rep_lo, rep_hi, permutations, master_seed,
     alternative, add_one) = args
    rejections = [0] * len(methods)
    degenerates = [0] * len(methods)
    code = spec.stream_code
    for rep in range(rep_lo, rep_hi):
        state = derive_stream(master_seed, code, n, rep)
        sample = sample_scenario(spec, n, state)
        for i, method in enumerate(methods):
            seed = derive_test_seed(master_seed, state.stream, method)
            try:
                result = run_test(
                    method, sample, alternative, permutations, seed, add_one
                )
            except DegenerateSampleError:
                # tied-constant margin: count as a non-rejection, keep tally
                degenerates[i] += 1
                continue
            if result.p_value < alpha:
                rejections[i] += 1
    return rejections, degenerates


def _row_counts(spec, n, methods, alpha, reps, permutations, master_seed,
                alternative, add_one, workers):
    """Rejection and degenerate counts per method for one (scenario, n) row."""
    if workers is None:
        workers = os.cpu_count() or 1
    workers = max(1, int(workers))
    chunk = max(1, math.ceil(reps / (workers * 4)))
    tasks = [
        (spec, n, methods, alpha, lo, min(lo + chunk, reps), permutations,
         master_seed, alternative, add_one)
        for lo in range(0, reps, chunk)
    ]
    if workers == 1 or len(tasks) == 1:
        partials = [_replicate_chunk(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            partials = list(pool.map(_replicate_chunk, tasks))
    rejections = [0] * len(methods)
    degenerates = [0] * len(methods)
    for rej, deg in partials:
        for i in range(len(methods)):
            rejections[i] += rej[i]
            degenerates[i] += deg[i]
    return rejections, degenerates


def _summaries_for_row(spec, n, methods, alpha, reps, permutations, master_seed,
                       alternative, add_one, workers):
    rejections, degenerates = _row_counts(
        spec, n, methods, alpha, reps, permutations, master_seed, alternative,
        add_one, workers
    )
    out = []
    for method, rej, deg in zip(methods, rejections, degenerates):
        rate = rej / reps
        out.append(
            SimulationSummary(
                scenario=spec.scenario_id,
                n=n,
                method=method,
                alpha=alpha,
                reps=reps,
                permutations=permutations,
                rejection_rate=rate,
                mc_se=math.sqrt(rate * (1.0 - rate) / reps),
                seed=master_seed,
                degenerate_count=deg,
            )
        )
    return out


def estimate_type1_error(
    spec: ScenarioSpec,
    n: int,
    method,
    alpha: float = 0.05,
    reps: int = PRESETS["paper"]["reps"],
    permutations: int = PRESETS["paper"]["permutations"],
    master_seed: int = 0,
    alternative="greater",
    add_one_correction: bool = False,
    workers=None,
) -> SimulationSummary:
    """Rejection rate of one test under one null scenario at one sample size,
    over `reps` independent replicates."""
    config = GridConfig(
        scenarios=(spec,),
        sample_sizes=(n,),
        tests=(method,),
        alpha=alpha,
        reps=reps,
        permutations=permutations,
        master_seed=master_seed,
        alternative=alternative,
        add_one_correction=add_one_correction,
    )
    return run_grid(config, workers=workers)[0]


def run_grid(config: GridConfig, workers=None):
    """One SimulationSummary per (scenario, n, method) cell, deterministic in
    the master seed and invariant to the worker count."""
    summaries = []
    for spec in config.scenarios:
        for n in config.sample_sizes:
            summaries.extend(
                _summaries_for_row(
                    spec, n, config.tests, config.alpha, config.reps,
                    config.permutations, config.master_seed,
                    config.alternative, config.add_one_correction, workers,
                )
            )
    return summaries


def summaries_to_csv(summaries) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for s in summaries:
        writer.writerow(s.csv_row())
    return buf.getvalue()


def summaries_to_json(summaries) -> str:
    records = []
    for s in summaries:
        records.append({
            "scenario": s.scenario,
            "n": s.n,
            "method": s.method.value,
            "alpha": s.alpha,
            "reps": s.reps,
            "B": s.permutations,
            "rejection_rate": s.rejection_rate,
            "mc_se": s.mc_se,
            "seed": s.seed,
            "degenerate_count": s.degenerate_count,
        })
    return json.dumps(records, indent=2, sort_keys=True) + "\n"


def plot_series(summaries):
    """Plot-data series: per (scenario, method), rejection rate against n,
    sorted by n. Mirrors the structure of a rate-vs-sample-size figure."""
    grouped = {}
    for s in summaries:
        grouped.setdefault((s.scenario, s.method.value), []).append(
            (s.n, s.rejection_rate)
        )
    series = []
    for (scenario, method), points in sorted(grouped.items()):
        points.sort()
        series.append({
            "scenario": scenario,
            "method": method,
            "n": [p[0] for p in points],
            "rejection_rate": [p[1] for p in points],
        })
    return series


def plot_series_to_csv(series) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(("scenario", "method", "n", "rejection_rate"))
    for entry in series:
        for n, rate in zip(entry["n"], entry["rejection_rate"]):
            writer.writerow((entry["scenario"], entry["method"], str(n), repr(rate)))
    return buf.getvalue()
