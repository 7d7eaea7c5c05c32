"""Accuracy experiments: tally each kernel's ulp error against the oracle.

A *cell* is one operand distribution (normal pairs, or one exponent gap N)
evaluated with every requested algorithm. The oracle is computed once per
pair and shared by all algorithms. Cells are split into shards that can run
in worker processes; tallies merge by summation, so the result does not
depend on the shard count.
"""

from __future__ import annotations

import io
import os
import statistics
import tempfile
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .fpformat import format_for, ulp_gap_array
from .kernels import ALGORITHMS, AlgorithmId, array_kernel, evaluate, supported
from .oracle import oracle_array
from .sampling import SamplerSpec, generate, iter_chunks, split

__all__ = [
    "ConfigurationError",
    "ExperimentSpec",
    "ResultTable",
    "BenchResult",
    "DEFAULT_SEED",
    "DEFAULT_SAMPLES",
    "SHARDS_ENV",
    "default_shards",
    "run_cell",
    "run_table1",
    "run_table2",
    "bench",
    "emit_report",
    "CSV_HEADER",
    "format_csv",
    "format_figure_csv",
    "format_summary",
]

DEFAULT_SEED = 0xB0C4E5
DEFAULT_SAMPLES = 10**6
SHARDS_ENV = "HYPOTLAB_SHARDS"
CSV_HEADER = "n_gap,algorithm,samples,ulp0,ulp1,ulp2,ulp3plus,pct_incorrect"
FIGURE_HEADER = "n_gap,algorithm,pct_incorrect"


class ConfigurationError(ValueError):
    pass


def default_shards() -> int:
    """Shard count from ``$HYPOTLAB_SHARDS``, else the machine's CPU count."""
    raw = os.environ.get(SHARDS_ENV)
    if raw:
        try:
            n = int(raw)
        except ValueError:
            raise ConfigurationError(f"{SHARDS_ENV} must be a positive integer, got {raw!r}") from None
        if n < 1:
            raise ConfigurationError(f"{SHARDS_ENV} must be a positive integer, got {raw!r}")
        return n
    return os.cpu_count() or 1


@dataclass(frozen=True)
class ExperimentSpec:
    sampler: SamplerSpec
    algorithms: tuple[AlgorithmId, ...] = ALGORITHMS
    format: str = "binary64"
    shards: int = 1

    def __post_init__(self):
        algos = tuple(AlgorithmId(a) for a in self.algorithms)
        if not algos:
            raise ConfigurationError("at least one algorithm is required")
        if len(set(algos)) != len(algos):
            raise ConfigurationError("duplicate algorithms requested")
        format_for(self.format)
        for a in algos:
            if not supported(a, self.format):
                raise ConfigurationError(f"{a} is only defined for binary64")
        if self.shards < 1:
            raise ConfigurationError("shards must be >= 1")
        object.__setattr__(self, "algorithms", algos)
        if self.sampler.format != self.format:
            object.__setattr__(self, "sampler", replace(self.sampler, format=self.format))


@dataclass
class ResultTable:
    """Per-algorithm counts of |ulp| = 0, 1, 2 and >= 3 for one cell."""

    kind: str
    gap_n: int | None
    seed: int
    samples: int
    format: str
    counts: dict[AlgorithmId, list[int]] = field(default_factory=dict)
    ties: int = 0

    @property
    def algorithms(self) -> tuple[AlgorithmId, ...]:
        return tuple(self.counts)

    def percent(self, algo, bucket: int) -> float:
        """Percentage in bucket 0, 1, 2 or 3 (meaning >= 3)."""
        return 100.0 * self.counts[AlgorithmId(algo)][bucket] / self.samples if self.samples else 0.0

    def incorrect(self, algo) -> int:
        c = self.counts[AlgorithmId(algo)]
        return c[1] + c[2] + c[3]

    def pct_incorrect(self, algo) -> float:
        return 100.0 * self.incorrect(algo) / self.samples if self.samples else 0.0

    def check(self):
        for algo, c in self.counts.items():
            if sum(c) != self.samples:
                raise AssertionError(f"tally for {algo} sums to {sum(c)}, expected {self.samples}")

    def merge(self, other: "ResultTable") -> "ResultTable":
        if (self.kind, self.gap_n, self.seed, self.format) != (other.kind, other.gap_n, other.seed, other.format):
            raise ValueError("cannot merge tallies from different cells")
        if set(self.counts) != set(other.counts):
            raise ValueError("cannot merge tallies over different algorithm sets")
        counts = {a: [x + y for x, y in zip(c, other.counts[a])] for a, c in self.counts.items()}
        return ResultTable(self.kind, self.gap_n, self.seed, self.samples + other.samples,
                           self.format, counts, self.ties + other.ties)


def _tally(h: np.ndarray, ref: np.ndarray) -> list[int]:
    d = ulp_gap_array(h, ref)
    counts = np.bincount(np.minimum(d, 3), minlength=4)
    return [int(x) for x in counts]


def _run_shard(spec: ExperimentSpec) -> ResultTable:
    s = spec.sampler
    table = ResultTable(s.kind, s.gap_n if s.kind == "exponent_gap" else None, s.seed, 0, spec.format,
                        {a: [0, 0, 0, 0] for a in spec.algorithms})
    for a, b in iter_chunks(s):
        ref, ties = oracle_array(a, b, count_ties=True)
        table.samples += a.size
        table.ties += ties
        for algo in spec.algorithms:
            for i, n in enumerate(_tally(evaluate(algo, a, b), ref)):
                table.counts[algo][i] += n
    return table


def run_cell(spec: ExperimentSpec, workers: int | None = None) -> ResultTable:
    """Evaluate every algorithm of ``spec`` against the oracle on its pairs.

    ``spec.shards`` sets how the pairs are partitioned; ``workers`` caps the
    number of processes (default: the CPU count). With one worker the shards
    run in-process.
    """
    shards = [replace(spec, sampler=s, shards=1) for s in split(spec.sampler, spec.shards)]
    workers = min(len(shards), workers or os.cpu_count() or 1)
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            parts = list(pool.map(_run_shard, shards))
    else:
        parts = [_run_shard(s) for s in shards]
    table = parts[0]
    for part in parts[1:]:
        table = table.merge(part)
    table.check()
    return table


def run_table1(seed: int = DEFAULT_SEED, count: int = DEFAULT_SAMPLES, shards: int | None = None,
               algorithms: Sequence = ALGORITHMS, workers: int | None = None) -> ResultTable:
    """All algorithms on ``count`` pairs of standard normal operands (binary64)."""
    if count < 10**4:
        raise ConfigurationError("table1 needs at least 10^4 samples")
    sampler = SamplerSpec("normal_pair", count=count, seed=seed)
    return run_cell(ExperimentSpec(sampler, tuple(algorithms), "binary64", shards or default_shards()), workers)


def run_table2(seed: int = DEFAULT_SEED, count: int = DEFAULT_SAMPLES, n_values: Iterable[int] = range(30),
               shards: int | None = None, algorithms: Sequence = ALGORITHMS,
               workers: int | None = None) -> list[ResultTable]:
    """One cell per exponent gap N: ``a ~ U[2**N, 2**(N+1))``, ``b ~ U[1, 2)``."""
    n_values = list(n_values)
    if any(n < 0 for n in n_values):
        raise ConfigurationError("exponent gaps must be >= 0")
    shards = shards or default_shards()
    return [
        run_cell(ExperimentSpec(SamplerSpec("exponent_gap", count=count, seed=seed, gap_n=n),
                                tuple(algorithms), "binary64", shards), workers)
        for n in n_values
    ]


@dataclass(frozen=True)
class BenchResult:
    algorithm: AlgorithmId
    median_ns: float
    min_ns: float
    max_ns: float
    repetitions: int
    batch: int

    @property
    def spread(self) -> float:
        """(max - min) / median over repetitions."""
        return (self.max_ns - self.min_ns) / self.median_ns if self.median_ns else 0.0


def bench(spec: ExperimentSpec, repetitions: int = 7) -> dict[AlgorithmId, BenchResult]:
    """Median compiled per-call latency of each algorithm on one fixed batch.

    Algorithms are interleaved within each repetition so slow drifts in
    machine state hit all of them alike. No accuracy is measured.
    """
    if repetitions < 3:
        raise ConfigurationError("bench needs at least 3 repetitions")
    a, b = generate(spec.sampler)
    if a.size == 0:
        raise ConfigurationError("bench needs a non-empty batch")
    out = np.empty_like(a)
    kernels = {algo: array_kernel(algo, spec.format) for algo in spec.algorithms}
    for k in kernels.values():
        k(a, b, out)  # compile and warm caches
    samples: dict[AlgorithmId, list[float]] = {algo: [] for algo in kernels}
    for _ in range(repetitions):
        for algo, k in kernels.items():
            t0 = time.perf_counter_ns()
            k(a, b, out)
            samples[algo].append((time.perf_counter_ns() - t0) / a.size)
    return {
        algo: BenchResult(algo, statistics.median(ts), min(ts), max(ts), repetitions, a.size)
        for algo, ts in samples.items()
    }


def _common_algorithms(tables: Sequence[ResultTable]) -> list[AlgorithmId]:
    common = [a for a in tables[0].algorithms if all(a in t.counts for t in tables[1:])]
    if not common:
        raise ConfigurationError("tables share no algorithm")
    return common


def format_csv(tables: Sequence[ResultTable]) -> str:
    algos = _common_algorithms(tables)
    buf = io.StringIO()
    buf.write(CSV_HEADER + "\n")
    for t in tables:
        gap = "" if t.gap_n is None else str(t.gap_n)
        for algo in algos:
            c = t.counts[algo]
            buf.write(f"{gap},{algo},{t.samples},{c[0]},{c[1]},{c[2]},{c[3]},{t.pct_incorrect(algo):.7f}\n")
    return buf.getvalue()


def format_figure_csv(tables: Sequence[ResultTable]) -> str:
    algos = _common_algorithms(tables)
    lines = [FIGURE_HEADER]
    for algo in algos:
        for t in tables:
            lines.append(f"{t.gap_n},{algo},{t.pct_incorrect(algo):.7f}")
    return "\n".join(lines) + "\n"


def format_summary(tables: Sequence[ResultTable]) -> str:
    """Plain-text tables, one row per algorithm (per gap for exponent-gap cells)."""
    algos = _common_algorithms(tables)
    t0 = tables[0]
    head = f"format={t0.format} seed={t0.seed:#x} samples/cell={t0.samples}"
    if all(t.gap_n is None for t in tables):
        lines = ["a, b ~ N(0, 1)", head, "",
                 f"{'method':<20}{'1 ulp (%)':>12}{'2 ulp (%)':>12}{'>=3 ulp (%)':>13}{'incorrect (%)':>15}"]
        for t in tables:
            for algo in algos:
                lines.append(f"{str(algo):<20}{t.percent(algo, 1):>12.4f}{t.percent(algo, 2):>12.4f}"
                             f"{t.percent(algo, 3):>13.4f}{t.pct_incorrect(algo):>15.7f}")
            lines.append(f"oracle ties: {t.ties}")
    else:
        lines = ["incorrectly rounded (%), a ~ U[2^N, 2^(N+1)), b ~ U[1, 2)", head, "",
                 "N".rjust(3) + "".join(f"{str(a):>19}" for a in algos)]
        for t in tables:
            lines.append(f"{t.gap_n:>3}" + "".join(f"{t.pct_incorrect(a):>19.7f}" for a in algos))
        lines.append(f"oracle ties: {sum(t.ties for t in tables)}")
    return "\n".join(lines) + "\n"


def emit_report(tables: Sequence[ResultTable], destination, stem: str = "table") -> list[Path]:
    """Write ``<stem>.csv``, ``<stem>_summary.txt`` and, for exponent-gap
    tables, the long-format ``<stem>_figure.csv``.

    All content is rendered before anything is written, and each file is
    replaced atomically, so a failure never leaves partial output.
    """
    tables = list(tables)
    if not tables:
        raise ConfigurationError("no tables to report")
    files = {f"{stem}.csv": format_csv(tables), f"{stem}_summary.txt": format_summary(tables)}
    if all(t.gap_n is not None for t in tables):
        files[f"{stem}_figure.csv"] = format_figure_csv(tables)
    dest = Path(destination)
    dest.mkdir(parents=True, exist_ok=True)
    if not os.access(dest, os.W_OK):
        raise PermissionError(f"{dest} is not writable")
    written = []
    for name, text in files.items():
        fd, tmp = tempfile.mkstemp(dir=dest, prefix=f".{name}.")
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, dest / name)
        written.append(dest / name)
    return written
