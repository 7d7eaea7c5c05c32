"""Desk-scale acceptance run: nine criteria, one PASS/FAIL line each.

Runs under pytest (``pytest -m slow tests/test_acceptance.py``) or directly
as ``python tests/test_acceptance.py``. Reference rates are the reference
10^9-sample percentages; bands are at least four binomial standard errors
at 10^6 samples.
"""

import sys
import tempfile
from functools import lru_cache
from pathlib import Path

import numpy as np
import pytest

from hypotlab import checks, cli
from hypotlab.experiments import ExperimentSpec, bench, run_table1, run_table2
from hypotlab.fpformat import format_for
from hypotlab.kernels import ALGORITHMS, AlgorithmId as A
from hypotlab.oracle import oracle_array
from hypotlab.sampling import SamplerSpec

pytestmark = pytest.mark.slow

SEED = 0xB0C4E5
COUNT = 10**6
B64, B32 = format_for("binary64"), format_for("binary32")

VERDICTS: dict[int, str] = {}


def verdict(n: int, failures: list[str], detail: str = "") -> None:
    line = f"criterion {n}: {'FAIL' if failures else 'PASS'}"
    if detail:
        line += f"  {detail}"
    if failures:
        line += "  [" + "; ".join(failures) + "]"
    VERDICTS[n] = line
    print(line)
    assert not failures, line


def within(label, value, lo, hi, out):
    if not lo <= value <= hi:
        out.append(f"{label} = {value:.4f} not in [{lo:g}, {hi:g}]")


def exactly_zero(label, value, out):
    if value != 0:
        out.append(f"{label} = {value:.7f}, expected 0")


@lru_cache(maxsize=None)
def table1():
    return run_table1(seed=SEED, count=COUNT, shards=1, workers=1)


@lru_cache(maxsize=None)
def table2_rows():
    return {t.gap_n: t for t in run_table2(seed=SEED, count=COUNT, n_values=[0, 5, 27, 28, 29],
                                           shards=1, workers=1)}


ONE_ULP = {
    A.JULIA11: (35.08, 0.3),
    A.CLIB: (12.91, 0.3),
    A.NAIVE_UNFUSED: (16.70, 0.3),
    A.NAIVE_FUSED: (13.02, 0.3),
    A.CORRECTED_UNFUSED: (0.54, 0.1),
}


def test_criterion_1_table1():
    t = table1()
    bad = []
    for algo, (ref, tol) in ONE_ULP.items():
        within(f"{algo} 1-ulp", t.percent(algo, 1), ref - tol, ref + tol, bad)
    within("julia11 2-ulp", t.percent(A.JULIA11, 2), 0.05, 0.30, bad)
    for algo in ALGORITHMS:
        if algo is not A.JULIA11:
            exactly_zero(f"{algo} 2-ulp", t.percent(algo, 2), bad)
        exactly_zero(f"{algo} 3+ulp", t.percent(algo, 3), bad)
    exactly_zero("corrected_fused incorrect", t.pct_incorrect(A.CORRECTED_FUSED), bad)
    shown = ", ".join(f"{a} {t.percent(a, 1):.3f}" for a in ALGORITHMS)
    verdict(1, bad, f"1-ulp % {shown}; julia11 2-ulp {t.percent(A.JULIA11, 2):.3f}")


def test_criterion_2_table2_rows():
    rows = table2_rows()
    bad = []
    within("N=0 julia11", rows[0].pct_incorrect(A.JULIA11), 29.228 - 0.4, 29.228 + 0.4, bad)
    within("N=0 corrected_unfused", rows[0].pct_incorrect(A.CORRECTED_UNFUSED), 0.8005 - 0.1, 0.8005 + 0.1, bad)
    exactly_zero("N=0 corrected_fused", rows[0].pct_incorrect(A.CORRECTED_FUSED), bad)
    within("N=5 corrected_unfused", rows[5].pct_incorrect(A.CORRECTED_UNFUSED), 0.005, 0.05, bad)
    exactly_zero("N=27 julia11", rows[27].pct_incorrect(A.JULIA11), bad)
    within("N=27 clib", rows[27].pct_incorrect(A.CLIB), 4.054 - 0.3, 4.054 + 0.3, bad)
    for n in (28, 29):
        for algo in ALGORITHMS:
            exactly_zero(f"N={n} {algo}", rows[n].pct_incorrect(algo), bad)
    detail = (f"N=0 julia11 {rows[0].pct_incorrect(A.JULIA11):.3f}, "
              f"corrected_unfused {rows[0].pct_incorrect(A.CORRECTED_UNFUSED):.4f}; "
              f"N=5 corrected_unfused {rows[5].pct_incorrect(A.CORRECTED_UNFUSED):.4f}; "
              f"N=27 clib {rows[27].pct_incorrect(A.CLIB):.3f}")
    verdict(2, bad, detail)


def _check(n, result):
    verdict(n, [] if result.passed else [result.failure], f"{result.name}, {result.checked} cases")


def test_criterion_3_ulp_bound():
    _check(3, checks.check_ulp_bounds(10**5, SEED, B64))


def test_criterion_4_wide_branch():
    _check(4, checks.check_wide_branch(10**5, SEED, B64))


def _literal_oracle_scan(n, fmt, seed):
    rng = np.random.default_rng(seed)
    half = n // 2
    ga, gb = checks.gap_pairs(rng, n - half, fmt)
    a = np.concatenate([checks.random_finite(rng, half, fmt), ga])
    b = np.concatenate([checks.random_finite(rng, half, fmt), gb])
    r = oracle_array(a, b)
    literal, bracket = [], []
    for i in range(n):
        if checks.squared_neighbor_violation(a[i], b[i], r[i], fmt):
            literal.append(f"({checks.hexf(a[i])}, {checks.hexf(b[i])})")
        if checks.bracket_violation(a[i], b[i], r[i], fmt):
            bracket.append(f"({checks.hexf(a[i])}, {checks.hexf(b[i])})")
    return literal, bracket


def test_criterion_5_oracle_self_verification():
    bad, parts = [], []
    for n, fmt, seed in ((10**5, B64, SEED), (10**6, B32, SEED + 1)):
        literal, bracket = _literal_oracle_scan(n, fmt, seed)
        parts.append(f"{fmt.name} {n}: {len(literal)} squared-neighbour, {len(bracket)} midpoint violations")
        if literal:
            bad.append(f"{fmt.name} squared-neighbour at {literal[0]}")
        if bracket:
            bad.append(f"{fmt.name} midpoint at {bracket[0]}")
    triples = checks.check_exact_triples(500, SEED, B64)
    parts.append(f"{triples.checked} triples exact")
    if not triples.passed:
        bad.append(triples.failure)
    verdict(5, bad, "; ".join(parts))


def test_criterion_6_naive_sum_bound():
    _check(6, checks.check_naive_sum_bound(10**5, SEED, B64))


def _cli_run(out, *argv):
    code = cli.main([*argv, "--out", str(out)])
    assert code == 0
    return {p.name: p.read_bytes() for p in sorted(Path(out).iterdir())}


def test_criterion_7_determinism():
    bad = []
    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        runs = {
            "table1": ["table1", "--samples", str(COUNT), "--seed", str(SEED)],
            "table2": ["table2", "--samples", "100000", "--seed", str(SEED)],
        }
        for name, argv in runs.items():
            first = _cli_run(tmp / f"{name}-1", *argv, "--shards", "1")
            second = _cli_run(tmp / f"{name}-2", *argv, "--shards", "1")
            sharded = _cli_run(tmp / f"{name}-7", *argv, "--shards", "7")
            if first != second:
                bad.append(f"{name} differs between identical runs")
            if first != sharded:
                bad.append(f"{name} differs between 1 and 7 shards")
    verdict(7, bad, "table1 at 10^6, table2 at 10^5 x 30 gaps; 1, 1 and 7 shards")


def test_criterion_8_special_values():
    results = [checks.check_special_values(0, SEED, f) for f in (B64, B32)]
    bad = [r.failure for r in results if not r.passed]
    verdict(8, bad, f"{sum(r.checked for r in results)} cases, binary64 and binary32")


def test_criterion_9_bench_ranking():
    spec = ExperimentSpec(SamplerSpec("normal_pair", count=10**5, seed=SEED), (A.CORRECTED_FUSED, A.CLIB))
    res = bench(spec, repetitions=9)
    fused, clib = res[A.CORRECTED_FUSED].median_ns, res[A.CLIB].median_ns
    bad = [] if fused <= clib else [f"corrected_fused {fused:.2f} ns > clib {clib:.2f} ns"]
    verdict(9, bad, f"median ns/call corrected_fused {fused:.2f}, clib {clib:.2f}")


if __name__ == "__main__":
    tests = [v for k, v in sorted(globals().items()) if k.startswith("test_criterion_")]
    failed = 0
    for test in tests:
        try:
            test()
        except AssertionError:
            failed += 1
    print(f"{len(tests) - failed}/{len(tests)} criteria pass")
    sys.exit(1 if failed else 0)
