import os

import numpy as np
import pytest

from hypotlab.experiments import (
    CSV_HEADER,
    FIGURE_HEADER,
    SHARDS_ENV,
    ConfigurationError,
    ExperimentSpec,
    ResultTable,
    _tally,
    bench,
    default_shards,
    emit_report,
    format_csv,
    run_cell,
    run_table1,
    run_table2,
)
from hypotlab.kernels import ALGORITHMS, AlgorithmId
from hypotlab.sampling import SamplerSpec


def test_tally_buckets():
    ref = np.array([1.0, 1.0, 1.0, 1.0, 1.0, 1.0])
    h = np.array([1.0, np.nextafter(1.0, 2), np.nextafter(1.0, 0), 1.0 + 4.4e-16, 2.0, np.nan])
    assert _tally(h, ref) == [1, 2, 1, 2]


def test_cell_conservation_and_shard_invariance():
    spec = ExperimentSpec(SamplerSpec("exponent_gap", count=20000, seed=3, gap_n=2))
    one = run_cell(spec, workers=1)
    eight = run_cell(ExperimentSpec(spec.sampler, shards=8), workers=1)
    assert one == eight
    for algo in ALGORITHMS:
        assert sum(one.counts[algo]) == 20000


def test_shards_in_worker_processes():
    spec = ExperimentSpec(SamplerSpec("normal_pair", count=5000, seed=4), shards=3)
    assert run_cell(spec, workers=2) == run_cell(spec, workers=1)


def test_binary32_cell():
    spec = ExperimentSpec(SamplerSpec("normal_pair", count=5000, seed=5),
                          tuple(a for a in ALGORITHMS if a is not AlgorithmId.CLIB), "binary32")
    t = run_cell(spec, workers=1)
    assert t.format == "binary32" and t.samples == 5000
    assert t.incorrect(AlgorithmId.CORRECTED_FUSED) == 0


@pytest.mark.parametrize("kwargs", [
    dict(algorithms=(AlgorithmId.CLIB,), format="binary32"),
    dict(algorithms=()),
    dict(algorithms=(AlgorithmId.JULIA11, AlgorithmId.JULIA11)),
    dict(shards=0),
])
def test_spec_validation(kwargs):
    with pytest.raises(ConfigurationError):
        ExperimentSpec(SamplerSpec(count=10), **kwargs)


def test_spec_syncs_sampler_format():
    spec = ExperimentSpec(SamplerSpec(count=10), (AlgorithmId.JULIA11,), "binary32")
    assert spec.sampler.format == "binary32"


def test_merge_guards():
    a = ResultTable("normal_pair", None, 1, 1, "binary64", {AlgorithmId.JULIA11: [1, 0, 0, 0]})
    b = ResultTable("normal_pair", None, 2, 1, "binary64", {AlgorithmId.JULIA11: [1, 0, 0, 0]})
    c = ResultTable("normal_pair", None, 1, 1, "binary64", {AlgorithmId.CLIB: [1, 0, 0, 0]})
    with pytest.raises(ValueError):
        a.merge(b)
    with pytest.raises(ValueError):
        a.merge(c)
    bad = ResultTable("normal_pair", None, 1, 2, "binary64", {AlgorithmId.JULIA11: [1, 0, 0, 0]})
    with pytest.raises(AssertionError):
        bad.check()


def test_table1_minimum():
    with pytest.raises(ConfigurationError):
        run_table1(count=9999)


def test_table2_rejects_negative_gap():
    with pytest.raises(ConfigurationError):
        run_table2(count=10, n_values=[-1])


def test_table2_report(tmp_path):
    tables = run_table2(seed=1, count=1000, shards=2, workers=1)
    paths = emit_report(tables, tmp_path, stem="table2")
    assert sorted(p.name for p in paths) == ["table2.csv", "table2_figure.csv", "table2_summary.txt"]
    rows = (tmp_path / "table2.csv").read_text().splitlines()
    assert rows[0] == CSV_HEADER
    assert len(rows) == 1 + 30 * 6
    n_gap, algo, samples, *buckets, pct = rows[1].split(",")
    assert (n_gap, algo, samples) == ("0", "julia11", "1000")
    assert sum(map(int, buckets)) == 1000
    assert len(pct.split(".")[1]) == 7
    fig = (tmp_path / "table2_figure.csv").read_text().splitlines()
    assert fig[0] == FIGURE_HEADER and len(fig) == 1 + 30 * 6
    summary = (tmp_path / "table2_summary.txt").read_text()
    assert "corrected_fused" in summary and "oracle ties" in summary
    # byte-identical on a rerun
    again = emit_report(run_table2(seed=1, count=1000, shards=5, workers=1), tmp_path / "again", stem="table2")
    for p, q in zip(sorted(paths), sorted(again)):
        assert p.read_bytes() == q.read_bytes()


def test_table1_report(tmp_path):
    t = run_table1(seed=2, count=10**4, shards=1, workers=1)
    emit_report([t], tmp_path, stem="table1")
    rows = (tmp_path / "table1.csv").read_text().splitlines()
    assert len(rows) == 7 and all(r.startswith(",") for r in rows[1:])
    assert not (tmp_path / "table1_figure.csv").exists()


def test_report_errors_leave_no_files(tmp_path):
    with pytest.raises(ConfigurationError):
        emit_report([], tmp_path / "empty")
    a = ResultTable("exponent_gap", 0, 1, 1, "binary64", {AlgorithmId.JULIA11: [1, 0, 0, 0]})
    b = ResultTable("exponent_gap", 1, 1, 1, "binary64", {AlgorithmId.CLIB: [1, 0, 0, 0]})
    with pytest.raises(ConfigurationError):
        emit_report([a, b], tmp_path / "disjoint")
    assert not (tmp_path / "empty").exists() and not (tmp_path / "disjoint").exists()
    blocker = tmp_path / "file"
    blocker.write_text("x")
    with pytest.raises(OSError):
        emit_report([a], blocker)
    assert blocker.read_text() == "x"


def test_csv_restricts_to_common_algorithms():
    a = ResultTable("exponent_gap", 0, 1, 1, "binary64",
                    {AlgorithmId.JULIA11: [1, 0, 0, 0], AlgorithmId.CLIB: [0, 1, 0, 0]})
    b = ResultTable("exponent_gap", 1, 1, 1, "binary64", {AlgorithmId.CLIB: [1, 0, 0, 0]})
    assert format_csv([a, b]).splitlines()[1:] == [
        "0,clib,1,0,1,0,0,100.0000000",
        "1,clib,1,1,0,0,0,0.0000000",
    ]


def test_bench_runs_every_algorithm():
    spec = ExperimentSpec(SamplerSpec("normal_pair", count=2000, seed=6))
    res = bench(spec, repetitions=3)
    assert set(res) == set(ALGORITHMS)
    for r in res.values():
        assert 0 < r.min_ns <= r.median_ns <= r.max_ns and r.repetitions == 3
    one = bench(ExperimentSpec(SamplerSpec("normal_pair", count=1, seed=6)), repetitions=3)
    assert len(one) == 6
    with pytest.raises(ConfigurationError):
        bench(spec, repetitions=2)


def test_default_shards(monkeypatch):
    monkeypatch.setenv(SHARDS_ENV, "5")
    assert default_shards() == 5
    monkeypatch.setenv(SHARDS_ENV, "zero")
    with pytest.raises(ConfigurationError):
        default_shards()
    monkeypatch.setenv(SHARDS_ENV, "0")
    with pytest.raises(ConfigurationError):
        default_shards()
    monkeypatch.delenv(SHARDS_ENV)
    assert default_shards() == (os.cpu_count() or 1)
