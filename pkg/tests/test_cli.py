import re
import subprocess
import sys

import numpy as np
import pytest

from hypotlab import checks, cli
from hypotlab.kernels import AlgorithmId

HEX = re.compile(r"\((-?0x[0-9a-f.]+p[+-]\d+|-?inf|nan)\)")


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_single_all(capsys):
    code, out, _ = run(capsys, "single", "3", "4", "--algo", "all")
    assert code == 0
    lines = [l for l in out.splitlines() if l.split()[0] in {a.value for a in AlgorithmId}]
    assert len(lines) == 6
    for line in lines:
        assert "5.0 (0x1.4000000000000p+2)" in line and line.endswith("ulp 0")


def test_single_corrected_fused_sqrt2(capsys):
    code, out, _ = run(capsys, "single", "1", "1", "--algo", "corrected_fused")
    assert code == 0
    assert out.splitlines()[-1].endswith("ulp 0")
    assert "1.4142135623730951" in out


def test_single_inf_nan(capsys):
    code, out, _ = run(capsys, "single", "inf", "nan", "--algo", "naive_fused")
    assert code == 0
    assert "naive_fused" in out and "inf (inf)" in out.splitlines()[-1]


def test_single_binary32_default_skips_clib(capsys):
    code, out, _ = run(capsys, "single", "0x1.8p0", "0.1", "--format", "binary32")
    assert code == 0
    assert "clib" not in out and "corrected_fused" in out
    # 0.1 is rounded once, directly to binary32
    assert "b = 0.1 (0x1.99999a0000000p-4)" in out


def test_hex_round_trip(capsys):
    _, out, _ = run(capsys, "single", "0x1.6a09e667f3bcdp+0", "0x1.5555555555555p-3", "--algo", "all")
    printed = HEX.findall(out)
    assert printed
    for text in printed:
        value = float.fromhex(text) if text.startswith(("0x", "-0x")) else float(text)
        assert float(value).hex() == text or text in ("inf", "-inf", "nan")
    # feed the oracle's hex output back in as an operand
    oracle_hex = HEX.findall(out.splitlines()[1])[0]
    code, out2, _ = run(capsys, "single", oracle_hex, "0", "--algo", "corrected_fused")
    assert code == 0 and f"({oracle_hex})" in out2.splitlines()[-1]


@pytest.mark.parametrize("argv", [
    ["single", "1.2.3", "4"],
    ["single", "1", "x"],
    ["single", "1", "2", "--algo", "fastest"],
    ["single", "1", "2", "--algo", "clib", "--format", "binary32"],
    ["table1", "--samples", "100"],
    ["table2", "--n-list", "3-x"],
    ["table2", "--n-list", "-1"],
    ["table2", "--seed", "-5"],
    ["bench", "--repetitions", "2"],
    ["verify", "--format", "binary16"],
    ["nonsense"],
])
def test_usage_errors(argv, capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(argv)
    assert exc.value.code == 2


def test_bad_shard_env(monkeypatch, tmp_path, capsys):
    monkeypatch.setenv("HYPOTLAB_SHARDS", "many")
    with pytest.raises(SystemExit) as exc:
        cli.main(["table2", "--n-list", "0", "--samples", "100", "--out", str(tmp_path)])
    assert exc.value.code == 2
    assert not any(tmp_path.iterdir())


def test_verify_quick(capsys):
    code, out, _ = run(capsys, "verify", "--samples", "1000")
    assert code == 0
    assert "all properties hold" in out
    assert "FAIL" not in out


def test_verify_catches_faulty_kernel(monkeypatch, capsys):
    real = checks._evaluate

    def faulty(algo, a, b):
        h = real(algo, a, b)
        if algo is AlgorithmId.CORRECTED_FUSED:
            # one ulp high whenever the larger operand exceeds 2
            h = np.where(np.maximum(abs(a), abs(b)) > 2, np.nextafter(h, np.inf), h).astype(h.dtype)
        return h

    monkeypatch.setattr(checks, "_evaluate", faulty)
    code, out, _ = run(capsys, "verify", "--samples", "1000", "--format", "binary64")
    assert code == 1
    fail = [l for l in out.splitlines() if l.startswith("FAIL")]
    assert len(fail) == 1
    assert "corrected_fused" in fail[0]
    assert re.search(r"\(-?0x[0-9a-f.]+p[+-]\d+, -?0x[0-9a-f.]+p[+-]\d+\)", fail[0])


def test_table_runs_are_deterministic(tmp_path, capsys):
    a, b, c = tmp_path / "a", tmp_path / "b", tmp_path / "c"
    base = ["table2", "--n-list", "0,5,27,28", "--samples", "3000", "--seed", "0x2a"]
    assert cli.main(base + ["--out", str(a), "--shards", "1"]) == 0
    assert cli.main(base + ["--out", str(b), "--shards", "1"]) == 0
    assert cli.main(base + ["--out", str(c), "--shards", "4"]) == 0
    out = capsys.readouterr().out
    assert "wrote" in out
    for name in ("table2.csv", "table2_figure.csv", "table2_summary.txt"):
        assert (a / name).read_bytes() == (b / name).read_bytes() == (c / name).read_bytes()
    assert len((a / "table2.csv").read_text().splitlines()) == 1 + 4 * 6


def test_bench_command(capsys):
    code, out, _ = run(capsys, "bench", "--samples", "2000", "--repetitions", "3")
    assert code == 0
    assert "corrected_fused / clib median ratio" in out
    code, out, _ = run(capsys, "bench", "--samples", "2000", "--repetitions", "3", "--format", "binary32")
    assert code == 0 and "clib" not in out


def test_console_script():
    r = subprocess.run([sys.executable, "-m", "hypotlab.cli", "single", "3", "4", "--algo", "clib"],
                       capture_output=True, text=True)
    assert r.returncode == 0 and "ulp 0" in r.stdout
