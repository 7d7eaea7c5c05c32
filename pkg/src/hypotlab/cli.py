"""Command-line entry point: ``hypotlab {single,table1,table2,verify,bench}``.

Exit status is 0 on success, 1 when a property check fails and 2 for usage
or configuration errors. Floats are printed both in shortest round-trip
decimal and in hex-float form; hex-float literals are accepted on input.
"""

from __future__ import annotations

import argparse
import math
import sys
import time
from fractions import Fraction

import numpy as np

from .checks import run_all
from .experiments import (
    DEFAULT_SAMPLES,
    DEFAULT_SEED,
    SHARDS_ENV,
    ConfigurationError,
    ExperimentSpec,
    bench,
    default_shards,
    emit_report,
    format_summary,
    run_table1,
    run_table2,
)
from .fpformat import FORMATS, FpFormat, format_for, ulp_distance
from .kernels import ALGORITHMS, AlgorithmId, dispatch, supported
from .oracle import oracle_hypot, round_exact
from .sampling import SamplerSpec

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def parse_float(text: str, fmt: FpFormat):
    """Parse a decimal or hex-float literal, rounding once into ``fmt``."""
    t = text.strip()
    low = t.lower().lstrip("+-")
    if low in ("inf", "infinity", "nan"):
        return fmt.cast(float(t))
    hexlit = "0x" in low
    if fmt.name == "binary64":
        return fmt.cast(float.fromhex(t) if hexlit else float(t))
    value = Fraction(float.fromhex(t)) if hexlit else Fraction(t)
    sign = -1 if value < 0 else 1
    value = abs(value)
    if value == 0:
        return fmt.cast(math.copysign(0.0, sign))
    # scale so the integer part carries at least precision + 2 bits
    k = fmt.precision_bits + 2 - (value.numerator.bit_length() - value.denominator.bit_length())
    num = value.numerator << k if k >= 0 else value.numerator
    den = value.denominator if k >= 0 else value.denominator << -k
    q, rem = divmod(num, den)
    r = round_exact(q, -k, rem != 0, fmt).result
    return fmt.cast(sign * float(r))


def fmt_float(x) -> str:
    """Shortest round-trip decimal in the value's own format, then hex."""
    dec = str(x) if isinstance(x, np.float32) else repr(float(x))
    return f"{dec} ({float(x).hex()})"


def _float_arg(text: str) -> str:
    t = text.strip().lower().lstrip("+-")
    if t in ("inf", "infinity", "nan"):
        return text
    try:
        float.fromhex(text) if "0x" in t else Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a float literal: {text!r}") from None
    return text


def _n_list(text: str) -> list[int]:
    out: list[int] = []
    try:
        for part in text.split(","):
            part = part.strip()
            if "-" in part[1:]:
                lo, hi = part.split("-", 1)
                out.extend(range(int(lo), int(hi) + 1))
            elif part:
                out.append(int(part))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad gap list {text!r}; use e.g. 0,5,27 or 0-29") from None
    if not out or any(n < 0 for n in out):
        raise argparse.ArgumentTypeError("gaps must be a non-empty list of integers >= 0")
    return out


def _seed(text: str) -> int:
    try:
        v = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad seed {text!r}") from None
    if not 0 <= v < 1 << 64:
        raise argparse.ArgumentTypeError("seed must fit in 64 bits")
    return v


def _positive(text: str) -> int:
    try:
        v = int(float(text)) if "e" in text.lower() else int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    return v


def _algos(text: str) -> tuple[AlgorithmId, ...] | None:
    # None means "every algorithm defined for the chosen format"
    if text == "all":
        return None
    try:
        return tuple(AlgorithmId(t.strip()) for t in text.split(","))
    except ValueError:
        names = ", ".join(a.value for a in ALGORITHMS)
        raise argparse.ArgumentTypeError(f"unknown algorithm in {text!r}; choose from all, {names}") from None


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hypotlab", description="Accuracy harness for sqrt(a^2 + b^2) kernels.")
    sub = p.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=_seed, default=DEFAULT_SEED, help="64-bit seed (default %(default)#x)")
    common.add_argument("--samples", type=_positive, default=DEFAULT_SAMPLES, help="pairs per cell (default 10^6)")

    run = argparse.ArgumentParser(add_help=False)
    run.add_argument("--out", default="hypotlab-results", help="output directory for CSV and summary files")
    run.add_argument("--shards", type=_positive, default=None,
                     help=f"partitions of each cell (default ${SHARDS_ENV} or CPU count)")
    run.add_argument("--full", action="store_true", help="use 10^9 pairs per cell")

    s = sub.add_parser("single", help="evaluate one pair against the oracle")
    s.add_argument("a", type=_float_arg)
    s.add_argument("b", type=_float_arg)
    s.add_argument("--algo", type=_algos, default=None, help="all (default) or a comma list")
    s.add_argument("--format", choices=FORMATS, default="binary64")

    sub.add_parser("table1", parents=[common, run], help="normal operands, all algorithms")
    t2 = sub.add_parser("table2", parents=[common, run], help="error rate by exponent gap N")
    t2.add_argument("--n-list", type=_n_list, default=list(range(30)), help="gaps, e.g. 0,5,27 or 0-29")

    v = sub.add_parser("verify", parents=[common], help="run the property suite")
    v.add_argument("--format", choices=FORMATS + ("both",), default="both")

    b = sub.add_parser("bench", parents=[common], help="median per-call latency")
    b.add_argument("--algo", type=_algos, default=None, help="all (default) or a comma list")
    b.add_argument("--format", choices=FORMATS, default="binary64")
    b.add_argument("--repetitions", type=int, default=7)
    return p


def cmd_single(args) -> int:
    fmt = format_for(args.format)
    a, b = parse_float(args.a, fmt), parse_float(args.b, fmt)
    finite = math.isfinite(a) and math.isfinite(b)
    if finite:
        ref = oracle_hypot(a, b, fmt)
    else:
        ref = fmt.cast(math.inf if math.isinf(a) or math.isinf(b) else math.nan)
    print(f"a = {fmt_float(a)}  b = {fmt_float(b)}  [{fmt.name}]")
    print(f"{'oracle':<18} {fmt_float(ref)}")
    for algo in args.algo:
        h = dispatch(algo, a, b)
        if math.isfinite(h) and math.isfinite(ref):
            ulp = str(ulp_distance(h, ref))
        else:
            same = (math.isnan(h) and math.isnan(ref)) or h == ref
            ulp = "0" if same else "n/a"
        print(f"{algo.value:<18} {fmt_float(h)}  ulp {ulp}")
    return EXIT_OK


def _samples(args) -> int:
    return 10**9 if args.full else args.samples


def cmd_table1(args) -> int:
    table = run_table1(args.seed, _samples(args), args.shards or default_shards())
    print(format_summary([table]), end="")
    for path in emit_report([table], args.out, stem="table1"):
        print(f"wrote {path}")
    return EXIT_OK


def cmd_table2(args) -> int:
    tables = run_table2(args.seed, _samples(args), args.n_list, args.shards or default_shards())
    print(format_summary(tables), end="")
    for path in emit_report(tables, args.out, stem="table2"):
        print(f"wrote {path}")
    return EXIT_OK


def cmd_verify(args) -> int:
    formats = FORMATS[::-1] if args.format == "both" else (args.format,)
    t0 = time.perf_counter()
    status = EXIT_OK
    for result in run_all(args.samples, args.seed, formats):
        print(result)
        if not result.passed:
            status = EXIT_FAIL
    print(f"{'all properties hold' if status == EXIT_OK else 'property violated'} "
          f"({time.perf_counter() - t0:.1f}s)")
    return status


def cmd_bench(args) -> int:
    spec = ExperimentSpec(SamplerSpec("normal_pair", count=args.samples, seed=args.seed),
                          args.algo, args.format)
    results = bench(spec, args.repetitions)
    print(f"{'algorithm':<18}{'median ns':>11}{'min ns':>9}{'max ns':>9}   batch={args.samples} reps={args.repetitions}")
    for algo, r in results.items():
        print(f"{algo.value:<18}{r.median_ns:>11.2f}{r.min_ns:>9.2f}{r.max_ns:>9.2f}")
    cf, cl = results.get(AlgorithmId.CORRECTED_FUSED), results.get(AlgorithmId.CLIB)
    if cf and cl:
        print(f"corrected_fused / clib median ratio: {cf.median_ns / cl.median_ns:.3f}")
    return EXIT_OK


COMMANDS = {"single": cmd_single, "table1": cmd_table1, "table2": cmd_table2, "verify": cmd_verify, "bench": cmd_bench}


def _validate(parser, args):
    if hasattr(args, "algo"):
        if args.algo is None:
            args.algo = tuple(a for a in ALGORITHMS if supported(a, args.format))
        for algo in args.algo:
            if not supported(algo, args.format):
                parser.error(f"{algo.value} is only defined for binary64")
    if args.command == "table1" and not args.full and args.samples < 10**4:
        parser.error("table1 needs --samples >= 10000")
    if getattr(args, "repetitions", 3) < 3:
        parser.error("--repetitions must be >= 3")
    if args.command in ("table1", "table2") and args.shards is None:
        try:
            default_shards()
        except ConfigurationError as exc:
            parser.error(str(exc))


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _validate(parser, args)
    try:
        return COMMANDS[args.command](args)
    except ConfigurationError as exc:
        print(f"hypotlab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"hypotlab: error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
