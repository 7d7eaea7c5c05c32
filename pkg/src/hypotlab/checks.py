"""Property checks over seeded random inputs.

Each check returns a :class:`CheckResult`; the first violation carries a
reproducer with the operands in hex-float form. The exact comparisons here
use plain integer arithmetic on float significands and never call into the
oracle's rounding code, so they can vouch for the oracle as well.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import kernels as _kernels
from .fpformat import FpFormat, format_for, ulp_gap_array
from .kernels import ALGORITHMS, MYHYPOT_ALGORITHMS, AlgorithmId, supported
from .oracle import oracle_array, oracle_verdict

__all__ = [
    "CheckResult",
    "CHECKS",
    "hexf",
    "random_finite",
    "gap_pairs",
    "pythagorean_triples",
    "bracket_violation",
    "squared_neighbor_violation",
    "check_symmetry",
    "check_scale_covariance",
    "check_ulp_bounds",
    "check_wide_branch",
    "check_no_spurious_exceptions",
    "check_special_values",
    "check_exact_triples",
    "check_oracle_brackets",
    "check_naive_sum_bound",
    "run_all",
]

ULP_BOUND = {a: 1 for a in ALGORITHMS} | {AlgorithmId.JULIA11: 2}


@dataclass(frozen=True)
class CheckResult:
    name: str
    checked: int
    failure: str | None = None

    @property
    def passed(self) -> bool:
        return self.failure is None

    def __str__(self):
        status = "ok  " if self.passed else "FAIL"
        tail = f": {self.failure}" if self.failure else ""
        return f"{status} {self.name} ({self.checked} cases){tail}"


def hexf(x) -> str:
    return float(x).hex()


def _evaluate(algo, a, b):
    return _kernels.evaluate(algo, a, b)


def _algorithms(fmt: FpFormat, subset=ALGORITHMS):
    return [a for a in subset if supported(a, fmt)]


def _rng(seed: int, *key: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=key)))


def random_finite(rng: np.random.Generator, n: int, fmt: FpFormat) -> np.ndarray:
    """Uniformly random finite bit patterns (all binades, subnormals, zeros)."""
    uint = np.uint32 if fmt.name == "binary32" else np.uint64
    bits = rng.integers(0, np.iinfo(uint).max, n, dtype=uint, endpoint=True)
    x = bits.view(fmt.dtype)
    bad = ~np.isfinite(x)
    while bad.any():
        x[bad] = rng.integers(0, np.iinfo(uint).max, int(bad.sum()), dtype=uint, endpoint=True).view(fmt.dtype)
        bad = ~np.isfinite(x)
    return x


def _significands(rng, n, fmt):
    frac = fmt.precision_bits - 1
    return 1.0 + rng.integers(0, 1 << frac, n, dtype=np.int64) * 2.0**-frac


def gap_pairs(rng: np.random.Generator, n: int, fmt: FpFormat, max_gap: int = 30) -> tuple[np.ndarray, np.ndarray]:
    """Pairs whose binary exponents differ by 0..max_gap, at every magnitude.

    One third spread over the whole normal range, one third pressed against
    the overflow end (larger operand up to ``f_max/2``) and one third against
    the underflow end (smaller operand down to ``f_min``). Signs and operand
    order are random.
    """
    gap = rng.integers(0, max_gap + 1, n)
    lo_a = fmt.emin + gap
    hi_a = fmt.emax - 1
    region = rng.integers(0, 3, n)
    ea = np.where(region == 0, rng.integers(lo_a, hi_a + 1),
                  np.where(region == 1, rng.integers(hi_a - 8, hi_a + 1, n),
                           lo_a + rng.integers(0, 9, n)))
    a = np.ldexp(_significands(rng, n, fmt), ea)
    b = np.ldexp(_significands(rng, n, fmt), ea - gap)
    a = np.where(rng.integers(0, 2, n) == 1, -a, a).astype(fmt.dtype)
    b = np.where(rng.integers(0, 2, n) == 1, -b, b).astype(fmt.dtype)
    swap = rng.integers(0, 2, n) == 1
    return np.where(swap, b, a), np.where(swap, a, b)


def pythagorean_triples(limit: int = 1 << 26, count: int | None = None,
                        rng: np.random.Generator | None = None) -> np.ndarray:
    """Primitive triples ``(p, q, r)`` with ``r < limit`` from Euclid's formula.

    With ``count`` and ``rng`` set, returns ``count`` triples chosen at random,
    each multiplied by a random integer keeping ``r < limit``.
    """
    if count is None:
        out = []
        m = 2
        while m * m + 1 < limit:
            for k in range(1 + m % 2, m, 2):
                r = m * m + k * k
                if r >= limit:
                    break
                if math.gcd(m, k) == 1:
                    out.append((m * m - k * k, 2 * m * k, r))
            m += 1
        return np.array(out, dtype=np.int64)
    out = []
    while len(out) < count:
        m = int(rng.integers(2, math.isqrt(limit)))
        k = int(rng.integers(1, m))
        if (m - k) % 2 == 0 or math.gcd(m, k) != 1 or m * m + k * k >= limit:
            continue
        p, q, r = m * m - k * k, 2 * m * k, m * m + k * k
        mult = int(rng.integers(1, (limit - 1) // r + 1))
        out.append((p * mult, q * mult, r * mult))
    return np.array(out, dtype=np.int64)


def _first_mismatch(h, ref):
    bad = np.flatnonzero(h.view(_int_view(h)) != ref.view(_int_view(ref)))
    return int(bad[0]) if bad.size else None


def _int_view(x):
    return np.int32 if x.dtype == np.float32 else np.int64


def check_symmetry(samples: int, seed: int, fmt: FpFormat) -> CheckResult:
    """k(x, y) == k(y, x) == k(-x, y) == k(x, -y), bit for bit."""
    rng = _rng(seed, 1)
    n = samples // 2
    x = np.concatenate([random_finite(rng, n, fmt), gap_pairs(rng, samples - n, fmt)[0]])
    y = np.concatenate([random_finite(rng, n, fmt), gap_pairs(rng, samples - n, fmt)[1]])
    for algo in _algorithms(fmt):
        h = _evaluate(algo, x, y)
        for label, (u, v) in {"swap": (y, x), "negate x": (-x, y), "negate y": (x, -y)}.items():
            i = _first_mismatch(h, _evaluate(algo, u, v))
            if i is not None:
                return CheckResult("symmetry", samples, f"{algo} {label} at ({hexf(x[i])}, {hexf(y[i])})")
    return CheckResult("symmetry", samples)


def check_scale_covariance(samples: int, seed: int, fmt: FpFormat) -> CheckResult:
    """k(x*2**s, y*2**s) == k(x, y)*2**s for the four shared-prelude kernels."""
    rng = _rng(seed, 2)
    span = (fmt.emax - 40) // 2
    base = rng.integers(-span // 2, span // 2 + 1, samples)
    s = rng.integers(-span // 2, span // 2 + 1, samples)
    x = np.ldexp(rng.standard_normal(samples), base).astype(fmt.dtype)
    y = np.ldexp(rng.standard_normal(samples) * np.exp2(-rng.integers(0, 30, samples)), base).astype(fmt.dtype)
    xs, ys = np.ldexp(x, s).astype(fmt.dtype), np.ldexp(y, s).astype(fmt.dtype)
    for algo in MYHYPOT_ALGORITHMS:
        h = np.ldexp(_evaluate(algo, x, y), s).astype(fmt.dtype)
        i = _first_mismatch(_evaluate(algo, xs, ys), h)
        if i is not None:
            return CheckResult("scale covariance", samples,
                               f"{algo} at ({hexf(x[i])}, {hexf(y[i])}) scaled by 2**{int(s[i])}")
    return CheckResult("scale covariance", samples)


def check_ulp_bounds(samples: int, seed: int, fmt: FpFormat) -> CheckResult:
    """At most 1 ulp from the oracle (2 for julia11), gaps 0-30, all magnitudes."""
    rng = _rng(seed, 3)
    a, b = gap_pairs(rng, samples, fmt)
    ref = oracle_array(a, b)
    for algo in _algorithms(fmt):
        d = ulp_gap_array(_evaluate(algo, a, b), ref)
        bad = np.flatnonzero(d > ULP_BOUND[algo])
        if bad.size:
            i = int(bad[0])
            return CheckResult("ulp bound", samples,
                               f"{algo} off by {int(d[i])} ulp at ({hexf(a[i])}, {hexf(b[i])})")
    return CheckResult("ulp bound", samples)


def wide_pairs(rng: np.random.Generator, n: int, fmt: FpFormat) -> tuple[np.ndarray, np.ndarray]:
    """Pairs with ``ay <= ax*wide_threshold``; a quarter sit exactly on the cut."""
    T = fmt.dtype.type
    ea = rng.integers(fmt.emin + 60, fmt.emax, n)
    ax = np.ldexp(_significands(rng, n, fmt), ea).astype(fmt.dtype)
    cut = ax * T(fmt.wide_threshold)
    u = rng.random(n)
    ay = np.where(rng.integers(0, 4, n) == 0, cut, (cut * u).astype(fmt.dtype))
    ay = np.where(ay > cut, cut, ay).astype(fmt.dtype)
    return ax, ay


def check_wide_branch(samples: int, seed: int, fmt: FpFormat) -> CheckResult:
    """Below the wide threshold each shared-prelude kernel returns ax, and ax is
    the correctly rounded answer."""
    rng = _rng(seed, 4)
    ax, ay = wide_pairs(rng, samples, fmt)
    i = _first_mismatch(oracle_array(ax, ay), ax)
    if i is not None:
        return CheckResult("wide branch", samples, f"oracle != ax at ({hexf(ax[i])}, {hexf(ay[i])})")
    for algo in MYHYPOT_ALGORITHMS:
        for x, y in ((ax, ay), (ay, -ax)):
            i = _first_mismatch(_evaluate(algo, x, y), ax)
            if i is not None:
                return CheckResult("wide branch", samples, f"{algo} != ax at ({hexf(x[i])}, {hexf(y[i])})")
    return CheckResult("wide branch", samples)


def check_no_spurious_exceptions(samples: int, seed: int, fmt: FpFormat) -> CheckResult:
    """Near both ends of the range no kernel returns inf or zero unless the
    oracle does."""
    rng = _rng(seed, 9)
    a, b = gap_pairs(rng, samples, fmt)
    ref = oracle_array(a, b)
    for algo in _algorithms(fmt):
        h = _evaluate(algo, a, b)
        bad = np.flatnonzero(((h == 0) | np.isinf(h)) & (h != ref))
        if bad.size:
            i = int(bad[0])
            return CheckResult("no spurious exceptions", samples,
                               f"{algo} gave {h[i]} at ({hexf(a[i])}, {hexf(b[i])})")
    return CheckResult("no spurious exceptions", samples)


def check_special_values(samples: int, seed: int, fmt: FpFormat) -> CheckResult:
    """hypot(+-inf, anything) = +inf; hypot(nan, finite) = nan; hypot(0, 0) = 0."""
    T = fmt.dtype.type
    rng = _rng(seed, 5)
    others = np.concatenate([random_finite(rng, 64, fmt), np.array([np.nan, np.inf, -np.inf, 0.0, -0.0], fmt.dtype)])
    finite = random_finite(rng, 64, fmt)
    cases = 0
    for algo in _algorithms(fmt):
        for inf in (T(np.inf), T(-np.inf)):
            for o in others:
                for x, y in ((inf, o), (o, inf)):
                    h = _evaluate(algo, np.array([x]), np.array([y]))[0]
                    cases += 1
                    if not (np.isinf(h) and h > 0):
                        return CheckResult("special values", cases, f"{algo}({hexf(x)}, {hexf(y)}) = {h}")
        for f in finite:
            for x, y in ((T(np.nan), f), (f, T(np.nan))):
                h = _evaluate(algo, np.array([x]), np.array([y]))[0]
                cases += 1
                if not np.isnan(h):
                    return CheckResult("special values", cases, f"{algo}({hexf(x)}, {hexf(y)}) = {h}")
        for x, y in ((0.0, 0.0), (-0.0, 0.0), (0.0, -0.0), (-0.0, -0.0)):
            h = _evaluate(algo, np.array([x], fmt.dtype), np.array([y], fmt.dtype))[0]
            cases += 1
            if h != 0:
                return CheckResult("special values", cases, f"{algo}({x}, {y}) = {h}")
    return CheckResult("special values", cases)


def check_exact_triples(samples: int, seed: int, fmt: FpFormat) -> CheckResult:
    """Scaled Pythagorean triples: the oracle reports an exact root and every
    kernel except julia11 (which rounds b/a) returns it."""
    fmt = format_for("binary64")
    rng = _rng(seed, 6)
    n = max(1, min(samples, 500))
    t = pythagorean_triples(1 << 26, n, rng).astype(np.float64)
    s = rng.integers(-900, 900, n)
    p, q, r = (np.ldexp(t[:, i], s) for i in range(3))
    for i in range(n):
        v = oracle_verdict(p[i], q[i], fmt)
        if v.direction != "exact" or v.result != r[i]:
            return CheckResult("exact triples", n, f"oracle {v} at ({hexf(p[i])}, {hexf(q[i])})")
    for algo in ALGORITHMS:
        if algo is AlgorithmId.JULIA11:
            continue
        i = _first_mismatch(_evaluate(algo, p, q), r)
        if i is not None:
            return CheckResult("exact triples", n, f"{algo} at ({hexf(p[i])}, {hexf(q[i])})")
    return CheckResult("exact triples", n)


def _dyadic(x) -> tuple[int, int]:
    n, d = float(x).as_integer_ratio()
    return n, 1 - d.bit_length()


def _square_cmp(mid_n: int, mid_e: int, s_n: int, s_e: int) -> int:
    # sign of (mid_n * 2**mid_e)**2 - s_n * 2**s_e
    e2 = 2 * mid_e
    lhs, rhs = mid_n * mid_n, s_n
    if e2 >= s_e:
        lhs <<= e2 - s_e
    else:
        rhs <<= s_e - e2
    return (lhs > rhs) - (lhs < rhs)


def bracket_violation(a, b, r, fmt: FpFormat) -> str | None:
    """Why ``r`` is not the nearest-even float to ``sqrt(a*a + b*b)``, or None.

    The exact radicand must lie between the squares of the midpoints from
    ``r`` to its two neighbours; on a boundary ``r`` must have an even
    significand. Above ``f_max`` the missing neighbour is taken one ulp up,
    as rounding to an unbounded exponent range would.
    """
    na, ea = _dyadic(a)
    nb, eb = _dyadic(b)
    s_e = min(2 * ea, 2 * eb)
    s_n = ((na * na) << (2 * ea - s_e)) + ((nb * nb) << (2 * eb - s_e))
    T = fmt.dtype.type
    if np.isinf(r):
        top = T(fmt.f_max)
        # f_max has an odd significand, so a tie at this midpoint overflows
        mid = _midpoint_above(top, np.nextafter(top, T(0)))
        return None if _square_cmp(*mid, s_n, s_e) <= 0 else "inf returned below the overflow midpoint"
    if r == 0:
        return None if s_n == 0 else "zero returned for a non-zero radicand"
    lo = np.nextafter(r, T(0))
    hi = np.nextafter(r, T(np.inf))
    lo_mid = _midpoint(r, lo)
    hi_mid = _midpoint_above(r, lo) if np.isinf(hi) else _midpoint(r, hi)
    even = (int(np.asarray(r).view(_int_view(np.asarray(r)))) & 1) == 0
    c_lo = _square_cmp(*lo_mid, s_n, s_e)
    c_hi = _square_cmp(*hi_mid, s_n, s_e)
    if c_lo > 0 or (c_lo == 0 and not even):
        return "radicand below the lower midpoint"
    if c_hi < 0 or (c_hi == 0 and not even):
        return "radicand above the upper midpoint"
    return None


def squared_neighbor_violation(a, b, r, fmt: FpFormat) -> str | None:
    """Literal squared-neighbour test of a claimed hypotenuse ``r``.

    Accepts ``r`` when ``|r*r - S| <= |n*n - S|`` for both neighbours ``n``
    of ``r``, with equality resolved towards the even significand, where
    ``S = a*a + b*b`` exactly. This is close to, but not the same as, nearest
    rounding of the root: when ``sqrt(S)`` lies just below the midpoint
    above a neighbour, squaring favours the lower candidate. Infinite and
    zero results fall back to :func:`bracket_violation`.
    """
    if np.isinf(r) or r == 0:
        return bracket_violation(a, b, r, fmt)
    na, ea = _dyadic(a)
    nb, eb = _dyadic(b)
    T = fmt.dtype.type
    cands = [r] + [n for n in (np.nextafter(r, T(0)), np.nextafter(r, T(np.inf))) if np.isfinite(n)]
    dy = [_dyadic(c) for c in cands]
    e = min([2 * ea, 2 * eb] + [2 * ce for _, ce in dy])
    s = ((na * na) << (2 * ea - e)) + ((nb * nb) << (2 * eb - e))
    dist = [abs(((cn * cn) << (2 * ce - e)) - s) for cn, ce in dy]
    odd = int(np.asarray(r).view(_int_view(np.asarray(r)))) & 1
    for d in dist[1:]:
        if dist[0] > d or (dist[0] == d and odd):
            return "a neighbour's square lies closer to the radicand"
    return None


def _midpoint(x, y) -> tuple[int, int]:
    # exact (x + y) / 2
    xn, xe = _dyadic(x)
    yn, ye = _dyadic(y)
    e = min(xe, ye)
    return (xn << (xe - e)) + (yn << (ye - e)), e - 1


def _midpoint_above(x, below) -> tuple[int, int]:
    # exact x + (x - below) / 2
    xn, xe = _dyadic(x)
    bn, be = _dyadic(below)
    e = min(xe, be)
    xi, bi = xn << (xe - e), bn << (be - e)
    return 3 * xi - bi, e - 1


def check_oracle_brackets(samples: int, seed: int, fmt: FpFormat) -> CheckResult:
    """The oracle's result is nearest-even, judged by exact midpoint squares."""
    rng = _rng(seed, 7)
    n = samples // 2
    a = np.concatenate([random_finite(rng, n, fmt), gap_pairs(rng, samples - n, fmt)[0]])
    b = np.concatenate([random_finite(rng, n, fmt), gap_pairs(rng, samples - n, fmt)[1]])
    r = oracle_array(a, b)
    for i in range(samples):
        why = bracket_violation(a[i], b[i], r[i], fmt)
        if why:
            return CheckResult("oracle optimality", samples, f"{why} at ({hexf(a[i])}, {hexf(b[i])})")
    return CheckResult("oracle optimality", samples)


def naive_sum_pairs(rng: np.random.Generator, n: int, fmt: FpFormat) -> tuple[np.ndarray, np.ndarray]:
    """Pairs whose squares and sum stay in the normal range."""
    quarter = (fmt.emax - 2) // 2
    e = rng.integers(-quarter // 2, quarter // 2, n)
    a = np.ldexp(rng.standard_normal(n), e).astype(fmt.dtype)
    b = np.ldexp(rng.standard_normal(n), e - rng.integers(0, 40, n)).astype(fmt.dtype)
    return a, b


def check_naive_sum_bound(samples: int, seed: int, fmt: FpFormat) -> CheckResult:
    """z = a*a + b*b in floating point satisfies |z - (a^2 + b^2)| <= eps*z."""
    rng = _rng(seed, 8)
    a, b = naive_sum_pairs(rng, samples, fmt)
    z = a * a + b * b
    eps_e = 1 - fmt.precision_bits
    for i in range(samples):
        na, ea = _dyadic(a[i])
        nb, eb = _dyadic(b[i])
        nz, ez = _dyadic(z[i])
        e = min(2 * ea, 2 * eb, ez + eps_e)
        exact = ((na * na) << (2 * ea - e)) + ((nb * nb) << (2 * eb - e))
        zi = nz << (ez - e)
        if abs(zi - exact) > (nz << (ez + eps_e - e)):
            return CheckResult("naive sum bound", samples, f"at ({hexf(a[i])}, {hexf(b[i])})")
    return CheckResult("naive sum bound", samples)


CHECKS: dict[str, Callable[[int, int, FpFormat], CheckResult]] = {
    "symmetry": check_symmetry,
    "scale covariance": check_scale_covariance,
    "ulp bound": check_ulp_bounds,
    "wide branch": check_wide_branch,
    "no spurious exceptions": check_no_spurious_exceptions,
    "special values": check_special_values,
    "exact triples": check_exact_triples,
    "oracle optimality": check_oracle_brackets,
    "naive sum bound": check_naive_sum_bound,
}


def run_all(samples: int, seed: int, formats=("binary64", "binary32"), stop_on_failure: bool = True):
    """Yield results of every check in every format."""
    for name in formats:
        fmt = format_for(name)
        for check_name, check in CHECKS.items():
            if check_name == "exact triples" and name != "binary64":
                continue
            result = check(samples, seed, fmt)
            if name != "binary64":
                result = CheckResult(f"{result.name} [{name}]", result.checked, result.failure)
            yield result
            if stop_on_failure and not result.passed:
                return
