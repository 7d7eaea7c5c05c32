"""The six hypot kernels.

Each kernel is written once as plain Python over scalars of a single format
and then compiled with numba. The interpreted originals stay available as
:func:`reference_kernel` so the compiled code can be checked against them
bit for bit.

``julia11`` is the textbook rescaled form ``a*sqrt(1 + (b/a)**2)``; ``clib``
is a port of the long-lived C library ``__ieee754_hypot`` (binary64 only);
the remaining four share a prelude that handles special values, returns the
larger operand when the smaller one cannot affect the rounded result, and
rescales by an exact power of two near overflow or underflow.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Callable, Union

import numpy as np
from numba import njit
from numba.extending import register_jitable

from ._native import bits_float, float_bits, fma
from .fpformat import FpFormat, format_for, format_of

__all__ = [
    "AlgorithmId",
    "ALGORITHMS",
    "MYHYPOT_ALGORITHMS",
    "KernelPrelude",
    "EarlyReturn",
    "prelude",
    "julia11",
    "clib",
    "naive_unfused",
    "naive_fused",
    "corrected_unfused",
    "corrected_fused",
    "dispatch",
    "get_kernel",
    "array_kernel",
    "reference_kernel",
    "evaluate",
    "supported",
]


class AlgorithmId(str, Enum):
    JULIA11 = "julia11"
    CLIB = "clib"
    NAIVE_UNFUSED = "naive_unfused"
    NAIVE_FUSED = "naive_fused"
    CORRECTED_UNFUSED = "corrected_unfused"
    CORRECTED_FUSED = "corrected_fused"

    def __str__(self):
        return self.value


ALGORITHMS = tuple(AlgorithmId)
MYHYPOT_ALGORITHMS = (
    AlgorithmId.NAIVE_UNFUSED,
    AlgorithmId.NAIVE_FUSED,
    AlgorithmId.CORRECTED_UNFUSED,
    AlgorithmId.CORRECTED_FUSED,
)


@dataclass(frozen=True)
class KernelPrelude:
    ax: float
    ay: float
    scale: float


@dataclass(frozen=True)
class EarlyReturn:
    value: float


def supported(algo: AlgorithmId | str, fmt: FpFormat | str) -> bool:
    name = fmt if isinstance(fmt, str) else fmt.name
    return _key(algo) is not AlgorithmId.CLIB or name == "binary64"


def _build(fmt: FpFormat) -> dict:
    T = fmt.dtype.type
    ZERO, ONE, TWO, FOUR = T(0), T(1), T(2), T(4)
    INF = T(np.inf)
    WIDE = T(fmt.wide_threshold)
    OVERFLOW_GUARD = T(fmt.overflow_guard)
    UNDERFLOW_GUARD = T(fmt.underflow_guard)
    RESCALE = T(fmt.rescale)
    INV_RESCALE = ONE / RESCALE

    @register_jitable
    def _prelude(x, y):
        # -> (done, value, ax, ay, scale)
        if np.isinf(x) or np.isinf(y):
            return True, INF, ZERO, ZERO, ONE
        if np.isnan(x) or np.isnan(y):
            return True, x + y, ZERO, ZERO, ONE
        ax = abs(x)
        ay = abs(y)
        if ay > ax:
            ax, ay = ay, ax
        # also catches ay == 0
        if ay <= ax * WIDE:
            return True, ax, ax, ay, ONE
        if ax > OVERFLOW_GUARD:
            ax = ax * RESCALE
            ay = ay * RESCALE
            scale = INV_RESCALE
        elif ay < UNDERFLOW_GUARD:
            ax = ax / RESCALE
            ay = ay / RESCALE
            scale = RESCALE
        else:
            scale = ONE
        return False, ZERO, ax, ay, scale

    def julia11(x, y):
        if np.isinf(x) or np.isinf(y):
            return INF
        if np.isnan(x) or np.isnan(y):
            return x + y
        a = abs(x)
        b = abs(y)
        if b > a:
            a, b = b, a
        if a == ZERO:
            return ZERO
        r = b / a
        return a * np.sqrt(ONE + r * r)

    def naive_unfused(x, y):
        done, h, ax, ay, scale = _prelude(x, y)
        if done:
            return h
        return np.sqrt(ax * ax + ay * ay) * scale

    def naive_fused(x, y):
        done, h, ax, ay, scale = _prelude(x, y)
        if done:
            return h
        return np.sqrt(fma(ax, ax, ay * ay)) * scale

    def corrected_unfused(x, y):
        done, h, ax, ay, scale = _prelude(x, y)
        if done:
            return h
        h = np.sqrt(ax * ax + ay * ay)
        if h <= TWO * ay:
            delta = h - ay
            h -= (ax * (TWO * delta - ax) + (delta - TWO * (ax - ay)) * delta) / (TWO * h)
        else:
            delta = h - ax
            h -= (TWO * delta * (ax - TWO * ay) + (FOUR * delta - ay) * ay + delta * delta) / (TWO * h)
        return h * scale

    def corrected_unfused_single_branch(x, y):
        done, h, ax, ay, scale = _prelude(x, y)
        if done:
            return h
        h = np.sqrt(ax * ax + ay * ay)
        delta = h - ax
        h -= (delta * (TWO * (ax - ay)) + (TWO * delta - ay) * ay + delta * delta) / (TWO * h)
        return h * scale

    def corrected_fused(x, y):
        done, h, ax, ay, scale = _prelude(x, y)
        if done:
            return h
        h = np.sqrt(fma(ax, ax, ay * ay))
        h_sq = h * h
        ax_sq = ax * ax
        x = fma(-ay, ay, h_sq - ax_sq) + fma(h, h, -h_sq) - fma(ax, ax, -ax_sq)
        h -= x / (TWO * h)
        return h * scale

    table = {
        AlgorithmId.JULIA11: julia11,
        AlgorithmId.NAIVE_UNFUSED: naive_unfused,
        AlgorithmId.NAIVE_FUSED: naive_fused,
        AlgorithmId.CORRECTED_UNFUSED: corrected_unfused,
        AlgorithmId.CORRECTED_FUSED: corrected_fused,
        "corrected_unfused_single_branch": corrected_unfused_single_branch,
        "_prelude": _prelude,
    }
    if fmt.name == "binary64":
        table[AlgorithmId.CLIB] = _clib
    return table


def _clib(x, y):
    # Port of __ieee754_hypot, operating on the high 32-bit word exactly as
    # the C source does (including its 2**60 wide-operand cut-off).
    ha = (float_bits(x) >> 32) & 0x7FFFFFFF
    hb = (float_bits(y) >> 32) & 0x7FFFFFFF
    if hb > ha:
        a = y
        b = x
        j = ha
        ha = hb
        hb = j
    else:
        a = x
        b = y
    a = abs(a)
    b = abs(b)
    if (ha - hb) > 0x3C00000:  # x/y > 2**60
        return a + b
    k = 0
    if ha > 0x5F300000:  # a > 2**500
        if ha >= 0x7FF00000:  # Inf or NaN
            # original arg order iff result is NaN
            w = abs(x + 0.0) - abs(y + 0.0)
            low = float_bits(a) & 0xFFFFFFFF
            if ((ha & 0xFFFFF) | low) == 0:
                w = a
            low = float_bits(b) & 0xFFFFFFFF
            if ((hb ^ 0x7FF00000) | low) == 0:
                w = b
            return w
        # scale a and b by 2**-600
        ha -= 0x25800000
        hb -= 0x25800000
        k += 600
        a = _set_high_word(a, ha)
        b = _set_high_word(b, hb)
    if hb < 0x20B00000:  # b < 2**-500
        if hb <= 0x000FFFFF:  # subnormal b or 0
            low = float_bits(b) & 0xFFFFFFFF
            if (hb | low) == 0:
                return a
            t1 = bits_float(0x7FD00000 << 32)  # 2**1022
            b *= t1
            a *= t1
            k -= 1022
        else:  # scale a and b by 2**600
            ha += 0x25800000
            hb += 0x25800000
            k -= 600
            a = _set_high_word(a, ha)
            b = _set_high_word(b, hb)
    # medium size a and b
    w = a - b
    if w > b:
        t1 = bits_float(ha << 32)
        t2 = a - t1
        w = np.sqrt(t1 * t1 - (b * (-b) - t2 * (a + t1)))
    else:
        a = a + a
        y1 = bits_float(hb << 32)
        y2 = b - y1
        t1 = bits_float((ha + 0x00100000) << 32)
        t2 = a - t1
        w = np.sqrt(t1 * y1 - (w * (-w) - (t1 * y2 + t2 * b)))
    if k != 0:
        t1 = bits_float((0x3FF00000 + (k << 20)) << 32)
        return t1 * w
    return w


@register_jitable
def _set_high_word(d, hi):
    return bits_float((hi << 32) | (float_bits(d) & 0xFFFFFFFF))


@lru_cache(maxsize=None)
def _reference_table(fmt_name: str) -> dict:
    return _build(format_for(fmt_name))


@lru_cache(maxsize=None)
def _compiled(fmt_name: str, algo) -> Callable:
    return njit(_reference_table(fmt_name)[algo], cache=True)


def _make_loop(kernel):
    # Capture the plain source function rather than its dispatcher: numba keys
    # the on-disk cache on the pickled closure, and dispatchers pickle with a
    # fresh id in every process.
    kernel = register_jitable(kernel)

    def loop(xs, ys, out):
        for i in range(xs.size):
            out[i] = kernel(xs[i], ys[i])

    return njit(loop, cache=True)


@lru_cache(maxsize=None)
def _compiled_loop(fmt_name: str, algo) -> Callable:
    return _make_loop(_reference_table(fmt_name)[algo])


def _key(algo):
    if algo == "corrected_unfused_single_branch":
        return algo
    return AlgorithmId(algo)


def _check(algo, fmt_name):
    if algo is AlgorithmId.CLIB and fmt_name != "binary64":
        raise ValueError("clib is defined for binary64 only")


def get_kernel(algo: AlgorithmId | str, fmt: FpFormat | str = "binary64") -> Callable:
    """Compiled scalar kernel for ``algo`` in ``fmt``."""
    name = fmt if isinstance(fmt, str) else fmt.name
    algo = _key(algo)
    _check(algo, name)
    return _compiled(name, algo)


def array_kernel(algo: AlgorithmId | str, fmt: FpFormat | str = "binary64") -> Callable:
    """Compiled ``loop(xs, ys, out)`` applying the kernel over 1-D arrays."""
    name = fmt if isinstance(fmt, str) else fmt.name
    algo = _key(algo)
    _check(algo, name)
    return _compiled_loop(name, algo)


def reference_kernel(algo: AlgorithmId | str, fmt: FpFormat | str = "binary64") -> Callable:
    """Interpreted (uncompiled) version of the same kernel source."""
    name = fmt if isinstance(fmt, str) else fmt.name
    algo = _key(algo)
    _check(algo, name)
    return _reference_table(name)[algo]


def prelude(x, y, fmt: FpFormat | None = None) -> Union[EarlyReturn, KernelPrelude]:
    """Shared entry logic of the four corrected/naive kernels.

    Returns :class:`EarlyReturn` for infinities (``+inf``, even alongside a
    NaN), NaNs, and operands so far apart that the larger one is already the
    correctly rounded answer. Otherwise returns the ordered magnitudes
    after any power-of-two rescaling, with the factor that undoes it.
    """
    fmt = fmt or format_of(x)
    T = fmt.dtype.type
    done, value, ax, ay, scale = _reference_table(fmt.name)["_prelude"](T(x), T(y))
    if done:
        return EarlyReturn(value)
    return KernelPrelude(ax, ay, scale)


def _as_pair(x, y):
    fmt = format_of(x)
    if format_of(y) is not fmt:
        raise TypeError("both operands must share a format")
    if fmt.name == "binary64":
        return fmt, float(x), float(y)
    return fmt, x, y


def dispatch(algo: AlgorithmId | str, x, y):
    """Evaluate ``algo`` on one pair; the format follows the operand type."""
    fmt, x, y = _as_pair(x, y)
    h = get_kernel(algo, fmt)(x, y)
    # numba boxes float32 results as Python floats
    return fmt.cast(h) if fmt.name == "binary32" else h


def _scalar(algo):
    def kernel(x, y):
        return dispatch(algo, x, y)

    kernel.__name__ = kernel.__qualname__ = str(algo)
    kernel.__doc__ = f"hypot via the {algo} algorithm; operands may be float or numpy.float32."
    return kernel


julia11 = _scalar(AlgorithmId.JULIA11)
clib = _scalar(AlgorithmId.CLIB)
naive_unfused = _scalar(AlgorithmId.NAIVE_UNFUSED)
naive_fused = _scalar(AlgorithmId.NAIVE_FUSED)
corrected_unfused = _scalar(AlgorithmId.CORRECTED_UNFUSED)
corrected_fused = _scalar(AlgorithmId.CORRECTED_FUSED)


def evaluate(algo: AlgorithmId | str, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Run a compiled kernel elementwise over two equal-length arrays."""
    xs = np.ascontiguousarray(xs)
    ys = np.ascontiguousarray(ys, dtype=xs.dtype)
    if xs.shape != ys.shape:
        raise ValueError("operand arrays differ in shape")
    fmt = format_of(xs)
    out = np.empty_like(xs)
    array_kernel(algo, fmt)(xs.ravel(), ys.ravel(), out.ravel())
    return out
