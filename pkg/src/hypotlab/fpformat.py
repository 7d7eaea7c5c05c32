"""Binary floating-point format constants and ulp measurement."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

__all__ = [
    "FpFormat",
    "format_for",
    "format_of",
    "ordered",
    "ordered_array",
    "ulp_distance",
    "ulp_distance_array",
    "ulp_gap_array",
    "next_up",
    "next_down",
    "FORMATS",
]

FORMATS = ("binary32", "binary64")

_INT = {"binary32": (np.int32, np.uint32), "binary64": (np.int64, np.uint64)}


@dataclass(frozen=True)
class FpFormat:
    """Static description of an IEEE 754 binary format.

    All value fields are exact powers of two or correctly rounded constants
    of the format itself, stored as Python floats (binary32 values are
    exactly representable as binary64).
    """

    name: str
    precision_bits: int
    exponent_bits: int
    epsilon: float
    f_min: float
    f_max: float
    wide_threshold: float
    overflow_guard: float
    underflow_guard: float
    rescale: float
    dtype: np.dtype = field(repr=False)

    @property
    def emin(self) -> int:
        return 2 - (1 << (self.exponent_bits - 1))

    @property
    def emax(self) -> int:
        return (1 << (self.exponent_bits - 1)) - 1

    @property
    def bits(self) -> int:
        return 1 + self.exponent_bits + self.precision_bits - 1

    def cast(self, x):
        """Round ``x`` into this format (scalar of the format's numpy type)."""
        return self.dtype.type(x)


@lru_cache(maxsize=None)
def format_for(tag: str) -> FpFormat:
    """Return the :class:`FpFormat` for ``"binary32"`` or ``"binary64"``.

    Derived constants are computed in the format's own arithmetic, the same
    way a generic kernel would compute ``sqrt(eps(T)/2)`` or
    ``eps(sqrt(floatmin(T)))``.
    """
    if tag not in _INT:
        raise ValueError(f"unsupported format {tag!r}; expected one of {FORMATS}")
    dtype = np.dtype(np.float32 if tag == "binary32" else np.float64)
    T = dtype.type
    info = np.finfo(dtype)
    eps = T(info.eps)
    f_min = T(info.tiny)
    f_max = T(info.max)
    two = T(2)
    return FpFormat(
        name=tag,
        precision_bits=int(info.nmant) + 1,
        exponent_bits=int(info.nexp),
        epsilon=float(eps),
        f_min=float(f_min),
        f_max=float(f_max),
        wide_threshold=float(np.sqrt(eps / two)),
        overflow_guard=float(np.sqrt(f_max / two)),
        underflow_guard=float(np.sqrt(f_min)),
        rescale=float(np.spacing(np.sqrt(f_min))),
        dtype=dtype,
    )


def format_of(x) -> FpFormat:
    """Format implied by a scalar or array: binary32 for float32, else binary64."""
    dt = getattr(x, "dtype", None)
    return format_for("binary32" if dt == np.float32 else "binary64")


def _check_finite(*xs):
    for x in xs:
        if not math.isfinite(x):
            raise ValueError(f"ulp measurement needs finite operands, got {x!r}")


def ordered(x, fmt: FpFormat | None = None) -> int:
    """Map a float onto the integers monotonically.

    Non-negative floats map to their bit pattern; a negative float with
    magnitude pattern ``m`` maps to ``-m - 1``. Adjacent floats therefore map
    to adjacent integers, and ``-0.0`` sits one step below ``+0.0``.
    """
    fmt = fmt or format_of(x)
    sint, _ = _INT[fmt.name]
    raw = int(np.asarray(x, dtype=fmt.dtype).view(sint))
    if raw < 0:
        return -(raw & ((1 << (fmt.bits - 1)) - 1)) - 1
    return raw


def ordered_array(xs: np.ndarray) -> np.ndarray:
    """Vectorized :func:`ordered`; returns int64 for both formats."""
    xs = np.asarray(xs)
    sint, _ = _INT[format_of(xs).name]
    raw = xs.view(sint).astype(np.int64)
    mag_mask = np.int64((1 << (8 * xs.dtype.itemsize - 1)) - 1)
    return np.where(raw < 0, -(raw & mag_mask) - 1, raw)


def ulp_distance(computed, reference) -> int:
    """Signed count of representable steps from ``reference`` to ``computed``.

    Zero exactly when the two are bit-identical. Both operands must be
    finite and share a format.

    >>> ulp_distance(1.0 + 2.0**-52, 1.0)
    1
    """
    _check_finite(computed, reference)
    fmt = format_of(computed)
    if format_of(reference) is not fmt:
        raise ValueError("operands belong to different formats")
    return ordered(computed, fmt) - ordered(reference, fmt)


def ulp_distance_array(computed: np.ndarray, reference: np.ndarray) -> np.ndarray:
    """Vectorized :func:`ulp_distance` as int64.

    Binary64 distances between far-apart operands of opposite sign can
    exceed the int64 range; those saturate to ``+-(2**63 - 1)``.
    """
    computed = np.asarray(computed)
    reference = np.asarray(reference)
    if computed.dtype != reference.dtype:
        raise ValueError("operands belong to different formats")
    if not (np.isfinite(computed).all() and np.isfinite(reference).all()):
        raise ValueError("ulp measurement needs finite operands")
    return _saturating_diff(ordered_array(computed), ordered_array(reference))


def ulp_gap_array(computed: np.ndarray, reference: np.ndarray) -> np.ndarray:
    """``|ulp distance|`` for grading results, tolerant of non-finite values.

    Infinities count as one step past ``+-f_max``; a NaN on either side
    (unless both are NaN) is as far away as possible, ``2**63 - 1``.
    """
    computed = np.asarray(computed)
    reference = np.asarray(reference)
    if computed.dtype != reference.dtype:
        raise ValueError("operands belong to different formats")
    d = np.abs(_saturating_diff(ordered_array(computed), ordered_array(reference)))
    nan_c, nan_r = np.isnan(computed), np.isnan(reference)
    d[nan_c != nan_r] = np.iinfo(np.int64).max
    d[nan_c & nan_r] = 0
    return d


def _saturating_diff(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    with np.errstate(over="ignore"):
        d = x - y
    # wrapped iff the operands differ in sign and the result has y's sign
    wrapped = ((x < 0) != (y < 0)) & ((d < 0) != (x < 0))
    top = np.int64(np.iinfo(np.int64).max)
    return np.where(wrapped, np.where(x < 0, -top, top), d)


def next_up(x):
    """Smallest representable value above finite ``x`` (``inf`` past ``f_max``)."""
    _check_finite(x)
    fmt = format_of(x)
    with np.errstate(over="ignore"):
        return fmt.cast(np.nextafter(fmt.cast(x), fmt.cast(np.inf)))


def next_down(x):
    """Largest representable value below finite ``x`` (``-inf`` past ``-f_max``)."""
    _check_finite(x)
    fmt = format_of(x)
    with np.errstate(over="ignore"):
        return fmt.cast(np.nextafter(fmt.cast(x), fmt.cast(-np.inf)))
