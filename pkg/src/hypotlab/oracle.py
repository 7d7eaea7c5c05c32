"""Exact, correctly rounded sqrt(a**2 + b**2) by integer arithmetic.

Nothing here touches floating-point arithmetic except the final, exact
conversion of an already rounded integer significand to a float.
"""

from __future__ import annotations

import math
from math import isqrt, ldexp
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .fpformat import FpFormat, format_for, format_of

__all__ = [
    "ExactValue",
    "Direction",
    "RoundingVerdict",
    "exact",
    "exact_sum_of_squares",
    "correctly_rounded_sqrt",
    "round_exact",
    "oracle_hypot",
    "oracle_verdict",
    "oracle_array",
]


@dataclass(frozen=True, order=False)
class ExactValue:
    """Non-negative dyadic rational ``mantissa * 2**exponent``.

    Canonical form: zero is ``(0, 0)``; otherwise the mantissa is odd.
    Two equal values therefore always have equal fields.
    """

    mantissa: int
    exponent: int

    def __post_init__(self):
        if self.mantissa < 0:
            raise ValueError("ExactValue is non-negative")
        if self.mantissa == 0:
            if self.exponent != 0:
                raise ValueError("zero must be stored as (0, 0)")
        elif not self.mantissa & 1:
            raise ValueError("mantissa must be odd; use ExactValue.of")

    @classmethod
    def of(cls, mantissa: int, exponent: int) -> "ExactValue":
        if mantissa == 0:
            return cls(0, 0)
        tz = (mantissa & -mantissa).bit_length() - 1
        return cls(mantissa >> tz, exponent + tz)

    def as_fraction(self):
        from fractions import Fraction

        if self.exponent >= 0:
            return Fraction(self.mantissa << self.exponent)
        return Fraction(self.mantissa, 1 << -self.exponent)


def _split(x) -> tuple[int, int]:
    # |x| = m * 2**e with integer m
    n, d = abs(float(x)).as_integer_ratio()
    return n, 1 - d.bit_length()


def exact(x) -> ExactValue:
    """Exact value of a finite non-negative float."""
    if not math.isfinite(x) or x < 0:
        raise ValueError(f"expected a finite non-negative float, got {x!r}")
    return ExactValue.of(*_split(x))


def exact_sum_of_squares(a, b) -> ExactValue:
    """``a**2 + b**2`` with no rounding at all.

    >>> exact_sum_of_squares(3.0, 4.0)
    ExactValue(mantissa=25, exponent=0)
    """
    if not (math.isfinite(a) and math.isfinite(b)):
        raise ValueError(f"non-finite operand in ({a!r}, {b!r})")
    return ExactValue.of(*_sum_of_squares(float(a), float(b)))


def _sum_of_squares(a: float, b: float) -> tuple[int, int]:
    # (m, e) with a*a + b*b == m * 2**e; not normalized
    na, da = a.as_integer_ratio()
    nb, db = b.as_integer_ratio()
    ea = da.bit_length()
    eb = db.bit_length()
    if ea >= eb:
        return na * na + ((nb * nb) << (2 * (ea - eb))), 2 - 2 * ea
    return ((na * na) << (2 * (eb - ea))) + nb * nb, 2 - 2 * eb


class Direction(str, Enum):
    EXACT = "exact"
    ROUNDED_DOWN = "rounded_down"
    ROUNDED_UP = "rounded_up"


@dataclass(frozen=True)
class RoundingVerdict:
    result: float
    direction: Direction
    is_tie: bool


_EXACT, _DOWN, _UP = 0, 1, 2
_DIRECTIONS = (Direction.EXACT, Direction.ROUNDED_DOWN, Direction.ROUNDED_UP)


def _round(q, exponent, sticky, p, emin, emax):
    # -> (significand, ulp exponent, direction code, tie); significand None on overflow
    if q == 0:
        if sticky:
            raise ValueError("sticky fraction below a zero integer part is not resolvable")
        return 0, 0, _EXACT, False
    top = q.bit_length() - 1 + exponent
    ulp_exp = (top if top > emin else emin) - (p - 1)
    shift = ulp_exp - exponent
    if shift <= 0:
        if sticky:
            raise ValueError("no guard bit below the rounding position")
        kept, rem, half = q << -shift, 0, 1
    else:
        kept = q >> shift
        rem = q & ((1 << shift) - 1)
        half = 1 << (shift - 1)
    tie = rem == half and not sticky
    if rem > half or (rem == half and (sticky or kept & 1)):
        kept += 1
        direction = _UP
    elif rem == 0 and not sticky:
        direction = _EXACT
    else:
        direction = _DOWN
    if kept.bit_length() - 1 + ulp_exp > emax:
        return None, 0, _UP, tie
    return kept, ulp_exp, direction, tie


def _sqrt_core(m, e, p, emin, emax):
    if m == 0:
        return 0, 0, _EXACT, False
    if e & 1:
        m <<= 1
        e -= 1
    # isqrt(m * 4**s) must carry >= p + 2 bits, i.e. m * 4**s >= 4**(p+1)
    s = p + 1 - (m.bit_length() - 1) // 2
    if s >= 0:
        m <<= 2 * s
        sticky = False
    else:
        sticky = m & ((1 << (-2 * s)) - 1) != 0
        m >>= -2 * s
    q = isqrt(m)
    return _round(q, e // 2 - s, sticky or q * q != m, p, emin, emax)


def _verdict(rounded, fmt):
    kept, ulp_exp, direction, tie = rounded
    value = math.inf if kept is None else ldexp(kept, ulp_exp)
    return RoundingVerdict(fmt.cast(value), _DIRECTIONS[direction], tie)


def round_exact(q: int, exponent: int, sticky: bool, fmt: FpFormat) -> RoundingVerdict:
    """Round ``(q + f) * 2**exponent`` to nearest-even in ``fmt``.

    ``q`` is a non-negative integer and ``sticky`` says whether the unknown
    fraction ``f`` in ``[0, 1)`` is non-zero. At least one bit of ``q`` must
    lie below the rounding position when ``sticky`` is set.
    """
    return _verdict(_round(q, exponent, sticky, fmt.precision_bits, fmt.emin, fmt.emax), fmt)


def correctly_rounded_sqrt(v: ExactValue, fmt: FpFormat | str = "binary64") -> RoundingVerdict:
    """Nearest-even float to ``sqrt(v)``, decided by an exact integer root.

    The radicand is scaled by an even power of two so that its integer
    square root carries ``precision_bits + 2`` bits or more; the exact
    remainder then serves as the sticky bit.
    """
    if isinstance(fmt, str):
        fmt = format_for(fmt)
    if v.mantissa < 0:
        raise ValueError("negative radicand")
    return _verdict(_sqrt_core(v.mantissa, v.exponent, fmt.precision_bits, fmt.emin, fmt.emax), fmt)


def oracle_verdict(a, b, fmt: FpFormat | None = None) -> RoundingVerdict:
    fmt = fmt or format_of(a)
    return correctly_rounded_sqrt(exact_sum_of_squares(a, b), fmt)


def oracle_hypot(a, b, fmt: FpFormat | None = None):
    """The correctly rounded ``sqrt(a*a + b*b)`` for finite ``a`` and ``b``."""
    return oracle_verdict(a, b, fmt).result


def oracle_array(a: np.ndarray, b: np.ndarray, count_ties: bool = False):
    """Elementwise :func:`oracle_hypot`; the result has the operands' dtype.

    With ``count_ties`` also returns how many pairs had an exact hypotenuse
    lying halfway between two representable values.
    """
    a = np.asarray(a)
    b = np.asarray(b, dtype=a.dtype)
    fmt = format_of(a)
    p, emin, emax = fmt.precision_bits, fmt.emin, fmt.emax
    out = []
    append = out.append
    ties = 0
    for x, y in zip(a.reshape(-1).tolist(), b.reshape(-1).tolist()):
        m, e = _sum_of_squares(x, y)
        kept, ulp_exp, _, tie = _sqrt_core(m, e, p, emin, emax)
        ties += tie
        append(math.inf if kept is None else ldexp(kept, ulp_exp))
    result = np.array(out, dtype=a.dtype).reshape(a.shape)
    return (result, ties) if count_ties else result
