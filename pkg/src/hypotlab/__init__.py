"""Accuracy harness for floating-point hypot kernels.

Six ways of computing ``sqrt(a*a + b*b)`` in binary64 (and, except for the
C-library port, binary32), an exact integer oracle to grade them against,
and the seeded experiments that tabulate how often each one misses.
"""

from .fpformat import FORMATS, FpFormat, format_for, next_down, next_up, ulp_distance
from .kernels import (
    ALGORITHMS,
    AlgorithmId,
    clib,
    corrected_fused,
    corrected_unfused,
    dispatch,
    evaluate,
    julia11,
    naive_fused,
    naive_unfused,
)
from .oracle import oracle_hypot, oracle_verdict

__version__ = "0.1.0"

__all__ = [
    "FORMATS",
    "FpFormat",
    "format_for",
    "next_up",
    "next_down",
    "ulp_distance",
    "ALGORITHMS",
    "AlgorithmId",
    "dispatch",
    "evaluate",
    "julia11",
    "clib",
    "naive_unfused",
    "naive_fused",
    "corrected_unfused",
    "corrected_fused",
    "oracle_hypot",
    "oracle_verdict",
]
