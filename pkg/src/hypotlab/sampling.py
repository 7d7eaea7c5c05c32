"""Seeded operand streams for the accuracy experiments.

A stream is an infinite sequence of pairs cut into fixed blocks of
``BLOCK`` pairs. Block ``i`` draws from its own PCG64 generator seeded by
``SeedSequence(seed, spawn_key=(kind, gap_n, i))``, so the pair at any
global index is the same no matter how the stream is sharded.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterator

import numpy as np

from .fpformat import format_for

__all__ = ["SamplerSpec", "BLOCK", "generate", "iter_chunks", "split"]

BLOCK = 1 << 16

_KIND_CODE = {"normal_pair": 0, "exponent_gap": 1}


@dataclass(frozen=True)
class SamplerSpec:
    """Which pairs to draw.

    ``normal_pair`` draws ``a, b ~ N(0, 1)`` independently. ``exponent_gap``
    draws ``a`` uniform on ``[2**gap_n, 2**(gap_n+1))`` and ``b`` uniform on
    ``[1, 2)``, each with uniformly random significand bits. ``offset`` is the
    global index of the first pair, used for sharding.
    """

    kind: str = "normal_pair"
    count: int = 10**6
    seed: int = 0xB0C4E5
    gap_n: int = 0
    offset: int = 0
    format: str = "binary64"

    def __post_init__(self):
        if self.kind not in _KIND_CODE:
            raise ValueError(f"unknown sampler kind {self.kind!r}")
        if self.count < 0 or self.offset < 0:
            raise ValueError("count and offset must be non-negative")
        if self.gap_n < 0:
            raise ValueError("gap_n must be >= 0")
        if not 0 <= self.seed < 1 << 64:
            raise ValueError("seed must fit in 64 bits")
        format_for(self.format)


def _block(spec: SamplerSpec, index: int) -> tuple[np.ndarray, np.ndarray]:
    ss = np.random.SeedSequence(spec.seed, spawn_key=(_KIND_CODE[spec.kind], spec.gap_n, index))
    rng = np.random.Generator(np.random.PCG64(ss))
    fmt = format_for(spec.format)
    if spec.kind == "normal_pair":
        a = rng.standard_normal(BLOCK)
        b = rng.standard_normal(BLOCK)
    else:
        frac_bits = fmt.precision_bits - 1
        hidden = np.int64(1) << frac_bits
        ka = rng.integers(0, hidden, BLOCK, dtype=np.int64)
        kb = rng.integers(0, hidden, BLOCK, dtype=np.int64)
        # exact: integer significands below 2**53 scaled by powers of two
        a = np.ldexp((hidden + ka).astype(np.float64), spec.gap_n - frac_bits)
        b = np.ldexp((hidden + kb).astype(np.float64), -frac_bits)
    return a.astype(fmt.dtype), b.astype(fmt.dtype)


def iter_chunks(spec: SamplerSpec) -> Iterator[tuple[np.ndarray, np.ndarray]]:
    """Yield the sampler's pairs as consecutive ``(a, b)`` array chunks."""
    start, stop = spec.offset, spec.offset + spec.count
    for index in range(start // BLOCK, -(-stop // BLOCK)):
        lo = max(start - index * BLOCK, 0)
        hi = min(stop - index * BLOCK, BLOCK)
        a, b = _block(spec, index)
        yield a[lo:hi], b[lo:hi]


def generate(spec: SamplerSpec) -> tuple[np.ndarray, np.ndarray]:
    """All ``spec.count`` pairs as two arrays."""
    chunks = list(iter_chunks(spec))
    dtype = format_for(spec.format).dtype
    if not chunks:
        return np.empty(0, dtype), np.empty(0, dtype)
    return np.concatenate([c[0] for c in chunks]), np.concatenate([c[1] for c in chunks])


def split(spec: SamplerSpec, shards: int) -> list[SamplerSpec]:
    """Cut a spec into ``shards`` contiguous, disjoint index ranges."""
    if shards < 1:
        raise ValueError("shards must be >= 1")
    if shards == 1:
        return [spec]
    base, extra = divmod(spec.count, shards)
    out = []
    offset = spec.offset
    for i in range(shards):
        n = base + (i < extra)
        out.append(replace(spec, count=n, offset=offset))
        offset += n
    return out
