"""Single-rounding fused multiply-add and binary64 bit casts.

Every helper here has two implementations sharing one name: a plain Python
one used when kernels run interpreted, and a numba lowering used when the
same kernel source is compiled. The numba side emits ``llvm.fma`` (hardware
``vfmadd`` where available, otherwise a correctly rounded libm call) and raw
``bitcast`` instructions.
"""

import ctypes
import ctypes.util
import math
import struct

import numpy as np
from llvmlite import ir
from numba import types
from numba.extending import intrinsic, overload

__all__ = ["fma", "float_bits", "bits_float"]

_libm = ctypes.CDLL(ctypes.util.find_library("m") or "libm.so.6")
_libm.fma.restype = ctypes.c_double
_libm.fma.argtypes = (ctypes.c_double, ctypes.c_double, ctypes.c_double)
_c_fma = _libm.fma

_pack_d = struct.Struct("<d")
_pack_q = struct.Struct("<q")


def _fma32(a, b, c):
    # a*b is exact in binary64 (24+24 <= 53 bits). The sum is rounded to odd
    # in binary64, after which a single rounding to binary32 is correct
    # because 53 >= 2*24 + 2.
    p = float(a) * float(b)
    c = float(c)
    s = p + c
    if math.isfinite(s):
        z = s - p
        err = (p - (s - z)) + (c - z)
        if err != 0.0 and _pack_q.unpack(_pack_d.pack(s))[0] & 1 == 0:
            s = math.nextafter(s, math.inf if err > 0.0 else -math.inf)
    return np.float32(s)


def fma(a, b, c):
    """Return ``a*b + c`` rounded once to the operands' format."""
    if isinstance(a, np.float32):
        return _fma32(a, b, c)
    return _c_fma(a, b, c)


def float_bits(x):
    """Signed 64-bit integer holding the binary64 encoding of ``x``."""
    return _pack_q.unpack(_pack_d.pack(x))[0]


def bits_float(i):
    """Inverse of :func:`float_bits`."""
    return _pack_d.unpack(_pack_q.pack(i))[0]


@intrinsic
def _fma_ir(typingctx, a, b, c):
    sig = a(a, a, a)

    def codegen(context, builder, signature, args):
        lt = context.get_value_type(signature.return_type)
        fn = builder.module.declare_intrinsic("llvm.fma", [lt], ir.FunctionType(lt, [lt, lt, lt]))
        return builder.call(fn, args)

    return sig, codegen


@intrinsic
def _f64_to_i64(typingctx, x):
    def codegen(context, builder, signature, args):
        return builder.bitcast(args[0], ir.IntType(64))

    return types.int64(types.float64), codegen


@intrinsic
def _i64_to_f64(typingctx, i):
    def codegen(context, builder, signature, args):
        return builder.bitcast(args[0], ir.DoubleType())

    return types.float64(types.int64), codegen


@overload(fma)
def _fma_overload(a, b, c):
    if isinstance(a, types.Float) and a == b == c:
        return lambda a, b, c: _fma_ir(a, b, c)


@overload(float_bits)
def _float_bits_overload(x):
    if x == types.float64:
        return lambda x: _f64_to_i64(x)


@overload(bits_float)
def _bits_float_overload(i):
    if isinstance(i, types.Integer):
        return lambda i: _i64_to_f64(np.int64(i))
