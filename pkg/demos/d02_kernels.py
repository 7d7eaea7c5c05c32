"""
Six hypot kernels side by side
==============================

Every kernel takes two floats of the same format. ``dispatch`` calls one by
name; ``evaluate`` maps one over arrays with a compiled loop.
"""

import numpy as np

from hypotlab import ALGORITHMS, dispatch, evaluate, oracle_hypot, ulp_distance

a, b = 1.0, 0.5772156649015329
ref = oracle_hypot(a, b)
print(f"oracle            {ref.hex()}")
for algo in ALGORITHMS:
    h = dispatch(algo, a, b)
    print(f"{algo.value:<18}{h.hex()}  ulp {ulp_distance(h, ref):+d}")

# %%
# Huge and tiny operands go through a rescale, so nothing overflows early.

big = 2.0**1000
for algo in ALGORITHMS:
    print(algo.value, dispatch(algo, big, big) == oracle_hypot(big, big))

# %%
# Arrays: a million standard normal pairs in one call.

rng = np.random.default_rng(0)
x, y = rng.standard_normal((2, 10**6))
h = evaluate("corrected_fused", x, y)
print(h[:4])

# binary32 works too, for everything except the C-library port
x32, y32 = x.astype(np.float32), y.astype(np.float32)
print(evaluate("naive_fused", x32, y32).dtype)
