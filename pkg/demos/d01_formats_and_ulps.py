"""
Formats, neighbours and ulp distance
====================================

Two binary formats are supported. Each carries the constants the kernels
lean on: the wide-operand cut, the overflow and underflow guards and the
power-of-two rescale factor.
"""

import numpy as np

from hypotlab import format_for, next_down, next_up, ulp_distance

for name in ("binary64", "binary32"):
    f = format_for(name)
    print(f"{name}: p={f.precision_bits} eps={f.epsilon!r}")
    print(f"  wide cut  {float(f.wide_threshold).hex()}")
    print(f"  rescale   {float(f.rescale).hex()}")

# %%
# Distances count representable values, so they stay meaningful across a
# binade boundary and across zero.

one = 1.0
print(ulp_distance(next_up(one), one))            # 1
print(ulp_distance(next_down(one), one))          # -1, the spacing halves below 1
print(ulp_distance(np.float32(2) ** -149, np.float32(-0.0)))

# %%
# Signed zeros are distinct points of the ordering.

print(ulp_distance(0.0, -0.0))
