"""
The exact oracle
================

The reference result comes from an integer square root of the exact sum
of squares. The remainder acts as a sticky bit, so round-to-nearest-even
is decided without any floating-point arithmetic.
"""

from hypotlab import oracle_verdict
from hypotlab.checks import bracket_violation
from hypotlab.fpformat import format_for

v = oracle_verdict(3.0, 4.0)
print(v.result, v.direction.value, v.is_tie)

v = oracle_verdict(1.0, 1.0)
print(v.result.hex(), v.direction.value)

# %%
# Overflow is decided on the exact value too.

print(oracle_verdict(1.7976931348623157e308, 1.7976931348623157e308).result)

# %%
# An independent check: the exact square of each rounding midpoint must
# bracket the radicand.

f = format_for("binary64")
a, b = 0.1, 0.2
print(bracket_violation(a, b, oracle_verdict(a, b).result, f))  # None
