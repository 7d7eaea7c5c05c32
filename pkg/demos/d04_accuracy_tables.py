"""
How often each kernel misses
============================

Normal pairs first, then pairs whose exponents differ by N. The default
in the CLI is 10^6 pairs per cell; 10^5 keeps this script quick.
"""

from hypotlab.experiments import format_csv, format_summary, run_table1, run_table2

t1 = run_table1(seed=1, count=10**5, shards=1, workers=1)
print(format_summary([t1]))

# %%
# Exponent gaps. The curve is flat until the smaller operand's square
# falls off the end of the larger one's significand, near N = 26.

rows = run_table2(seed=1, count=10**5, n_values=[0, 10, 26, 27, 28], shards=1, workers=1)
print(format_summary(rows))

# %%
# The same numbers in CSV form, as written by ``hypotlab table2``.

print(format_csv(rows))
