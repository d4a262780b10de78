"""
Rejection rate against distance
===============================

Take a random codeword of RM[7, 4, 4], corrupt a growing number of points
and measure how often the sparse test rejects.  An optimal tester rejects
with probability at least ``c(q) min(1, Q delta)`` where Q is the number of
queries; the sweep reports the empirical constant ``c_fit``.
"""

from grm.cli import cmd_sweep, sweep_csv
from grm.gf import field_new

fs = field_new(2, 2)
n = 7
N = fs.q**n

# %%
# The sweep
# ---------
# Each level corrupts 1, 2, 4, 8 or 16 points of the same codeword.  With
# Q = 2304 queries the product Q delta passes 1 at about 7 corrupted
# points, after which the rate saturates.
res = cmd_sweep(fs, 4, n, deltas=[k / N for k in (0, 1, 2, 4, 8, 16)], trials=2000, seed=3)
print(sweep_csv(res))

# %%
# Reading the curve
# -----------------
for r in res["records"]:
    bar = "#" * int(60 * r["rejection_rate"])
    print(f"{r['errors']:>3} errors  {r['rejection_rate']:.3f}  {bar}")
print("empirical c(q):", round(res["c_fit"], 3))
