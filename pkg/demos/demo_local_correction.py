"""
Decoding by local correction
============================

A planted error shows up as a point where the test rejects almost every
time it is read.  The decoder finds such a point, tries every field value
there, keeps the one that lowers the rejection rate, and repeats until no
sampled test rejects.
"""

import numpy as np

from grm.corrector import conditional_rejection, decode
from grm.gf import field_new
from grm.mpoly import index_point
from grm.oracle import random_codeword
from grm.tester import build_spec, derive_params

fs = field_new(2, 2)
spec = build_spec(derive_params(4, 2, 4), fs)
rng = np.random.default_rng(7)

# %%
# Plant three errors
# ------------------
f = random_codeword(fs, 7, 4, seed=7)
g = f.copy()
pos = rng.choice(g.values.size, 3, replace=False)
g.values[pos] = fs.add[g.values[pos], rng.integers(1, 4, 3)]
bad = [index_point(int(i), 4, 7) for i in pos]
print("planted errors at", bad)

# %%
# Conditional rejection separates bad points from good ones
# ----------------------------------------------------------
print("rate at a planted error:", conditional_rejection(g, spec, bad[0], 400))
print("rate at a clean point:  ", conditional_rejection(g, spec, (0,) * 7, 400))

# %%
# Decode
# ------
tr = decode(g, spec, max_steps=6)
for s in tr.steps:
    print(f"fix {s.point}: {s.old} -> {s.new}   rate {s.rate_before:.3f} -> {s.rate_after:.3f}")
print("verdict:", tr.final_verdict, " recovered original:", tr.decoded == f)
