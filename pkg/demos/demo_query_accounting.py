"""
How many points does the sparse test read?
==========================================

The classical flat tester restricts a function to a whole ``(s+t)``-flat and
reads all ``q^(s+t)`` points of it.  The sparse tester only reads the support
of its test polynomial ``H``.  This script prints both counts for the
built-in parameter sets, next to the analytic bound.
"""

import numpy as np

from grm.cli import BUILTIN_PARAMS
from grm.gf import parse_field
from grm.affine import sample_uniform
from grm.tester import build_spec, derive_params, distinct_queries

# %%
# The detector polynomial
# -----------------------
# Over GF(4) the detector is ``P = x^2 + xy + y^2``.  It vanishes on the
# lines where ``x = a y`` for ``a`` a root of ``a^2 + a + 1``, so only 9 of
# the 16 points of the plane carry a nonzero value.
fs = parse_field("2^2")
spec = build_spec(derive_params(fs.q, fs.p, 4), fs)
print("P =", spec.P.terms)
print("support of P:", spec.supp_P.shape[0], "points out of", fs.q**2)

# %%
# One parameter set in detail
# ---------------------------
# With d = 4 we get s = 2 head variables (one copy of P) and a tail of
# t = 4 free variables, so the support of H has 9 * 4^4 = 2304 points
# instead of the 4^6 = 4096 points of a 6-flat.
T = sample_uniform(fs, 7, spec.arity, np.random.default_rng(0))
print("s, r, t =", spec.s, spec.params.r, spec.t)
print("|supp H| =", spec.supp_H_size, " distinct points read by one test =", distinct_queries(spec, T))
print("flat tester reads", fs.q**spec.arity)

# %%
# Every built-in parameter set
# ----------------------------
# The ratio ``|supp H| / q^(s+t)`` shrinks geometrically with s: each copy
# of P keeps only ``|supp P| / q^p`` of its block.  For prime q the
# detector has degree q - p = 0, so there the two testers read the same points.
print(f"{'field':>6} {'d':>3} {'s':>3} {'t':>3} {'|supp H|':>10} {'q^(s+t)':>10} {'bound':>12}")
for name, d, t in BUILTIN_PARAMS:
    f = parse_field(name)
    sp = build_spec(derive_params(f.q, f.p, d, t), f)
    print(f"{f.name:>6} {d:>3} {sp.s:>3} {sp.t:>3} {sp.supp_H_size:>10} "
          f"{f.q**sp.arity:>10} {sp.headline_bound():>12.0f}")
