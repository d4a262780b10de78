"""
Why a high-degree monomial is always caught
===========================================

Any polynomial of degree above d contains a monomial that can be moved, by
affine changes of variables, into a canonical shape: ``q - q/p`` in each of
the first s coordinates and enough degree left in the tail.  The identity
map rejects that canonical monomial.  This script walks through the moves
for a few random monomials and then checks that random degree-(d+1)
polynomials are rejected by some sampled map.
"""

import numpy as np

from grm.affine import identity_padded
from grm.gf import field_new
from grm.oracle import canonical_monomial, random_exact_degree, reduce_to_canonical
from grm.tester import build_spec, derive_params, estimate_rejection, run_sparse_test

fs = field_new(2, 2)
params = derive_params(4, 2, 4)
spec = build_spec(params, fs)

# %%
# The canonical monomial
# ----------------------
# For q = 4, d = 4 we have s = 2 and r = 1, so the canonical monomial of
# degree d + 1 = 5 is ``x1^2 x2^2 x3``.
mono = canonical_monomial(params, (1, 0, 0, 0))
rep = run_sparse_test(mono.tabulate(), identity_padded(fs, 6, 6), spec)
print("canonical monomial:", mono.terms, "->", rep.verdict, "witness", rep.witness)

# %%
# Reducing arbitrary monomials
# ----------------------------
# Each step is either a shift (legal when the moved amount is in the
# p-shadow of the donor exponent, by Lucas' theorem) or a pass to a
# p-shadow.
rng = np.random.default_rng(1)
for _ in range(4):
    while True:
        e = tuple(int(v) for v in rng.integers(0, 4, 6))
        if sum(e) > params.d:
            break
    tr = reduce_to_canonical(fs, params, e)
    print(e, "->", tr.final, f"({len(tr.steps)} steps)")

# %%
# Random polynomials of degree d + 1
# ----------------------------------
# A random polynomial of degree 5 is rejected by a noticeable fraction of
# the maps, so a handful of samples suffices.
for seed in range(5):
    f = random_exact_degree(fs, 7, 5, seed=seed)
    est = estimate_rejection(f, spec, 300, seed=seed)
    print(f"seed {seed}: rejection rate {est.rate:.3f} +- {est.ci:.3f}")
