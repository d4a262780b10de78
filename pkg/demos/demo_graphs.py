"""
The affine bi-linear scheme and its Grassmann picture
=====================================================

Affine maps ``F^ell -> F^n`` form a graph in which two maps are adjacent
when they agree on a hyperplane.  Sending a map to its graph, an
``ell``-flat of ``F^(ell+n)``, embeds this scheme into the affine Grassmann
graph.  This script checks the embedding exhaustively on the smallest case
and measures how slowly a zoom-in set leaks under the walk.
"""

from grm.affine import ZoomSpec, zoom_contains
from grm.gf import field_new
from grm.grassmann import VertexSet, edge_expansion, persistence, phi_checks
from grm.oracle import random_codeword
from grm.tester import build_spec, derive_params

gf2 = field_new(2, 1)

# %%
# The embedding
# -------------
rep = phi_checks(gf2, 2, 1)
for key in ("maps", "flats", "injective", "edges_preserved", "image_characterised",
            "min_in_image_neighbor_fraction", "zoom_bijections"):
    print(f"{key:>32}: {rep[key]}")

# %%
# A zoom-in expands poorly
# ------------------------
# All maps with T(1) = (1, 0, 1) form a set in which at most a ``1 - 1/q``
# fraction of edges leave.
z = ZoomSpec("zoom_in", (1,), (1, 0, 1))
S = VertexSet(gf2, 3, 1, predicate=lambda T: zoom_contains(z, T))
print(edge_expansion(S).as_dict())

# %%
# The rejecting set of a corrupted codeword
# -----------------------------------------
# One step of the walk started inside the rejecting set stays there with
# probability at least 1/q.
fs = field_new(2, 2)
spec = build_spec(derive_params(4, 2, 4), fs)
f = random_codeword(fs, 7, 4, seed=0)
f.values[100] = fs.add[f.values[100], 1]
print(persistence(f, spec, 2000, seed=1))
