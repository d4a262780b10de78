import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from grm.affine import ZoomSpec, enumerate_flats, enumerate_maps, identity_padded, sample_uniform, zoom_contains
from grm.errors import BudgetExceeded, InvalidParameters
from grm.gf import field_new
from grm.grassmann import (
    VertexSet,
    edge_expansion,
    edge_expansion_sampled,
    flats_adjacent,
    in_image,
    persistence,
    phi_checks,
    phi_embed,
    rejecting_set,
    shadow_check,
    zoom_density,
    zoom_in_density_batch,
)
from grm.oracle import canonical_monomial, random_codeword
from grm.tester import build_spec, derive_params, estimate_rejection, run_batch, sample_maps

GF2 = field_new(2, 1)


def _spec(fs, d):
    return build_spec(derive_params(fs.q, fs.p, d), fs)


def _perturbed(fs, n, d, flips, seed):
    f = random_codeword(fs, n, d, seed=seed)
    rng = np.random.default_rng(seed)
    idx = rng.choice(f.values.size, flips, replace=False)
    f.values[idx] = fs.add[f.values[idx], 1]
    return f, idx


# -- edge expansion ---------------------------------------------------


def test_zoom_in_expansion_small():
    z = ZoomSpec("zoom_in", (1,), (1, 0, 1))
    S = VertexSet(GF2, 3, 1, predicate=lambda T: zoom_contains(z, T))
    a = edge_expansion(S, "neighbors")
    b = edge_expansion(S, "pairs")
    assert (a.edge_count, a.boundary_count) == (b.edge_count, b.boundary_count)
    assert a.phi <= 1 - 1 / 2
    assert a.mu == 1 / 8


def test_expansion_trivial_sets():
    every = VertexSet(GF2, 2, 1, predicate=lambda T: True)
    assert edge_expansion(every).phi == 0
    T0 = next(iter(enumerate_maps(GF2, 2, 1)))
    one = VertexSet(GF2, 2, 1, members=[T0])
    st_ = edge_expansion(one)
    assert st_.phi == 1 and st_.boundary_count == st_.edge_count > 0
    with pytest.raises(InvalidParameters):
        edge_expansion(one, "sideways")
    with pytest.raises(InvalidParameters):
        VertexSet(GF2, 2, 1)


def test_expansion_on_grassmann_graph():
    flats = enumerate_flats(GF2, 3, 1)
    # lines through the origin
    S = VertexSet(GF2, 3, 1, kind="grassmann", predicate=lambda U: U.contains(np.zeros(3, dtype=np.int64)))
    a = edge_expansion(S, "neighbors")
    b = edge_expansion(S, "pairs")
    assert a.phi == b.phi and a.mu == 7 / len(flats)


def test_flats_adjacent_brute():
    # two lines are adjacent iff they share exactly one point
    flats = enumerate_flats(GF2, 3, 1)
    for U, V in itertools.product(flats, flats):
        shared = {tuple(p) for p in U.points()} & {tuple(p) for p in V.points()}
        assert flats_adjacent(U, V) == (len(shared) == 1)


def test_sampled_expansion_matches_exact():
    z = ZoomSpec("zoom_in", (0,), (1, 1, 0))
    S = VertexSet(GF2, 3, 1, predicate=lambda T: zoom_contains(z, T))
    exact = edge_expansion(S)
    members = S.explicit()
    est = edge_expansion_sampled(lambda rng: members[rng.integers(len(members))],
                                 lambda T: T in S, 3000, seed=1)
    assert abs(est.phi - exact.phi) <= 3 * est.ci


@settings(max_examples=30, deadline=None)
@given(mask=st.lists(st.booleans(), min_size=16, max_size=16))
def test_expansion_methods_agree(mask):
    maps = list(enumerate_maps(GF2, 2, 1))
    members = [T for T, keep in zip(maps, mask) if keep]
    S = VertexSet(GF2, 2, 1, members=members)
    a = edge_expansion(S, "neighbors")
    b = edge_expansion(S, "pairs")
    assert (a.phi, a.edge_count) == (b.phi, b.edge_count)
    assert 0 <= a.phi <= 1 and 0 <= a.mu <= 1


def test_budget():
    S = VertexSet(field_new(2, 2), 4, 3, predicate=lambda T: True)
    with pytest.raises(BudgetExceeded):
        edge_expansion(S, budget=1000)


# -- the rejecting set ------------------------------------------------


def test_rejecting_set_examples(gf4, rng):
    spec = _spec(GF2, 1)
    mono = canonical_monomial(spec.params, (1, 1, 0, 0), 5).tabulate()
    S = rejecting_set(mono, spec)
    assert identity_padded(GF2, 5, spec.arity) in S
    g = random_codeword(GF2, 5, 1, seed=0)
    S0 = rejecting_set(g, spec)
    assert not any(sample_uniform(GF2, 5, spec.arity, rng) in S0 for _ in range(200))


def test_rejecting_density_matches_estimate():
    spec = _spec(field_new(2, 2), 4)
    f, _ = _perturbed(spec.fs, 7, 4, 3, seed=2)
    S = rejecting_set(f, spec)
    rng = np.random.default_rng(5)
    n = 600
    hits = sum(sample_uniform(spec.fs, 7, spec.arity, rng) in S for _ in range(n))
    est = estimate_rejection(f, spec, 3000, seed=8)
    assert abs(hits / n - est.rate) <= 3 * (est.ci + np.sqrt(est.rate * (1 - est.rate) / n) + 1 / n)


def test_persistence_small():
    spec = _spec(field_new(2, 2), 4)
    f, _ = _perturbed(spec.fs, 7, 4, 2, seed=3)
    res = persistence(f, spec, 600, seed=4)
    assert res["stay"] >= res["threshold"] - 3 * res["ci"]


def test_shadow_examples():
    spec = _spec(field_new(2, 2), 4)
    g = random_codeword(spec.fs, 7, 4, seed=5)
    res = shadow_check(g, spec, trials=20, flats_per_A=2)
    assert res["mu_S"] == res["mu_S_up"] == 0
    f, _ = _perturbed(spec.fs, 7, 4, 2, seed=6)
    res = shadow_check(f, spec, trials=120, flats_per_A=6, seed=1)
    assert res["ratio"] <= 4 + 3 * res["ratio_ci"]
    aff = shadow_check(f, spec, trials=120, flats_per_A=6, seed=1, mode="affine")
    assert aff["mu_S_up"] >= aff["mu_S"] * (1 - 3 * aff["ci_S"])
    with pytest.raises(InvalidParameters):
        shadow_check(f, spec, ell=spec.t)


# -- zoom densities ---------------------------------------------------


def test_zoom_density_of_the_zoom_itself():
    z = ZoomSpec("zoom_in", (1,), (0, 1, 1))
    S = VertexSet(GF2, 3, 1, predicate=lambda T: zoom_contains(z, T))
    assert zoom_density(S, z) == 1.0
    assert zoom_density(S, z, trials=50) == 1.0


def test_max_zoom_in_finds_error_point():
    spec = _spec(field_new(2, 2), 4)
    fs = spec.fs
    f, idx = _perturbed(fs, 7, 4, 1, seed=11)
    from grm.mpoly import index_point

    y = index_point(int(idx[0]), 4, 7)
    a = spec.supp_H()[0]
    rng = np.random.default_rng(0)
    cands = [tuple(y)] + [tuple(rng.integers(0, 4, 7)) for _ in range(15)]
    dens = [zoom_in_density_batch(f, spec, a, b, 300, np.random.default_rng(i)) for i, b in enumerate(cands)]
    assert int(np.argmax(dens)) == 0


def test_zoom_out_density_bounded():
    spec = _spec(field_new(2, 2), 4)
    fs = spec.fs
    f, _ = _perturbed(fs, 7, 4, 4, seed=12)
    est = estimate_rejection(f, spec, 4000, seed=2)
    S = rejecting_set(f, spec)
    rng = np.random.default_rng(3)
    for _ in range(3):
        a = tuple(rng.integers(0, 4, 7))
        b = tuple(rng.integers(0, 4, spec.arity))
        z = ZoomSpec("zoom_out", a, b, int(rng.integers(0, 4)))
        dens = zoom_density(S, z, trials=300, seed=int(rng.integers(1 << 30)))
        ci = 3 * np.sqrt(0.25 / 300)
        assert dens <= 4 * (est.rate + 3 * est.ci) + ci


# -- phi embedding ----------------------------------------------------


def test_phi_checks_small():
    rep = phi_checks(GF2, 2, 1)
    assert rep["maps"] == 16 and rep["injective"]
    assert rep["edges_preserved"] and rep["image_characterised"]
    assert rep["neighbor_fraction_ok"] and all(rep["zoom_bijections"].values())
    assert rep["all_ok"]


def test_phi_embed_shape(gf4, rng):
    T = sample_uniform(gf4, 3, 2, rng)
    U = phi_embed(T)
    assert U.dim == 2 and in_image(U, 2)
    for x in itertools.product(range(4), repeat=2):
        assert U.contains(np.concatenate([x, T.apply(x)]))


def test_phi_budget():
    with pytest.raises(BudgetExceeded):
        phi_checks(field_new(2, 2), 3, 2, budget=1000)


def test_run_batch_is_predicate(gf4):
    spec = _spec(gf4, 4)
    f, _ = _perturbed(gf4, 7, 4, 3, seed=9)
    M, c = sample_maps(gf4, 7, spec.arity, 50, np.random.default_rng(1))
    S = rejecting_set(f, spec)
    from grm.affine import AffineMap

    rej = run_batch(f, spec, M, c).reject
    assert [AffineMap(gf4, M[i], c[i]) in S for i in range(50)] == rej.tolist()
