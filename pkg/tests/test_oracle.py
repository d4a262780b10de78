import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from grm.errors import BadTail, BudgetExceeded, InvalidParameters, NotFound, NotInShadow
from grm.gf import field_new
from grm.mpoly import EvalTable, MPoly, compose_affine, inner_product, interpolate
from grm.oracle import (
    canonical_monomial,
    distance_to_code,
    enumerate_codewords,
    exact_degree,
    find_rejecting_basis,
    identity_rejects,
    monomial_shift_step,
    random_codeword,
    random_exact_degree,
    reduce_to_canonical,
)
from grm.tester import build_P, build_spec, derive_params, run_batch, sample_maps

GF2 = field_new(2, 1)
GF3 = field_new(3, 1)


def test_exact_degree_examples(gf4):
    assert exact_degree(MPoly.monomial(gf4, (2, 2)).tabulate()) == 4
    assert exact_degree(EvalTable.zeros(gf4, 3)) == 0
    for seed in range(10):
        assert exact_degree(random_codeword(gf4, 3, 4, seed=seed)) <= 4
        assert exact_degree(random_exact_degree(gf4, 3, 5, seed=seed)) == 5


def test_enumerate_codewords_counts():
    words = list(enumerate_codewords(GF2, 2, 1))
    assert len(words) == 8
    assert len({w.values.tobytes() for w in words}) == 8
    assert all(exact_degree(w) <= 1 for w in words)
    words = list(enumerate_codewords(GF3, 1, 2))
    assert len(words) == 27 == len({w.values.tobytes() for w in words})
    with pytest.raises(BudgetExceeded):
        next(enumerate_codewords(GF2, 5, 5))


def test_enumeration_is_the_whole_code():
    # RM[3, 2, 1] is the set of tables of degree <= 1
    words = {w.values.tobytes() for w in enumerate_codewords(GF2, 3, 1)}
    brute = set()
    for vals in itertools.product(range(2), repeat=8):
        t = EvalTable(GF2, 3, vals)
        if exact_degree(t) <= 1:
            brute.add(t.values.tobytes())
    assert words == brute


def test_distance_examples(rng):
    f = random_codeword(GF2, 3, 1, seed=3)
    res = distance_to_code(f, 1)
    assert res.delta == 0 and res.nearest == f and res.ties == 1
    g = f.copy()
    g.values[5] ^= 1
    res = distance_to_code(g, 1)
    # RM[3,2,1] has distance 4, so one flip decodes uniquely
    assert res.delta == Fraction(1, 8)
    assert res.nearest == f and res.errors == 1 and res.ties == 1


def test_distance_tie_break():
    # a weight-2 word sits at distance 2 from several codewords; the
    # smallest coefficient vector wins
    f = EvalTable(GF2, 3, [1, 1, 0, 0, 0, 0, 0, 0])
    res = distance_to_code(f, 1)
    assert res.errors == 2 and res.ties > 1
    best = None
    for w, C in zip(enumerate_codewords(GF2, 3, 1), itertools.product(range(2), repeat=4)):
        if np.count_nonzero(w.values != f.values) == 2:
            best = C
            break
    assert res.coefficients == best


@settings(max_examples=30, deadline=None)
@given(vals=st.lists(st.integers(0, 2), min_size=9, max_size=9), d=st.integers(0, 3))
def test_nearest_is_a_codeword(vals, d):
    f = EvalTable(GF3, 2, vals)
    res = distance_to_code(f, d)
    assert exact_degree(res.nearest) <= d
    assert 0 <= res.delta <= 1
    assert res.errors == np.count_nonzero(res.nearest.values != f.values)
    # no codeword is closer
    assert all(np.count_nonzero(w.values != f.values) >= res.errors
               for w in enumerate_codewords(GF3, 2, d))


def test_every_codeword_accepted():
    fs = GF2
    spec = build_spec(derive_params(2, 2, 1), fs)
    rng = np.random.default_rng(0)
    M, c = sample_maps(fs, 4, spec.arity, 100, rng)
    words = list(enumerate_codewords(fs, 4, 1))
    assert len(words) == 32
    for w in words:
        assert not run_batch(w, spec, M, c).reject.any()


def test_canonical_monomial_examples(gf4):
    par = derive_params(4, 2, 4)
    m = canonical_monomial(par, (1, 0, 0, 0))
    assert m.terms == {(2, 2, 1, 0, 0, 0): 1}
    assert m.total_degree() == 5
    assert identity_rejects(gf4, par, (2, 2, 1, 0, 0, 0))
    with pytest.raises(BadTail):
        canonical_monomial(derive_params(4, 2, 7), (0, 0, 0, 0))
    with pytest.raises(BadTail):
        canonical_monomial(par, (4, 0, 0, 0))


def test_shift_examples(gf4):
    assert monomial_shift_step(gf4, (0, 3), 0, 1, 1) == (1, 2)
    with pytest.raises(NotInShadow):
        monomial_shift_step(gf4, (0, 1), 0, 1, 2)
    with pytest.raises(InvalidParameters):
        monomial_shift_step(gf4, (3, 1), 0, 1, 1)


def test_shift_is_realised_by_substitution(gf4):
    # x_j -> x_i + x_j turns x^e into a polynomial containing x^{shift(e)}
    for e in itertools.product(range(4), repeat=2):
        for m in range(1, 4):
            try:
                e2 = monomial_shift_step(gf4, e, 0, 1, m)
            except (NotInShadow, InvalidParameters):
                continue
            from grm.affine import AffineMap

            T = AffineMap(gf4, np.array([[1, 0], [1, 1]]), np.zeros(2, dtype=np.int64))
            P = interpolate(compose_affine(MPoly.monomial(gf4, e).tabulate(), T))
            assert P.terms.get(e2, 0) != 0


def test_reduction_reaches_canonical(gf4, rng):
    par = derive_params(4, 2, 4)
    spec = build_spec(par, gf4)
    top = 4 - 2
    done = 0
    while done < 20:
        e = tuple(int(v) for v in rng.integers(0, 4, 6))
        if sum(e) <= par.d:
            continue
        tr = reduce_to_canonical(gf4, par, e)
        assert tr.replay(gf4) == tr.final
        f = tr.final
        assert f[: par.s] == (top,) * par.s
        assert sum(f[par.s: par.s + par.t]) >= par.r
        assert not any(f[par.s + par.t:])
        assert identity_rejects(gf4, par, f, spec)
        done += 1


def test_reduction_exhaustive_leading_monomials(gf4):
    # every monomial of degree > 4 in 6 variables over GF(4)
    par = derive_params(4, 2, 4)
    spec = build_spec(par, gf4)
    seen = {}
    for e in itertools.product(range(4), repeat=6):
        if sum(e) <= par.d:
            continue
        final = reduce_to_canonical(gf4, par, e).final
        if final not in seen:
            seen[final] = identity_rejects(gf4, par, final, spec)
    assert all(seen.values())


def test_find_rejecting_basis(gf4):
    g = MPoly.monomial(gf4, (3, 3)).tabulate()
    T, trials = find_rejecting_basis(g)
    assert inner_product(compose_affine(g, T), build_P(gf4).tabulate()) != 0
    assert trials >= 1
    low = MPoly.monomial(gf4, (1, 1)).tabulate()
    assert exact_degree(low) < 4
    with pytest.raises(NotFound) as exc:
        find_rejecting_basis(low)
    assert exc.value.trials == 400


def test_find_rejecting_basis_success_rate(gf4):
    g = MPoly.monomial(gf4, (3, 3)).tabulate()
    trials = [find_rejecting_basis(g, seed=s)[1] for s in range(1000)]
    # geometric trial counts: success probability is 1/mean
    assert 1 / np.mean(trials) >= 1 / (2 * 4)
