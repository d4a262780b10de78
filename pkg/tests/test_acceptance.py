"""The eleven acceptance criteria, each at its stated size and tolerance.

A summary line per criterion is printed at the end of the pytest run by the
hook in ``conftest.py``.
"""

import itertools
import time
from fractions import Fraction

import numpy as np
import pytest

from grm.affine import identity_padded, sample_restriction, sample_uniform
from grm.cli import BUILTIN_PARAMS, _spec_for, cmd_sweep, perturb
from grm.corrector import decode
from grm.generic import build_generic, rm_instance, run_generic_batch
from grm.gf import field_new, parse_field, power_sum
from grm.grassmann import persistence, phi_checks, shadow_check
from grm.mpoly import EvalTable, MPoly, all_points, inner_product, interpolate
from grm.oracle import canonical_monomial, exact_degree, random_codeword, random_exact_degree
from grm.tester import (
    build_P,
    build_spec,
    derive_params,
    distinct_queries,
    run_batch,
    run_sparse_test,
    sample_maps,
    support_of,
)

BUILTIN_Q = {2: (2, 1), 3: (3, 1), 4: (2, 2), 8: (2, 3), 9: (3, 2), 16: (2, 4)}


def _rm(q, d, t=None, n=None):
    p, k = BUILTIN_Q[q]
    fs = field_new(p, k)
    return fs, build_spec(derive_params(q, p, d, t, n), fs)


def _expected_monomial_ip(fs, e, e2):
    # sum_x x^a over F_q is -1 for a in {q-1, 2q-2} and 0 for every other
    # a in [0, 2q-2] (a = 0 sums q ones), so the product is (-1)^n or 0
    q = fs.q
    if all(a + b in (q - 1, 2 * q - 2) for a, b in zip(e, e2)):
        return 1 if len(e) % 2 == 0 else int(fs.neg[1])
    return 0


# ----------------------------------------------------------------------


@pytest.mark.criterion(1, "field identities: power sums and monomial inner products")
def test_criterion_01_field_identities():
    start = time.perf_counter()
    for q, (p, k) in BUILTIN_Q.items():
        fs = field_new(p, k)
        minus_one = int(fs.neg[1])
        for i in range(q):
            assert power_sum(fs, i) == (minus_one if i == q - 1 else 0), (q, i)

    def check(fs, e, e2):
        n = len(e)
        got = inner_product(MPoly.monomial(fs, e).tabulate(), MPoly.monomial(fs, e2).tabulate())
        assert got == _expected_monomial_ip(fs, e, e2), (fs.q, e, e2)
        # the complementary case takes the value (-1)^n
        if all(a + b == fs.q - 1 for a, b in zip(e, e2)):
            assert got == (1 if n % 2 == 0 else int(fs.neg[1]))

    for q in (2, 3, 4):
        fs = field_new(*BUILTIN_Q[q])
        for n in (1, 2):
            exps = list(itertools.product(range(q), repeat=n))
            for e, e2 in itertools.product(exps, exps):
                check(fs, e, e2)

    rng = np.random.default_rng(1)
    qs = sorted(BUILTIN_Q)
    for _ in range(1000):
        q = qs[rng.integers(len(qs))]
        fs = field_new(*BUILTIN_Q[q])
        n = int(rng.integers(1, 4 if q <= 8 else 3))
        e = tuple(int(v) for v in rng.integers(0, q, n))
        if rng.random() < 0.5:
            e2 = tuple(q - 1 - v for v in e)
        else:
            e2 = tuple(int(v) for v in rng.integers(0, q, n))
        check(fs, e, e2)
    assert time.perf_counter() - start < 10


@pytest.mark.criterion(2, "construction, detection and support of P")
def test_criterion_02_P_construction():
    start = time.perf_counter()
    for q in (4, 8, 16):
        fs = field_new(*BUILTIN_Q[q])
        P = build_P(fs, 2)
        expected = {(i, q - 2 - i): 1 for i in range(q - 1)}
        assert P.terms == expected
        Pt = P.tabulate()
        for a, b in itertools.product(range(q), repeat=2):
            ip = inner_product(Pt, MPoly.monomial(fs, (a, b)).tabulate())
            detects = a + b == q and 1 <= b <= q - 1
            assert (ip != 0) == detects, (q, a, b)
        pts, _ = support_of(P)
        assert pts.shape[0] <= 3 * q

    fs = field_new(3, 2)
    P = build_P(fs, 3)
    assert P.total_degree() == fs.q - 3
    inside = 0
    for x in all_points(9, 3):
        if P.eval(x) == 0:
            continue
        inside += 1
        on_axis = x[0] == 0 or x[1] == 0
        sums = [int(fs.add[x[2], fs.sum(x[list(I)]) if I else 0])
                for r in range(3) for I in itertools.combinations((0, 1), r)]
        assert on_axis or 0 in sums, tuple(x)
    assert inside == support_of(P)[0].shape[0]
    assert inside <= (2 ** 2 + 2) * 9**2
    assert time.perf_counter() - start < 10


@pytest.mark.criterion(3, "perfect completeness on 10^4 (codeword, T) pairs per parameter set")
def test_criterion_03_completeness():
    start = time.perf_counter()
    for d, n in ((4, 7), (3, 6)):
        fs, spec = _rm(4, d, 4, n)
        assert spec.t == 4
        if d == 3:
            assert spec.s == 0
        rng = np.random.default_rng(3 + d)
        accepted = 0
        for i in range(200):
            f = random_codeword(fs, n, d, seed=1000 * d + i)
            M, c = sample_maps(fs, n, spec.arity, 50, rng)
            res = run_batch(f, spec, M, c)
            assert not res.reject.any(), (d, i)
            accepted += res.reject.size
        assert accepted == 10**4
    assert time.perf_counter() - start < 120


@pytest.mark.criterion(4, "degree d+1 is detected: canonical monomials and random polynomials")
def test_criterion_04_detection():
    start = time.perf_counter()
    for q, d in ((4, 4), (4, 3), (4, 7), (8, 8), (3, 6)):
        fs, spec = _rm(q, d)
        params = spec.params
        n = spec.arity
        for tail in itertools.product(range(q), repeat=spec.t):
            if sum(tail) != params.r:
                continue
            mono = canonical_monomial(params, tail, n, fs)
            assert mono.total_degree() == d + 1
            rep = run_sparse_test(mono.tabulate(), identity_padded(fs, n, n), spec)
            assert rep.verdict == "reject", (q, d, tail)

    fs, spec = _rm(4, 4, 4, 7)
    for i in range(50):
        f = random_exact_degree(fs, 7, 5, seed=400 + i)
        assert exact_degree(f) == 5
        rng = np.random.default_rng(400 + i)
        found, used = False, 0
        while used < 10**4 and not found:
            M, c = sample_maps(fs, 7, spec.arity, 256, rng)
            found = bool(run_batch(f, spec, M, c).reject.any())
            used += 256
        assert found, i
    assert time.perf_counter() - start < 300


def _naive_tilde_on_flat(f, A, B, P, spec):
    """``f~`` restricted to ``fl(B)`` by a direct loop over every ``alpha`` in ``F^s``."""
    fs, s, p = spec.fs, spec.s, spec.params.p
    q, t = fs.q, B.t
    alphas = [np.array(a, dtype=np.int64) for a in itertools.product(range(q), repeat=s)]
    weights = []
    for a in alphas:
        w = 1
        for j in range(0, s, p):
            w = int(fs.mul[w, P.eval(a[j:j + p])])
        weights.append(w)
    out = np.zeros(q**t, dtype=np.int64)
    for yi, y in enumerate(itertools.product(range(q), repeat=t)):
        beta = fs.add[fs.matvec(B.Rp, np.array(y, dtype=np.int64)), B.bp]
        acc = 0
        for a, w in zip(alphas, weights):
            if w:
                x = A.apply(np.concatenate([a, beta]))
                acc = int(fs.add[acc, fs.mul[w, f(x)]])
        out[yi] = acc
    return EvalTable(fs, t, out)


@pytest.mark.criterion(5, "sparse verdict equals the flat-degree verdict on f~")
def test_criterion_05_flat_equivalence():
    fs, spec = _rm(4, 4)
    n, s, t, r = 6, spec.s, spec.t, spec.params.r
    P = build_P(fs, 2)
    rng = np.random.default_rng(5)
    verdicts = []
    for i in range(50):
        base = random_codeword(fs, n, 4, seed=500 + i)
        kind = i % 5
        if kind == 0:
            f = base
        elif kind in (1, 2, 3):
            f, _ = perturb(base, 1 if kind < 3 else 2, rng)
        else:
            f = random_exact_degree(fs, n, 5, seed=500 + i)
        A = sample_uniform(fs, n, s + t, rng)
        B = sample_restriction(fs, s, t, t, rng)
        sparse = run_sparse_test(f, A.compose(B.as_map()), spec).rejected
        g = _naive_tilde_on_flat(f, A, B, P, spec)
        flat = interpolate(g).total_degree() >= r
        assert sparse == flat, i
        verdicts.append(sparse)
    assert any(verdicts) and not all(verdicts)


@pytest.mark.criterion(6, "query accounting on every built-in parameter set")
def test_criterion_06_query_accounting():
    rng = np.random.default_rng(6)
    for field, d, t in BUILTIN_PARAMS:
        fs = parse_field(field)
        spec = _spec_for(fs, d, t)
        T = sample_uniform(fs, spec.arity, spec.arity, rng)
        used = distinct_queries(spec, T)
        assert used <= spec.supp_H_size <= spec.headline_bound(), (field, d)
        assert spec.supp_H_size <= spec.lemma_bound(), (field, d)
        assert spec.supp_H_size == support_of(spec.P)[0].shape[0] ** spec.params.blocks * fs.q**spec.t
    for d in (4, 7, 11):
        fs, spec = _rm(4, d)
        ratio = Fraction(spec.supp_H_size, 4 ** spec.arity)
        assert ratio == Fraction(9, 16) ** (spec.s // 2)
    fs, spec = _rm(4, 4)
    assert (spec.supp_H_size, 4 ** spec.arity) == (2304, 4096)


@pytest.mark.criterion(7, "one-step persistence of S_t and the flat upper-shadow ratio")
def test_criterion_07_shadow_and_expansion():
    start = time.perf_counter()
    fs, spec = _rm(4, 4, 4, 7)
    f, _ = perturb(random_codeword(fs, 7, 4, seed=7), 1, np.random.default_rng(7))
    per = persistence(f, spec, 10**4, seed=7)
    assert per["trials"] == 10**4
    assert per["stay"] >= 1 / fs.q - 3 * per["ci"], per
    sh = shadow_check(f, spec, trials=300, flats_per_A=8, seed=7)
    assert sh["mu_S"] > 0
    assert sh["ratio"] <= fs.q + 3 * sh["ratio_ci"], sh
    assert time.perf_counter() - start < 300


@pytest.mark.criterion(8, "phi embedding checks at q=2, n=2, ell=1")
def test_criterion_08_phi_embedding():
    start = time.perf_counter()
    rep = phi_checks(field_new(2, 1), 2, 1)
    assert rep["maps"] == 16
    assert rep["injective"]
    assert rep["edges_preserved"]
    assert rep["image_characterised"]
    assert rep["min_in_image_neighbor_fraction"] >= 1 - 1 / 2
    assert set(rep["zoom_bijections"]) == {"zoom_in", "zoom_out", "zoom_in_lin", "zoom_out_lin"}
    assert all(rep["zoom_bijections"].values())
    assert time.perf_counter() - start < 10


@pytest.mark.criterion(9, "decoder round trip on planted errors, no false claims on far words")
def test_criterion_09_decoder():
    start = time.perf_counter()
    fs, spec = _rm(4, 4, 4, 7)
    for i in range(25):
        base = random_codeword(fs, 7, 4, seed=900 + i)
        f, _ = perturb(base, 1 + i % 3, np.random.default_rng(900 + i))
        trace = decode(f, spec, max_steps=6, seed=900 + i)
        assert trace.final_verdict == "codeword", (i, trace.reason)
        assert trace.decoded == base, i
        assert trace.total_corrections <= 4, i
    for i in range(5):
        f = EvalTable(fs, 7, np.random.default_rng(950 + i).integers(0, 4, 4**7))
        trace = decode(f, spec, max_steps=4, seed=950 + i)
        assert trace.final_verdict != "codeword", i
    assert time.perf_counter() - start < 900


@pytest.mark.criterion(10, "empirical soundness curve over delta in {1,2,4,8,16}/q^n")
def test_criterion_10_sweep():
    start = time.perf_counter()
    fs = field_new(2, 2)
    N = 4**7
    res = cmd_sweep(fs, 4, 7, 4, [k / N for k in (1, 2, 4, 8, 16)], trials=4000, seed=10)
    recs = res["records"]
    assert [r["errors"] for r in recs] == [1, 2, 4, 8, 16]
    for a, b in itertools.combinations(recs, 2):
        tol = 3 * max(a["ci"], b["ci"])
        assert b["rejection_rate"] >= a["rejection_rate"] - tol, (a, b)
    assert res["c_fit"] > 0
    assert recs[-1]["rejection_rate"] >= 0.5
    assert time.perf_counter() - start < 600


@pytest.mark.criterion(11, "generic engine with RM blocks agrees with the RM tester")
def test_criterion_11_generic_consistency():
    fs, spec = _rm(4, 4, 4, 6)
    gspec = build_generic(rm_instance(spec))
    rng = np.random.default_rng(11)
    agree = rejects = 0
    for i in range(100):
        base = random_codeword(fs, 6, 4, seed=1100 + i)
        kind = i % 4
        if kind == 0:
            f = base
        elif kind == 1:
            f, _ = perturb(base, 1, rng)
        elif kind == 2:
            f = random_exact_degree(fs, 6, 5, seed=1100 + i)
        else:
            f = EvalTable(fs, 6, rng.integers(0, 4, 4**6))
        M, c = sample_maps(fs, 6, spec.arity, 10, rng)
        rm = run_batch(f, spec, M, c)
        g_rej, g_wi, g_wv = run_generic_batch(f, gspec, M, c)
        assert np.array_equal(rm.reject, g_rej)
        rw = spec.valid_exps[rm.witness_index[rm.reject]]
        gw = gspec.valid_exps[g_wi[g_rej]]
        assert np.array_equal(rw, gw)
        assert np.array_equal(rm.witness_value, g_wv)
        agree += rm.reject.size
        rejects += int(rm.reject.sum())
    assert agree == 1000
    assert 0 < rejects < 1000
