"""The sparse (s+t)-flat tester for RM[n, q, d].

A test samples an affine map ``T: F_q^{s+t} -> F_q^n`` and rejects ``f``
when ``<f o T, H_e> != 0`` for some valid tail exponent ``e``, where

    H_e(x, y) = P(x_1..x_p) P(x_{p+1}..x_{2p}) ... P(..x_s) * y^e.

Only points ``T(a, b)`` with ``a`` in ``supp(P)^{s/p}`` are queried.  The
engine aggregates ``g(b) = sum_a Hprod(a) f(T(a, b))`` over the block
support and then takes all tail moments ``<g, y^e>`` at once with one
``q x q`` transform per tail axis.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .affine import AffineMap, FlatBasis, Restriction
from .errors import BadT, InvalidParameters, NotDivisible, ShapeMismatch
from .gf import FieldSpec, field_new
from .mpoly import (
    EvalTable,
    MPoly,
    all_points,
    axis_transform,
    compose_affine,
    inner_product,
    point_index,
    power_table,
    radix_weights,
    table_degree,
)
from .stats import CHUNK, chunk_rng, map_chunks, wilson

# ----------------------------------------------------------------------
# parameters
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class RMParams:
    """Parameters of the tester.

    ``d + 1 = s (q - q/p) + r`` with ``p | s`` and ``0 < r <= p (q - q/p)``.
    """

    q: int
    p: int
    k: int
    d: int
    s: int
    r: int
    t: int
    n: int | None = None

    @property
    def blocks(self) -> int:
        return self.s // self.p

    @property
    def arity(self) -> int:
        """Domain dimension ``s + t`` of the sampled maps."""
        return self.s + self.t


def derive_params(q: int, p: int, d: int, t_override: int | None = None, n: int | None = None) -> RMParams:
    """Split ``d + 1`` into P-blocks and a remainder, and pick ``t``."""
    k = round(math.log(q, p))
    if p**k != q or k < 1:
        raise InvalidParameters(f"q={q} is not a power of p={p}")
    if d < 0:
        raise InvalidParameters("degree must be non-negative")
    block = p * (q - q // p)
    ell = d // block
    s, r = p * ell, d + 1 - ell * block
    if t_override is None:
        t = p + 2
    else:
        t = int(t_override)
        if t < p + 2:
            raise BadT(f"t={t} is below the minimum p+2={p + 2}")
    if n is not None and n < 1:
        raise InvalidParameters("ambient arity must be positive")
    return RMParams(q=q, p=p, k=k, d=d, s=s, r=r, t=t, n=n)


# ----------------------------------------------------------------------
# P and the test polynomials
# ----------------------------------------------------------------------


@lru_cache(maxsize=None)
def build_P(fs: FieldSpec, p: int | None = None) -> MPoly:
    """The ``p``-variate detector polynomial of degree ``q - p``.

    Expands ``sum_I (-1)^{|I|+1} (x_I + x_p)^{q-1}`` over subsets ``I`` of
    the first ``p - 1`` variables and divides by ``x_1 ... x_{p-1}``.
    """
    p = fs.p if p is None else p
    if p != fs.p:
        raise InvalidParameters("P is defined in the field's characteristic")
    q = fs.q
    num = MPoly.zero(fs, p)
    for size in range(p):
        sign = fs.neg[1] if size % 2 == 0 else 1  # (-1)^{|I|+1}
        for I in itertools.combinations(range(p - 1), size):
            lin = MPoly.variable(fs, p, p - 1)
            for i in I:
                lin = lin + MPoly.variable(fs, p, i)
            num = num + (lin ** (q - 1)).scale(int(sign))
    out = {}
    for e, c in num.terms.items():
        if any(v == 0 for v in e[: p - 1]):
            raise NotDivisible(f"term {e} is not divisible by x_1...x_{p - 1}")
        out[tuple(v - 1 for v in e[: p - 1]) + (e[p - 1],)] = c
    return MPoly(fs, p, out)


def build_H(fs: FieldSpec, params: RMParams, e) -> MPoly:
    """``H_e`` as an explicit polynomial in ``s + t`` variables."""
    P = build_P(fs)
    H = MPoly.constant(fs, 0)
    for _ in range(params.blocks):
        H = H.tensor(P)
    return H.tensor(MPoly.monomial(fs, tuple(e)))


def valid_exponents(q: int, t: int, r: int) -> np.ndarray:
    """All ``e`` in ``{0..q-1}^t`` with ``sum(e) <= t(q-1) - r``, in lexicographic order."""
    pts = all_points(q, t)
    return np.ascontiguousarray(pts[pts.sum(axis=1) <= t * (q - 1) - r])


@dataclass
class TesterSpec:
    """Everything the engine needs, precomputed once per parameter set."""

    fs: FieldSpec
    params: RMParams
    P: MPoly
    supp_P: np.ndarray
    P_values: np.ndarray
    H_points: np.ndarray
    H_values: np.ndarray
    valid_exps: np.ndarray
    block_polys: tuple = ()

    @property
    def s(self) -> int:
        return self.H_points.shape[1]

    @property
    def t(self) -> int:
        return self.params.t

    @property
    def arity(self) -> int:
        return self.s + self.t

    @property
    def supp_H_size(self) -> int:
        return self.H_points.shape[0] * self.fs.q**self.t

    def supp_H(self) -> np.ndarray:
        """All points of ``supp(P)^{s/p} x F_q^t`` (the query pattern)."""
        tail = all_points(self.fs.q, self.t)
        a = np.repeat(self.H_points, tail.shape[0], axis=0)
        b = np.tile(tail, (self.H_points.shape[0], 1))
        return np.hstack([a, b])

    def lemma_bound(self) -> float:
        """``(3q)^{s(p-1)/p} q^t``."""
        q, p, s, t = self.fs.q, self.fs.p, self.s, self.t
        return (3 * q) ** (s * (p - 1) / p) * q**t

    def headline_bound(self) -> float:
        """``(3q)^{(d+1)/q} q^t``."""
        q, t = self.fs.q, self.t
        return (3 * q) ** ((self.params.d + 1) / q) * q**t


def support_of(P: MPoly):
    """Points where ``P`` is nonzero and the values there."""
    pts = all_points(P.fs.q, P.m)
    vals = P.eval_points(pts)
    nz = vals != 0
    return np.ascontiguousarray(pts[nz]), vals[nz]


def block_product(fs: FieldSpec, supports) -> tuple:
    """Product support of several blocks and the product of their values.

    ``supports`` is a list of ``(points, values)`` pairs.  The first block
    varies slowest, so the output is in lexicographic order when each block
    support is.
    """
    pts = np.zeros((1, 0), dtype=np.int64)
    vals = np.ones(1, dtype=np.int64)
    for bp, bv in supports:
        na, nb = pts.shape[0], bp.shape[0]
        pts = np.hstack([np.repeat(pts, nb, axis=0), np.tile(bp, (na, 1))])
        vals = fs.mul[np.repeat(vals, nb), np.tile(bv, na)]
    return pts, vals


@lru_cache(maxsize=None)
def _build_spec_cached(fs: FieldSpec, params: RMParams) -> TesterSpec:
    P = build_P(fs)
    sp, sv = support_of(P)
    hp, hv = block_product(fs, [(sp, sv)] * params.blocks)
    for arr in (sp, sv, hp, hv):
        arr.setflags(write=False)
    E = valid_exponents(fs.q, params.t, params.r)
    E.setflags(write=False)
    return TesterSpec(fs, params, P, sp, sv, hp, hv, E, (P,) * params.blocks)


def build_spec(params: RMParams, fs: FieldSpec | None = None) -> TesterSpec:
    if fs is None:
        fs = field_new(params.p, params.k)
    if fs.q != params.q:
        raise InvalidParameters("field size does not match the parameters")
    return _build_spec_cached(fs, params)


# ----------------------------------------------------------------------
# function oracles
# ----------------------------------------------------------------------


class CallableOracle:
    """Wraps ``func(points) -> values`` for functions too large to tabulate.

    ``func`` receives an ``(N, n)`` array of points.  ``queries`` counts the
    points passed in (with multiplicity).
    """

    def __init__(self, fs: FieldSpec, n: int, func):
        self.fs, self.m, self.func = fs, n, func
        self.queries = 0

    def at(self, points):
        points = np.asarray(points, dtype=np.int64)
        self.queries += points.shape[0]
        return np.asarray(self.func(points), dtype=np.int64)


def _as_oracle(f, fs):
    if isinstance(f, (EvalTable, CallableOracle)):
        return f
    if isinstance(f, MPoly):
        return f.tabulate()
    raise TypeError("f must be an EvalTable, MPoly or CallableOracle")


# ----------------------------------------------------------------------
# the batched engine
# ----------------------------------------------------------------------


def batch_matmul(fs: FieldSpec, X: np.ndarray, W: np.ndarray) -> np.ndarray:
    """``out[b, i, :] = sum_k X[i, k] * W[b, k, :]`` over the field.

    ``X`` is ``(N, K)`` and ``W`` is ``(B, K, n)``.
    """
    B, K, n = W.shape
    out = np.zeros((B, X.shape[0], n), dtype=np.int64)
    for k in range(K):
        out = fs.add[out, fs.mul[X[None, :, k, None], W[:, None, k, :]]]
    return out


def _index_parts_char2(fs, pts, Mt, c=None):
    """Point indices of ``M x (+ c)`` for every row of ``pts``, characteristic 2.

    Addition in characteristic 2 is XOR on codes, and the packed index of a
    point is the bitwise concatenation of its codes, so indices of sums are
    XORs of indices.  ``Mt`` is ``(B, K, n)`` (transposed maps).
    """
    B, K, n = Mt.shape
    w = radix_weights(fs.q, n)
    vals = np.arange(fs.q)
    # col[b, k, v] = index of v * M[:, k]
    col = fs.mul[vals[None, None, :, None], Mt[:, :, None, :]] @ w
    out = np.zeros((B, pts.shape[0]), dtype=np.int64)
    for k in range(K):
        out ^= col[:, k, :][:, pts[:, k]]
    if c is not None:
        out ^= (c @ w)[:, None]
    return out


def query_indices(fs: FieldSpec, head_pts, tail_pts, M, c) -> np.ndarray:
    """Table indices of ``T(a, b)`` for a batch of maps.

    ``M`` is ``(B, n, h + t)`` and ``c`` is ``(B, n)``; ``head_pts`` are the
    ``a`` values (``(A, h)``) and ``tail_pts`` the ``b`` values.  Returns an
    ``(B, A, len(tail_pts))`` array.
    """
    h = head_pts.shape[1]
    Mt = np.ascontiguousarray(M.transpose(0, 2, 1))
    if fs.p == 2:
        ia = _index_parts_char2(fs, head_pts, Mt[:, :h, :])
        ib = _index_parts_char2(fs, tail_pts, Mt[:, h:, :], c)
        return ia[:, :, None] ^ ib[:, None, :]
    w = radix_weights(fs.q, M.shape[1])
    A = batch_matmul(fs, head_pts, Mt[:, :h, :])
    Bp = fs.add[batch_matmul(fs, tail_pts, Mt[:, h:, :]), c[:, None, :]]
    return fs.add[A[:, :, None, :], Bp[:, None, :, :]] @ w


def query_points(fs: FieldSpec, head_pts, tail_pts, M, c) -> np.ndarray:
    """Like :func:`query_indices` but returns coordinates ``(B, A, T, n)``."""
    h = head_pts.shape[1]
    Mt = np.ascontiguousarray(M.transpose(0, 2, 1))
    A = batch_matmul(fs, head_pts, Mt[:, :h, :])
    Bp = fs.add[batch_matmul(fs, tail_pts, Mt[:, h:, :]), c[:, None, :]]
    return fs.add[A[:, :, None, :], Bp[:, None, :, :]]


def block_aggregate(fs: FieldSpec, fvals: np.ndarray, H_values: np.ndarray) -> np.ndarray:
    """``g[b, y] = sum_a H(a) fvals[b, a, y]``."""
    if H_values.size == 1 and H_values[0] == 1:
        return fvals[:, 0, :]
    return fs.sum(fs.mul[H_values[None, :, None], fvals], axis=1)


def evaluate_batch(f, fs: FieldSpec, head_pts, head_vals, tail_pts, M, c):
    """Aggregated tail function ``g`` for each map, plus the query indices."""
    if isinstance(f, EvalTable):
        idx = query_indices(fs, head_pts, tail_pts, M, c)
        fvals = f.values[idx]
    else:
        pts = query_points(fs, head_pts, tail_pts, M, c)
        fvals = f.at(pts.reshape(-1, pts.shape[-1])).reshape(pts.shape[:-1])
        idx = None
    return block_aggregate(fs, fvals, head_vals), idx


def tail_moments(fs: FieldSpec, g: np.ndarray, t: int) -> np.ndarray:
    """``m[b, e] = <g_b, y^e>`` for every ``e`` in ``{0..q-1}^t`` (flattened)."""
    q = fs.q
    B = g.shape[0]
    arr = g.reshape((B,) + (q,) * t)
    vt = np.ascontiguousarray(power_table(fs).T)  # vt[e, x] = x^e
    for ax in range(1, t + 1):
        arr = axis_transform(fs, arr, vt, ax)
    return arr.reshape(B, -1)


@dataclass
class TestReport:
    """Verdict of one test run."""

    verdict: str
    witness: tuple | None
    queries_used: int
    T: AffineMap | None = None
    value: int = 0

    @property
    def rejected(self) -> bool:
        return self.verdict == "reject"


@dataclass
class BatchResult:
    reject: np.ndarray
    witness_index: np.ndarray
    witness_value: np.ndarray
    queries: np.ndarray | None = None
    indices: np.ndarray | None = None


def _distinct_counts(idx: np.ndarray) -> np.ndarray:
    flat = np.sort(idx.reshape(idx.shape[0], -1), axis=1)
    return 1 + np.count_nonzero(np.diff(flat, axis=1), axis=1)


def run_batch(f, spec: TesterSpec, M, c, count_queries: bool = False,
              keep_indices: bool = False) -> BatchResult:
    """Run the sparse test for a batch of maps ``(M[b], c[b])``."""
    fs = spec.fs
    M = np.asarray(M, dtype=np.int64)
    c = np.asarray(c, dtype=np.int64)
    if M.ndim != 3 or M.shape[2] != spec.arity or M.shape[1] != f.m or c.shape != M.shape[:2]:
        raise ShapeMismatch(
            f"maps must be (B, {f.m}, {spec.arity}) with shifts (B, {f.m}); got {M.shape}, {c.shape}"
        )
    tail = all_points(fs.q, spec.t)
    g, idx = evaluate_batch(f, fs, spec.H_points, spec.H_values, tail, M, c)
    mom = tail_moments(fs, g, spec.t)
    E = point_index(spec.valid_exps, fs.q) if spec.valid_exps.size else np.zeros(0, dtype=np.int64)
    mv = mom[:, E]
    nz = mv != 0
    reject = nz.any(axis=1)
    wi = np.where(reject, np.argmax(nz, axis=1), -1)
    wv = np.where(reject, mv[np.arange(mv.shape[0]), np.maximum(wi, 0)], 0)
    q = None
    if count_queries:
        if idx is not None:
            q = _distinct_counts(idx)
        else:
            pts = query_points(fs, spec.H_points, tail, M, c)
            q = _distinct_counts(point_index(pts, fs.q))
    return BatchResult(reject, wi, wv, q, idx if keep_indices else None)


def distinct_queries(spec: TesterSpec, T: AffineMap, chunk: int = 1 << 16) -> int:
    """Number of distinct points ``T(a, b)`` over ``supp_H``, counted on a bitmap.

    Works head-chunk by head-chunk, so it stays cheap in memory even when
    ``|supp_H|`` runs into the millions.
    """
    fs = spec.fs
    if T.ell != spec.arity:
        raise ShapeMismatch(f"T must have domain F^{spec.arity}")
    seen = np.zeros(fs.q**T.n, dtype=bool)
    tail = all_points(fs.q, spec.t)
    step = max(1, chunk // tail.shape[0])
    for i in range(0, spec.H_points.shape[0], step):
        idx = query_indices(fs, spec.H_points[i:i + step], tail, T.M[None], T.c[None])
        seen[idx.reshape(-1)] = True
    return int(np.count_nonzero(seen))


def run_sparse_test(f, T: AffineMap, spec: TesterSpec) -> TestReport:
    """One test with the given map ``T: F^{s+t} -> F^n``."""
    f = _as_oracle(f, spec.fs)
    if T.ell != spec.arity or T.n != f.m:
        raise ShapeMismatch(f"T must map F^{spec.arity} into F^{f.m}")
    res = run_batch(f, spec, T.M[None], T.c[None], count_queries=True)
    if res.reject[0]:
        e = tuple(int(v) for v in spec.valid_exps[res.witness_index[0]])
        return TestReport("reject", e, int(res.queries[0]), T, int(res.witness_value[0]))
    return TestReport("accept", None, int(res.queries[0]), T, 0)


def sample_maps(fs: FieldSpec, n: int, ell: int, count: int, rng):
    return rng.integers(0, fs.q, (count, n, ell)), rng.integers(0, fs.q, (count, n))


@dataclass
class RejectionEstimate:
    rate: float
    ci: float
    rejects: int
    trials: int
    witnesses: Counter = field(default_factory=Counter)
    max_queries: int = 0

    def as_dict(self):
        return {
            "rate": self.rate,
            "ci": self.ci,
            "rejects": self.rejects,
            "trials": self.trials,
            "queries": self.max_queries,
            "witnesses": {" ".join(map(str, e)): k for e, k in sorted(self.witnesses.items())},
        }


def estimate_rejection(f, spec: TesterSpec, trials: int, seed: int = 0, threads: int = 1,
                       count_queries: bool = False, stream: int = 0) -> RejectionEstimate:
    """Monte-Carlo rejection rate over uniform ``T`` in ``T_{n, s+t}``.

    Trials are split into fixed chunks with independent seeded streams, so
    the result is the same for any thread count.
    """
    if trials < 1:
        raise InvalidParameters("trials must be positive")
    fs = spec.fs
    f = _as_oracle(f, fs)

    def work(ci, count):
        rng = chunk_rng(seed, ci, stream)
        M, c = sample_maps(fs, f.m, spec.arity, count, rng)
        return run_batch(f, spec, M, c, count_queries=count_queries)

    results = map_chunks(work, trials, threads, _chunk_size(spec, f.m))
    rejects = sum(int(r.reject.sum()) for r in results)
    wit = Counter()
    for r in results:
        for i in r.witness_index[r.reject]:
            wit[tuple(int(v) for v in spec.valid_exps[i])] += 1
    maxq = max((int(r.queries.max()) for r in results if r.queries is not None), default=0)
    _, _, half = wilson(rejects, trials)
    return RejectionEstimate(rejects / trials, half, rejects, trials, wit, maxq)


def _chunk_size(spec: TesterSpec, n: int) -> int:
    per = spec.supp_H_size * max(n, 1)
    return int(max(16, min(CHUNK, 4_000_000 // per)))


# ----------------------------------------------------------------------
# the flat test and the flat-test view
# ----------------------------------------------------------------------


def run_flat_test(f: EvalTable, U: FlatBasis, d: int) -> bool:
    """Accept iff the restriction of ``f`` to the flat has degree at most ``d``."""
    if U.ambient != f.m:
        raise ShapeMismatch("flat lives in a different space")
    return table_degree(compose_affine(f, U.as_map())) <= d


def tilde_f(f, A: AffineMap, spec: TesterSpec) -> EvalTable:
    """``f~(beta) = sum_alpha f(A(alpha, beta)) prod P(alpha)`` on ``F_q^ell``."""
    fs = spec.fs
    f = _as_oracle(f, fs)
    ell = A.ell - spec.s
    if ell < 0 or A.n != f.m:
        raise ShapeMismatch(f"A must map F^(s+ell) into F^{f.m}")
    tail = all_points(fs.q, ell)
    g, _ = evaluate_batch(f, fs, spec.H_points, spec.H_values, tail, A.M[None], A.c[None])
    return EvalTable(fs, ell, g[0])


def flat_verdict(ft: EvalTable, B: Restriction, r: int) -> bool:
    """True (reject) iff ``deg(f~ restricted to fl(B)) >= r``."""
    return table_degree(compose_affine(ft, AffineMap(ft.fs, B.Rp, B.bp))) >= r


# ----------------------------------------------------------------------
# naive reference
# ----------------------------------------------------------------------


def naive_inner_product(f, T: AffineMap, spec: TesterSpec, e) -> int:
    """``<f o T, H_e>`` summed over all of ``F_q^{s+t}``."""
    fs = spec.fs
    fT = compose_affine(_as_oracle(f, fs) if not isinstance(f, MPoly) else f, T)
    return inner_product(fT, build_H(fs, spec.params, e).tabulate())


def naive_test(f, T: AffineMap, spec: TesterSpec) -> TestReport:
    """Reference verdict by full tabulation of ``f o T`` and of each ``H_e``."""
    fs = spec.fs
    fT = compose_affine(_as_oracle(f, fs) if not isinstance(f, MPoly) else f, T)
    for e in spec.valid_exps:
        v = inner_product(fT, build_H(fs, spec.params, e).tabulate())
        if v:
            return TestReport("reject", tuple(int(x) for x in e), fs.q**spec.arity, T, v)
    return TestReport("accept", None, fs.q**spec.arity, T, 0)


def flat_tester_queries(q: int, p: int, d: int) -> int:
    """Queries of the classical flat tester: ``q^{ceil((d+1)/(q - q/p))}``."""
    return q ** math.ceil((d + 1) / (q - q // p))
