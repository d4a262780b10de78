"""Brute-force ground truth: exact degree, codewords, distances and the
canonical-monomial machinery behind perfect completeness."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .affine import identity_padded, sample_full_rank
from .errors import BadTail, BudgetExceeded, InvalidParameters, NotFound, NotInShadow
from .gf import FieldSpec, lucas_binom, p_shadow_leq
from .mpoly import (
    EvalTable,
    MPoly,
    all_points,
    axis_transform,
    compose_affine,
    inner_product,
    power_table,
    table_degree,
)
from .stats import rng_for
from .tester import RMParams, build_P

DEFAULT_BUDGET = 2**24


def exact_degree(f: EvalTable) -> int:
    """Total degree of the reduced interpolant (0 for the zero function)."""
    return table_degree(f)


def monomials_upto(q: int, n: int, d: int) -> np.ndarray:
    """Exponent vectors in ``{0..q-1}^n`` of total degree at most ``d``, lexicographic."""
    pts = all_points(q, n)
    return np.ascontiguousarray(pts[pts.sum(axis=1) <= d])


def tabulate_coefficients(fs: FieldSpec, n: int, coeffs: np.ndarray) -> np.ndarray:
    """Values of ``sum_e C[e] x^e`` from a dense ``(q,)*n`` coefficient tensor."""
    arr = np.asarray(coeffs, dtype=np.int64).reshape((fs.q,) * n)
    pt = power_table(fs)  # pt[x, e]
    for ax in range(n):
        arr = axis_transform(fs, arr, pt, ax)
    return arr.reshape(-1)


def random_poly_table(fs: FieldSpec, n: int, mask: np.ndarray, rng) -> EvalTable:
    """Table of a polynomial with i.i.d. uniform coefficients on ``mask``."""
    coeffs = np.where(mask, rng.integers(0, fs.q, mask.shape), 0)
    return EvalTable(fs, n, tabulate_coefficients(fs, n, coeffs))


def degree_mask(q: int, n: int, lo: int, hi: int) -> np.ndarray:
    deg = all_points(q, n).sum(axis=1).reshape((q,) * n)
    return (deg >= lo) & (deg <= hi)


def random_codeword(fs: FieldSpec, n: int, d: int, seed=0) -> EvalTable:
    """Uniform codeword of ``RM[n, q, d]``."""
    rng = rng_for(seed)
    return random_poly_table(fs, n, degree_mask(fs.q, n, 0, d), rng)


def random_exact_degree(fs: FieldSpec, n: int, D: int, seed=0) -> EvalTable:
    """Random polynomial of degree exactly ``D`` (resampled until its top part is nonzero)."""
    rng = rng_for(seed)
    top = degree_mask(fs.q, n, D, D)
    if not top.any():
        raise InvalidParameters(f"no monomial of degree {D} in {n} variables over F_{fs.q}")
    low = random_poly_table(fs, n, degree_mask(fs.q, n, 0, D - 1), rng) if D else EvalTable.zeros(fs, n)
    while True:
        hi = random_poly_table(fs, n, top, rng)
        if hi.weight():
            f = low + hi
            if exact_degree(f) == D:
                return f


def _check_budget(fs, n, d, budget):
    count = monomials_upto(fs.q, n, d).shape[0]
    total = fs.q**count
    if total > budget:
        raise BudgetExceeded(f"RM[{n},{fs.q},{d}] has {fs.q}^{count} codewords, over budget {budget}")
    return count


def _codeword_basis(fs, n, d):
    """``(q^n, #monomials)`` matrix of monomial evaluations."""
    mons = monomials_upto(fs.q, n, d)
    pts = all_points(fs.q, n)
    pt = power_table(fs)
    V = np.ones((pts.shape[0], mons.shape[0]), dtype=np.int64)
    for i in range(n):
        V = fs.mul[V, pt[pts[:, i][:, None], mons[:, i][None, :]]]
    return mons, V


def _coefficient_batches(q, count, batch=4096):
    it = itertools.product(range(q), repeat=count)
    while True:
        block = list(itertools.islice(it, batch))
        if not block:
            return
        yield np.array(block, dtype=np.int64).reshape(len(block), count)


def enumerate_codewords(fs: FieldSpec, n: int, d: int, budget: int = DEFAULT_BUDGET):
    """Every codeword of ``RM[n, q, d]`` exactly once.

    Codewords come in lexicographic order of their coefficient vectors over
    the degree-``<= d`` monomials (themselves in lexicographic order).
    """
    count = _check_budget(fs, n, d, budget)
    _, V = _codeword_basis(fs, n, d)
    for C in _coefficient_batches(fs.q, count):
        vals = fs.matmul(C, V.T)
        for row in vals:
            yield EvalTable(fs, n, row)


@dataclass
class DistanceResult:
    delta: Fraction
    nearest: EvalTable
    ties: int
    errors: int
    coefficients: tuple = field(default=())


def distance_to_code(f: EvalTable, d: int, budget: int = DEFAULT_BUDGET) -> DistanceResult:
    """Exact ``delta_d(f)`` by exhaustive search over the code.

    Ties go to the lexicographically smallest coefficient vector.
    """
    fs, n = f.fs, f.m
    count = _check_budget(fs, n, d, budget)
    _, V = _codeword_basis(fs, n, d)
    best, best_c, ties = None, None, 0
    for C in _coefficient_batches(fs.q, count):
        vals = fs.matmul(C, V.T)
        dist = np.count_nonzero(vals != f.values[None, :], axis=1)
        m = int(dist.min())
        hits = int(np.count_nonzero(dist == m))
        if best is None or m < best:
            best, ties = m, hits
            best_c = C[int(np.argmax(dist == m))]
        elif m == best:
            ties += hits
    vals = fs.matmul(best_c[None, :], V.T)[0]
    return DistanceResult(Fraction(best, fs.q**n), EvalTable(fs, n, vals), ties, best,
                          tuple(int(v) for v in best_c))


# ----------------------------------------------------------------------
# canonical monomials and monomial moves
# ----------------------------------------------------------------------


def canonical_exponents(params: RMParams, e_tail, n: int | None = None) -> tuple:
    q, p, s = params.q, params.p, params.s
    e_tail = tuple(int(v) for v in e_tail)
    if any(v < 0 or v > q - 1 for v in e_tail):
        raise BadTail("tail exponents must lie in [0, q-1]")
    if sum(e_tail) < params.r:
        raise BadTail(f"tail degree {sum(e_tail)} is below r={params.r}")
    e = (q - q // p,) * s + e_tail
    if n is not None:
        if n < len(e):
            raise BadTail(f"monomial needs at least {len(e)} variables")
        e = e + (0,) * (n - len(e))
    return e


def canonical_monomial(params: RMParams, e_tail, n: int | None = None, fs: FieldSpec | None = None) -> MPoly:
    """``prod_{i<=s} x_i^{q-q/p} * prod_j x_{s+j}^{e_j}``, optionally padded to arity ``n``."""
    from .gf import field_new

    fs = fs or field_new(params.p, params.k)
    return MPoly.monomial(fs, canonical_exponents(params, e_tail, n))


def monomial_shift_step(fs: FieldSpec, e, i: int, j: int, m: int) -> tuple:
    """Move ``m`` units of degree from ``e_j`` to ``e_i``.

    Requires ``m`` to be in the ``p``-shadow of ``e_j`` so the binomial
    ``C(e_j, m)`` is nonzero mod ``p``; the substitution
    ``x_j -> x_i + x_j`` then produces the shifted monomial.
    """
    e = list(int(v) for v in e)
    if i == j or m < 0:
        raise InvalidParameters("shift needs distinct coordinates and m >= 0")
    if not p_shadow_leq(fs.p, m, e[j]):
        raise NotInShadow(f"{m} is not in the {fs.p}-shadow of {e[j]}")
    assert lucas_binom(fs.p, e[j], m) != 0
    if e[i] + m > fs.q - 1:
        raise InvalidParameters("shift would push an exponent past q-1")
    e[i] += m
    e[j] -= m
    return tuple(e)


def _digits(a, p, k):
    return [(a // p**j) % p for j in range(k)]


def _lowest_unit(a, p):
    """Smallest power ``p^m`` with a nonzero digit in ``a``."""
    u = 1
    while a % (u * p) == 0:
        u *= p
    return u


@dataclass
class ReductionTrace:
    start: tuple
    steps: list
    final: tuple

    def replay(self, fs: FieldSpec) -> tuple:
        """Re-apply every step with full checks; returns the final exponents."""
        e = self.start
        for kind, *args in self.steps:
            if kind == "shift":
                e = monomial_shift_step(fs, e, *args)
            else:
                (target,) = args
                if not all(p_shadow_leq(fs.p, a, b) for a, b in zip(target, e)):
                    raise NotInShadow("drop step leaves the p-shadow")
                e = tuple(target)
        return e


def reduce_to_canonical(fs: FieldSpec, params: RMParams, e) -> ReductionTrace:
    """Turn a monomial of degree ``> d`` into a canonical one by legal moves.

    Legal moves are monomial shifts (Lucas) and passing to a ``p``-shadow.
    The result has ``q - q/p`` in each of the first ``s`` coordinates, a tail
    of total degree ``>= r`` in the next ``t`` and zeros afterwards.
    """
    q, p, s, t, d = fs.q, fs.p, params.s, params.t, params.d
    top = q - q // p
    e = tuple(int(v) for v in e)
    start = e
    if sum(e) <= d:
        raise InvalidParameters("monomial degree must exceed d")
    n = len(e)
    if n < s + t:
        e = e + (0,) * (s + t - n)
        start = e
        n = s + t
    steps = []

    def shift(i, j, m):
        nonlocal e
        e = monomial_shift_step(fs, e, i, j, m)
        steps.append(("shift", i, j, m))

    def drop(target):
        nonlocal e
        steps.append(("drop", tuple(target)))
        e = tuple(target)

    # phase 0: shortest prefix of degree > d
    acc = 0
    for cut, v in enumerate(e):
        acc += v
        if acc > d:
            break
    if any(e[cut + 1:]):
        drop(e[: cut + 1] + (0,) * (n - cut - 1))

    # phase 1: raise every head coordinate to at least q - q/p
    while True:
        low = [i for i in range(s) if e[i] < top]
        if not low:
            break
        i = low[0]
        donor = next((j for j in range(s, n) if e[j] > 0), None)
        if donor is None:
            donor = next(j for j in range(s) if e[j] > top)
        unit = _lowest_unit(e[donor], p)
        shift(i, donor, unit)

    # phase 2: move head excess and everything past the tail into the tail
    tail = range(s, s + t)

    def target_for(unit):
        ok = [j for j in tail if e[j] + unit <= q - 1]
        return min(ok, key=lambda j: (e[j], j)) if ok else None

    for j in list(range(s)) + list(range(s + t, n)):
        floor = top if j < s else 0
        while e[j] > floor:
            unit = _lowest_unit(e[j], p)
            tgt = target_for(unit)
            if tgt is None:
                break
            shift(tgt, j, unit)
        if e[j] > floor:
            # no room left: keep only the part that is forced
            drop(e[:j] + (floor,) + e[j + 1:])

    if sum(e[s:s + t]) < params.r:
        raise NotFound("reduction ended with too little tail degree")
    return ReductionTrace(start, steps, e)


def identity_rejects(fs: FieldSpec, params: RMParams, e, spec=None) -> bool:
    """Whether the identity-padded map rejects ``x^e``."""
    from .tester import build_spec, run_sparse_test

    spec = spec or build_spec(params, fs)
    f = MPoly.monomial(fs, e).tabulate()
    T = identity_padded(fs, len(e), spec.arity)
    return run_sparse_test(f, T, spec).rejected


def find_rejecting_basis(g: EvalTable, fs: FieldSpec | None = None, budget: int | None = None, seed=0):
    """Search full-rank ``T`` in ``T_{p,p}`` with ``<g o T, P> != 0``.

    Returns ``(T, trials)``; raises :class:`NotFound` (carrying the trial
    count) when the budget of ``100 q`` trials runs out.
    """
    fs = fs or g.fs
    p = fs.p
    if g.m != p:
        raise InvalidParameters(f"g must have arity p={p}")
    budget = 100 * fs.q if budget is None else budget
    Ptab = build_P(fs).tabulate()
    rng = rng_for(seed)
    for trial in range(1, budget + 1):
        T = sample_full_rank(fs, p, p, rng)
        if inner_product(compose_affine(g, T), Ptab):
            return T, trial
    raise NotFound(f"no rejecting basis in {budget} trials", trials=budget)
