"""Product-form testers for lifted affine-invariant codes.

A :class:`BlockProductSpec` lists block polynomials ``P_1, ..., P_m`` on
disjoint sets of variables, a tail arity ``t`` and a set ``E`` of tail
exponents.  The induced test samples ``T`` and rejects when
``<f o T, P_1 ... P_m y^e> != 0`` for some ``e`` in ``E``.  The RM sparse
tester is the instance with ``s/p`` copies of ``P`` and ``E`` the valid
degree sequences.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BadShape, FullExponentInE, InvalidParameters, SharedVariables, ShapeMismatch
from .gf import FieldSpec
from .mpoly import EvalTable, all_points, power_table
from .stats import chunk_rng
from .tester import TestReport, TesterSpec, block_product, evaluate_batch, sample_maps, support_of


@dataclass
class BlockProductSpec:
    """User-facing description of a product-form tester.

    ``variables`` optionally names, for each block, which of the ``k`` head
    variables it uses; by default blocks take consecutive variables.
    """

    fs: FieldSpec
    blocks: list
    t: int
    E: np.ndarray
    variables: list | None = None


@dataclass
class GenericSpec:
    fs: FieldSpec
    t: int
    H_points: np.ndarray
    H_values: np.ndarray
    valid_exps: np.ndarray
    tail_table: np.ndarray

    @property
    def s(self) -> int:
        return self.H_points.shape[1]

    @property
    def arity(self) -> int:
        return self.s + self.t

    @property
    def supp_H_size(self) -> int:
        return self.H_points.shape[0] * self.fs.q**self.t


def build_generic(spec: BlockProductSpec) -> GenericSpec:
    """Tabulate the block product on its support and the tail monomials."""
    fs, q, t = spec.fs, spec.fs.q, spec.t
    E = np.asarray(spec.E, dtype=np.int64).reshape(-1, t)
    if E.size and ((E < 0) | (E > q - 1)).any():
        raise InvalidParameters("tail exponents must lie in [0, q-1]")
    if any((row == q - 1).all() for row in E):
        raise FullExponentInE("E contains (q-1, ..., q-1)")
    for P in spec.blocks:
        if P.fs != fs:
            raise InvalidParameters("block polynomial over a different field")
        if P.is_zero():
            raise InvalidParameters("block polynomials must be nonzero")
    arities = [P.m for P in spec.blocks]
    k = sum(arities)
    if spec.variables is None:
        order = list(range(k))
    else:
        if [len(v) for v in spec.variables] != arities:
            raise BadShape("variable lists do not match block arities")
        order = [int(i) for v in spec.variables for i in v]
        if len(set(order)) != len(order):
            raise SharedVariables("blocks share variables")
        if sorted(order) != list(range(k)):
            raise BadShape("block variables must be exactly 0..k-1")
    pts, vals = block_product(fs, [support_of(P) for P in spec.blocks])
    head = np.empty_like(pts)
    head[:, order] = pts
    perm = np.lexsort(head.T[::-1]) if head.shape[1] else np.arange(head.shape[0])
    head, vals = np.ascontiguousarray(head[perm]), vals[perm]
    # lexicographic E so that witnesses are reproducible
    E = np.unique(E, axis=0)
    tail = all_points(q, t)
    pt = power_table(fs)
    Y = np.ones((tail.shape[0], E.shape[0]), dtype=np.int64)
    for i in range(t):
        Y = fs.mul[Y, pt[tail[:, i][:, None], E[:, i][None, :]]]
    return GenericSpec(fs, t, head, vals, E, Y)


def rm_instance(spec: TesterSpec) -> BlockProductSpec:
    """The block description of the RM sparse tester."""
    return BlockProductSpec(spec.fs, [spec.P] * spec.params.blocks, spec.t, spec.valid_exps.copy())


def run_generic_batch(f, gspec: GenericSpec, M, c):
    """Reject flags and witness indices for a batch of maps."""
    fs = gspec.fs
    M = np.asarray(M, dtype=np.int64)
    c = np.asarray(c, dtype=np.int64)
    if M.ndim != 3 or M.shape[2] != gspec.arity or M.shape[1] != f.m:
        raise ShapeMismatch(f"maps must be (B, {f.m}, {gspec.arity})")
    tail = all_points(fs.q, gspec.t)
    g, _ = evaluate_batch(f, fs, gspec.H_points, gspec.H_values, tail, M, c)
    if gspec.valid_exps.shape[0] == 0:
        z = np.zeros(g.shape[0], dtype=bool)
        return z, np.full(g.shape[0], -1), np.zeros(g.shape[0], dtype=np.int64)
    mom = fs.sum(fs.mul[g[:, :, None], gspec.tail_table[None, :, :]], axis=1)
    nz = mom != 0
    rej = nz.any(axis=1)
    wi = np.where(rej, np.argmax(nz, axis=1), -1)
    wv = np.where(rej, mom[np.arange(mom.shape[0]), np.maximum(wi, 0)], 0)
    return rej, wi, wv


def run_generic_test(f, T, gspec: GenericSpec) -> TestReport:
    if T.ell != gspec.arity or T.n != f.m:
        raise ShapeMismatch(f"T must map F^{gspec.arity} into F^{f.m}")
    rej, wi, wv = run_generic_batch(f, gspec, T.M[None], T.c[None])
    if rej[0]:
        e = tuple(int(v) for v in gspec.valid_exps[wi[0]])
        return TestReport("reject", e, gspec.supp_H_size, T, int(wv[0]))
    return TestReport("accept", None, gspec.supp_H_size, T, 0)


def generic_rejection(f, gspec: GenericSpec, trials: int, seed: int = 0) -> float:
    rng = chunk_rng(seed, 0, stream=41)
    rejects = 0
    left = trials
    while left:
        B = min(left, 128)
        M, c = sample_maps(gspec.fs, f.m, gspec.arity, B, rng)
        rejects += int(run_generic_batch(f, gspec, M, c)[0].sum())
        left -= B
    return rejects / trials


def accepted_by_all(f, gspec: GenericSpec, maps=None, trials: int = 2000, seed: int = 0) -> bool:
    """Whether every listed (or sampled) map accepts ``f``."""
    if maps is None:
        return generic_rejection(f, gspec, trials, seed) == 0.0
    M = np.stack([T.M for T in maps])
    c = np.stack([T.c for T in maps])
    return not run_generic_batch(f, gspec, M, c)[0].any()


def falsify(gspec: GenericSpec, n: int, member, attempts: int = 200, trials: int = 500,
            seed: int = 0, sampler=None):
    """Look for a function accepted by the test that ``member`` says is outside the code.

    ``sampler(rng)`` draws candidate tables (default: uniform random tables).
    Returns the first counterexample found, or ``None``.
    """
    fs = gspec.fs
    rng = chunk_rng(seed, 0, stream=43)
    for i in range(attempts):
        f = sampler(rng) if sampler else EvalTable(fs, n, rng.integers(0, fs.q, fs.q**n))
        if member(f):
            continue
        if accepted_by_all(f, gspec, trials=trials, seed=seed + i):
            return f
    return None


def lift_member(base: EvalTable, n: int, A=None) -> EvalTable:
    """Pull a function on ``F^m`` back to ``F^n`` along a linear projection."""
    from .affine import AffineMap
    from .mpoly import compose_affine

    fs, m = base.fs, base.m
    if A is None:
        A = AffineMap(fs, np.eye(m, n, dtype=np.int64), np.zeros(m, dtype=np.int64))
    return compose_affine(base, A)
