"""Graph analytics on the affine bi-linear scheme and the affine Grassmann graph.

Vertices of ``AffBilin(n, ell)`` are affine maps ``F^ell -> F^n``; two are
adjacent when they agree on an affine subspace of codimension 1.  Vertices
of ``AffGras(N, ell)`` are ``ell``-flats of ``F^N``, adjacent when they meet
in an ``(ell-1)``-flat.  Everything exact here is meant for tiny parameters;
the sampled checks work at desk scale through the tester engine.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .affine import (
    AffineMap,
    FlatBasis,
    ZoomSpec,
    adjacent,
    enumerate_flats,
    enumerate_maps,
    neighbors,
    sample_zoom,
    up_down_neighbor,
    zoom_contains,
)
from .errors import BudgetExceeded, InvalidParameters
from .gf import FieldSpec
from .mpoly import compose_affine, table_degree
from .stats import chunk_rng, wilson
from .tester import TesterSpec, run_batch, sample_maps, tilde_f

EXACT_BUDGET = 2**26


@dataclass
class VertexSet:
    """A set of vertices given by an explicit list or a membership predicate."""

    fs: FieldSpec
    n: int
    ell: int
    kind: str = "bilin"
    members: frozenset | None = None
    predicate: object = None

    def __post_init__(self):
        if self.kind not in ("bilin", "grassmann"):
            raise InvalidParameters(f"unknown graph kind {self.kind!r}")
        if self.members is None and self.predicate is None:
            raise InvalidParameters("need an explicit member list or a predicate")
        if self.members is not None:
            self.members = frozenset(self.members)

    def __contains__(self, v) -> bool:
        if self.members is not None:
            return v in self.members
        return bool(self.predicate(v))

    def universe(self, budget: int = EXACT_BUDGET):
        if self.kind == "bilin":
            return list(enumerate_maps(self.fs, self.n, self.ell, budget))
        return enumerate_flats(self.fs, self.n, self.ell, budget)

    def explicit(self, budget: int = EXACT_BUDGET) -> list:
        if self.members is not None:
            return list(self.members)
        return [v for v in self.universe(budget) if v in self]


@dataclass
class GraphStats:
    mu: float
    phi: float
    edge_count: int
    boundary_count: int
    ci: float = 0.0
    mode: str = "exact"

    def as_dict(self):
        return dict(mu=self.mu, phi=self.phi, edge_count=self.edge_count,
                    boundary_count=self.boundary_count, ci=self.ci, mode=self.mode)


def flats_adjacent(U: FlatBasis, V: FlatBasis) -> bool:
    """``U != V`` and ``U`` meets ``V`` in a flat of dimension ``dim U - 1``."""
    fs = U.fs
    if U == V:
        return False
    both = np.hstack([U.dirs, V.dirs])
    if both.shape[1] == 0:
        return False
    if fs.solve(both, fs.sub[V.offset, U.offset]) is None:
        return False
    return U.dim + V.dim - fs.rank(both) == U.dim - 1


def graph_neighbors(v, kind: str, universe=None):
    if kind == "bilin":
        return neighbors(v)
    return [u for u in universe if flats_adjacent(v, u)]


def edge_expansion(S: VertexSet, method: str = "neighbors", budget: int = EXACT_BUDGET) -> GraphStats:
    """Exact ``Phi(S)``: fraction of edges leaving ``S`` among edges out of ``S``.

    ``method="neighbors"`` walks each member's neighbour list;
    ``method="pairs"`` tests adjacency on every pair of vertices.
    """
    universe = S.universe(budget)
    members = [v for v in universe if v in S]
    if not members:
        return GraphStats(0.0, 0.0, 0, 0)
    inside = set(members)
    edges = boundary = 0
    if method == "neighbors":
        for u in members:
            for v in graph_neighbors(u, S.kind, universe):
                edges += 1
                boundary += v not in inside
    elif method == "pairs":
        adj = adjacent if S.kind == "bilin" else flats_adjacent
        if len(members) * len(universe) > budget:
            raise BudgetExceeded("pair enumeration exceeds the budget")
        for u in members:
            for v in universe:
                if adj(u, v):
                    edges += 1
                    boundary += v not in inside
    else:
        raise InvalidParameters(f"unknown method {method!r}")
    mu = len(members) / len(universe)
    return GraphStats(mu, boundary / edges if edges else 0.0, edges, boundary)


def random_neighbor(T: AffineMap, rng) -> AffineMap:
    """Uniform AffBilin neighbour: up-down steps conditioned on adjacency."""
    while True:
        T2 = up_down_neighbor(T, rng)
        if adjacent(T, T2):
            return T2


def edge_expansion_sampled(sampler, member, trials: int, seed: int = 0) -> GraphStats:
    """Estimate ``Phi`` from ``sampler(rng)`` (uniform in ``S``) and a membership test."""
    rng = chunk_rng(seed, 0)
    leave = 0
    for _ in range(trials):
        u = sampler(rng)
        leave += not member(random_neighbor(u, rng))
    _, _, half = wilson(leave, trials)
    return GraphStats(float("nan"), leave / trials, trials, leave, half, "sampled")


# ----------------------------------------------------------------------
# the rejecting set
# ----------------------------------------------------------------------


def rejecting_set(f, spec: TesterSpec, n: int | None = None) -> VertexSet:
    """``S_t``: maps ``T`` in ``T_{n, s+t}`` on which the sparse test rejects."""
    n = f.m if n is None else n

    def pred(T):
        return bool(run_batch(f, spec, T.M[None], T.c[None]).reject[0])

    return VertexSet(spec.fs, n, spec.arity, "bilin", predicate=pred)


def sample_rejecting(f, spec: TesterSpec, count: int, rng, max_draws: int = 10**7):
    """``count`` uniform samples from ``S_t`` by rejection sampling, batched."""
    fs = spec.fs
    Ms, cs, draws = [], [], 0
    have = 0
    while have < count:
        if draws > max_draws:
            raise BudgetExceeded("rejecting set too sparse to sample")
        M, c = sample_maps(fs, f.m, spec.arity, 512, rng)
        draws += 512
        rej = run_batch(f, spec, M, c).reject
        Ms.append(M[rej])
        cs.append(c[rej])
        have += int(rej.sum())
    return np.concatenate(Ms)[:count], np.concatenate(cs)[:count], draws


def persistence(f, spec: TesterSpec, trials: int, seed: int = 0) -> dict:
    """One-step persistence of ``S_t`` under the up-down walk.

    Draws ``T`` uniformly from ``S_t``, takes one step (``w`` uniform nonzero,
    the new row of the down-step uniform) and records how often the result
    still rejects.  The expansion lemma predicts a frequency of at least ``1/q``.
    """
    fs = spec.fs
    rng = chunk_rng(seed, 0, stream=7)
    M, c, draws = sample_rejecting(f, spec, trials, rng)
    M2, c2 = M.copy(), c.copy()
    for i in range(trials):
        T2 = up_down_neighbor(AffineMap(fs, M[i], c[i]), rng, lazy=True)
        M2[i], c2[i] = T2.M, T2.c
    stay = int(run_batch(f, spec, M2, c2).reject.sum())
    _, _, half = wilson(stay, trials)
    return {"stay": stay / trials, "ci": half, "trials": trials,
            "mu_S": trials / draws, "threshold": 1 / fs.q}


# ----------------------------------------------------------------------
# upper shadows through the flat-test view
# ----------------------------------------------------------------------


def _full_rank_matrix(fs, rows, cols, rng):
    while True:
        R = rng.integers(0, fs.q, (rows, cols))
        if fs.rank(R) == cols:
            return R


def shadow_check(f, spec: TesterSpec, ell: int | None = None, trials: int = 200,
                 flats_per_A: int = 8, seed: int = 0, mode: str = "flat") -> dict:
    """Estimate ``mu(S)`` and ``mu(S up)`` through ``f~``.

    For each sampled ``A: F^{s+ell} -> F^n`` the function ``f~`` on
    ``F^ell`` is formed once.  In ``flat`` mode ``S`` is the set of ``t``-flats
    ``U`` with ``deg(f~|U) >= r`` and its upper shadow is the set of
    ``(t+1)``-flats containing such a ``U``, which (since ``t >= p + 2``) are the
    ``(t+1)``-flats with ``deg >= r``.  In ``affine`` mode the same is done with
    arbitrary affine maps ``F^t -> F^ell`` and ``F^{t+1} -> F^ell``.
    """
    fs = spec.fs
    t, r = spec.t, spec.params.r
    ell = t + 2 if ell is None else ell
    if ell < t + 1:
        raise InvalidParameters("ell must be at least t + 1")
    hit_s = hit_up = total = 0
    for i in range(trials):
        rng = chunk_rng(seed, i, stream=11)
        Mm, cc = sample_maps(fs, f.m, spec.s + ell, 1, rng)
        ft = tilde_f(f, AffineMap(fs, Mm[0], cc[0]), spec)
        for _ in range(flats_per_A):
            for dim, bump in ((t, 0), (t + 1, 1)):
                if mode == "flat":
                    R = _full_rank_matrix(fs, ell, dim, rng)
                else:
                    R = rng.integers(0, fs.q, (ell, dim))
                b = rng.integers(0, fs.q, ell)
                deg = table_degree(compose_affine(ft, AffineMap(fs, R, b)))
                if deg >= r:
                    if bump:
                        hit_up += 1
                    else:
                        hit_s += 1
            total += 1
    mu_s, mu_up = hit_s / total, hit_up / total
    _, _, ci_s = wilson(hit_s, total)
    _, _, ci_up = wilson(hit_up, total)
    ratio = mu_up / mu_s if mu_s else float("inf") if mu_up else 0.0
    ratio_ci = ratio * (ci_s / mu_s + ci_up / mu_up) if mu_s and mu_up else float("inf")
    return {"mode": mode, "mu_S": mu_s, "mu_S_up": mu_up, "ci_S": ci_s, "ci_up": ci_up,
            "ratio": ratio, "ratio_ci": ratio_ci, "samples": total, "q": fs.q}


# ----------------------------------------------------------------------
# zoom densities
# ----------------------------------------------------------------------


def zoom_density(S: VertexSet, z: ZoomSpec, trials: int | None = None, seed: int = 0):
    """Density of ``S`` inside the zoom family; exact when ``trials`` is None."""
    fs = S.fs
    if trials is None:
        members = [T for T in enumerate_maps(fs, S.n, S.ell) if zoom_contains(z, T)]
        if not members:
            return 0.0
        return sum(T in S for T in members) / len(members)
    rng = chunk_rng(seed, 0, stream=13)
    hits = sum(sample_zoom(z, fs, S.n, S.ell, rng) in S for _ in range(trials))
    return hits / trials


def zoom_in_density_batch(f, spec: TesterSpec, a, b, trials: int, rng) -> float:
    """Fraction of ``T`` in ``C_{a,b}`` rejected by the sparse test (batched)."""
    fs = spec.fs
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    M, _ = sample_maps(fs, f.m, spec.arity, trials, rng)
    Ma = fs.sum(fs.mul[M, a[None, None, :]], axis=2)
    c = fs.sub[b[None, :], Ma]
    return float(run_batch(f, spec, M, c).reject.mean())


# ----------------------------------------------------------------------
# the phi embedding
# ----------------------------------------------------------------------


def phi_embed(T: AffineMap) -> FlatBasis:
    """``phi(M, c) = (0, c) + span((e_i, M e_i))`` in ``F^{ell + n}``."""
    fs = T.fs
    n, ell = T.M.shape
    dirs = np.vstack([np.eye(ell, dtype=np.int64), T.M])
    off = np.concatenate([np.zeros(ell, dtype=np.int64), T.c])
    return FlatBasis(fs, off, dirs)


def in_image(U: FlatBasis, ell: int) -> bool:
    """A flat is in the image of ``phi`` iff its projection to the first ``ell`` coordinates is full rank."""
    return U.fs.rank(U.dirs[:ell]) == ell


def _contains_dir(U: FlatBasis, v) -> bool:
    fs = U.fs
    return fs.solve(U.dirs, np.asarray(v)) is not None


def _inside_hyperplane(U: FlatBasis, normal, beta) -> bool:
    fs = U.fs
    if int(fs.dot(normal, U.offset)) != beta:
        return False
    return not fs.matvec(U.dirs.T, normal).any()


def phi_checks(fs: FieldSpec, n: int, ell: int, budget: int = 2**16) -> dict:
    """Exhaustive checks of the embedding ``AffBilin(n, ell) -> AffGras(n + ell, ell)``."""
    maps = list(enumerate_maps(fs, n, ell, budget))
    flats = enumerate_flats(fs, n + ell, ell, budget)
    if len(maps) ** 2 > budget * 64:
        raise BudgetExceeded("phi checks are exhaustive; parameters too large")
    img = {}
    for T in maps:
        img[T] = phi_embed(T)
    image_keys = {U.key() for U in img.values()}
    out = {"maps": len(maps), "flats": len(flats), "image": len(image_keys)}
    out["injective"] = len(image_keys) == len(maps)

    pairs = 0
    preserved = True
    for T1, T2 in itertools.combinations(maps, 2):
        pairs += 1
        if adjacent(T1, T2) != flats_adjacent(img[T1], img[T2]):
            preserved = False
    out["edges_preserved"] = preserved
    out["pairs_checked"] = pairs

    out["image_characterised"] = all((U.key() in image_keys) == in_image(U, ell) for U in flats)

    worst = 1.0
    for U in img.values():
        nb = [V for V in flats if flats_adjacent(U, V)]
        frac = sum(V.key() in image_keys for V in nb) / len(nb)
        worst = min(worst, frac)
    out["min_in_image_neighbor_fraction"] = worst
    out["neighbor_fraction_ok"] = worst >= 1 - 1 / fs.q - 1e-12

    zoom_ok = {k: True for k in ("zoom_in", "zoom_in_lin", "zoom_out", "zoom_out_lin")}
    vecs_l = list(itertools.product(range(fs.q), repeat=ell))
    vecs_n = list(itertools.product(range(fs.q), repeat=n))
    for a in vecs_l:
        for b in vecs_n:
            v = np.array(a + b)
            for kind in ("zoom_in", "zoom_in_lin"):
                if kind == "zoom_in_lin" and not v.any():
                    continue
                z = ZoomSpec(kind, a, b)
                lhs = {img[T].key() for T in maps if zoom_contains(z, T)}
                if kind == "zoom_in":
                    rhs = {U.key() for U in flats if U.contains(v)}
                else:
                    rhs = {U.key() for U in flats if _contains_dir(U, v)}
                if lhs != rhs & image_keys:
                    zoom_ok[kind] = False
    for a in vecs_n:
        for b in vecs_l:
            normal = np.array(tuple(int(fs.neg[x]) for x in b) + a)
            if not normal.any():
                continue
            for beta in range(fs.q):
                for kind in ("zoom_out", "zoom_out_lin"):
                    if kind == "zoom_out_lin" and beta:
                        continue
                    z = ZoomSpec(kind, a, b, beta)
                    lhs = {img[T].key() for T in maps if zoom_contains(z, T)}
                    if kind == "zoom_out":
                        rhs = {U.key() for U in flats if _inside_hyperplane(U, normal, beta)}
                    else:
                        rhs = {U.key() for U in flats if not fs.matvec(U.dirs.T, normal).any()}
                    if lhs != rhs & image_keys:
                        zoom_ok[kind] = False
    out["zoom_bijections"] = zoom_ok
    out["all_ok"] = bool(out["injective"] and preserved and out["image_characterised"]
                         and out["neighbor_fraction_ok"] and all(zoom_ok.values()))
    return out
