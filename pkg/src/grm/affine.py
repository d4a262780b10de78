"""Affine maps ``T = (M, c): F_q^ell -> F_q^n`` and the structures built on them.

This covers uniform sampling, adjacency in the affine bi-linear scheme, the
up-down random walk, the four zoom families, restrictions of the block form
``[[I_s, 0], [0, R']]`` and flats.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import BadShape, BudgetExceeded, InvalidParameters, ShapeMismatch
from .gf import FieldSpec

DEFAULT_ENUM_BUDGET = 2**24


class AffineMap:
    """The map ``x -> M x + c``.  Not necessarily full rank."""

    __slots__ = ("fs", "M", "c")

    def __init__(self, fs: FieldSpec, M, c):
        M = np.asarray(M, dtype=np.int64)
        c = np.asarray(c, dtype=np.int64).reshape(-1)
        if M.ndim != 2 or M.shape[0] != c.size:
            raise ShapeMismatch(f"M has shape {M.shape} but c has length {c.size}")
        self.fs, self.M, self.c = fs, M, c

    @property
    def n(self) -> int:
        return self.M.shape[0]

    @property
    def ell(self) -> int:
        return self.M.shape[1]

    def apply(self, x) -> np.ndarray:
        """Image of one point (``x`` of length ell) or of an ``(N, ell)`` array."""
        x = np.asarray(x, dtype=np.int64)
        if x.shape[-1] != self.ell:
            raise ShapeMismatch(f"point of length {x.shape[-1]} for a map from F^{self.ell}")
        fs = self.fs
        if x.ndim == 1:
            return fs.add[fs.matvec(self.M, x), self.c]
        return fs.add[fs.matmul(x, self.M.T), self.c[None, :]]

    def compose(self, other: "AffineMap") -> "AffineMap":
        """``self o other``."""
        if other.n != self.ell:
            raise ShapeMismatch("inner map does not land in the domain of the outer map")
        fs = self.fs
        return AffineMap(fs, fs.matmul(self.M, other.M), fs.add[fs.matvec(self.M, other.c), self.c])

    def __matmul__(self, other):
        return self.compose(other)

    def rank(self) -> int:
        return self.fs.rank(self.M)

    def is_full_rank(self) -> bool:
        return self.rank() == min(self.n, self.ell)

    def key(self) -> bytes:
        return self.M.tobytes() + self.c.tobytes()

    def __eq__(self, other):
        return (
            isinstance(other, AffineMap)
            and self.M.shape == other.M.shape
            and np.array_equal(self.M, other.M)
            and np.array_equal(self.c, other.c)
        )

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        return f"AffineMap(M={self.M.tolist()}, c={self.c.tolist()})"


def is_full_rank(T: AffineMap) -> bool:
    return T.is_full_rank()


def sample_uniform(fs: FieldSpec, n: int, ell: int, rng) -> AffineMap:
    """Uniform element of ``T_{n, ell}``: every entry i.i.d. uniform."""
    return AffineMap(fs, rng.integers(0, fs.q, (n, ell)), rng.integers(0, fs.q, n))


def sample_full_rank(fs: FieldSpec, n: int, ell: int, rng, max_tries: int = 10_000) -> AffineMap:
    """Uniform full-rank map by rejection."""
    for _ in range(max_tries):
        T = sample_uniform(fs, n, ell, rng)
        if T.is_full_rank():
            return T
    raise BudgetExceeded("could not sample a full-rank map")


def identity_padded(fs: FieldSpec, n: int, ell: int) -> AffineMap:
    """``x -> (x, 0)`` embedding ``F^ell`` into ``F^n`` (requires ``ell <= n``)."""
    if ell > n:
        raise ShapeMismatch("identity padding needs ell <= n")
    return AffineMap(fs, np.eye(n, ell, dtype=np.int64), np.zeros(n, dtype=np.int64))


def compose(T1: AffineMap, T2: AffineMap) -> AffineMap:
    return T1.compose(T2)


# ----------------------------------------------------------------------
# the affine bi-linear scheme
# ----------------------------------------------------------------------

def adjacent(T1: AffineMap, T2: AffineMap) -> bool:
    """True iff ``T1 != T2`` and they agree on an affine subspace of codimension 1.

    The agreement set ``{x : (M1 - M2) x = c2 - c1}`` has dimension at least
    ``ell - 1`` exactly when the system is consistent and ``rank(M1 - M2) <= 1``.
    """
    if T1.M.shape != T2.M.shape:
        raise ShapeMismatch("maps have different shapes")
    if T1 == T2:
        return False
    fs = T1.fs
    dM = fs.sub[T1.M, T2.M]
    if fs.rank(dM) > 1:
        return False
    return fs.solve(dM, fs.sub[T2.c, T1.c]) is not None


def up_down_neighbor(T: AffineMap, rng, lazy: bool = False, w=None) -> AffineMap:
    """One step of the up-down walk.

    Go up by appending a nonzero column ``w``, then compose with
    ``R = ([I; alpha^T], (0, ..., 0, beta))``.  The result is
    ``(M + w alpha^T, c + beta w)``.  By default ``(alpha, beta)`` is uniform
    over nonzero vectors; with ``lazy=True`` it is uniform over all of
    ``F_q^{ell+1}`` so the walk may stay at ``T``.
    """
    fs = T.fs
    n, ell = T.M.shape
    if w is None:
        w = np.zeros(n, dtype=np.int64)
        while not w.any():
            w = rng.integers(0, fs.q, n)
    w = np.asarray(w, dtype=np.int64)
    ab = np.zeros(ell + 1, dtype=np.int64)
    while True:
        ab = rng.integers(0, fs.q, ell + 1)
        if lazy or ab.any():
            break
    alpha, beta = ab[:ell], int(ab[ell])
    M2 = fs.add[T.M, fs.mul[w[:, None], alpha[None, :]]]
    c2 = fs.add[T.c, fs.mul[w, beta]]
    return AffineMap(fs, M2, c2)


def up_down_transition(T: AffineMap, lazy: bool = False) -> dict:
    """Exact one-step distribution of :func:`up_down_neighbor` (tiny scale)."""
    fs = T.fs
    n, ell = T.M.shape
    out = {}
    ws = [np.array(w) for w in itertools.product(range(fs.q), repeat=n) if any(w)]
    abs_ = [np.array(v) for v in itertools.product(range(fs.q), repeat=ell + 1) if lazy or any(v)]
    weight = 1.0 / (len(ws) * len(abs_))
    for w in ws:
        for ab in abs_:
            M2 = fs.add[T.M, fs.mul[w[:, None], ab[None, :ell]]]
            c2 = fs.add[T.c, fs.mul[w, ab[ell]]]
            key = AffineMap(fs, M2, c2)
            out[key] = out.get(key, 0.0) + weight
    return out


def enumerate_maps(fs: FieldSpec, n: int, ell: int, budget: int = DEFAULT_ENUM_BUDGET):
    """Every map in ``T_{n, ell}``, in order of the packed entry vector."""
    count = fs.q ** (n * (ell + 1))
    if count > budget:
        raise BudgetExceeded(f"{count} maps exceed the enumeration budget {budget}")
    for entries in itertools.product(range(fs.q), repeat=n * (ell + 1)):
        e = np.array(entries, dtype=np.int64)
        yield AffineMap(fs, e[: n * ell].reshape(n, ell), e[n * ell:])


def neighbors(T: AffineMap) -> list:
    """All AffBilin neighbours of ``T``: ``(M + w alpha^T, c + beta w)`` with ``w alpha`` a
    nonzero rank-1 update, deduplicated."""
    fs = T.fs
    n, ell = T.M.shape
    seen = {}
    for w in itertools.product(range(fs.q), repeat=n):
        if not any(w):
            continue
        w = np.array(w)
        for ab in itertools.product(range(fs.q), repeat=ell + 1):
            if not any(ab):
                continue
            ab = np.array(ab)
            S = AffineMap(fs, fs.add[T.M, fs.mul[w[:, None], ab[None, :ell]]],
                          fs.add[T.c, fs.mul[w, ab[ell]]])
            if S != T and adjacent(T, S):
                seen[S] = None
    return list(seen)


# ----------------------------------------------------------------------
# zoom families
# ----------------------------------------------------------------------

ZOOM_KINDS = ("zoom_in", "zoom_out", "zoom_in_lin", "zoom_out_lin")


@dataclass(frozen=True)
class ZoomSpec:
    """One of the canonical non-expanding families.

    ``zoom_in``       ``T(a) = b``            (a in F^ell, b in F^n)
    ``zoom_in_lin``   ``M a = b``             (a in F^ell, b in F^n)
    ``zoom_out``      ``a^T M = b, a^T c = beta``  (a in F^n, b in F^ell)
    ``zoom_out_lin``  ``a^T M = b``           (a in F^n, b in F^ell)
    """

    kind: str
    a: tuple
    b: tuple
    beta: int = 0

    def __post_init__(self):
        if self.kind not in ZOOM_KINDS:
            raise InvalidParameters(f"unknown zoom kind {self.kind!r}")
        object.__setattr__(self, "a", tuple(int(v) for v in self.a))
        object.__setattr__(self, "b", tuple(int(v) for v in self.b))

    @property
    def is_in(self) -> bool:
        return self.kind.startswith("zoom_in")

    def check_shape(self, n: int, ell: int):
        want = (ell, n) if self.is_in else (n, ell)
        if (len(self.a), len(self.b)) != want:
            raise ShapeMismatch(f"{self.kind} on T_{{{n},{ell}}} needs |a|,|b| = {want}")


def zoom_contains(z: ZoomSpec, T: AffineMap) -> bool:
    z.check_shape(T.n, T.ell)
    fs = T.fs
    a, b = np.array(z.a, dtype=np.int64), np.array(z.b, dtype=np.int64)
    if z.kind == "zoom_in":
        return bool(np.array_equal(T.apply(a), b))
    if z.kind == "zoom_in_lin":
        return bool(np.array_equal(fs.matvec(T.M, a), b))
    aM = fs.matvec(T.M.T, a)
    if not np.array_equal(aM, b):
        return False
    if z.kind == "zoom_out":
        return int(fs.dot(a, T.c)) == z.beta
    return True


def zoom_density_exact(z: ZoomSpec, fs: FieldSpec, n: int, ell: int) -> float:
    """Density of the family inside ``T_{n, ell}``, by the rank of its constraints.

    Each family is an affine subspace of the entry space, so its density is
    ``q**-rank`` when consistent.
    """
    a = np.array(z.a)
    nz = bool(a.any())
    if z.kind == "zoom_in":
        rows = n
    elif z.kind == "zoom_in_lin":
        rows = n if nz else 0
        if not nz and any(z.b):
            return 0.0
    elif z.kind == "zoom_out":
        rows = ell + 1 if nz else 0
        if not nz and (any(z.b) or z.beta):
            return 0.0
    else:
        rows = ell if nz else 0
        if not nz and any(z.b):
            return 0.0
    return float(fs.q) ** (-rows)


def sample_zoom(z: ZoomSpec, fs: FieldSpec, n: int, ell: int, rng) -> AffineMap:
    """Uniform member of the zoom family (needs ``a != 0`` except for ``zoom_in``)."""
    z.check_shape(n, ell)
    a, b = np.array(z.a, dtype=np.int64), np.array(z.b, dtype=np.int64)
    T = sample_uniform(fs, n, ell, rng)
    M, c = T.M.copy(), T.c.copy()
    if z.kind == "zoom_in":
        c = fs.sub[b, fs.matvec(M, a)]
        return AffineMap(fs, M, c)
    nz = np.nonzero(a)[0]
    if nz.size == 0:
        raise InvalidParameters("sampling this zoom family needs a != 0")
    j = int(nz[0])
    inv = fs.inv[a[j]]
    if z.kind == "zoom_in_lin":
        M[:, j] = 0
        M[:, j] = fs.mul[fs.sub[b, fs.matvec(M, a)], inv]
        return AffineMap(fs, M, c)
    M[j, :] = 0
    M[j, :] = fs.mul[fs.sub[b, fs.matvec(M.T, a)], inv]
    if z.kind == "zoom_out":
        c[j] = 0
        c[j] = fs.mul[fs.sub[z.beta, fs.dot(a, c)], inv]
    return AffineMap(fs, M, c)


# ----------------------------------------------------------------------
# flats and restrictions
# ----------------------------------------------------------------------

class FlatBasis:
    """The flat ``offset + span(columns of dirs)`` in ``F_q^N``."""

    def __init__(self, fs: FieldSpec, offset, dirs):
        self.fs = fs
        self.offset = np.asarray(offset, dtype=np.int64).reshape(-1)
        self.dirs = np.asarray(dirs, dtype=np.int64).reshape(self.offset.size, -1)

    @property
    def ambient(self) -> int:
        return self.offset.size

    @property
    def dim(self) -> int:
        return self.fs.rank(self.dirs) if self.dirs.size else 0

    def as_map(self) -> AffineMap:
        return AffineMap(self.fs, self.dirs, self.offset)

    def canonical(self):
        """``(offset, basis_rows)`` in reduced form; equal flats give equal output."""
        fs = self.fs
        if self.dirs.shape[1] == 0:
            return self.offset.copy(), np.zeros((0, self.ambient), dtype=np.int64)
        R, piv = fs.row_reduce(self.dirs.T)
        R = R[: len(piv)]
        off = self.offset.copy()
        for row, col in zip(R, piv):
            if off[col]:
                off = fs.sub[off, fs.mul[off[col], row]]
        return off, R

    def key(self) -> bytes:
        off, R = self.canonical()
        return off.tobytes() + R.tobytes()

    def contains(self, x) -> bool:
        fs = self.fs
        x = np.asarray(x, dtype=np.int64)
        if self.dirs.shape[1] == 0:
            return bool(np.array_equal(x, self.offset))
        return fs.solve(self.dirs, fs.sub[x, self.offset]) is not None

    def points(self) -> np.ndarray:
        from .mpoly import all_points

        k = self.dirs.shape[1]
        return self.as_map().apply(all_points(self.fs.q, k))

    def __eq__(self, other):
        return isinstance(other, FlatBasis) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        return f"FlatBasis(offset={self.offset.tolist()}, dirs={self.dirs.T.tolist()})"


@dataclass
class Restriction:
    """Block map ``(x, y) -> (x, R' y + b')`` from ``F^{s+t}`` to ``F^{s+ell}``."""

    fs: FieldSpec
    s: int
    Rp: np.ndarray
    bp: np.ndarray

    @property
    def ell(self) -> int:
        return self.Rp.shape[0]

    @property
    def t(self) -> int:
        return self.Rp.shape[1]

    def as_map(self) -> AffineMap:
        s, ell, t = self.s, self.ell, self.t
        M = np.zeros((s + ell, s + t), dtype=np.int64)
        M[:s, :s] = np.eye(s, dtype=np.int64)
        M[s:, s:] = self.Rp
        c = np.concatenate([np.zeros(s, dtype=np.int64), self.bp])
        return AffineMap(self.fs, M, c)


def sample_restriction(fs: FieldSpec, s: int, ell: int, t: int, rng,
                       full_rank: bool = False) -> Restriction:
    """Uniform member of ``Res_{s, ell, t}``.

    With ``full_rank=True`` the block ``R'`` is uniform among rank-``t``
    matrices; only then is ``A o B`` uniform in ``T_{n, s+t}`` for uniform ``A``.
    """
    if ell < t:
        raise BadShape(f"need ell >= t, got ell={ell}, t={t}")
    while True:
        Rp = rng.integers(0, fs.q, (ell, t))
        if not full_rank or fs.rank(Rp) == t:
            return Restriction(fs, s, Rp, rng.integers(0, fs.q, ell))


def flat_of(B: Restriction) -> FlatBasis:
    """The flat ``b' + im(R')`` in ``F_q^ell``."""
    return FlatBasis(B.fs, B.bp, B.Rp)


def enumerate_flats(fs: FieldSpec, N: int, k: int, budget: int = DEFAULT_ENUM_BUDGET) -> list:
    """All ``k``-dimensional flats of ``F_q^N`` (tiny scale), deduplicated."""
    count = fs.q ** (N * (k + 1))
    if count > budget:
        raise BudgetExceeded(f"{count} parametrisations exceed the budget {budget}")
    seen = {}
    for entries in itertools.product(range(fs.q), repeat=N * (k + 1)):
        e = np.array(entries, dtype=np.int64)
        dirs = e[: N * k].reshape(N, k)
        if fs.rank(dirs) != k:
            continue
        U = FlatBasis(fs, e[N * k:], dirs)
        seen.setdefault(U.key(), U)
    return list(seen.values())
