"""Reduced multivariate polynomials over F_q and their evaluation tables.

Points of ``F_q^m`` are indexed lexicographically with the first coordinate
most significant, so point ``(x_1, ..., x_m)`` sits at index
``sum(x_i * q**(m - i))``.  A polynomial is *reduced* when every individual
exponent is at most ``q - 1``; reduced polynomials are in bijection with
functions ``F_q^m -> F_q``.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from .errors import ArityMismatch, BadArity, ShapeMismatch
from .gf import FieldSpec


# ----------------------------------------------------------------------
# point indexing
# ----------------------------------------------------------------------

def radix_weights(q: int, m: int) -> np.ndarray:
    return np.array([q ** (m - 1 - i) for i in range(m)], dtype=np.int64)


@lru_cache(maxsize=64)
def _points_cached(q: int, m: int) -> np.ndarray:
    idx = np.arange(q**m, dtype=np.int64)
    out = (idx[:, None] // radix_weights(q, m)[None, :]) % q
    out.setflags(write=False)
    return out


def all_points(q: int, m: int) -> np.ndarray:
    """``(q**m, m)`` array of every point of ``F_q^m`` in table order."""
    return _points_cached(q, m)


def point_index(points, q: int) -> np.ndarray:
    """Table index of each point (last axis holds coordinates)."""
    points = np.asarray(points, dtype=np.int64)
    return points @ radix_weights(q, points.shape[-1])


def index_point(index: int, q: int, m: int) -> tuple:
    return tuple(int(v) for v in (index // radix_weights(q, m)) % q)


def reduce_exponent(a: int, q: int) -> int:
    """Evaluation-preserving reduction using ``x**q == x``."""
    return a if a < q else (a - 1) % (q - 1) + 1


# ----------------------------------------------------------------------
# evaluation tables
# ----------------------------------------------------------------------

class EvalTable:
    """Dense table of a function ``F_q^m -> F_q``."""

    def __init__(self, fs: FieldSpec, m: int, values):
        values = np.asarray(values, dtype=np.int64).reshape(-1)
        if values.size != fs.q**m:
            raise ShapeMismatch(f"expected {fs.q**m} values, got {values.size}")
        if values.size and (values.min() < 0 or values.max() >= fs.q):
            raise ShapeMismatch("values must be field codes")
        self.fs, self.m, self.values = fs, m, values

    @classmethod
    def zeros(cls, fs, m):
        return cls(fs, m, np.zeros(fs.q**m, dtype=np.int64))

    @classmethod
    def from_function(cls, fs, m, func):
        pts = all_points(fs.q, m)
        return cls(fs, m, [func(tuple(int(v) for v in x)) for x in pts])

    def __call__(self, x):
        x = tuple(x)
        if len(x) != self.m:
            raise ArityMismatch(f"point has {len(x)} coordinates, table has arity {self.m}")
        return int(self.values[point_index(x, self.fs.q)])

    def at(self, points):
        """Vectorised lookup for an array of points."""
        return self.values[point_index(points, self.fs.q)]

    def copy(self):
        return EvalTable(self.fs, self.m, self.values.copy())

    def __add__(self, other):
        _same(self, other)
        return EvalTable(self.fs, self.m, self.fs.add[self.values, other.values])

    def __sub__(self, other):
        _same(self, other)
        return EvalTable(self.fs, self.m, self.fs.sub[self.values, other.values])

    def __mul__(self, other):
        _same(self, other)
        return EvalTable(self.fs, self.m, self.fs.mul[self.values, other.values])

    def __eq__(self, other):
        return (
            isinstance(other, EvalTable)
            and self.fs == other.fs
            and self.m == other.m
            and np.array_equal(self.values, other.values)
        )

    def weight(self) -> int:
        return int(np.count_nonzero(self.values))

    def __repr__(self):
        return f"EvalTable(q={self.fs.q}, m={self.m})"


def _same(a, b):
    if a.fs != b.fs or a.m != b.m:
        raise ArityMismatch("tables live on different spaces")


def inner_product(f: EvalTable, g: EvalTable) -> int:
    """``<f, g> = sum_v f(v) g(v)`` over all of ``F_q^m``."""
    _same(f, g)
    return int(f.fs.sum(f.fs.mul[f.values, g.values]))


# ----------------------------------------------------------------------
# polynomials
# ----------------------------------------------------------------------

class MPoly:
    """Sparse reduced polynomial in ``m`` variables.

    ``terms`` maps exponent tuples to nonzero coefficient codes.  Exponents
    larger than ``q - 1`` are reduced on construction and colliding terms
    are merged.
    """

    def __init__(self, fs: FieldSpec, m: int, terms=None):
        self.fs, self.m = fs, m
        clean = {}
        for e, c in (terms or {}).items():
            e = tuple(int(v) for v in e)
            if len(e) != m:
                raise ArityMismatch(f"exponent {e} has wrong length for arity {m}")
            if min(e, default=0) < 0:
                raise ShapeMismatch("exponents must be non-negative")
            e = tuple(reduce_exponent(v, fs.q) for v in e)
            c = int(c) % fs.q if fs.k == 1 else int(c)
            clean[e] = int(fs.add[clean.get(e, 0), c])
        self.terms = {e: c for e, c in clean.items() if c}

    # -- constructors ---------------------------------------------------
    @classmethod
    def zero(cls, fs, m):
        return cls(fs, m)

    @classmethod
    def constant(cls, fs, m, c=1):
        return cls(fs, m, {(0,) * m: c})

    @classmethod
    def monomial(cls, fs, exps, c=1):
        return cls(fs, len(exps), {tuple(exps): c})

    @classmethod
    def variable(cls, fs, m, i):
        e = [0] * m
        e[i] = 1
        return cls(fs, m, {tuple(e): 1})

    # -- algebra --------------------------------------------------------
    def __add__(self, other):
        self._check(other)
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = int(self.fs.add[out.get(e, 0), c])
        return MPoly(self.fs, self.m, out)

    def __neg__(self):
        return MPoly(self.fs, self.m, {e: int(self.fs.neg[c]) for e, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, (int, np.integer)):
            return self.scale(int(other))
        self._check(other)
        fs = self.fs
        out = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(reduce_exponent(a + b, fs.q) for a, b in zip(e1, e2))
                out[e] = int(fs.add[out.get(e, 0), fs.mul[c1, c2]])
        return MPoly(fs, self.m, out)

    def scale(self, c: int):
        return MPoly(self.fs, self.m, {e: int(self.fs.mul[v, c]) for e, v in self.terms.items()})

    def __pow__(self, n: int):
        out = MPoly.constant(self.fs, self.m)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def tensor(self, other):
        """Product on disjoint variables: arity ``self.m + other.m``."""
        if self.fs != other.fs:
            raise ArityMismatch("polynomials over different fields")
        out = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                out[e1 + e2] = int(self.fs.mul[c1, c2])
        return MPoly(self.fs, self.m + other.m, out)

    def _check(self, other):
        if not isinstance(other, MPoly) or self.fs != other.fs or self.m != other.m:
            raise ArityMismatch("polynomials must share field and arity")

    # -- inspection -----------------------------------------------------
    def total_degree(self) -> int:
        return max((sum(e) for e in self.terms), default=0)

    def is_zero(self) -> bool:
        return not self.terms

    def coeff(self, e) -> int:
        return self.terms.get(tuple(e), 0)

    def eval(self, x) -> int:
        x = tuple(int(v) for v in x)
        if len(x) != self.m:
            raise ArityMismatch(f"point has {len(x)} coordinates, polynomial has arity {self.m}")
        fs = self.fs
        acc = 0
        for e, c in self.terms.items():
            term = c
            for xi, ei in zip(x, e):
                term = int(fs.mul[term, fs.pow(xi, ei)])
            acc = int(fs.add[acc, term])
        return acc

    def eval_points(self, points) -> np.ndarray:
        """Evaluate at an ``(N, m)`` array of points."""
        fs = self.fs
        points = np.asarray(points, dtype=np.int64)
        pw = power_table(fs)
        out = np.zeros(points.shape[0], dtype=np.int64)
        for e, c in self.terms.items():
            term = np.full(points.shape[0], c, dtype=np.int64)
            for i, ei in enumerate(e):
                if ei:
                    term = fs.mul[term, pw[points[:, i], ei]]
            out = fs.add[out, term]
        return out

    def tabulate(self) -> EvalTable:
        return EvalTable(self.fs, self.m, self.eval_points(all_points(self.fs.q, self.m)))

    def __eq__(self, other):
        return (
            isinstance(other, MPoly)
            and self.fs == other.fs
            and self.m == other.m
            and self.terms == other.terms
        )

    def __hash__(self):
        return hash((self.m, frozenset(self.terms.items())))

    def __repr__(self):
        if not self.terms:
            return "0"
        parts = []
        for e in sorted(self.terms, reverse=True):
            c = self.terms[e]
            mono = "*".join(
                f"x{i + 1}" + (f"^{a}" if a > 1 else "") for i, a in enumerate(e) if a
            )
            parts.append(mono if c == 1 and mono else (f"{c}*{mono}" if mono else str(c)))
        return " + ".join(parts)


def total_degree(f) -> int:
    if isinstance(f, EvalTable):
        f = interpolate(f)
    return f.total_degree()


# ----------------------------------------------------------------------
# per-axis transforms
# ----------------------------------------------------------------------

@lru_cache(maxsize=None)
def power_table(fs: FieldSpec) -> np.ndarray:
    """``PT[x, e] = x**e`` with ``0**0 = 1``."""
    out = fs.power_table()
    out.setflags(write=False)
    return out


@lru_cache(maxsize=None)
def vandermonde_inverse(fs: FieldSpec) -> np.ndarray:
    """Inverse of ``V[x, e] = x**e``; maps values on F_q to coefficients."""
    out = fs.inverse(power_table(fs))
    out.setflags(write=False)
    return out


def axis_transform(fs: FieldSpec, arr: np.ndarray, mat: np.ndarray, axis: int) -> np.ndarray:
    """Apply ``mat`` (``r x q``) along ``axis`` of ``arr`` over the field."""
    arr = np.moveaxis(np.asarray(arr, dtype=np.int64), axis, -1)
    prod = fs.mul[arr[..., None, :], mat]
    return np.moveaxis(fs.sum(prod, axis=-1), -1, axis)


def coefficient_tensor(t: EvalTable) -> np.ndarray:
    """Coefficients of the reduced interpolant as a ``(q,)*m`` array."""
    fs, m = t.fs, t.m
    arr = t.values.reshape((fs.q,) * m) if m else t.values.copy()
    vinv = vandermonde_inverse(fs)
    for ax in range(m):
        arr = axis_transform(fs, arr, vinv, ax)
    return arr


def interpolate(t: EvalTable) -> MPoly:
    """The unique reduced polynomial whose table is ``t``."""
    arr = coefficient_tensor(t)
    if t.m == 0:
        return MPoly.constant(t.fs, 0, int(arr[0]))
    nz = np.argwhere(arr)
    return MPoly(t.fs, t.m, {tuple(int(v) for v in e): int(arr[tuple(e)]) for e in nz})


def table_degree(t: EvalTable) -> int:
    """Total degree of the interpolant without building the term dictionary."""
    arr = coefficient_tensor(t)
    if t.m == 0 or not arr.any():
        return 0
    nz = np.argwhere(arr)
    return int(nz.sum(axis=1).max())


# ----------------------------------------------------------------------
# composition and extension
# ----------------------------------------------------------------------

def compose_affine(f, T) -> EvalTable:
    """Table of ``f(T x)`` over all ``x`` in ``F_q^ell``.

    ``f`` may be an :class:`MPoly` or an :class:`EvalTable` of arity
    ``T.n``; ``T`` is anything with ``M`` (``n x ell``) and ``c`` attributes.
    """
    fs = f.fs
    n, ell = T.M.shape
    if f.m != n:
        raise ArityMismatch(f"map lands in F^{n} but f has arity {f.m}")
    pts = all_points(fs.q, ell)
    img = fs.add[fs.matmul(pts, T.M.T), T.c[None, :]] if ell else np.tile(T.c, (1, 1))
    if isinstance(f, MPoly):
        return EvalTable(fs, ell, f.eval_points(img))
    return EvalTable(fs, ell, f.at(img))


def extend(f: EvalTable, N: int) -> EvalTable:
    """``g(a, b) = f(a)`` on ``F_q^N`` for ``a`` in ``F_q^n``."""
    if N < f.m:
        raise BadArity(f"cannot extend arity {f.m} down to {N}")
    return EvalTable(f.fs, N, np.repeat(f.values, f.fs.q ** (N - f.m)))


def restrict_prefix(g: EvalTable, n: int, tail=None) -> EvalTable:
    """Fix the last ``g.m - n`` coordinates (default zero)."""
    q = g.fs.q
    tail = np.zeros(g.m - n, dtype=np.int64) if tail is None else np.asarray(tail)
    pts = all_points(q, n)
    full = np.hstack([pts, np.tile(tail, (pts.shape[0], 1))])
    return EvalTable(g.fs, n, g.at(full))
