"""Arithmetic in GF(p^k) with a fixed integer encoding of elements.

An element is an integer code in ``[0, q)``.  Its base-``p`` digits are the
coefficients (constant term first) of a polynomial over GF(p) reduced modulo
the field's defining polynomial.  Code 0 is the additive identity and code 1
the multiplicative identity.

All arithmetic goes through lookup tables built once per field, so every
operation accepts Python ints as well as integer numpy arrays.
"""

from __future__ import annotations

import itertools
from functools import lru_cache

import numpy as np

from .errors import NoModulusKnown, NotPrime, ReducibleModulus, InvalidParameters

MAX_Q = 256

# Defining polynomials, coefficients listed from x^0 upwards.  Prime fields
# use the modulus x, which makes codes plain residues mod p.
_BUILTIN_MODULI = {
    (2, 2): (1, 1, 1),
    (2, 3): (1, 1, 0, 1),
    (2, 4): (1, 1, 0, 0, 1),
    (2, 5): (1, 0, 1, 0, 0, 1),
    (2, 6): (1, 1, 0, 1, 1, 0, 1),
    (2, 7): (1, 1, 0, 0, 0, 0, 0, 1),
    (3, 2): (1, 0, 1),
    (3, 3): (1, 2, 0, 1),
    (3, 4): (2, 0, 0, 2, 1),
    (5, 2): (3, 2, 1),
    (5, 3): (3, 3, 0, 1),
    (7, 2): (3, 6, 1),
    (11, 2): (2, 7, 1),
}


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    i = 2
    while i * i <= n:
        if n % i == 0:
            return False
        i += 1
    return True


def builtin_moduli():
    """Return the table of built-in defining polynomials (prime fields excluded)."""
    return dict(_BUILTIN_MODULI)


def builtin_fields(max_q: int = 128):
    """All ``(p, k)`` with ``p**k <= max_q`` that have a built-in modulus."""
    out = []
    for p in range(2, max_q + 1):
        if not is_prime(p):
            continue
        k = 1
        while p**k <= max_q:
            if k == 1 or (p, k) in _BUILTIN_MODULI:
                out.append((p, k))
            k += 1
    return sorted(out, key=lambda pk: pk[0] ** pk[1])


# ----------------------------------------------------------------------
# polynomials over GF(p) as coefficient tuples, constant term first
# ----------------------------------------------------------------------

def _trim(a):
    a = list(a)
    while a and a[-1] == 0:
        a.pop()
    return a


def _poly_mod(a, m, p):
    """Remainder of a modulo m over GF(p); m must be monic."""
    a = _trim(a)
    m = _trim(m)
    dm = len(m) - 1
    while len(a) - 1 >= dm and a:
        coef = a[-1]
        shift = len(a) - 1 - dm
        for i, mi in enumerate(m):
            a[shift + i] = (a[shift + i] - coef * mi) % p
        a = _trim(a)
    return a


def _is_irreducible(m, p) -> bool:
    """Trial division by every monic polynomial of degree 1..deg(m)//2."""
    k = len(m) - 1
    for deg in range(1, k // 2 + 1):
        for low in itertools.product(range(p), repeat=deg):
            divisor = list(low) + [1]
            if not _poly_mod(m, divisor, p):
                return False
    return True


class FieldSpec:
    """The finite field GF(p^k).

    Parameters
    ----------
    p : int
        Characteristic, must be prime.
    k : int
        Extension degree, at least 1.
    modulus : sequence of int, optional
        Monic degree-``k`` polynomial over GF(p), constant term first.  The
        built-in table is used when omitted.

    Attributes
    ----------
    q : int
        Field size ``p**k``.
    generator : int
        Smallest code of multiplicative order ``q - 1``.
    add, mul : ndarray
        ``q x q`` operation tables.
    neg, inv : ndarray
        Length-``q`` tables (``inv[0]`` is 0 and meaningless).
    digits : ndarray
        ``q x k`` base-``p`` digits of each code.
    """

    def __init__(self, p: int, k: int = 1, modulus=None):
        if not is_prime(p):
            raise NotPrime(f"{p} is not prime")
        if k < 1:
            raise InvalidParameters("extension degree must be >= 1")
        q = p**k
        if q > MAX_Q:
            raise InvalidParameters(f"q={q} exceeds the supported maximum {MAX_Q}")
        if modulus is None:
            if k == 1:
                modulus = (0, 1)
            elif (p, k) in _BUILTIN_MODULI:
                modulus = _BUILTIN_MODULI[(p, k)]
            else:
                raise NoModulusKnown(f"no built-in modulus for GF({p}^{k})")
        modulus = tuple(int(c) % p for c in modulus)
        if len(modulus) != k + 1 or modulus[-1] != 1:
            raise InvalidParameters("modulus must be monic of degree k")
        if not _is_irreducible(modulus, p):
            raise ReducibleModulus(f"modulus {modulus} is reducible over GF({p})")

        self.p, self.k, self.q = p, k, q
        self.modulus = modulus
        self.powers = np.array([p**j for j in range(k)], dtype=np.int64)
        self.digits = np.array(
            [[(c // p**j) % p for j in range(k)] for c in range(q)], dtype=np.int64
        )
        self._build_tables()
        self.generator = self._find_generator()
        self._build_log_tables()
        for arr in (self.add, self.mul, self.neg, self.inv, self.digits, self.mulmat):
            arr.setflags(write=False)

    # -- construction helpers ------------------------------------------
    def _encode(self, coeffs) -> int:
        return int(sum(int(c) * p for c, p in zip(coeffs, self.powers)))

    def _build_tables(self):
        p, k, q = self.p, self.k, self.q
        dig = self.digits
        self.add = (dig[:, None, :] + dig[None, :, :]) % p @ self.powers
        self.neg = (-dig % p) @ self.powers
        self.sub = self.add[:, self.neg]
        mul = np.zeros((q, q), dtype=np.int64)
        for a in range(q):
            for b in range(a, q):
                prod = [0] * (2 * k - 1)
                for i in range(k):
                    if dig[a, i]:
                        for j in range(k):
                            prod[i + j] += dig[a, i] * dig[b, j]
                rem = _poly_mod([c % p for c in prod], self.modulus, p) if k > 1 else [prod[0] % p]
                rem = rem + [0] * (k - len(rem))
                mul[a, b] = mul[b, a] = self._encode(rem)
        self.mul = mul
        inv = np.zeros(q, dtype=np.int64)
        for a in range(1, q):
            inv[a] = int(np.nonzero(mul[a] == 1)[0][0])
        self.inv = inv
        # GF(p)-linear matrix of multiplication by each element: column j
        # holds the digits of c * p^j.
        basis = self.powers
        self.mulmat = np.stack(
            [dig[mul[c, basis]].T for c in range(q)]
        ).astype(np.int64)

    def _find_generator(self) -> int:
        if self.q == 2:
            return 1
        for g in range(2, self.q):
            x, order = g, 1
            while x != 1:
                x = int(self.mul[x, g])
                order += 1
            if order == self.q - 1:
                return g
        raise AssertionError("multiplicative group has no generator")

    def _build_log_tables(self):
        q = self.q
        exp = np.zeros(q - 1, dtype=np.int64)
        log = np.zeros(q, dtype=np.int64)
        x = 1
        for i in range(q - 1):
            exp[i] = x
            log[x] = i
            x = int(self.mul[x, self.generator])
        self._exp, self._log = exp, log

    # -- scalar / array arithmetic --------------------------------------
    def elements(self) -> np.ndarray:
        return np.arange(self.q, dtype=np.int64)

    def pow(self, a, e):
        """``a**e`` with the convention ``0**0 == 1``; ``e`` is a non-negative int."""
        a = np.asarray(a, dtype=np.int64)
        e = int(e)
        if e == 0:
            out = np.ones_like(a)
        else:
            out = np.where(a == 0, 0, self._exp[(self._log[a] * e) % (self.q - 1)])
        return out if out.ndim else int(out)

    def power_table(self) -> np.ndarray:
        """``q x q`` table ``T[x, e] = x**e`` for ``e`` in ``[0, q)``."""
        return np.stack([np.asarray(self.pow(self.elements(), e)) for e in range(self.q)], axis=1)

    def sum(self, arr, axis=None):
        """Field sum of ``arr`` along ``axis`` (all axes when ``None``)."""
        arr = np.asarray(arr, dtype=np.int64)
        if axis is None:
            arr = arr.reshape(-1)
            axis = 0
        if self.k == 1:
            return np.sum(arr, axis=axis) % self.p
        if self.p == 2:
            return np.bitwise_xor.reduce(arr, axis=axis)
        dig = self.digits[arr]
        ax = axis if axis >= 0 else axis - 1
        return (np.sum(dig, axis=ax) % self.p) @ self.powers

    def dot(self, a, b, axis=-1):
        return self.sum(self.mul[a, b], axis=axis)

    def matmul(self, A, B):
        """Matrix product over the field for 2-d code arrays."""
        A = np.asarray(A, dtype=np.int64)
        B = np.asarray(B, dtype=np.int64)
        if A.shape[1] == 0:
            return np.zeros((A.shape[0], B.shape[1]), dtype=np.int64)
        return self.sum(self.mul[A[:, :, None], B[None, :, :]], axis=1)

    def matvec(self, A, x):
        A = np.asarray(A, dtype=np.int64)
        x = np.asarray(x, dtype=np.int64)
        if A.shape[1] == 0:
            return np.zeros(A.shape[0], dtype=np.int64)
        return self.sum(self.mul[A, x[None, :]], axis=1)

    # -- small dense linear algebra --------------------------------------
    def row_reduce(self, A):
        """Reduced row echelon form; returns ``(R, pivot_columns)``."""
        R = np.array(A, dtype=np.int64, copy=True)
        if R.ndim != 2:
            raise InvalidParameters("row_reduce expects a matrix")
        rows, cols = R.shape
        pivots = []
        r = 0
        for c in range(cols):
            if r == rows:
                break
            nz = np.nonzero(R[r:, c])[0]
            if nz.size == 0:
                continue
            piv = r + int(nz[0])
            if piv != r:
                R[[r, piv]] = R[[piv, r]]
            R[r] = self.mul[self.inv[R[r, c]], R[r]]
            for i in range(rows):
                if i != r and R[i, c]:
                    R[i] = self.sub[R[i], self.mul[R[i, c], R[r]]]
            pivots.append(c)
            r += 1
        return R, pivots

    def rank(self, A) -> int:
        A = np.asarray(A, dtype=np.int64)
        if A.size == 0:
            return 0
        return len(self.row_reduce(A)[1])

    def inverse(self, A):
        A = np.asarray(A, dtype=np.int64)
        n = A.shape[0]
        R, piv = self.row_reduce(np.hstack([A, np.eye(n, dtype=np.int64)]))
        if piv[:n] != list(range(n)):
            raise InvalidParameters("matrix is singular")
        return R[:, n:]

    def solve(self, A, b):
        """One solution of ``A x = b`` or ``None`` when inconsistent."""
        A = np.asarray(A, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        rows, cols = A.shape
        R, piv = self.row_reduce(np.hstack([A, b[:, None]]))
        if cols in piv:
            return None
        x = np.zeros(cols, dtype=np.int64)
        for i, c in enumerate(piv):
            x[c] = R[i, cols]
        return x

    # -- misc -------------------------------------------------------------
    @property
    def name(self) -> str:
        return f"{self.p}^{self.k}"

    def __repr__(self):
        return f"FieldSpec(p={self.p}, k={self.k}, modulus={self.modulus})"

    def __eq__(self, other):
        return (
            isinstance(other, FieldSpec)
            and (self.p, self.k, self.modulus) == (other.p, other.k, other.modulus)
        )

    def __hash__(self):
        return hash((self.p, self.k, self.modulus))


@lru_cache(maxsize=None)
def _cached_field(p, k, modulus):
    return FieldSpec(p, k, modulus)


def field_new(p: int, k: int = 1, modulus=None) -> FieldSpec:
    """Construct (and cache) GF(p^k)."""
    if modulus is not None:
        modulus = tuple(int(c) for c in modulus)
    return _cached_field(p, k, modulus)


def parse_field(text: str) -> FieldSpec:
    """Parse a field name such as ``"2^2"`` or ``"3"``."""
    text = text.strip()
    if "^" in text:
        p, k = text.split("^", 1)
        return field_new(int(p), int(k))
    q = int(text)
    # the only candidate prime is the smallest divisor of q
    p = next((p for p in range(2, q + 1) if q % p == 0), None)
    if p is not None:
        k, x = 0, 1
        while x < q:
            x *= p
            k += 1
        if x == q:
            return field_new(p, k)
    raise InvalidParameters(f"{text!r} is not a prime power")


def power_sum(fs: FieldSpec, i: int) -> int:
    """Sum of ``alpha**i`` over all field elements, by direct summation."""
    if not 0 <= i <= fs.q - 1:
        raise InvalidParameters("exponent must lie in [0, q-1]")
    return int(fs.sum(fs.pow(fs.elements(), i)))


def base_p_digits(a: int, p: int, length: int | None = None):
    out = []
    while a:
        out.append(a % p)
        a //= p
    if length is not None:
        out += [0] * (length - len(out))
    return out


def lucas_binom(p: int, a: int, b: int) -> int:
    """``C(a, b) mod p`` as the digit-wise product of base-``p`` binomials."""
    from math import comb

    if a < 0 or b < 0:
        raise InvalidParameters("arguments must be non-negative")
    out = 1
    while a or b:
        ad, bd = a % p, b % p
        if bd > ad:
            return 0
        out = out * comb(ad, bd) % p
        a //= p
        b //= p
    return out


def p_shadow_leq(p: int, a: int, b: int) -> bool:
    """True iff every base-``p`` digit of ``a`` is at most that of ``b``."""
    while a or b:
        if a % p > b % p:
            return False
        a //= p
        b //= p
    return True
