"""Exact arithmetic over GF(p^m) and dense linear algebra over it.

Field elements are plain ints ("codes"): the element sum d_i t^i of
GF(p)[t]/(modulus) is encoded as sum d_i p^i.  In the prime field the code
is just the residue.  Codes are canonical, so equality of elements is
equality of ints.
"""

from __future__ import annotations

import itertools
import threading
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np
from sympy import Poly, isprime, symbols

from .errors import (
    DegreeTooLarge,
    DimensionMismatch,
    InputError,
    NonPrimeCharacteristic,
    NoneFound,
    NotAntisymmetric,
    OddSize,
)

ENUM_ORDER_LIMIT = 1 << 16
LARGE_PRIME_LIMIT = 1 << 61


@dataclass(frozen=True)
class FieldSpec:
    p: int
    m: int = 1
    modulus: tuple[int, ...] | None = None  # low-to-high, monic, length m + 1
    large: bool = False

    @property
    def q(self) -> int:
        return self.p**self.m

    @property
    def is_prime_field(self) -> bool:
        return self.m == 1

    def __str__(self):
        return f"GF({self.q})" if self.m == 1 else f"GF({self.p}^{self.m})"

    def label(self) -> str:
        return str(self.p) if self.m == 1 else f"{self.p}^{self.m}"

    # -- scalars ---------------------------------------------------------
    def coerce(self, x) -> int:
        """Map an int to a field code.

        In a prime field any integer is reduced mod p.  In an extension
        field the value must already be a code in [0, q).
        """
        x = int(x)
        if self.m == 1:
            return x % self.p
        if not 0 <= x < self.q:
            raise InputError(f"{x} is not an element code of {self}")
        return x

    def from_int(self, n: int) -> int:
        """Image of the integer n under Z -> F."""
        return int(n) % self.p

    def coeffs(self, a: int) -> tuple[int, ...]:
        out = []
        for _ in range(self.m):
            a, d = divmod(a, self.p)
            out.append(d)
        return tuple(out)

    def element(self, coeffs: Sequence[int]) -> int:
        if len(coeffs) > self.m:
            raise InputError("too many residue coefficients")
        return sum((int(c) % self.p) * self.p**i for i, c in enumerate(coeffs))

    def elements(self) -> range:
        return range(self.q)

    def add(self, a: int, b: int) -> int:
        if self.m == 1:
            return (a + b) % self.p
        if self.p == 2:
            return a ^ b
        t = _tables(self)
        return int(t.add[a, b]) if t.add is not None else self._digit_add(a, b, 1)

    def neg(self, a: int) -> int:
        if self.m == 1:
            return (-a) % self.p
        if self.p == 2:
            return a
        return self._digit_add(0, a, -1)

    def sub(self, a: int, b: int) -> int:
        return self.add(a, self.neg(b))

    def _digit_add(self, a, b, sign):
        da, db = self.coeffs(a), self.coeffs(b)
        return self.element([x + sign * y for x, y in zip(da, db)])

    def mul(self, a: int, b: int) -> int:
        if self.m == 1:
            return (a * b) % self.p
        if a == 0 or b == 0:
            return 0
        t = _tables(self)
        return int(t.exp[(t.log[a] + t.log[b]) % (self.q - 1)])

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("inverse of zero")
        if self.m == 1:
            return pow(a, -1, self.p)
        t = _tables(self)
        return int(t.exp[(-t.log[a]) % (self.q - 1)])

    def div(self, a: int, b: int) -> int:
        return self.mul(a, self.inv(b))

    def pow(self, a: int, e: int) -> int:
        if self.m == 1:
            return pow(a, e, self.p)
        if e < 0:
            a, e = self.inv(a), -e
        if a == 0:
            return 1 if e == 0 else 0
        t = _tables(self)
        return int(t.exp[(t.log[a] * e) % (self.q - 1)])

    def signed(self, a: int) -> int:
        """Symmetric representative of a prime-field residue (for display)."""
        return a - self.p if self.m == 1 and a > self.p // 2 else a

    # -- vectorized ops on numpy int arrays ------------------------------
    def _check_vec(self):
        if self.large:
            raise InputError("vectorized arithmetic is unavailable in large-prime mode")

    def vadd(self, a, b):
        if self.m == 1:
            if self.p == 2:
                return a ^ b
            return (a + b) % self.p
        if self.p == 2:
            return a ^ b
        t = _tables(self)
        if t.add is not None:
            return t.add[a, b]
        return ((t.digits[a] + t.digits[b]) % self.p) @ t.weights

    def vneg(self, a):
        if self.p == 2:
            return a
        if self.m == 1:
            return (-a) % self.p
        t = _tables(self)
        return ((-t.digits[a]) % self.p) @ t.weights

    def vsub(self, a, b):
        if self.p == 2:
            return a ^ b
        if self.m == 1:
            return (a - b) % self.p
        return self.vadd(a, self.vneg(b))

    def vmul(self, a, b):
        if self.m == 1:
            if self.p == 2:
                return a & b
            return (a * b) % self.p
        t = _tables(self)
        a, b = np.broadcast_arrays(np.asarray(a), np.asarray(b))
        res = t.exp[(t.log[a] + t.log[b]) % (self.q - 1)]
        return np.where((a == 0) | (b == 0), 0, res)

    def vinv(self, a):
        a = np.asarray(a)
        if self.m == 1:
            if self.p == 2:
                return a
            return _inverse_table(self.p)[a]
        t = _tables(self)
        return t.exp[(-t.log[a]) % (self.q - 1)]

    def vdtype(self):
        if self.m > 1 or self.p >= 46341:
            return np.int64
        if self.p <= 181:
            return np.int16
        return np.int32


class _Tables:
    def __init__(self, F: FieldSpec):
        q, p, m = F.q, F.p, F.m
        self.digits = np.array([F.coeffs(a) for a in range(q)], dtype=np.int64)
        self.weights = np.array([p**i for i in range(m)], dtype=np.int64)
        g, exp = _primitive_powers(F)
        self.exp = np.array(exp + exp[:1], dtype=np.int64)
        log = np.zeros(q, dtype=np.int64)
        for i, a in enumerate(exp):
            log[a] = i
        self.log = log
        self.generator = g
        self.add = None
        if q <= 256:
            self.add = ((self.digits[:, None, :] + self.digits[None, :, :]) % p) @ self.weights


_TABLE_LOCK = threading.Lock()
_TABLE_CACHE: dict = {}


def _tables(F: FieldSpec) -> _Tables:
    key = (F.p, F.m, F.modulus)
    t = _TABLE_CACHE.get(key)
    if t is None:
        with _TABLE_LOCK:
            t = _TABLE_CACHE.get(key)
            if t is None:
                t = _Tables(F)
                _TABLE_CACHE[key] = t
    return t


@lru_cache(maxsize=None)
def _inverse_table(p: int) -> np.ndarray:
    inv = np.zeros(p, dtype=np.int64)
    for a in range(1, p):
        inv[a] = pow(a, -1, p)
    return inv


def _polymulmod(a, b, modulus, p):
    m = len(modulus) - 1
    prod = [0] * (2 * m - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                prod[i + j] = (prod[i + j] + x * y) % p
    for d in range(len(prod) - 1, m - 1, -1):
        c = prod[d]
        if c:
            for i in range(m + 1):
                prod[d - m + i] = (prod[d - m + i] - c * modulus[i]) % p
    return prod[:m]


def _primitive_powers(F: FieldSpec):
    q, p = F.q, F.p
    for g in range(2, q) if q > 2 else [1]:
        gd = list(F.coeffs(g))
        cur = [1] + [0] * (F.m - 1)
        powers = []
        for _ in range(q - 1):
            powers.append(F.element(cur))
            cur = _polymulmod(cur, gd, F.modulus, p)
        if F.element(cur) == 1 and len(set(powers)) == q - 1:
            return g, powers
    raise NoneFound(f"no primitive element in {F}")


def field_make(p: int, m: int = 1, large: bool = False) -> FieldSpec:
    """Build GF(p^m) with the lexicographically least monic irreducible modulus.

    Candidates t^m + c_{m-1} t^{m-1} + ... + c_0 are ordered by the tuple
    (c_{m-1}, ..., c_0).  `large` enables big prime fields (m = 1 only,
    p <= 2^61) that support scalar arithmetic but no enumeration.
    """
    p, m = int(p), int(m)
    if p < 2 or not isprime(p):
        raise NonPrimeCharacteristic(f"{p} is not prime")
    if m < 1:
        raise InputError("extension degree must be >= 1")
    if large:
        if m != 1:
            raise DegreeTooLarge("large-prime mode needs m = 1")
        if p > LARGE_PRIME_LIMIT:
            raise DegreeTooLarge(f"p = {p} exceeds 2^61")
        return FieldSpec(p, 1, None, True)
    if p**m > ENUM_ORDER_LIMIT:
        raise DegreeTooLarge(f"q = {p}^{m} exceeds 2^16")
    if m == 1:
        return FieldSpec(p, 1, None, False)
    t = symbols("t")
    for tail in itertools.product(range(p), repeat=m):
        if tail[-1] == 0:
            continue
        high_to_low = (1,) + tail
        if Poly(list(high_to_low), t, modulus=p).is_irreducible:
            return FieldSpec(p, m, tuple(reversed(high_to_low)), False)
    raise NoneFound(f"no irreducible polynomial of degree {m} over GF({p})")


def parse_field(text: str) -> FieldSpec:
    """Parse "p" or "p^m"."""
    try:
        if "^" in text:
            p, m = text.split("^")
            return field_make(int(p), int(m))
        return field_make(int(text))
    except ValueError as exc:
        if isinstance(exc, InputError):
            raise
        raise InputError(f"bad field spec {text!r}") from exc


# ---------------------------------------------------------------------------
# matrices


class ExactMatrix:
    """Immutable dense matrix of field codes (rows stored as tuples)."""

    __slots__ = ("field", "_rows", "_cols")

    def __init__(self, rows: Iterable[Sequence[int]], field: FieldSpec, cols: int | None = None):
        rows = tuple(tuple(field.coerce(x) for x in r) for r in rows)
        widths = {len(r) for r in rows}
        if len(widths) > 1:
            raise DimensionMismatch("ragged matrix")
        width = widths.pop() if widths else (cols or 0)
        if cols is not None and rows and cols != width:
            raise DimensionMismatch("column count mismatch")
        self.field = field
        self._rows = rows
        self._cols = width

    @classmethod
    def zeros(cls, rows, cols, field):
        return cls([[0] * cols for _ in range(rows)], field, cols)

    @classmethod
    def identity(cls, n, field):
        return cls([[int(i == j) for j in range(n)] for i in range(n)], field, n)

    @classmethod
    def from_array(cls, arr, field):
        arr = np.asarray(arr)
        return cls(arr.tolist(), field, arr.shape[1] if arr.ndim == 2 else 0)

    @property
    def rows(self) -> int:
        return len(self._rows)

    @property
    def cols(self) -> int:
        return self._cols

    @property
    def shape(self):
        return (self.rows, self.cols)

    def tolist(self):
        return [list(r) for r in self._rows]

    def row(self, i):
        return self._rows[i]

    def entries(self):
        return tuple(x for r in self._rows for x in r)

    def __getitem__(self, ij):
        i, j = ij
        return self._rows[i][j]

    def to_array(self):
        return np.array(self._rows, dtype=np.int64).reshape(self.rows, self.cols)

    def transpose(self):
        return ExactMatrix(list(zip(*self._rows)) if self.rows else [], self.field, self.rows)

    T = property(transpose)

    def __matmul__(self, other: "ExactMatrix"):
        if self.cols != other.rows:
            raise DimensionMismatch("matmul shape mismatch")
        F = self.field
        out = []
        ocols = list(zip(*other._rows)) if other.rows else [()] * other.cols
        for r in self._rows:
            line = []
            for c in ocols:
                acc = 0
                for x, y in zip(r, c):
                    if x and y:
                        acc = F.add(acc, F.mul(x, y))
                line.append(acc)
            out.append(line)
        return ExactMatrix(out, F, other.cols)

    def scale(self, s):
        F = self.field
        return ExactMatrix([[F.mul(s, x) for x in r] for r in self._rows], F, self.cols)

    def __neg__(self):
        F = self.field
        return ExactMatrix([[F.neg(x) for x in r] for r in self._rows], F, self.cols)

    def __add__(self, other):
        F = self.field
        return ExactMatrix([[F.add(x, y) for x, y in zip(a, b)] for a, b in zip(self._rows, other._rows)], F, self.cols)

    def __sub__(self, other):
        return self + (-other)

    def __eq__(self, other):
        return (
            isinstance(other, ExactMatrix)
            and self.field == other.field
            and self.shape == other.shape
            and self._rows == other._rows
        )

    def __hash__(self):
        return hash((self.field, self.shape, self._rows))

    def __repr__(self):
        return f"ExactMatrix({self.tolist()}, {self.field})"

    def packed(self) -> "BitMatrix":
        if (self.field.p, self.field.m) != (2, 1):
            raise InputError("bit packing needs GF(2)")
        return BitMatrix([sum(b << j for j, b in enumerate(r)) for r in self._rows], self.cols)


class BitMatrix:
    """GF(2) matrix with each row packed into an int (bit j = column j)."""

    __slots__ = ("rows_bits", "cols")

    def __init__(self, rows_bits: Sequence[int], cols: int):
        mask = (1 << cols) - 1
        for r in rows_bits:
            if r & ~mask:
                raise DimensionMismatch("row has bits beyond the column count")
        self.rows_bits = tuple(int(r) for r in rows_bits)
        self.cols = cols

    field = FieldSpec(2)

    @property
    def rows(self):
        return len(self.rows_bits)

    @property
    def shape(self):
        return (self.rows, self.cols)

    def unpacked(self) -> ExactMatrix:
        return ExactMatrix(
            [[(r >> j) & 1 for j in range(self.cols)] for r in self.rows_bits], FieldSpec(2), self.cols
        )

    def tolist(self):
        return self.unpacked().tolist()

    def __eq__(self, other):
        return isinstance(other, BitMatrix) and self.shape == other.shape and self.rows_bits == other.rows_bits

    def __hash__(self):
        return hash((self.cols, self.rows_bits))

    def __repr__(self):
        return f"BitMatrix({self.tolist()})"


def as_matrix(rows, field: FieldSpec) -> ExactMatrix:
    if isinstance(rows, ExactMatrix):
        return rows
    if isinstance(rows, np.ndarray):
        return ExactMatrix.from_array(rows, field)
    return ExactMatrix(rows, field)


def _rref_bits(M: BitMatrix):
    rows = list(M.rows_bits)
    pivots = []
    r = 0
    for c in range(M.cols):
        bit = 1 << c
        piv = next((i for i in range(r, len(rows)) if rows[i] & bit), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        for i in range(len(rows)):
            if i != r and rows[i] & bit:
                rows[i] ^= rows[r]
        pivots.append(c)
        r += 1
        if r == len(rows):
            break
    return BitMatrix(rows, M.cols), r, tuple(pivots)


def _rref_lists(rows: list[list[int]], cols: int, F: FieldSpec):
    rows = [list(r) for r in rows]
    pivots = []
    r = 0
    for c in range(cols):
        piv = next((i for i in range(r, len(rows)) if rows[i][c]), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        inv = F.inv(rows[r][c])
        if inv != 1:
            rows[r] = [F.mul(inv, x) for x in rows[r]]
        prow = rows[r]
        for i in range(len(rows)):
            f = rows[i][c]
            if i != r and f:
                rows[i] = [F.sub(x, F.mul(f, y)) if y else x for x, y in zip(rows[i], prow)]
        pivots.append(c)
        r += 1
        if r == len(rows):
            break
    return rows, r, tuple(pivots)


def rref(M):
    """Reduced row echelon form.  Returns (matrix, rank, pivot columns)."""
    if isinstance(M, BitMatrix):
        return _rref_bits(M)
    rows, r, piv = _rref_lists(M.tolist(), M.cols, M.field)
    return ExactMatrix(rows, M.field, M.cols), r, piv


def rank(M) -> int:
    return rref(M)[1]


def null_space_rows(M) -> list[list[int]]:
    """Basis of the right null space, one vector per free column."""
    R, r, piv = rref(M)
    if isinstance(R, BitMatrix):
        R = R.unpacked()
    F = R.field
    free = [c for c in range(R.cols) if c not in piv]
    basis = []
    for fc in free:
        v = [0] * R.cols
        v[fc] = 1
        for i, pc in enumerate(piv):
            v[pc] = F.neg(R[i, fc])
        basis.append(v)
    return basis


def kernel(M):
    """Right null space as a canonical Subspace of F^cols."""
    from .geometry import canonicalize

    F = FieldSpec(2) if isinstance(M, BitMatrix) else M.field
    return canonicalize(null_space_rows(M), F, n=M.cols)


def det(M: ExactMatrix) -> int:
    if M.rows != M.cols:
        raise DimensionMismatch("det of a non-square matrix")
    F = M.field
    rows = M.tolist()
    n = len(rows)
    result = 1
    for c in range(n):
        piv = next((i for i in range(c, n) if rows[i][c]), None)
        if piv is None:
            return 0
        if piv != c:
            rows[c], rows[piv] = rows[piv], rows[c]
            result = F.neg(result)
        pv = rows[c][c]
        result = F.mul(result, pv)
        inv = F.inv(pv)
        for i in range(c + 1, n):
            f = rows[i][c]
            if f:
                f = F.mul(f, inv)
                rows[i] = [F.sub(x, F.mul(f, y)) for x, y in zip(rows[i], rows[c])]
    return result


def inverse(M: ExactMatrix) -> ExactMatrix:
    if M.rows != M.cols:
        raise DimensionMismatch("inverse of a non-square matrix")
    n = M.rows
    aug = [list(r) + [int(i == j) for j in range(n)] for i, r in enumerate(M.tolist())]
    rows, r, piv = _rref_lists(aug, 2 * n, M.field)
    if r < n or piv[n - 1] != n - 1:
        raise ZeroDivisionError("matrix is singular")
    return ExactMatrix([row[n:] for row in rows], M.field, n)


def is_antisymmetric(M: ExactMatrix) -> bool:
    F = M.field
    if M.rows != M.cols:
        return False
    for i in range(M.rows):
        if M[i, i]:
            return False
        for j in range(i + 1, M.cols):
            if M[i, j] != F.neg(M[j, i]):
                return False
    return True


@lru_cache(maxsize=None)
def perfect_matchings(size: int) -> tuple[tuple[int, tuple[tuple[int, int], ...]], ...]:
    """All perfect matchings of range(size) with their Pfaffian signs."""
    if size % 2:
        raise OddSize(f"size {size} is odd")

    def rec(items):
        if not items:
            return [(1, ())]
        first, rest = items[0], items[1:]
        out = []
        for j, other in enumerate(rest):
            sign = -1 if j % 2 else 1
            remaining = rest[:j] + rest[j + 1 :]
            for s, pairs in rec(remaining):
                out.append((sign * s, ((first, other),) + pairs))
        return out

    return tuple(rec(tuple(range(size))))


def pfaffian_numeric(M: ExactMatrix) -> int:
    """Pfaffian by perfect-matching expansion (division free)."""
    if M.rows != M.cols:
        raise NotAntisymmetric("matrix is not square")
    if M.rows % 2:
        raise OddSize(f"size {M.rows} is odd")
    if M.rows > 8:
        raise InputError("pfaffian_numeric supports sizes up to 8")
    if not is_antisymmetric(M):
        raise NotAntisymmetric("M^T != -M or nonzero diagonal")
    F = M.field
    total = 0
    for sign, pairs in perfect_matchings(M.rows):
        term = 1
        for i, j in pairs:
            term = F.mul(term, M[i, j])
            if not term:
                break
        if term:
            total = F.add(total, term) if sign > 0 else F.sub(total, term)
    return total


# ---------------------------------------------------------------------------
# univariate polynomials


@dataclass(frozen=True)
class UniPoly:
    coeffs: tuple[int, ...]  # low to high
    field: FieldSpec

    def __post_init__(self):
        c = list(self.coeffs)
        while c and c[-1] == 0:
            c.pop()
        object.__setattr__(self, "coeffs", tuple(c))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, x: int) -> int:
        F = self.field
        acc = 0
        for c in reversed(self.coeffs):
            acc = F.add(F.mul(acc, x), c)
        return acc

    def roots(self) -> list[int]:
        if self.field.large:
            raise InputError("exhaustive root search needs a small field")
        return [x for x in self.field.elements() if self(x) == 0]

    def has_root(self) -> bool:
        if not self.coeffs:
            return True
        if self.field.large:
            return _has_root_large_prime(self)
        return any(self(x) == 0 for x in self.field.elements())


def _poly_mod(a, b, p):
    a = list(a)
    inv = pow(b[-1], -1, p)
    while len(a) >= len(b):
        c = a[-1] * inv % p
        shift = len(a) - len(b)
        for i, y in enumerate(b):
            a[shift + i] = (a[shift + i] - c * y) % p
        a.pop()
        while a and a[-1] == 0:
            a.pop()
    return a


def _poly_mulmod(a, b, mod, p):
    prod = [0] * (len(a) + len(b) - 1) if a and b else []
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            prod[i + j] = (prod[i + j] + x * y) % p
    while prod and prod[-1] == 0:
        prod.pop()
    return _poly_mod(prod, mod, p) if prod else []


def _has_root_large_prime(f: UniPoly) -> bool:
    # f has a root in GF(p) iff gcd(f, t^p - t) != 1
    p = f.field.p
    mod = list(f.coeffs)
    if len(mod) == 1:
        return False
    if mod[0] == 0:
        return True
    result, base, e = [1], [0, 1], p
    while e:
        if e & 1:
            result = _poly_mulmod(result, base, mod, p)
        base = _poly_mulmod(base, base, mod, p)
        e >>= 1
    g = list(result) + [0] * 2
    g[1] = (g[1] - 1) % p
    while g and g[-1] == 0:
        g.pop()
    a, b = mod, g
    while b:
        a, b = b, _poly_mod(a, b, p)
    return len(a) > 1


def charpoly(M: ExactMatrix) -> UniPoly:
    """det(tI - M) by Berkowitz's division-free algorithm."""
    if M.rows != M.cols:
        raise DimensionMismatch("charpoly of a non-square matrix")
    F = M.field
    A = M.tolist()
    n = len(A)
    poly = [1]  # high to low
    for r in range(n):
        a = A[r][r]
        R = [A[i][r] for i in range(r)]
        S = A[r][:r]
        vec = [1, F.neg(a)]
        cur = R
        for _ in range(r):
            vec.append(F.neg(sum_products(F, S, cur)))
            cur = [sum_products(F, A[i][:r], cur) for i in range(r)]
        new = []
        for i in range(r + 2):
            acc = 0
            for j in range(r + 1):
                if 0 <= i - j < len(vec):
                    acc = F.add(acc, F.mul(vec[i - j], poly[j]))
            new.append(acc)
        poly = new
    return UniPoly(tuple(reversed(poly)), F)


def sum_products(F: FieldSpec, xs, ys) -> int:
    acc = 0
    for x, y in zip(xs, ys):
        if x and y:
            acc = F.add(acc, F.mul(x, y))
    return acc


def has_eigenvalue(M: ExactMatrix, F: FieldSpec | None = None) -> bool:
    """True iff det(tI - M) has a root in the field."""
    if F is not None and F != M.field:
        M = ExactMatrix(M.tolist(), F)
    return charpoly(M).has_root()


def irreducible_quadratic_param(F: FieldSpec) -> tuple[int, int]:
    """Smallest lambda making t^2 - lambda (odd p) or t^2 + lambda t + 1 (p = 2) irreducible."""
    if F.large:
        raise InputError("needs an enumerable field")
    for lam in F.elements():
        if F.p == 2:
            poly = UniPoly((1, lam, 1), F)
        else:
            poly = UniPoly((F.neg(lam), 0, 1), F)
        if not poly.has_root():
            return (2 if F.p == 2 else 1), lam
    raise NoneFound(f"no irreducible quadratic of the required shape over {F}")


# ---------------------------------------------------------------------------
# batched elimination on numpy arrays


def batch_rank(mats, F: FieldSpec, chunk: int = 1 << 16) -> np.ndarray:
    """Ranks of a stack of matrices with shape (N, r, c)."""
    F._check_vec()
    mats = np.asarray(mats)
    N = mats.shape[0]
    out = np.empty(N, dtype=np.int64)
    for s in range(0, N, chunk):
        out[s : s + chunk] = _batch_rank_chunk(mats[s : s + chunk], F)
    return out


def _batch_rank_chunk(mats, F):
    M = np.array(mats, dtype=F.vdtype(), copy=True)
    N, r, c = M.shape
    rk = np.zeros(N, dtype=np.int64)
    used = np.zeros((N, r), dtype=bool)
    for col in range(c):
        cand = (M[:, :, col] != 0) & ~used
        has = cand.any(axis=1)
        if not has.any():
            continue
        idx = np.nonzero(has)[0]
        pr = cand[idx].argmax(axis=1)
        sub = M[idx]
        prow = sub[np.arange(len(idx)), pr, :]
        if not (F.p == 2 and F.m == 1):
            inv = F.vinv(prow[:, col]).astype(M.dtype)
            prow = F.vmul(prow, inv[:, None]).astype(M.dtype)
        factors = sub[:, :, col].copy()
        factors[np.arange(len(idx)), pr] = 0
        sub = F.vsub(sub, F.vmul(factors[:, :, None], prow[:, None, :])).astype(M.dtype)
        sub[np.arange(len(idx)), pr, :] = prow
        M[idx] = sub
        used[idx, pr] = True
        rk[idx] += 1
    return rk


def batch_rank_gf2_bits(rows: np.ndarray, cols: int) -> np.ndarray:
    """Ranks over GF(2) of a stack of bit-packed matrices, rows shape (N, r), uint64."""
    R = np.array(rows, dtype=np.uint64, copy=True)
    N, r = R.shape
    rk = np.zeros(N, dtype=np.int64)
    used = np.zeros((N, r), dtype=bool)
    ar = np.arange(N)
    for col in range(cols):
        bit = np.uint64(1 << col)
        cand = ((R & bit) != 0) & ~used
        has = cand.any(axis=1)
        pr = cand.argmax(axis=1)
        prow = R[ar, pr]
        hit = ((R & bit) != 0) & has[:, None]
        hit[ar, pr] = False
        R = np.where(hit, R ^ prow[:, None], R)
        used[ar[has], pr[has]] = True
        rk += has
    return rk
