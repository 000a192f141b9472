"""Subspaces of GF(q)^n in canonical (RREF) form and their enumeration."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .errors import DimensionMismatch, EnumerationTooLarge, FullSpace, InputError, NotNested
from .exactalg import ExactMatrix, FieldSpec, null_space_rows, rref

DEFAULT_CAP = 1 << 27


@dataclass(frozen=True)
class Subspace:
    n: int
    field: FieldSpec
    basis: tuple[tuple[int, ...], ...]  # RREF rows

    @property
    def dim(self) -> int:
        return len(self.basis)

    @property
    def pivots(self) -> tuple[int, ...]:
        return tuple(next(j for j, x in enumerate(r) if x) for r in self.basis)

    def matrix(self) -> ExactMatrix:
        return ExactMatrix(self.basis, self.field, self.n)

    def array(self) -> np.ndarray:
        return np.array(self.basis, dtype=np.int64).reshape(self.dim, self.n)

    def contains_vector(self, v: Sequence[int]) -> bool:
        F = self.field
        v = [F.coerce(x) for x in v]
        if len(v) != self.n:
            raise DimensionMismatch("vector length differs from ambient dimension")
        for r, pc in zip(self.basis, self.pivots):
            c = v[pc]
            if c:
                v = [F.sub(x, F.mul(c, y)) for x, y in zip(v, r)]
        return not any(v)

    def __contains__(self, v):
        return self.contains_vector(v)

    def contains(self, other: "Subspace") -> bool:
        return all(self.contains_vector(r) for r in other.basis)

    def join(self, other: "Subspace") -> "Subspace":
        return canonicalize(self.basis + other.basis, self.field, self.n)

    def meet(self, other: "Subspace") -> "Subspace":
        F = self.field
        stacked = list(self.basis) + list(other.basis)
        if not stacked:
            return canonicalize([], F, self.n)
        # combinations sum a_i u_i + sum b_j w_j = 0 give intersection vectors sum a_i u_i
        M = ExactMatrix(stacked, F, self.n).transpose()
        vecs = []
        for coeffs in null_space_rows(M):
            a = coeffs[: self.dim]
            v = [0] * self.n
            for c, r in zip(a, self.basis):
                if c:
                    v = [F.add(x, F.mul(c, y)) for x, y in zip(v, r)]
            vecs.append(v)
        return canonicalize(vecs, F, self.n)

    def plucker(self):
        """Plucker coordinates of the basis wedge (a MultiVector)."""
        from .exterior import wedge_of_vectors

        return wedge_of_vectors(self.basis, self.field, self.n)

    def __repr__(self):
        return f"Subspace(n={self.n}, {self.field}, basis={[list(r) for r in self.basis]})"


def canonicalize(rows, F: FieldSpec, n: int | None = None) -> Subspace:
    """The subspace spanned by `rows`, in RREF."""
    rows = [list(r) for r in rows]
    if n is None:
        if not rows:
            raise InputError("ambient dimension needed for an empty spanning set")
        n = len(rows[0])
    if not rows:
        return Subspace(n, F, ())
    R, r, _ = rref(ExactMatrix(rows, F, n))
    return Subspace(n, F, tuple(R.row(i) for i in range(r)))


def subspace_from_array(arr: np.ndarray, F: FieldSpec) -> Subspace:
    """Wrap an array already in RREF (as produced by the enumerators)."""
    arr = np.asarray(arr)
    return Subspace(arr.shape[1], F, tuple(tuple(int(x) for x in r) for r in arr))


def gaussian_binomial(n: int, d: int, q: int) -> int:
    if d < 0 or d > n:
        return 0
    num = den = 1
    for i in range(d):
        num *= q ** (n - i) - 1
        den *= q ** (i + 1) - 1
    return num // den


def pivot_blocks(n: int, d: int) -> list[tuple[int, ...]]:
    return list(itertools.combinations(range(n), d))


def _free_positions(n, pivots):
    pset = set(pivots)
    return [(i, j) for i, pc in enumerate(pivots) for j in range(pc + 1, n) if j not in pset]


def block_array(n: int, pivots: Sequence[int], F: FieldSpec) -> np.ndarray:
    """All RREF matrices with the given pivot columns, lexicographic in free entries."""
    d = len(pivots)
    free = _free_positions(n, pivots)
    count = F.q ** len(free)
    out = np.zeros((count, d, n), dtype=np.int64)
    for i, pc in enumerate(pivots):
        out[:, i, pc] = 1
    codes = np.arange(count, dtype=np.int64)
    for pos in range(len(free) - 1, -1, -1):
        i, j = free[pos]
        out[:, i, j] = codes % F.q
        codes //= F.q
    return out


def _check_cap(count, cap, what):
    if cap is not None and count > cap:
        raise EnumerationTooLarge(f"{what}: {count} items exceed the cap {cap}")


def rref_array(n: int, d: int, F: FieldSpec, cap: int | None = DEFAULT_CAP) -> np.ndarray:
    """All d-subspaces of F^n as an (N, d, n) array in canonical order."""
    _check_cap(gaussian_binomial(n, d, F.q), cap, f"[{n} choose {d}]_{F.q}")
    blocks = [block_array(n, piv, F) for piv in pivot_blocks(n, d)]
    return np.concatenate(blocks) if blocks else np.zeros((0, d, n), dtype=np.int64)


def points_array(n: int, F: FieldSpec, cap: int | None = DEFAULT_CAP) -> np.ndarray:
    """Normalized representatives of the points of PG(n-1, q), shape (N, n)."""
    return rref_array(n, 1, F, cap)[:, 0, :]


def enumerate_subspaces(n: int, d: int, F: FieldSpec, cap: int | None = DEFAULT_CAP) -> Iterator[Subspace]:
    """Every d-subspace exactly once, by pivot pattern then free entries."""
    _check_cap(gaussian_binomial(n, d, F.q), cap, f"[{n} choose {d}]_{F.q}")
    for piv in pivot_blocks(n, d):
        for m in block_array(n, piv, F):
            yield subspace_from_array(m, F)


def grassmann_line(Y: Subspace, Z: Subspace) -> list[Subspace]:
    """The q+1 subspaces X with Y < X < Z, dim X = dim Y + 1."""
    if Z.dim != Y.dim + 2:
        raise DimensionMismatch("need dim Z = dim Y + 2")
    if not Z.contains(Y):
        raise NotNested("Y is not contained in Z")
    F = Y.field
    # two vectors of Z completing a basis of Y
    extra = []
    cur = Y
    for r in Z.basis:
        if not cur.contains_vector(r):
            extra.append(r)
            cur = cur.join(canonicalize([r], F, Y.n))
    u, v = extra
    members = [canonicalize(Y.basis + (u,), F, Y.n)]
    for x in F.elements():
        w = [F.add(F.mul(x, a), b) for a, b in zip(u, v)]
        members.append(canonicalize(Y.basis + (tuple(w),), F, Y.n))
    return members


@dataclass(frozen=True)
class QuotientFrame:
    base: Subspace
    complement: tuple[tuple[int, ...], ...]

    @property
    def dim(self) -> int:
        return len(self.complement)

    def lift(self, coords: Sequence[int]) -> tuple[int, ...]:
        """Representative in V of the coset with the given complement coordinates."""
        F = self.base.field
        v = [0] * self.base.n
        for c, r in zip(coords, self.complement):
            if c:
                v = [F.add(x, F.mul(c, y)) for x, y in zip(v, r)]
        return tuple(v)

    def project(self, v: Sequence[int]) -> tuple[int, ...]:
        """Complement coordinates of the coset v + X."""
        F = self.base.field
        v = [F.coerce(x) for x in v]
        for r, pc in zip(self.base.basis, self.base.pivots):
            c = v[pc]
            if c:
                v = [F.sub(x, F.mul(c, y)) for x, y in zip(v, r)]
        cols = [next(j for j, x in enumerate(r) if x) for r in self.complement]
        return tuple(v[j] for j in cols)


def quotient_frame(X: Subspace) -> QuotientFrame:
    if X.dim >= X.n:
        raise FullSpace("X is the whole space")
    piv = set(X.pivots)
    comp = tuple(tuple(int(i == j) for i in range(X.n)) for j in range(X.n) if j not in piv)
    return QuotientFrame(X, comp)
