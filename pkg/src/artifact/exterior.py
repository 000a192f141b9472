"""Exterior powers of GF(q)^n: subset indexing, wedges, functionals and f-tilde.

Basis vectors of the k-th exterior power are indexed by increasing index
tuples in lexicographic order (the order of itertools.combinations).
Indices are 1-based throughout, matching the "123+456" text notation.
"""

from __future__ import annotations

import itertools
import json
import re
from dataclasses import dataclass
from functools import lru_cache
from math import comb
from typing import Mapping, Sequence

import numpy as np

from .errors import DimensionMismatch, InputError, ZeroFunctional, ZeroInput
from .exactalg import ExactMatrix, FieldSpec, det, rank
from .geometry import Subspace, canonicalize


@lru_cache(maxsize=None)
def subsets(n: int, k: int) -> tuple[tuple[int, ...], ...]:
    return tuple(itertools.combinations(range(1, n + 1), k))


@lru_cache(maxsize=None)
def subset_index(n: int, k: int) -> dict:
    return {S: i for i, S in enumerate(subsets(n, k))}


def subset_rank(S: Sequence[int], n: int) -> int:
    S = tuple(S)
    if any(b <= a for a, b in zip(S, S[1:])) or (S and (S[0] < 1 or S[-1] > n)):
        raise InputError(f"{S} is not an increasing subset of 1..{n}")
    return subset_index(n, len(S))[S]


def subset_unrank(r: int, n: int, k: int) -> tuple[int, ...]:
    return subsets(n, k)[r]


def perm_sign(seq: Sequence[int]) -> int:
    """Sign of the permutation sorting seq; 0 when an entry repeats."""
    if len(set(seq)) < len(seq):
        return 0
    inv = sum(1 for i in range(len(seq)) for j in range(i + 1, len(seq)) if seq[i] > seq[j])
    return -1 if inv % 2 else 1


def shuffle_sign(S: Sequence[int], T: Sequence[int]) -> int:
    """Sign with e_S ^ e_T = sign * e_{S u T} for increasing S, T."""
    if set(S) & set(T):
        return 0
    inv = sum(1 for s in S for t in T if s > t)
    return -1 if inv % 2 else 1


@dataclass(frozen=True)
class MultiVector:
    n: int
    degree: int
    field: FieldSpec
    coeffs: tuple[int, ...]

    def __post_init__(self):
        if len(self.coeffs) != comb(self.n, self.degree):
            raise DimensionMismatch("coefficient count differs from C(n, d)")

    def __getitem__(self, S):
        return self.coeffs[subset_index(self.n, self.degree)[tuple(S)]]

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def wedge(self, other: "MultiVector") -> "MultiVector":
        F = self.field
        d = self.degree + other.degree
        out = [0] * comb(self.n, d)
        idx = subset_index(self.n, d)
        for S, a in zip(subsets(self.n, self.degree), self.coeffs):
            if not a:
                continue
            for T, b in zip(subsets(self.n, other.degree), other.coeffs):
                if not b:
                    continue
                s = shuffle_sign(S, T)
                if s:
                    U = tuple(sorted(S + T))
                    t = F.mul(a, b)
                    out[idx[U]] = F.add(out[idx[U]], t) if s > 0 else F.sub(out[idx[U]], t)
        return MultiVector(self.n, d, F, tuple(out))

    def scale(self, c: int) -> "MultiVector":
        F = self.field
        return MultiVector(self.n, self.degree, F, tuple(F.mul(c, x) for x in self.coeffs))


def wedge_of_vectors(vectors, F: FieldSpec, n: int | None = None) -> MultiVector:
    """Plucker coordinates: coefficient at S is the minor on columns S."""
    vectors = [[F.coerce(x) for x in v] for v in vectors]
    if n is None:
        if not vectors:
            raise DimensionMismatch("need at least one vector")
        n = len(vectors[0])
    d = len(vectors)
    if any(len(v) != n for v in vectors):
        raise DimensionMismatch("vectors of different lengths")
    if not 1 <= d <= n:
        raise DimensionMismatch(f"cannot wedge {d} vectors in dimension {n}")
    coeffs = []
    for S in subsets(n, d):
        cols = [c - 1 for c in S]
        coeffs.append(det(ExactMatrix([[v[c] for c in cols] for v in vectors], F, d)))
    return MultiVector(n, d, F, tuple(coeffs))


def compound(rows, k: int, F: FieldSpec, n: int | None = None) -> ExactMatrix:
    """k-th compound: entry (R, S) is the minor on rows R and columns S."""
    rows = [list(r) for r in rows]
    d = len(rows)
    n = n if n is not None else len(rows[0])
    out = []
    for R in subsets(d, k):
        sub = [rows[i - 1] for i in R]
        out.append(list(wedge_of_vectors(sub, F, n).coeffs))
    return ExactMatrix(out, F, comb(n, k))


# ---------------------------------------------------------------------------
# functionals


@dataclass(frozen=True)
class AlternatingFunctional:
    n: int
    k: int
    field: FieldSpec
    coeffs: tuple[int, ...]

    def __post_init__(self):
        if not 1 <= self.k <= self.n:
            raise DimensionMismatch(f"arity {self.k} out of range for n = {self.n}")
        if len(self.coeffs) != comb(self.n, self.k):
            raise DimensionMismatch("coefficient count differs from C(n, k)")

    @classmethod
    def from_terms(cls, terms: Mapping[Sequence[int], int], n: int, k: int, F: FieldSpec):
        """Build from {index tuple: coefficient}; unsorted tuples pick up the permutation sign."""
        out = [0] * comb(n, k)
        idx = subset_index(n, k)
        for T, c in terms.items():
            T = tuple(T)
            if len(T) != k:
                raise InputError(f"term {T} does not have {k} indices")
            if any(not 1 <= t <= n for t in T):
                raise InputError(f"term {T} has an index outside 1..{n}")
            s = perm_sign(T)
            if s == 0:
                raise InputError(f"term {T} repeats an index")
            c = F.coerce(c)
            S = tuple(sorted(T))
            out[idx[S]] = F.add(out[idx[S]], c) if s > 0 else F.sub(out[idx[S]], c)
        return cls(n, k, F, tuple(out))

    @classmethod
    def zero(cls, n, k, F):
        return cls(n, k, F, (0,) * comb(n, k))

    def __getitem__(self, S):
        return self.coeffs[subset_index(self.n, self.k)[tuple(S)]]

    def value(self, T: Sequence[int]) -> int:
        """f(e_T) for an arbitrary index tuple T."""
        s = perm_sign(T)
        if s == 0:
            return 0
        c = self[tuple(sorted(T))]
        return c if s > 0 else self.field.neg(c)

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def scale(self, c: int) -> "AlternatingFunctional":
        F = self.field
        return AlternatingFunctional(self.n, self.k, F, tuple(F.mul(c, x) for x in self.coeffs))

    def support(self):
        return [(S, c) for S, c in zip(subsets(self.n, self.k), self.coeffs) if c]

    def to_text(self) -> str:
        return format_functional(self)

    def to_json_map(self) -> dict:
        return {"".join(_fmt_index(i) for i in S): c for S, c in self.support()}

    def tensor(self) -> np.ndarray:
        """Dense alternating array T[i1-1, ..., ik-1] = f(e_i1 ^ ... ^ e_ik)."""
        F = self.field
        T = np.zeros((self.n,) * self.k, dtype=np.int64)
        for S, c in self.support():
            for perm in itertools.permutations(S):
                s = perm_sign(perm)
                T[tuple(i - 1 for i in perm)] = c if s > 0 else F.neg(c)
        return T

    def change_basis(self, P) -> "AlternatingFunctional":
        """Coefficients with respect to the basis e'_j = sum_i e_i P[i][j]."""
        F = self.field
        cols = ExactMatrix(P, F, self.n).transpose().tolist()
        C = compound(cols, self.k, F, self.n)
        coeffs = []
        for r in range(C.rows):
            row = C.row(r)
            acc = 0
            for x, y in zip(row, self.coeffs):
                if x and y:
                    acc = F.add(acc, F.mul(x, y))
            coeffs.append(acc)
        return AlternatingFunctional(self.n, self.k, F, tuple(coeffs))


def _fmt_index(i: int) -> str:
    return str(i) if i <= 9 else f"[{i}]"


def _fmt_coeff(F: FieldSpec, c: int) -> str:
    if F.m == 1:
        return str(c)
    if c < F.p:
        return str(c)
    return f"#{c}"


def format_functional(f: AlternatingFunctional) -> str:
    """Canonical text: lexicographic subsets, coefficients in canonical form, '+' joined."""
    parts = []
    for S, c in f.support():
        idx = "".join(_fmt_index(i) for i in S)
        parts.append(idx if c == 1 else f"{_fmt_coeff(f.field, c)}*{idx}")
    return "+".join(parts) if parts else "0"


_TERM_RE = re.compile(r"\s*([+-])?\s*(?:(\d+|#\d+)\s*\*\s*)?((?:\d|\[\d+\])+)\s*")


def _split_indices(s: str) -> list[int]:
    return [int(t[1:-1]) if t.startswith("[") else int(t) for t in re.findall(r"\[\d+\]|\d", s)]


def parse_functional(text: str, n: int | None, F: FieldSpec, k: int = 3) -> AlternatingFunctional:
    """Parse "c*ijk" terms joined by + or -, e.g. "123+456+2*147".

    Digits address e_1..e_9, "[10]" and up address larger indices.  A
    coefficient is an integer (reduced into the prime field) or "#code" for
    an arbitrary element code.  The text "0" is the zero functional.
    """
    text = text.strip()
    if not text:
        raise InputError("empty functional")
    if text == "0":
        if n is None:
            raise InputError("dimension needed for the zero functional")
        return AlternatingFunctional.zero(n, k, F)
    pos = 0
    terms: list[tuple[int, list[int]]] = []
    while pos < len(text):
        m = _TERM_RE.match(text, pos)
        if not m or m.end() == pos:
            raise InputError(f"cannot parse functional near position {pos}: {text[pos:pos + 10]!r}")
        sign, coef, idx = m.groups()
        if terms and sign is None:
            raise InputError(f"missing '+' or '-' before position {m.start()}")
        if coef is None:
            c = 1
        elif coef.startswith("#"):
            c = F.coerce(int(coef[1:]))
        else:
            c = F.from_int(int(coef))
        if sign == "-":
            c = F.neg(c)
        terms.append((c, _split_indices(idx)))
        pos = m.end()
    if n is None:
        n = max(max(t) for _, t in terms)
    acc: dict = {}
    for c, T in terms:
        if len(T) != k:
            raise InputError(f"term {T} does not have {k} indices")
        f = AlternatingFunctional.from_terms({tuple(T): c}, n, k, F)
        for S, v in f.support():
            acc[S] = F.add(acc.get(S, 0), v)
    return AlternatingFunctional.from_terms(acc, n, k, F)


def parse_functional_json(data, n: int | None, F: FieldSpec, k: int = 3) -> AlternatingFunctional:
    """Parse a JSON coefficient map {"123": 1, "456": 2, ...}."""
    if isinstance(data, str):
        try:
            data = json.loads(data)
        except json.JSONDecodeError as exc:
            raise InputError(f"bad JSON coefficient map: {exc}") from exc
    if not isinstance(data, dict):
        raise InputError("JSON coefficient map must be an object")
    terms = {}
    for key, c in data.items():
        T = tuple(_split_indices(str(key)))
        if not isinstance(c, int):
            raise InputError(f"coefficient of {key} is not an integer")
        terms[T] = c
    if n is None:
        n = max(max(T) for T in terms) if terms else k
    return AlternatingFunctional.from_terms(terms, n, k, F)


def apply_functional(f: AlternatingFunctional, vectors) -> int:
    """f(v_1 ^ ... ^ v_k)."""
    if len(vectors) != f.k:
        raise DimensionMismatch(f"expected {f.k} vectors")
    w = wedge_of_vectors(vectors, f.field, f.n)
    F = f.field
    acc = 0
    for a, b in zip(f.coeffs, w.coeffs):
        if a and b:
            acc = F.add(acc, F.mul(a, b))
    return acc


def ftilde_matrix(f: AlternatingFunctional) -> ExactMatrix:
    """n x C(n, k-1) matrix with T[x][S] = f(e_S ^ e_x)."""
    if f.k < 2:
        raise DimensionMismatch("f-tilde needs k >= 2")
    F = f.field
    cols = subsets(f.n, f.k - 1)
    rows = []
    for x in range(1, f.n + 1):
        row = []
        for S in cols:
            if x in S:
                row.append(0)
                continue
            s = shuffle_sign(S, (x,))
            c = f[tuple(sorted(S + (x,)))]
            row.append(c if s > 0 else F.neg(c))
        rows.append(row)
    return ExactMatrix(rows, F, len(cols))


def hyperplane_kernel(f: AlternatingFunctional) -> Subspace:
    """K(H): null space of f-tilde inside the (k-1)-th exterior power."""
    from .exactalg import kernel

    if f.is_zero():
        raise ZeroFunctional("the zero functional defines no hyperplane")
    return kernel(ftilde_matrix(f))


def plucker_relations(w: MultiVector) -> tuple[int, ...]:
    """w_ij w_kl - w_ik w_jl + w_il w_jk for every i<j<k<l (the halved w ^ w)."""
    F = w.field
    out = []
    for i, j, k, l in subsets(w.n, 4):
        a = F.mul(w[(i, j)], w[(k, l)])
        b = F.mul(w[(i, k)], w[(j, l)])
        c = F.mul(w[(i, l)], w[(j, k)])
        out.append(F.add(F.sub(a, b), c))
    return tuple(out)


def is_decomposable_bivector(w: MultiVector) -> bool:
    """w is a nonzero pure wedge x ^ y.

    Uses the quadratic Plucker relations; w ^ w itself carries a factor 2
    and vanishes identically in characteristic 2.
    """
    if w.degree != 2:
        raise DimensionMismatch("expected a bivector")
    if w.is_zero():
        raise ZeroInput("zero bivector")
    return not any(plucker_relations(w))


def bivector_span(w: MultiVector) -> Subspace:
    """The 2-space <x, y> of a decomposable w = x ^ y (row space of its matrix)."""
    if not is_decomposable_bivector(w):
        raise InputError("bivector is not decomposable")
    F = w.field
    n = w.n
    M = [[0] * n for _ in range(n)]
    for (i, j), c in zip(subsets(n, 2), w.coeffs):
        M[i - 1][j - 1] = c
        M[j - 1][i - 1] = F.neg(c)
    S = canonicalize(M, F, n)
    assert S.dim == 2
    return S


def decomposable_rank(w: MultiVector) -> int:
    """dim {v : v ^ w = 0}; equals w.degree exactly when w is decomposable."""
    F = w.field
    rows = []
    for x in range(1, w.n + 1):
        e = MultiVector(w.n, 1, F, tuple(int(i == x) for i in range(1, w.n + 1)))
        rows.append(list(e.wedge(w).coeffs))
    return w.n - rank(ExactMatrix(rows, F))


# ---------------------------------------------------------------------------
# batched helpers (numpy)


def batch_plucker2(A: np.ndarray, F: FieldSpec) -> np.ndarray:
    """Plucker coordinates of a stack of 2 x n matrices, shape (N, C(n, 2))."""
    n = A.shape[2]
    out = []
    for i, j in subsets(n, 2):
        out.append(F.vsub(F.vmul(A[:, 0, i - 1], A[:, 1, j - 1]), F.vmul(A[:, 0, j - 1], A[:, 1, i - 1])))
    return np.stack(out, axis=1)


def batch_plucker_relations(W: np.ndarray, n: int, F: FieldSpec) -> np.ndarray:
    """Quadratic Plucker relations for stacked bivectors W (N, C(n, 2)) -> (N, C(n, 4))."""
    idx = subset_index(n, 2)
    out = []
    for i, j, k, l in subsets(n, 4):
        a = F.vmul(W[:, idx[(i, j)]], W[:, idx[(k, l)]])
        b = F.vmul(W[:, idx[(i, k)]], W[:, idx[(j, l)]])
        c = F.vmul(W[:, idx[(i, l)]], W[:, idx[(j, k)]])
        out.append(F.vadd(F.vsub(a, b), c))
    if not out:
        return np.zeros((W.shape[0], 0), dtype=np.int64)
    return np.stack(out, axis=1)


def batch_matvec(M: np.ndarray, X: np.ndarray, F: FieldSpec) -> np.ndarray:
    """Rows of X (N, c) times M^T for M (r, c): result (N, r) over F."""
    if F.m == 1:
        if F.p == 2:
            return (X.astype(np.int64) @ M.T.astype(np.int64)) & 1
        return _prime_matmul(X, M.T, F.p)
    N, c = X.shape
    out = np.zeros((N, M.shape[0]), dtype=np.int64)
    for j in range(c):
        out = F.vadd(out, F.vmul(X[:, j : j + 1], M[None, :, j]))
    return out


def _prime_matmul(A, B, p):
    A = np.asarray(A, dtype=np.int64)
    B = np.asarray(B, dtype=np.int64)
    # keep partial sums well inside int64: split the inner dimension
    step = max(1, (1 << 62) // ((p - 1) ** 2 + 1))
    out = np.zeros((A.shape[0], B.shape[1]), dtype=np.int64)
    for s in range(0, A.shape[1], step):
        out = (out + A[:, s : s + step] @ B[s : s + step]) % p
    return out
