"""Hyperplanes H_f of the k-Grassmannian: radicals, poles, spreads, constructions.

A hyperplane is stored through a nonzero alternating functional f; a
k-subspace X lies in H_f when f vanishes on its Plucker vector.  Point-wise
computations for k = 3 (pole degrees, hexagonality) are vectorized with
numpy and run on every point of PG(n-1, q) at once.
"""

from __future__ import annotations

import random
import threading
from dataclasses import dataclass, field, replace
from math import comb
from typing import Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    DimensionTooSmall,
    EigenvaluePresent,
    EnumerationTooLarge,
    InputError,
    InternalAssertion,
    InvalidLambda,
    NotComplementary,
    NotASpread,
    RankExceedsDimension,
    WrongDimension,
    ZeroFunctional,
)
from .exactalg import (
    ExactMatrix,
    FieldSpec,
    UniPoly,
    has_eigenvalue,
    inverse,
    irreducible_quadratic_param,
    kernel,
    batch_rank,
)
from .exterior import (
    AlternatingFunctional,
    apply_functional,
    batch_matvec,
    batch_plucker2,
    batch_plucker_relations,
    bivector_span,
    compound,
    decomposable_rank,
    ftilde_matrix,
    hyperplane_kernel,
    MultiVector,
    perm_sign,
    shuffle_sign,
    subset_index,
    subsets,
    wedge_of_vectors,
)
from .geometry import (
    DEFAULT_CAP,
    QuotientFrame,
    Subspace,
    canonicalize,
    enumerate_subspaces,
    gaussian_binomial,
    points_array,
    quotient_frame,
    rref_array,
    subspace_from_array,
)


class _Full:
    """Marker returned by restrict() when the whole Grassmannian lies in H."""

    def __repr__(self):
        return "Full"

    def __bool__(self):
        return False


FULL = _Full()


class Hyperplane:
    def __init__(self, f: AlternatingFunctional):
        if f.is_zero():
            raise ZeroFunctional("a hyperplane needs a nonzero functional")
        self.functional = f
        self._lock = threading.Lock()
        self._cache: dict = {}

    @classmethod
    def parse(cls, text: str, n: int | None, F: FieldSpec, k: int = 3):
        from .exterior import parse_functional

        return cls(parse_functional(text, n, F, k))

    @property
    def n(self):
        return self.functional.n

    @property
    def k(self):
        return self.functional.k

    @property
    def field(self):
        return self.functional.field

    def _cached(self, key, fn):
        with self._lock:
            if key not in self._cache:
                self._cache[key] = fn()
            return self._cache[key]

    @property
    def lower_radical(self) -> Subspace:
        return self._cached("lower", lambda: lower_radical(self))

    @property
    def rank(self) -> int:
        return self.n - self.lower_radical.dim

    def degrees(self) -> np.ndarray:
        return self._cached("degrees", lambda: pole_degrees(self))

    def __eq__(self, other):
        # same hyperplane iff the functionals are proportional
        if not isinstance(other, Hyperplane) or other.functional.n != self.n or other.k != self.k:
            return False
        F = self.field
        a, b = self.functional.coeffs, other.functional.coeffs
        i = next(j for j, x in enumerate(a) if x)
        if not b[i]:
            return False
        s = F.div(b[i], a[i])
        return all(F.mul(s, x) == y for x, y in zip(a, b))

    def __hash__(self):
        F = self.field
        a = self.functional.coeffs
        i = next(j for j, x in enumerate(a) if x)
        s = F.inv(a[i])
        return hash((self.n, self.k, F, tuple(F.mul(s, x) for x in a)))

    def __repr__(self):
        return f"Hyperplane({self.functional.to_text()!r}, n={self.n}, k={self.k}, {self.field})"


def _as_hyperplane(H) -> Hyperplane:
    return H if isinstance(H, Hyperplane) else Hyperplane(H)


def contains(H: Hyperplane, X: Subspace) -> bool:
    """X (a k-subspace) is a member of H."""
    if X.dim != H.k:
        raise DimensionMismatch(f"expected a {H.k}-subspace")
    return apply_functional(H.functional, X.basis) == 0


def lower_radical(H: Hyperplane) -> Subspace:
    """{v : f(x_1 ^ ... ^ x_{k-1} ^ v) = 0 for all x}."""
    return kernel(ftilde_matrix(H.functional).transpose())


# ---------------------------------------------------------------------------
# local polar spaces and poles


@dataclass(frozen=True)
class LocalPolarSpace:
    base: Subspace
    frame: QuotientFrame
    gram: ExactMatrix

    @property
    def radical(self) -> Subspace:
        """Radical of the Gram form, in complement coordinates."""
        return kernel(self.gram)

    @property
    def degree(self) -> int:
        return self.radical.dim

    def radical_members(self) -> list[Subspace]:
        """(k-1)-subspaces X + <u> with u in the radical (u up to scalars)."""
        F = self.base.field
        rad = self.radical
        out = []
        for pt in points_array(rad.dim, F) if rad.dim else []:
            coords = [0] * self.frame.dim
            for c, r in zip(pt, rad.basis):
                coords = [F.add(x, F.mul(int(c), y)) for x, y in zip(coords, r)]
            u = self.frame.lift(coords)
            out.append(canonicalize(self.base.basis + (u,), F, self.base.n))
        return out

    def collinear(self, x: Sequence[int], y: Sequence[int]) -> bool:
        F = self.base.field
        acc = 0
        for i, a in enumerate(x):
            for j, b in enumerate(y):
                if a and b and self.gram[i, j]:
                    acc = F.add(acc, F.mul(F.mul(a, b), self.gram[i, j]))
        return acc == 0


def local_polar(H: Hyperplane, X: Subspace) -> LocalPolarSpace:
    """Gram matrix of (X+u, X+v) -> f(xi ^ u ^ v), xi the wedge of X's RREF basis."""
    if X.dim != H.k - 2:
        raise DimensionMismatch(f"expected a {H.k - 2}-subspace")
    frame = quotient_frame(X)
    F = H.field
    xi = list(X.basis)
    m = frame.dim
    g = [[0] * m for _ in range(m)]
    for i in range(m):
        for j in range(i + 1, m):
            v = apply_functional(H.functional, xi + [frame.complement[i], frame.complement[j]])
            g[i][j] = v
            g[j][i] = F.neg(v)
    return LocalPolarSpace(X, frame, ExactMatrix(g, F, m))


def _as_point(p, H) -> Subspace:
    if isinstance(p, Subspace):
        if p.dim != 1:
            raise DimensionMismatch("a point is a 1-subspace")
        return p
    return canonicalize([p], H.field, H.n)


def pole_degree(H: Hyperplane, p) -> int:
    """Rank of the radical of the local polar space at the point p (k = 3)."""
    if H.k != 3:
        raise DimensionMismatch("pole degrees are defined for k = 3")
    return local_polar(H, _as_point(p, H)).degree


def point_gram_stack(T: np.ndarray, pts: np.ndarray, F: FieldSpec) -> np.ndarray:
    """B_p[x][y] = f(p, e_x, e_y) for each point p; T is the alternating tensor."""
    n = T.shape[0]
    B = batch_matvec(T.reshape(n, n * n).T, pts, F)
    return B.reshape(len(pts), n, n)


def pole_degrees(H: Hyperplane, pts: np.ndarray | None = None) -> np.ndarray:
    """Degrees of all points of PG(n-1, q) (canonical order), vectorized."""
    if H.k != 3:
        raise DimensionMismatch("pole degrees are defined for k = 3")
    F = H.field
    if pts is None:
        pts = points_array(H.n, F)
    B = point_gram_stack(H.functional.tensor(), pts, F)
    return H.n - 1 - batch_rank(B, F)


def depth(H: Hyperplane) -> int:
    return int(H.degrees().max())


def degree_histogram(H: Hyperplane) -> dict[int, int]:
    """Pole degree -> number of poles (points of degree 0 are not poles)."""
    d = H.degrees()
    vals, counts = np.unique(d[d > 0], return_counts=True)
    return {int(v): int(c) for v, c in zip(vals, counts)}


# ---------------------------------------------------------------------------
# upper radical and i-radicals


def _check_cap(count, cap, what):
    if cap is not None and count > cap:
        raise EnumerationTooLarge(f"{what}: {count} items exceed the cap {cap}")


def upper_radical(H: Hyperplane, method: str = "kernel", cap: int | None = DEFAULT_CAP) -> frozenset:
    """R-up(H) as a frozenset of (k-1)-subspaces.

    method "kernel": decomposable projective points of K(H);
    method "brute": test every (k-1)-subspace;
    method "auto": whichever enumerates fewer objects.
    """
    F = H.field
    if method == "auto":
        kd = comb(H.n, H.k - 1) - ftilde_rank(H)
        method = "kernel" if (F.q**kd - 1) // (F.q - 1) <= gaussian_binomial(H.n, H.k - 1, F.q) else "brute"
    if method == "kernel":
        return _upper_radical_kernel(H, cap)
    if method == "brute":
        return _upper_radical_brute(H, cap)
    raise InputError(f"unknown method {method!r}")


def ftilde_rank(H: Hyperplane) -> int:
    from .exactalg import rank

    return H._cached("ftilde_rank", lambda: rank(ftilde_matrix(H.functional)))


def _upper_radical_kernel(H, cap):
    F = H.field
    K = hyperplane_kernel(H.functional)
    d = K.dim
    if d == 0:
        return frozenset()
    _check_cap((F.q**d - 1) // (F.q - 1), cap, "kernel points")
    coeff_pts = points_array(d, F, cap=None)
    Kb = K.array()
    W = batch_matvec(Kb.T, coeff_pts, F)
    out = set()
    if H.k == 3:
        rel = batch_plucker_relations(W, H.n, F)
        good = ~rel.any(axis=1) if rel.shape[1] else np.ones(len(W), dtype=bool)
        for w in W[good]:
            out.add(bivector_span(MultiVector(H.n, 2, F, tuple(int(x) for x in w))))
    else:
        for w in W:
            mv = MultiVector(H.n, H.k - 1, F, tuple(int(x) for x in w))
            if decomposable_rank(mv) == H.k - 1:
                out.add(_span_of_decomposable(mv))
    return frozenset(out)


def _span_of_decomposable(w: MultiVector) -> Subspace:
    F = w.field
    rows = []
    for x in range(1, w.n + 1):
        e = MultiVector(w.n, 1, F, tuple(int(i == x) for i in range(1, w.n + 1)))
        rows.append(list(e.wedge(w).coeffs))
    # v ^ w = 0 is linear in v: null space of the transposed map
    return kernel(ExactMatrix(rows, F).transpose())


def _upper_radical_brute(H, cap):
    F = H.field
    n, k = H.n, H.k
    _check_cap(gaussian_binomial(n, k - 1, F.q), cap, f"[{n} choose {k - 1}]_{F.q}")
    T = ftilde_matrix(H.functional).to_array()
    out = set()
    if k == 3:
        lines = rref_array(n, 2, F, cap=None)
        P = batch_plucker2(lines, F)
        vals = batch_matvec(T, P, F)
        for m in lines[~vals.any(axis=1)]:
            out.add(subspace_from_array(m, F))
        return frozenset(out)
    for X in enumerate_subspaces(n, k - 1, F, cap=None):
        w = np.array([X.plucker().coeffs]) if k > 1 else None
        if not batch_matvec(T, w, F).any():
            out.add(X)
    return frozenset(out)


def contraction_matrix(f: AlternatingFunctional, i: int) -> np.ndarray:
    """Matrix sending the Plucker vector of an i-subspace X to the functional f(X ^ .)."""
    F = f.field
    rows_T = subsets(f.n, f.k - i)
    cols_S = subsets(f.n, i)
    M = np.zeros((len(rows_T), len(cols_S)), dtype=np.int64)
    for r, T in enumerate(rows_T):
        for c, S in enumerate(cols_S):
            s = shuffle_sign(S, T)
            if s:
                v = f[tuple(sorted(S + T))]
                M[r, c] = v if s > 0 else F.neg(v)
    return M


def i_radical(H: Hyperplane, i: int, cap: int | None = DEFAULT_CAP) -> frozenset:
    """All i-subspaces X such that every k-subspace through X lies in H."""
    if not 1 <= i < H.k:
        raise InputError(f"i must satisfy 1 <= i < {H.k}")
    F = H.field
    _check_cap(gaussian_binomial(H.n, i, F.q), cap, f"[{H.n} choose {i}]_{F.q}")
    C = contraction_matrix(H.functional, i)
    subs = rref_array(H.n, i, F, cap=None)
    if i == 1:
        P = subs[:, 0, :]
    elif i == 2:
        P = batch_plucker2(subs, F)
    else:
        P = np.array([list(wedge_of_vectors(m.tolist(), F).coeffs) for m in subs], dtype=np.int64)
    vals = batch_matvec(C, P, F)
    return frozenset(subspace_from_array(m, F) for m in subs[~vals.any(axis=1)])


def is_spread_like(H: Hyperplane) -> bool:
    """Every (k-2)-subspace lies in exactly one member of R-up(H)."""
    if H.k == 3:
        return bool((H.degrees() == 1).all())
    for X in enumerate_subspaces(H.n, H.k - 2, H.field):
        if local_polar(H, X).degree != 1:
            return False
    return True


def sigma_in_hyperplane(H: Hyperplane, Vp: Subspace) -> frozenset:
    """Members of the spread R-up(H) lying inside the hyperplane V' of V."""
    if Vp.dim != H.n - 1:
        raise DimensionMismatch("V' must be a hyperplane of V")
    if not is_spread_like(H):
        raise NotASpread("R-up(H) is not a spread")
    return frozenset(L for L in upper_radical(H, "auto") if Vp.contains(L))


# ---------------------------------------------------------------------------
# restriction and constructions


def induced_functional(f: AlternatingFunctional, W: Subspace) -> AlternatingFunctional:
    """The functional induced on the k-th exterior power of W (basis = W's RREF rows)."""
    return pullback(f, W.basis)


def pullback(f: AlternatingFunctional, rows) -> AlternatingFunctional:
    """f restricted to the span of `rows`, written in the basis given by the rows."""
    F = f.field
    rows = [tuple(F.coerce(x) for x in r) for r in rows]
    C = compound(rows, f.k, F, f.n)
    coeffs = []
    for r in range(C.rows):
        acc = 0
        for x, y in zip(C.row(r), f.coeffs):
            if x and y:
                acc = F.add(acc, F.mul(x, y))
        coeffs.append(acc)
    return AlternatingFunctional(len(rows), f.k, F, tuple(coeffs))


def restrict(H: Hyperplane, W: Subspace):
    """H(W) as a hyperplane of the Grassmannian of W, or FULL."""
    if W.dim <= H.k:
        raise DimensionTooSmall(f"dim W must exceed {H.k}")
    g = induced_functional(H.functional, W)
    return FULL if g.is_zero() else Hyperplane(g)


def trivial_extension(f0: AlternatingFunctional, V0: Subspace, V1: Subspace) -> Hyperplane:
    """Extend f0 (given in the coordinates of V0's basis) by zero across V1."""
    n = V0.n
    if f0.n != V0.dim:
        raise DimensionMismatch("f0 must live on V0")
    if V0.dim < f0.k:
        raise DimensionMismatch("dim V0 must be at least k")
    if V0.dim + V1.dim != n or V0.meet(V1).dim:
        raise NotComplementary("V0 and V1 are not complementary")
    F = f0.field
    B = ExactMatrix(list(V0.basis) + list(V1.basis), F, n)
    P = inverse(B).tolist()  # row s: coordinates of e_s in the basis (V0; V1)
    proj = [row[: V0.dim] for row in P]
    coeffs = []
    for S in subsets(n, f0.k):
        coeffs.append(apply_functional(f0, [proj[s - 1] for s in S]))
    return Hyperplane(AlternatingFunctional(n, f0.k, F, tuple(coeffs)))


def trivial_hyperplane(V1: Subspace, n: int, k: int) -> Hyperplane:
    """{X : X meets V1 nontrivially}; needs codim V1 = k."""
    if V1.n != n:
        raise DimensionMismatch("V1 must live in F^n")
    if n - V1.dim != k:
        raise InputError("a trivial hyperplane needs codim V1 = k")
    F = V1.field
    V0 = canonicalize(quotient_frame(V1).complement, F, n)
    f0 = AlternatingFunctional(k, k, F, (1,))
    return trivial_extension(f0, V0, V1)


def trivial_decomposition(H: Hyperplane) -> tuple[Subspace, AlternatingFunctional, Subspace]:
    """(S, functional of H(S), R-down(H)) with S the canonical complement of R-down(H)."""
    R = H.lower_radical
    if R.dim == 0:
        S = canonicalize([[int(i == j) for j in range(H.n)] for i in range(H.n)], H.field, H.n)
    else:
        S = canonicalize(quotient_frame(R).complement, H.field, H.n)
    return S, induced_functional(H.functional, S), R


def expansion(f0: AlternatingFunctional, n: int | None = None) -> Hyperplane:
    """E(H0): coefficient at i_1 < ... < i_k is f0(i_1 .. i_{k-1}) if i_k = n, else 0.

    V0 is spanned by e_1 .. e_{n-1} and f0 is a (k-1)-form on it.
    """
    n0 = f0.n
    if n is None:
        n = n0 + 1
    if n != n0 + 1:
        raise DimensionMismatch("expansion adds exactly one dimension")
    k = f0.k + 1
    terms = {S + (n,): c for S, c in f0.support()}
    return Hyperplane(AlternatingFunctional.from_terms(terms, n, k, f0.field))


# ---------------------------------------------------------------------------
# canonical forms

TYPE_RANK = {
    "T1": 3, "T2": 5, "T3": 6, "T4": 6, "T5": 7, "T6": 7, "T7": 7, "T8": 7, "T9": 7,
    "T10": 6, "T11": 7,
}
TYPE_LABELS = tuple(TYPE_RANK)

_PATTERNS = {
    "T1": ["123"],
    "T2": ["123", "145"],
    "T3": ["123", "456"],
    "T4": ["162", "243", "135"],
    "T5": ["123", "456", "147"],
    "T6": ["152", "174", "163", "243"],
    "T7": ["146", "157", "245", "367"],
    "T8": ["123", "145", "167"],
    "T9": ["123", "456", "147", "257", "367"],
}


def _t10_terms(F: FieldSpec, variant: int, lam: int) -> dict:
    t = {}
    if variant == 1:
        t[(1, 2, 3)] = 1
    else:
        t[(1, 2, 6)] = 1
        t[(1, 5, 3)] = 1
        t[(2, 3, 4)] = 1
        t[(4, 5, 6)] = F.add(F.mul(lam, lam), 1)
    for T in [(1, 5, 6), (3, 4, 5), (4, 2, 6)]:
        t[T] = lam
    return t


def check_lambda(F: FieldSpec, variant: int, lam: int) -> None:
    if variant == 1:
        if F.p == 2:
            raise InvalidLambda("variant 1 needs odd characteristic")
        poly = UniPoly((F.neg(lam), 0, 1), F)
    elif variant == 2:
        if F.p != 2:
            raise InvalidLambda("variant 2 needs characteristic 2")
        poly = UniPoly((1, lam, 1), F)
    else:
        raise InvalidLambda(f"unknown variant {variant}")
    if poly.has_root():
        raise InvalidLambda(f"p_lambda is reducible for lambda = {lam}")


def parse_label(label: str) -> tuple[str, int | None]:
    """'T10', 'T10^(2)', 'T10_2', 't11' -> ('T10', variant or None)."""
    s = label.strip().upper().replace("^", "").replace("(", "").replace(")", "")
    variant = None
    if "_" in s:
        s, v = s.split("_", 1)
        variant = int(v)
    elif s.startswith("T10") or s.startswith("T11"):
        if len(s) == 4:
            s, variant = s[:3], int(s[3])
    if s not in TYPE_RANK:
        raise InputError(f"unknown type {label!r}")
    return s, variant


def canonical_form(label: str, n: int, F: FieldSpec, lam: int | None = None) -> AlternatingFunctional:
    """The representative functional of a type, in the basis e_1..e_n."""
    base, variant = parse_label(label)
    if n < TYPE_RANK[base]:
        raise RankExceedsDimension(f"{base} has rank {TYPE_RANK[base]} > n = {n}")
    if base in ("T10", "T11"):
        v0, l0 = irreducible_quadratic_param(F)
        variant = variant or v0
        lam = l0 if lam is None else F.coerce(lam)
        check_lambda(F, variant, lam)
        terms = _t10_terms(F, variant, lam)
        if base == "T11":
            terms[(1, 4, 7)] = 1
        return AlternatingFunctional.from_terms(terms, n, 3, F)
    terms = {tuple(int(c) for c in t): 1 for t in _PATTERNS[base]}
    return AlternatingFunctional.from_terms(terms, n, 3, F)


# ---------------------------------------------------------------------------
# hexagonality and singular planes


def hexagonal_from_degrees(deg: np.ndarray) -> bool:
    # rank 7 (no point of degree 6) and every pole of degree exactly 2
    return bool(deg.max() == 2)


def is_hexagonal(H) -> bool:
    """Proper, rank 7 and every pole of degree 2 (n = 7, k = 3)."""
    if H is FULL:
        return False
    if H.n != 7 or H.k != 3:
        raise WrongDimension("hexagonality is defined for n = 7, k = 3")
    deg = H.degrees()
    return H.rank == 7 and hexagonal_from_degrees(deg)


def hexagonal_flags(tensors: np.ndarray, F: FieldSpec, pts: np.ndarray | None = None) -> np.ndarray:
    """is_hexagonal for a stack of 7-dim alternating tensors (N, 7, 7, 7)."""
    if tensors.shape[1:] != (7, 7, 7):
        raise WrongDimension("expected tensors on a 7-dimensional space")
    if pts is None:
        pts = points_array(7, F)
    P = len(pts)
    out = np.zeros(len(tensors), dtype=bool)
    per = max(1, (1 << 16) // P)
    for s in range(0, len(tensors), per):
        T = tensors[s : s + per]
        m = len(T)
        # move the contracted index last so that B_p = sum_i p_i T[., i, ., .]
        M = T.transpose(0, 2, 3, 1).reshape(m * 49, 7)
        B = batch_matvec(M, pts, F)  # (P, m*7*7)
        B = B.reshape(P, m, 7, 7).transpose(1, 0, 2, 3).reshape(m * P, 7, 7)
        deg = (6 - batch_rank(B, F)).reshape(m, P)
        out[s : s + m] = deg.max(axis=1) == 2
    return out


def singular_plane_free(H: Hyperplane, lines: frozenset | None = None) -> bool:
    """R-up(H) contains no plane of the line Grassmannian (k = 3).

    Works on the set of R-up lines only: a plane of lines through a point
    shows up as q^2+q+1 members through it, a plane of lines inside a
    projective plane as three members forming a triangle.
    """
    if H.k != 3:
        raise DimensionMismatch("singular planes are checked for k = 3")
    F = H.field
    if lines is None:
        lines = upper_radical(H, "auto")
    if not lines:
        return True
    arr = np.array([L.basis for L in lines], dtype=np.int64)
    return spf_from_point_codes(line_point_codes(arr, F), F.q)


def point_codes(V: np.ndarray, F: FieldSpec) -> np.ndarray:
    """Integer codes of the projective points spanned by the rows of V (N, n)."""
    V = np.asarray(V, dtype=np.int64)
    lead = (V != 0).argmax(axis=1)
    s = F.vinv(V[np.arange(len(V)), lead])
    W = F.vmul(V, s[:, None])
    weights = F.q ** np.arange(V.shape[1] - 1, -1, -1, dtype=np.int64)
    return W @ weights


def line_point_codes(lines: np.ndarray, F: FieldSpec) -> np.ndarray:
    """Codes of the q+1 points of each line given by a 2 x n basis, shape (L, q+1)."""
    x, y = lines[:, 0, :], lines[:, 1, :]
    cols = [point_codes(x, F)]
    for t in F.elements():
        cols.append(point_codes(F.vadd(y, F.vmul(x, np.full_like(x, t))), F))
    return np.stack(cols, axis=1)


def spf_from_point_codes(codes: np.ndarray, q: int) -> bool:
    """Singular-plane test on lines given as sets of point codes."""
    pts = [frozenset(int(c) for c in row) for row in codes]
    through: dict = {}
    for li, P in enumerate(pts):
        for c in P:
            through.setdefault(c, []).append(li)
    if any(len(v) >= q * q + q + 1 for v in through.values()):
        return False
    # triangle: lines A, B meeting at p and a third line meeting both away from p
    for p, Ls in through.items():
        for ia in range(len(Ls)):
            A = Ls[ia]
            for ib in range(ia + 1, len(Ls)):
                B = pts[Ls[ib]]
                for x in pts[A]:
                    if x == p:
                        continue
                    for M in through[x]:
                        if M == A:
                            continue
                        hit = pts[M] & B
                        if hit and p not in hit:
                            return False
    return True


# ---------------------------------------------------------------------------
# signatures


@dataclass(frozen=True)
class TypeSignature:
    n: int
    q: int
    rank: int
    poles: int
    degree_hist: tuple[tuple[int, int], ...]
    upper_radical_size: int
    spread: bool
    singular_plane_free: bool
    type: str | None = None

    def key(self):
        return replace(self, type=None)

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "q": self.q,
            "rank": self.rank,
            "poles": self.poles,
            "degree_hist": {str(d): c for d, c in self.degree_hist},
            "upper_radical_size": self.upper_radical_size,
            "spread": self.spread,
            "singular_plane_free": self.singular_plane_free,
            "type": self.type,
        }


def signature_from_degrees(n: int, q: int, deg: np.ndarray, spf: bool) -> TypeSignature:
    deg = np.asarray(deg)
    vals, counts = np.unique(deg[deg > 0], return_counts=True)
    hist = tuple((int(v), int(c)) for v, c in zip(vals, counts))
    rad_pts = int((deg == n - 1).sum())
    rad_dim = 0
    while (q**rad_dim - 1) // (q - 1) < rad_pts:
        rad_dim += 1
    lines_through = sum(c * ((q**d - 1) // (q - 1)) for d, c in hist)
    return TypeSignature(
        n=n,
        q=q,
        rank=n - rad_dim,
        poles=int((deg > 0).sum()),
        degree_hist=hist,
        upper_radical_size=lines_through // (q + 1),
        spread=bool((deg == 1).all()),
        singular_plane_free=spf,
    )


def signature(H: Hyperplane, identify: bool = True) -> TypeSignature:
    """Invariant signature computed by brute force over all points."""
    if H.k != 3:
        raise DimensionMismatch("signatures are defined for k = 3")
    deg = H.degrees()
    spf = bool(deg.max() <= 2) and singular_plane_free(H)
    sig = signature_from_degrees(H.n, H.field.q, deg, spf)
    if identify and H.n <= 7:
        sig = replace(sig, type=identify_type(sig, H.field))
    return sig


_REF_LOCK = threading.Lock()
_REF_CACHE: dict = {}


def reference_signatures(n: int, F: FieldSpec) -> dict[str, TypeSignature]:
    """Signatures of all canonical types that fit in dimension n."""
    key = (n, F)
    with _REF_LOCK:
        if key in _REF_CACHE:
            return _REF_CACHE[key]
    out = {}
    for label, r in TYPE_RANK.items():
        if r > n:
            continue
        f = canonical_form(label, n, F)
        out[label] = signature(Hyperplane(f), identify=False)
    with _REF_LOCK:
        _REF_CACHE[key] = out
    return out


def identify_type(sig: TypeSignature, F: FieldSpec) -> str:
    """Label whose reference signature equals sig; 'Unknown' on no match or a collision."""
    if sig.n > 7:
        return "Unknown"
    refs = reference_signatures(sig.n, F)
    hits = [lab for lab, s in refs.items() if s == sig.key()]
    return hits[0] if len(hits) == 1 else "Unknown"


# ---------------------------------------------------------------------------
# the n = 8 canonical form


PAIRS6 = tuple((i, j) for i in range(1, 7) for j in range(i + 1, 7))
T9_TERMS = ((1, 2, 3), (4, 5, 6), (1, 4, 7), (2, 5, 7), (3, 6, 7))
NORMAL_ZEROS = ((2, 5), (2, 6), (3, 4), (3, 6))


@dataclass(frozen=True)
class CanonicalEightForm:
    """h = 123+456+147+257+367 + sum a_ij ij8 over the 15 pairs 1 <= i < j <= 6."""

    field: FieldSpec
    a: tuple[int, ...]

    def __post_init__(self):
        if len(self.a) != 15:
            raise DimensionMismatch("need 15 coefficients a_ij")

    @classmethod
    def from_dict(cls, d: dict, F: FieldSpec):
        return cls(F, tuple(F.coerce(d.get(ij, 0)) for ij in PAIRS6))

    def __getitem__(self, ij) -> int:
        return self.a[PAIRS6.index(tuple(ij))]

    def as_dict(self) -> dict:
        return dict(zip(PAIRS6, self.a))

    @property
    def A(self) -> ExactMatrix:
        return ExactMatrix([[self[(i, 3 + j)] for j in range(1, 4)] for i in range(1, 4)], self.field)

    @property
    def is_normalized(self) -> bool:
        return all(self[ij] == 0 for ij in NORMAL_ZEROS)

    def functional(self) -> AlternatingFunctional:
        terms = {t: 1 for t in T9_TERMS}
        for (i, j), v in zip(PAIRS6, self.a):
            if v:
                terms[(i, j, 8)] = v
        return AlternatingFunctional.from_terms(terms, 8, 3, self.field)


def build_canonical_eight(c8: CanonicalEightForm, F: FieldSpec | None = None) -> Hyperplane:
    if F is not None and F != c8.field:
        raise InputError("field mismatch")
    return Hyperplane(c8.functional())


def random_eigfree(F: FieldSpec, seed: int, normalized: bool = False) -> CanonicalEightForm:
    """Random a_ij with A eigenvalue-free (optionally in normalized shape)."""
    rng = random.Random(seed)
    for _ in range(10000):
        a = {ij: rng.randrange(F.q) for ij in PAIRS6}
        if normalized:
            for ij in NORMAL_ZEROS:
                a[ij] = 0
        c8 = CanonicalEightForm.from_dict(a, F)
        if not has_eigenvalue(c8.A):
            return c8
    raise InternalAssertion("no eigenvalue-free matrix found")


def _basis_change_eight(C: ExactMatrix) -> list[list[int]]:
    """8x8 matrix diag(C, C^{-T}, I_2)."""
    F = C.field
    Cit = inverse(C).transpose()
    P = [[0] * 8 for _ in range(8)]
    for i in range(3):
        for j in range(3):
            P[i][j] = C[i, j]
            P[3 + i][3 + j] = Cit[i, j]
    P[6][6] = P[7][7] = 1
    return P


def transform_eight(c8: CanonicalEightForm, C: ExactMatrix) -> CanonicalEightForm:
    """Rewrite h in the basis (e_1..e_8) diag(C, C^{-T}, I) for det C = 1."""
    F = c8.field
    h2 = c8.functional().change_basis(_basis_change_eight(C))
    for t in T9_TERMS:
        if h2[t] != 1:
            raise InternalAssertion("basis change did not preserve the T9 part")
    a = {}
    for S, c in h2.support():
        if S[2] == 8 and S[1] <= 6:
            a[(S[0], S[1])] = c
        elif S not in T9_TERMS:
            raise InternalAssertion(f"unexpected term {S} after basis change")
    return CanonicalEightForm.from_dict(a, F)


def normalize_eight(c8: CanonicalEightForm) -> CanonicalEightForm:
    """Force a25 = a26 = a34 = a36 = 0 by the unipotent change of basis U2 U1."""
    F = c8.field
    if has_eigenvalue(c8.A):
        raise EigenvaluePresent("A has an eigenvalue in the field")
    if c8[(1, 6)] == 0:
        swap = ExactMatrix([[0, 1, 0], [F.neg(1), 0, 0], [0, 0, 1]], F)
        c8 = transform_eight(c8, swap)
        if c8[(1, 6)] == 0:
            raise InternalAssertion("a16 and a26 both vanish for an eigenvalue-free A")
    A = c8.A
    a16 = A[0, 2]
    U1 = ExactMatrix(
        [[1, 0, 0], [F.neg(F.div(A[1, 2], a16)), 1, 0], [F.neg(F.div(A[2, 2], a16)), 0, 1]], F
    )
    Ap = U1 @ A @ inverse(U1)
    if Ap[1, 0] == 0:
        raise InternalAssertion("a'24 vanishes for an eigenvalue-free A")
    U2 = ExactMatrix(
        [[1, F.div(Ap[1, 1], Ap[1, 0]), 0], [0, 1, 0], [0, F.neg(F.div(Ap[2, 0], Ap[1, 0])), 1]], F
    )
    C = (U2 @ U1).transpose()
    out = transform_eight(c8, C)
    if not out.is_normalized:
        raise InternalAssertion("normalization failed to clear a25, a26, a34, a36")
    return out
