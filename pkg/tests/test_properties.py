"""Structural properties of hyperplanes, checked exhaustively or on sampled instances.

Run on their own with  pytest tests/test_properties.py
"""

import random
from math import comb

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from artifact.exactalg import ExactMatrix, field_make, kernel, rank
from artifact.exterior import AlternatingFunctional, compound, hyperplane_kernel
from artifact.geometry import canonicalize, enumerate_subspaces, grassmann_line, points_array, quotient_frame
from artifact.hyperplane import (
    FULL,
    Hyperplane,
    canonical_form,
    contains,
    depth,
    expansion,
    hexagonal_flags,
    i_radical,
    is_spread_like,
    local_polar,
    point_codes,
    pullback,
    random_eigfree,
    normalize_eight,
    build_canonical_eight,
    restrict,
    signature,
    trivial_decomposition,
    trivial_extension,
    upper_radical,
)

from conftest import random_functional, random_invertible

FIELDS = {2: field_make(2), 3: field_make(3)}


def _sample_forms(n, F, count, seed):
    rng = random.Random(seed)
    out = [random_functional(n, F, rng) for _ in range(count)]
    # sparse forms reach the small-rank types too
    while len(out) < 2 * count:
        c = tuple(rng.randrange(F.q) if rng.random() < 0.2 else 0 for _ in range(comb(n, 3)))
        if any(c):
            out.append(AlternatingFunctional(n, 3, F, c))
    return out


# ---------------------------------------------------------------------------
# hyperplane line axiom


@pytest.mark.parametrize("q", [2])
def test_line_axiom_exhaustive_n5(q):
    F = FIELDS[q]
    Ys = list(enumerate_subspaces(5, 2, F))
    Zs = list(enumerate_subspaces(5, 4, F))
    for f in _sample_forms(5, F, 2, seed=1):
        H = Hyperplane(f)
        for Y in Ys:
            for Z in Zs:
                if not Z.contains(Y):
                    continue
                hits = sum(contains(H, X) for X in grassmann_line(Y, Z))
                assert hits in (1, q + 1)


def _pencil_counts(H, F):
    """For every line Y and every 4-space Z > Y, the number of members of l(Y, Z) in H."""
    n = H.n
    qpts = points_array(n - 2, F)
    codes_of = {int(c): i for i, c in enumerate(point_codes(qpts, F))}
    pencils = [
        [codes_of[int(c)] for c in point_codes(_span_points(P, F), F)]
        for P in enumerate_subspaces(n - 2, 2, F)
    ]
    out = []
    for Y in enumerate_subspaces(n, 2, F):
        fr = quotient_frame(Y)
        inH = [contains(H, canonicalize(list(Y.basis) + [fr.lift([int(x) for x in c])], F, n)) for c in qpts]
        out.extend(sum(inH[i] for i in idx) for idx in pencils)
    return out


def _span_points(S, F):
    pts = points_array(S.dim, F)
    B = S.array()
    return np.array([[F.coerce(int(x)) for x in _comb(p, B, F)] for p in pts], dtype=np.int64)


def _comb(p, B, F):
    v = [0] * B.shape[1]
    for a, r in zip(p, B):
        v = [F.add(x, F.mul(int(a), int(y))) for x, y in zip(v, r)]
    return v


def test_line_axiom_exhaustive_n6():
    F = FIELDS[2]
    for f in _sample_forms(6, F, 1, seed=2):
        counts = _pencil_counts(Hyperplane(f), F)
        assert len(counts) == 651 * 35
        assert set(counts) <= {1, 3}


@settings(max_examples=15)
@given(st.integers(0, 2**31), st.sampled_from([2, 3]))
def test_line_axiom_sampled_n7(seed, q):
    F = FIELDS[q]
    rng = random.Random(seed)
    H = Hyperplane(random_functional(7, F, rng))
    for _ in range(20):
        Z = canonicalize([[rng.randrange(q) for _ in range(7)] for _ in range(4)], F, 7)
        if Z.dim != 4:
            continue
        Y = canonicalize(Z.basis[:2], F, 7)
        hits = sum(contains(H, X) for X in grassmann_line(Y, Z))
        assert hits in (1, q + 1)


# ---------------------------------------------------------------------------
# local polar spaces: a point is collinear with one or all points of a line


@pytest.mark.parametrize("q", [2, 3])
def test_polar_one_or_all(q):
    F = FIELDS[q]
    n = 5
    m = n - 1
    pts = points_array(m, F)
    codes = {int(c): i for i, c in enumerate(point_codes(pts, F))}
    lines = [[codes[int(c)] for c in point_codes(_span_points(L, F), F)] for L in enumerate_subspaces(m, 2, F)]
    for f in _sample_forms(n, F, 1, seed=q):
        H = Hyperplane(f)
        for X in enumerate_subspaces(n, 1, F):
            G = np.array(local_polar(H, X).gram.tolist(), dtype=np.int64)
            col = ((pts @ G @ pts.T) % F.p) == 0
            for idx in lines:
                if not all(col[a, b] for a in idx for b in idx):
                    continue  # not a line of the polar space
                cnt = col[:, idx].sum(axis=1)
                others = np.setdiff1d(np.arange(len(pts)), idx)
                assert set(cnt[others].tolist()) <= {1, q + 1}


# ---------------------------------------------------------------------------
# degree parity, rank bounds, scaling


@given(st.integers(0, 2**31), st.sampled_from([(5, 2), (5, 3), (6, 2), (6, 3), (7, 2), (7, 3)]))
def test_degree_parity(seed, nq):
    n, q = nq
    F = FIELDS[q]
    H = Hyperplane(random_functional(n, F, random.Random(seed)))
    deg = H.degrees()
    assert ((deg - (n - 1)) % 2 == 0).all()


@given(st.integers(0, 2**31), st.integers(4, 8), st.sampled_from([2, 3]), st.sampled_from([3, 4]))
def test_codim_lower_radical_at_least_k(seed, n, q, k):
    if k >= n:
        return
    F = FIELDS[q]
    rng = random.Random(seed)
    c = tuple(rng.randrange(q) if rng.random() < 0.15 else 0 for _ in range(comb(n, k)))
    if not any(c):
        return
    H = Hyperplane(AlternatingFunctional(n, k, F, c))
    assert n - H.lower_radical.dim >= k


@settings(max_examples=20)
@given(st.integers(0, 2**31), st.sampled_from([(5, 2), (5, 3), (6, 2), (6, 3)]), st.integers(1, 2))
def test_scaling_invariance(seed, nq, lam):
    n, q = nq
    F = FIELDS[q]
    lam = lam % q or 1
    rng = random.Random(seed)
    f = random_functional(n, F, rng)
    H, G = Hyperplane(f), Hyperplane(f.scale(lam))
    assert H == G
    assert H.lower_radical == G.lower_radical
    assert upper_radical(H) == upper_radical(G)
    assert signature(H) == signature(G)
    for _ in range(20):
        X = canonicalize([[rng.randrange(q) for _ in range(n)] for _ in range(3)], F, n)
        if X.dim == 3:
            assert contains(H, X) == contains(G, X)


def test_cached_values_match_recomputation():
    F = FIELDS[3]
    f = random_functional(6, F, random.Random(0))
    H = Hyperplane(f)
    first = (H.rank, H.lower_radical, tuple(H.degrees()))
    fresh = Hyperplane(f)
    from artifact.hyperplane import lower_radical, pole_degrees

    assert first == (6 - lower_radical(fresh).dim, lower_radical(fresh), tuple(pole_degrees(fresh)))


# ---------------------------------------------------------------------------
# radicals are line-closed


def _line_closed_points(P, F, n):
    P = set(P)
    for a in P:
        for b in P:
            if a == b:
                continue
            for c in _span_points(a.join(b), F):
                assert canonicalize([c.tolist()], F, n) in P


@pytest.mark.parametrize("n", [5, 6])
def test_i_radicals_line_closed(n):
    F = FIELDS[2]
    forms = _sample_forms(n, F, 3, seed=n) + [canonical_form(t, n, F) for t in ("T1", "T2")]
    for f in forms:
        H = Hyperplane(f)
        _line_closed_points(i_radical(H, 1), F, n)
        R = i_radical(H, 2)
        assert R == upper_radical(H)
        through = {}
        for L in R:
            for p in _span_points(L, F):
                through.setdefault(canonicalize([p.tolist()], F, n), []).append(L)
        for p, Ls in through.items():
            for i in range(len(Ls)):
                for j in range(i + 1, len(Ls)):
                    Z = Ls[i].join(Ls[j])
                    assert all(X in R for X in grassmann_line(p, Z))


# ---------------------------------------------------------------------------
# trivial extensions and expansions


@settings(max_examples=25)
@given(st.integers(0, 2**31), st.integers(3, 5), st.integers(1, 2), st.sampled_from([2, 3]))
def test_trivial_extension_roundtrip(seed, d0, r, q):
    F = FIELDS[q]
    n = d0 + r
    rng = random.Random(seed)
    f0 = random_functional(d0, F, rng)
    P = random_invertible(n, F, rng)
    V0 = canonicalize([P[i] for i in range(d0)], F, n)
    V1 = canonicalize([P[i] for i in range(d0, n)], F, n)
    H = trivial_extension(f0, V0, V1)
    H0 = Hyperplane(f0)
    # lower radical of the extension is spanned by that of H0 (moved into V0) and V1
    lifted = [[sum(F.mul(c, V0.basis[i][j]) for i, c in enumerate(v)) % F.p for j in range(n)] for v in H0.lower_radical.basis]
    assert H.lower_radical == canonicalize(lifted + list(V1.basis), F, n)
    S, g, R = trivial_decomposition(H)
    assert R == H.lower_radical
    assert trivial_extension(g, S, R) == H


@given(st.integers(0, 2**31), st.integers(4, 7), st.sampled_from([2, 3]))
def test_expansion_lower_radical(seed, n0, q):
    F = FIELDS[q]
    rng = random.Random(seed)
    c = tuple(rng.randrange(q) if rng.random() < 0.4 else 0 for _ in range(comb(n0, 2)))
    if not any(c):
        return
    f0 = AlternatingFunctional(n0, 2, F, c)
    E = expansion(f0)
    # radical of the bilinear form f0, embedded in V = V0 + <e_n>
    M = [[f0.value((i, j)) if i != j else 0 for j in range(1, n0 + 1)] for i in range(1, n0 + 1)]
    rad0 = kernel(ExactMatrix(M, F))
    assert E.lower_radical == canonicalize([list(r) + [0] for r in rad0.basis], F, n0 + 1)


def test_expansion_membership_definition():
    F = FIELDS[2]
    n0 = 5
    rng = random.Random(4)
    f0 = AlternatingFunctional(n0, 2, F, tuple(rng.randrange(2) for _ in range(comb(n0, 2))))
    E = expansion(f0)
    V0 = canonicalize([[int(i == j) for j in range(6)] for i in range(5)], F, 6)
    for X in enumerate_subspaces(6, 3, F):
        if V0.contains(X):
            expect = True
        else:
            Y = X.meet(V0)
            expect = f0.coeffs and _bilinear(f0, Y) == 0
        assert contains(E, X) == bool(expect)


def _bilinear(f0, Y):
    F = f0.field
    u, v = (r[:-1] for r in Y.basis)
    acc = 0
    for i in range(len(u)):
        for j in range(len(v)):
            if i != j and u[i] and v[j]:
                acc = F.add(acc, F.mul(F.mul(u[i], v[j]), f0.value((i + 1, j + 1))))
    return acc


# ---------------------------------------------------------------------------
# dimension bounds for restrictions to subspaces of codimension t


def _kernel_dims(H, W):
    F = H.field
    n, d = H.n, W.dim
    g = pullback(H.functional, W.basis)
    if g.is_zero():
        KW = [[int(i == j) for j in range(comb(d, 2))] for i in range(comb(d, 2))]
    else:
        KW = [list(r) for r in hyperplane_kernel(g).basis]
    C = compound(W.basis, 2, F, n)
    emb = (ExactMatrix(KW, F, comb(d, 2)) @ C).tolist() if KW else []
    K = [list(r) for r in hyperplane_kernel(H.functional).basis]
    dim_int = len(K) + rank(ExactMatrix(emb, F, comb(n, 2))) - rank(ExactMatrix(K + emb, F, comb(n, 2)))
    return comb(d, 2) - len(KW), len(KW) - dim_int


@pytest.mark.parametrize("n,q", [(7, 2), (7, 3), (8, 2), (8, 3)])
def test_restriction_dimension_bounds(n, q):
    F = FIELDS[q]
    rng = random.Random(n + 10 * q)
    forms = [canonical_form("T9", n, F)] + [random_functional(n, F, rng) for _ in range(3)]
    if n == 8:
        forms.append(build_canonical_eight(normalize_eight(random_eigfree(F, 1))).functional)
    checked = 0
    for f in forms:
        H = Hyperplane(f)
        delta = depth(H)
        for t in range(0, (n - 2) // 2 + 1):
            if delta >= n - 1 - 2 * t:
                continue
            for _ in range(4):
                W = canonicalize([[rng.randrange(q) for _ in range(n)] for _ in range(n - t)], F, n)
                if W.dim != n - t:
                    continue
                quot, excess = _kernel_dims(H, W)
                assert quot == n - t
                assert excess <= t
                checked += 1
    assert checked > 0


# ---------------------------------------------------------------------------
# spreads and hexagonal restrictions


@pytest.mark.parametrize("seed", range(4))
def test_mutual_relation_n7(seed):
    F = FIELDS[2]
    rng = random.Random(seed)
    f = random_functional(7, F, rng) if seed else canonical_form("T9", 7, F)
    H = Hyperplane(f)
    assert upper_radical(H, "auto")
    found = False
    for h in points_array(7, F):
        W = kernel(ExactMatrix([[int(x) for x in h]], F))
        HW = restrict(H, W)
        if HW is FULL or not is_spread_like(HW):
            found = True
            break
    assert found


def _all_restrictions_hexagonal(H):
    from artifact.delta import hyperplane_bases

    F = H.field
    C = points_array(H.n, F)
    bases = hyperplane_bases(C, F)
    T = H.functional.tensor()
    for s in range(0, len(C), 64):
        B = bases[s : s + 64]
        Tr = np.einsum("nia,njb,nkc,abc->nijk", B, B, B, T, optimize=True) % F.p
        if not hexagonal_flags(Tr, F).all():
            return False
    return True


@pytest.mark.parametrize("q,seed", [(2, 0), (2, 1), (2, 2), (3, 0)])
def test_spread_iff_all_restrictions_hexagonal_n8(q, seed):
    F = FIELDS[q]
    H = build_canonical_eight(normalize_eight(random_eigfree(F, seed)))
    assert is_spread_like(H) == _all_restrictions_hexagonal(H)


def test_spread_side_on_a_known_spread_n6():
    # the n = 6 analogue: a spread restricts to hyperplanes whose poles sit on spread lines
    F = FIELDS[3]
    H = Hyperplane(canonical_form("T10", 6, F))
    assert is_spread_like(H) and len(upper_radical(H, "auto")) == (3**6 - 1) // (3**2 - 1)
