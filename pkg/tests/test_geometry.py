import random

import pytest

from artifact.errors import EnumerationTooLarge, FullSpace, NotNested
from artifact.exactalg import ExactMatrix, field_make, rank
from artifact.geometry import (
    canonicalize,
    enumerate_subspaces,
    gaussian_binomial,
    grassmann_line,
    points_array,
    quotient_frame,
    rref_array,
)


def e(i, n):
    return tuple(int(j == i) for j in range(1, n + 1))


def test_canonicalize_examples(F2):
    assert canonicalize([e(2, 3), e(1, 3)], F2).basis == (e(1, 3), e(2, 3))
    assert canonicalize([e(1, 3), (1, 1, 0)], F2).basis == (e(1, 3), e(2, 3))
    assert canonicalize([(1, 1, 0), (0, 1, 1)], F2).basis == ((1, 0, 1), (0, 1, 1))


@pytest.mark.parametrize(
    "n,d,q,count",
    [(2, 1, 2, 3), (5, 2, 2, 155), (6, 2, 3, 11011), (4, 2, 2, 35), (5, 3, 3, 1210), (4, 2, 4, 357)],
)
def test_enumeration_counts(n, d, q, count):
    F = field_make(q) if q != 4 else field_make(2, 2)
    subs = list(enumerate_subspaces(n, d, F))
    assert len(subs) == count == gaussian_binomial(n, d, q)
    assert len(set(subs)) == count
    assert all(canonicalize(S.basis, F, n) == S for S in subs[:: max(1, count // 200)])


def test_enumeration_is_deterministic(F3):
    a = rref_array(5, 2, F3)
    b = rref_array(5, 2, F3)
    assert (a == b).all()
    assert len(points_array(4, F3)) == 40


def test_cap(F2):
    with pytest.raises(EnumerationTooLarge):
        list(enumerate_subspaces(8, 4, F2, cap=1000))


def test_grassmann_line_examples(F2, F3):
    Y = canonicalize([e(1, 3)], F2)
    Z = canonicalize([e(1, 3), e(2, 3), e(3, 3)], F2)
    members = grassmann_line(Y, Z)
    expect = {
        canonicalize([e(1, 3), e(2, 3)], F2),
        canonicalize([e(1, 3), e(3, 3)], F2),
        canonicalize([e(1, 3), (0, 1, 1)], F2),
    }
    assert set(members) == expect and len(members) == 3
    Y3 = canonicalize([e(1, 4)], F3)
    Z3 = canonicalize([e(1, 4), e(2, 4), e(4, 4)], F3)
    assert len(set(grassmann_line(Y3, Z3))) == 4
    with pytest.raises(NotNested):
        grassmann_line(canonicalize([e(3, 4)], F3), canonicalize([e(1, 4), e(2, 4), e(4, 4)], F3))


def test_quotient_frame_examples(F2):
    Q = quotient_frame(canonicalize([e(1, 3)], F2))
    assert Q.complement == (e(2, 3), e(3, 3))
    Q = quotient_frame(canonicalize([(1, 1)], F2))
    assert Q.complement == ((0, 1),)
    with pytest.raises(FullSpace):
        quotient_frame(canonicalize([e(1, 2), e(2, 2)], F2))


@pytest.mark.parametrize("q", [2, 3, 5])
def test_quotient_frame_invariants(q):
    F = field_make(q)
    rng = random.Random(q)
    for _ in range(40):
        n = rng.randrange(2, 7)
        X = canonicalize([[rng.randrange(q) for _ in range(n)] for _ in range(rng.randrange(0, n))], F, n)
        if X.dim == n:
            continue
        Qf = quotient_frame(X)
        assert rank(ExactMatrix(list(X.basis) + list(Qf.complement), F, n)) == n
        coords = tuple(rng.randrange(q) for _ in range(Qf.dim))
        assert Qf.project(Qf.lift(coords)) == coords
        # shifting by an element of X does not change the coset
        x = [0] * n
        for r in X.basis:
            c = rng.randrange(q)
            x = [F.add(a, F.mul(c, b)) for a, b in zip(x, r)]
        v = [F.add(a, b) for a, b in zip(Qf.lift(coords), x)]
        assert Qf.project(v) == coords


@pytest.mark.parametrize("q", [2, 3, 4])
def test_meet_join_dimension_formula(q):
    F = field_make(q) if q != 4 else field_make(2, 2)
    rng = random.Random(17 + q)
    for _ in range(100):
        n = rng.randrange(2, 7)
        U = canonicalize([[rng.randrange(F.q) for _ in range(n)] for _ in range(rng.randrange(0, n + 1))], F, n)
        W = canonicalize([[rng.randrange(F.q) for _ in range(n)] for _ in range(rng.randrange(0, n + 1))], F, n)
        J, M = U.join(W), U.meet(W)
        assert J.dim + M.dim == U.dim + W.dim
        assert U.contains(M) and W.contains(M) and J.contains(U) and J.contains(W)


def test_grassmann_line_members_distinct(F3):
    rng = random.Random(4)
    for _ in range(20):
        Z = canonicalize([[rng.randrange(3) for _ in range(6)] for _ in range(4)], F3, 6)
        if Z.dim != 4:
            continue
        Y = canonicalize(Z.basis[:2], F3, 6)
        members = grassmann_line(Y, Z)
        assert len(set(members)) == 4
        assert all(Z.contains(X) and X.contains(Y) and X.dim == 3 for X in members)
