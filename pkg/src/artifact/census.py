"""Exhaustive census of hyperplanes of G_3(V) for small (n, q).

Every projective class of nonzero alternating trilinear forms is visited
once.  For each class the pole degrees of all points are computed in bulk and
reduced to a signature; classes are bucketed by signature and the buckets are
labelled against the canonical forms.

The matrix B_p[x][y] = f(p, e_x, e_y) depends linearly on the coefficient
vector of f, so one precomputed linear map turns a block of functionals into
a block of Gram matrices.  Over GF(2) the six-dimensional case uses bit
packing: the 15 upper entries of B_p form a code whose rank comes from a
lookup table.
"""

from __future__ import annotations

import itertools
import threading
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from math import comb

import numpy as np

from .errors import EnumerationTooLarge, InputError, InternalAssertion
from .exactalg import FieldSpec, batch_rank, batch_rank_gf2_bits
from .exterior import AlternatingFunctional, batch_matvec, subsets
from .geometry import DEFAULT_CAP, points_array, rref_array
from .hyperplane import (
    TypeSignature,
    identify_type,
    line_point_codes,
    signature_from_degrees,
    spf_from_point_codes,
)

CENSUS_CAP = 1 << 24


def class_count(n: int, q: int) -> int:
    N = comb(n, 3)
    return (q**N - 1) // (q - 1)


# ---------------------------------------------------------------------------
# linear maps from coefficient vectors


def gram_map(n: int, F: FieldSpec, pts: np.ndarray) -> np.ndarray:
    """Matrix L (C(n,3), P*n*n) with B_p[x][y] = sum_S f_S L[S, (p, x, y)]."""
    trips = subsets(n, 3)
    P = len(pts)
    L = np.zeros((len(trips), P, n, n), dtype=np.int64)
    for s, (i, j, k) in enumerate(trips):
        for perm in itertools.permutations((i, j, k)):
            a, b, c = (t - 1 for t in perm)
            sign = 1 if perm in ((i, j, k), (j, k, i), (k, i, j)) else -1
            col = pts[:, a] if sign > 0 else F.vneg(pts[:, a])
            L[s, :, b, c] = F.vadd(L[s, :, b, c], col)
    return L.reshape(len(trips), P * n * n)


def _functional_block(N: int, F: FieldSpec, s: int, start: int, stop: int) -> np.ndarray:
    """Normalized coefficient vectors with leading index s, free codes start..stop-1."""
    free = N - 1 - s
    codes = np.arange(start, stop, dtype=np.int64)
    out = np.zeros((len(codes), N), dtype=np.int64)
    out[:, s] = 1
    for pos in range(N - 1, s, -1):
        out[:, pos] = codes % F.q
        codes //= F.q
    return out


def _tasks(N: int, q: int, chunk: int):
    for s in range(N):
        total = q ** (N - 1 - s)
        for a in range(0, total, chunk):
            yield (s, a, min(total, a + chunk))


# ---------------------------------------------------------------------------
# GF(2) bit-packed path for n <= 6


_GF2_LOCK = threading.Lock()
_GF2_TABLES: dict = {}


def _gf2_rank_table(n: int) -> np.ndarray:
    """Rank of every n x n alternating GF(2) matrix, indexed by its upper-triangle bits."""
    with _GF2_LOCK:
        if n in _GF2_TABLES:
            return _GF2_TABLES[n]
    pairs = [(x, y) for x in range(n) for y in range(x + 1, n)]
    m = len(pairs)
    codes = np.arange(1 << m, dtype=np.int64)
    rows = np.zeros((1 << m, n), dtype=np.uint64)
    for b, (x, y) in enumerate(pairs):
        bit = ((codes >> b) & 1).astype(np.uint64)
        rows[:, x] |= bit << np.uint64(y)
        rows[:, y] |= bit << np.uint64(x)
    table = batch_rank_gf2_bits(rows, n).astype(np.int8)
    with _GF2_LOCK:
        _GF2_TABLES[n] = table
    return table


def _gf2_degrees(fblock: np.ndarray, n: int, pts: np.ndarray) -> np.ndarray:
    """Pole degrees (B, P) for a block of GF(2) functionals via parity masks."""
    pairs = [(x, y) for x in range(n) for y in range(x + 1, n)]
    trips = subsets(n, 3)
    P = len(pts)
    # mask[S, p, e] = 1 iff the monomial S contributes to entry e of B_p
    mask = np.zeros((len(trips), P, len(pairs)), dtype=np.float32)
    for s, T in enumerate(trips):
        for e, (x, y) in enumerate(pairs):
            if x + 1 in T and y + 1 in T:
                (i,) = set(T) - {x + 1, y + 1}
                mask[s, :, e] = pts[:, i - 1]
    M = mask.reshape(len(trips), -1)
    bits = (fblock.astype(np.float32) @ M).astype(np.int64) & 1
    bits = bits.reshape(len(fblock), P, len(pairs))
    weights = (1 << np.arange(len(pairs), dtype=np.int64))
    codes = bits @ weights
    return n - 1 - _gf2_rank_table(n)[codes].astype(np.int64)


# ---------------------------------------------------------------------------
# spread verification by line incidence (independent of the degrees)


def _line_tests(n: int, F: FieldSpec):
    """For every line L and every x, the linear form f -> f(L ^ e_x)."""
    lines = rref_array(n, 2, F)
    trips = subsets(n, 3)
    idx = {T: s for s, T in enumerate(trips)}
    from .exterior import batch_plucker2

    W = batch_plucker2(lines, F)  # (Lc, C(n,2))
    pairs = subsets(n, 2)
    forms = np.zeros((len(lines), n, len(trips)), dtype=np.int64)
    for pi, (i, j) in enumerate(pairs):
        for x in range(1, n + 1):
            if x in (i, j):
                continue
            T = tuple(sorted((i, j, x)))
            # e_i ^ e_j ^ e_x = sign * e_T
            sign = 1 if (x > j) or (x < i) else -1
            col = W[:, pi] if sign > 0 else F.vneg(W[:, pi])
            forms[:, x - 1, idx[T]] = F.vadd(forms[:, x - 1, idx[T]], col)
    pts = points_array(n, F)
    # incidence: point p on line L iff rank [L; p] = 2
    stack = np.concatenate(
        [np.repeat(lines[:, None], len(pts), axis=1), np.broadcast_to(pts[None, :, None, :], (len(lines), len(pts), 1, n))],
        axis=2,
    ).reshape(-1, 3, n)
    inc = (batch_rank(stack, F) == 2).reshape(len(lines), len(pts))
    return lines, forms.reshape(len(lines) * n, len(trips)), inc


_LT_LOCK = threading.Lock()
_LT_CACHE: dict = {}


def _cached_line_tests(n, F):
    with _LT_LOCK:
        if (n, F) not in _LT_CACHE:
            _LT_CACHE[(n, F)] = _line_tests(n, F)
        return _LT_CACHE[(n, F)]


def spread_partition_check(fblock: np.ndarray, n: int, F: FieldSpec) -> np.ndarray:
    """For each functional, True iff its R-up lines partition the points of PG(n-1, q)."""
    lines, forms, inc = _cached_line_tests(n, F)
    vals = batch_matvec(forms, fblock, F).reshape(len(fblock), len(lines), n)
    member = ~vals.any(axis=2)  # (B, lines)
    cover = member.astype(np.int64) @ inc.astype(np.int64)
    q = F.q
    expected = (q**n - 1) // (q**2 - 1) if n % 2 == 0 else None
    ok = (cover == 1).all(axis=1)
    if expected is not None:
        ok &= member.sum(axis=1) == expected
    return ok


# ---------------------------------------------------------------------------
# the task


@dataclass
class _TaskResult:
    counts: Counter = field(default_factory=Counter)
    first: dict = field(default_factory=dict)  # key -> first coefficient vector
    spreads: int = 0
    spread_partition_failures: int = 0


def _hist_key(deg: np.ndarray, n: int) -> np.ndarray:
    return np.stack([(deg == d).sum(axis=1) for d in range(n)], axis=1)


def _census_task(args) -> _TaskResult:
    n, F, s, start, stop = args
    N = comb(n, 3)
    pts = points_array(n, F)
    fb = _functional_block(N, F, s, start, stop)
    if F.p == 2 and F.m == 1 and n <= 6:
        deg = _gf2_degrees(fb, n, pts)
    else:
        L = gram_map(n, F, pts)
        B = batch_matvec(L.T, fb, F).reshape(len(fb) * len(pts), n, n)
        deg = (n - 1 - batch_rank(B, F)).reshape(len(fb), len(pts))
    hist = _hist_key(deg, n)
    maxdeg = deg.max(axis=1)
    spf = np.zeros(len(fb), dtype=bool)
    spread = (deg == 1).all(axis=1)
    if n % 2 == 0:
        # odd degrees: max degree <= 2 forces a spread, whose lines are disjoint
        spf = spread.copy()
    else:
        need = np.nonzero(maxdeg <= 2)[0]
        if len(need):
            lines, forms, _ = _cached_line_tests(n, F)
            codes = line_point_codes(lines, F)
            vals = batch_matvec(forms, fb[need], F).reshape(len(need), len(lines), n)
            member = ~vals.any(axis=2)
            for i, row in zip(need, member):
                spf[i] = spf_from_point_codes(codes[row], F.q)
    res = _TaskResult()
    if spread.any():
        ok = spread_partition_check(fb[spread], n, F)
        res.spreads = int(spread.sum())
        res.spread_partition_failures = int((~ok).sum())
    keys, first_idx, counts = np.unique(
        np.concatenate([hist, spf[:, None].astype(np.int64)], axis=1), axis=0, return_index=True, return_counts=True
    )
    for k, i0, c in zip(keys, first_idx, counts):
        key = tuple(int(x) for x in k)
        res.counts[key] += int(c)
        res.first.setdefault(key, tuple(int(x) for x in fb[i0]))
    return res


# ---------------------------------------------------------------------------
# driver


@dataclass
class CensusBucket:
    signature: TypeSignature
    count: int
    example: str

    def to_json(self) -> dict:
        d = self.signature.to_json()
        d["count"] = self.count
        d["example"] = self.example
        return d


@dataclass
class CensusReport:
    n: int
    q: int
    classes: int
    buckets: list[CensusBucket]
    spreads: int
    spread_partition_failures: int

    def by_type(self) -> dict[str, int]:
        out: dict = {}
        for b in self.buckets:
            t = b.signature.type or "Unknown"
            out[t] = out.get(t, 0) + b.count
        return out

    def rank_counts(self) -> dict[int, int]:
        out: dict = {}
        for b in self.buckets:
            out[b.signature.rank] = out.get(b.signature.rank, 0) + b.count
        return dict(sorted(out.items()))

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "q": self.q,
            "classes": self.classes,
            "bucket_count": len(self.buckets),
            "buckets": self.by_type(),
            "ranks": {str(k): v for k, v in self.rank_counts().items()},
            "signatures": [b.to_json() for b in self.buckets],
            "spreads": self.spreads,
            "spread_partition_failures": self.spread_partition_failures,
        }


def census(n: int, F: FieldSpec, cap: int | None = CENSUS_CAP, workers: int = 1, chunk: int = 8192) -> CensusReport:
    if n < 3:
        raise InputError("n must be at least 3")
    total = class_count(n, F.q)
    if cap is not None and total > cap:
        raise EnumerationTooLarge(f"{total} functional classes exceed the cap {cap}")
    if (F.q**n) > DEFAULT_CAP:
        raise EnumerationTooLarge("too many points")
    N = comb(n, 3)
    jobs = [(n, F, s, a, b) for s, a, b in _tasks(N, F.q, chunk)]
    if workers > 1:
        with ProcessPoolExecutor(workers) as ex:
            parts = list(ex.map(_census_task, jobs))
    else:
        parts = [_census_task(j) for j in jobs]
    counts: Counter = Counter()
    first: dict = {}
    spreads = fails = 0
    for r in parts:  # job order fixes the merge
        counts.update(r.counts)
        for k, v in r.first.items():
            first.setdefault(k, v)
        spreads += r.spreads
        fails += r.spread_partition_failures
    if sum(counts.values()) != total:
        raise InternalAssertion("census lost functionals")
    buckets = []
    for key in sorted(counts):
        hist, spf = key[:n], bool(key[n])
        deg = np.repeat(np.arange(n), hist)
        sig = signature_from_degrees(n, F.q, deg, spf)
        if n <= 7:
            from dataclasses import replace

            sig = replace(sig, type=identify_type(sig, F))
        ex_f = AlternatingFunctional(n, 3, F, first[key])
        buckets.append(CensusBucket(sig, counts[key], ex_f.to_text()))
    buckets.sort(key=lambda b: (b.signature.rank, b.signature.type or "", -b.count))
    return CensusReport(n, F.q, total, buckets, spreads, fails)
