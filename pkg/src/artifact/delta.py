"""Sparse multivariate polynomials, the shipped cubic Delta, and the discriminant pipeline.

For the n = 8 form h = 123+456+147+257+367 + sum a_ij ij8 and a hyperplane
V' : c_1 x_1 + ... + c_8 x_8 = 0 with c_1 != 0, the poles of H(V') form a
quadric whose Gram determinant should equal kappa * Delta(c)^3 / c_1^9 for a
universal constant kappa.  verify_ehom tests this identity by random
evaluation; verify_delta_hexagonal checks Delta(c) = 0 <=> H(V') not hexagonal
on every hyperplane of a small field.
"""

from __future__ import annotations

import hashlib
import random
import re
import threading
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from importlib import resources
from typing import Mapping, Sequence

import numpy as np

from .errors import (
    CalibrationDegenerate,
    CharacteristicTwo,
    DimensionMismatch,
    EigenvaluePresent,
    InconsistentExtraction,
    InputError,
    Mismatch,
    NotAntisymmetric,
    PolySyntaxError,
    TranscriptionInvalid,
    UnknownVariable,
)
from .exactalg import ExactMatrix, FieldSpec, det, field_make, has_eigenvalue, perfect_matchings
from .geometry import points_array

A_VARIABLES = tuple(f"a{i}{j}" for i in range(1, 7) for j in range(i + 1, 7))
C_VARIABLES = tuple(f"c{i}" for i in range(1, 9))
DELTA_VARIABLES = A_VARIABLES + C_VARIABLES
U_VARIABLES = tuple(f"u{i}" for i in range(2, 9))

# ---------------------------------------------------------------------------
# sparse polynomials


class SparsePoly:
    """Polynomial as {exponent tuple: coefficient}.

    ring is None for integer coefficients, else a FieldSpec (coefficients
    are field codes).  Zero coefficients are never stored.
    """

    __slots__ = ("variables", "terms", "ring")

    def __init__(self, variables: Sequence[str], terms: Mapping[tuple, int] | None = None, ring: FieldSpec | None = None):
        self.variables = tuple(variables)
        self.ring = ring
        nv = len(self.variables)
        clean = {}
        for e, c in (terms or {}).items():
            e = tuple(e)
            if len(e) != nv:
                raise DimensionMismatch("exponent tuple length differs from the variable count")
            c = _reduce(c, ring)
            if c:
                clean[e] = c
        self.terms = clean

    # construction helpers
    @classmethod
    def constant(cls, c, variables, ring=None):
        return cls(variables, {(0,) * len(variables): c}, ring)

    @classmethod
    def var(cls, name, variables, ring=None):
        variables = tuple(variables)
        if name not in variables:
            raise UnknownVariable(name)
        e = tuple(int(v == name) for v in variables)
        return cls(variables, {e: 1}, ring)

    def _like(self, terms):
        out = SparsePoly.__new__(SparsePoly)
        out.variables = self.variables
        out.ring = self.ring
        out.terms = terms
        return out

    def _coerce(self, other):
        if isinstance(other, SparsePoly):
            if other.variables != self.variables or other.ring != self.ring:
                raise InputError("polynomials over different variables or rings")
            return other
        return SparsePoly.constant(other, self.variables, self.ring)

    # arithmetic
    def __add__(self, other):
        other = self._coerce(other)
        t = dict(self.terms)
        for e, c in other.terms.items():
            v = _radd(t.get(e, 0), c, self.ring)
            if v:
                t[e] = v
            else:
                t.pop(e, None)
        return self._like(t)

    __radd__ = __add__

    def __neg__(self):
        return self._like({e: _rneg(c, self.ring) for e, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        other = self._coerce(other)
        t: dict = {}
        R = self.ring
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(x + y for x, y in zip(e1, e2))
                t[e] = _radd(t.get(e, 0), _rmul(c1, c2, R), R)
        return self._like({e: c for e, c in t.items() if c})

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise InputError("negative exponent")
        out = SparsePoly.constant(1, self.variables, self.ring)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __eq__(self, other):
        if isinstance(other, SparsePoly):
            return self.variables == other.variables and self.ring == other.ring and self.terms == other.terms
        if isinstance(other, int):
            return self == SparsePoly.constant(other, self.variables, self.ring)
        return NotImplemented

    def __hash__(self):
        return hash((self.variables, self.ring, frozenset(self.terms.items())))

    def is_zero(self) -> bool:
        return not self.terms

    def __len__(self):
        return len(self.terms)

    # structure
    def degree(self, subset: Sequence[str] | None = None) -> int:
        idx = self._indices(subset)
        return max((sum(e[i] for i in idx) for e in self.terms), default=-1)

    def degrees_in(self, subset: Sequence[str]) -> set[int]:
        idx = self._indices(subset)
        return {sum(e[i] for i in idx) for e in self.terms}

    def _indices(self, subset):
        if subset is None:
            return range(len(self.variables))
        pos = {v: i for i, v in enumerate(self.variables)}
        try:
            return [pos[v] for v in subset]
        except KeyError as exc:
            raise UnknownVariable(str(exc)) from None

    def reduce(self, F: FieldSpec) -> "SparsePoly":
        """Map integer coefficients into F."""
        if self.ring is not None:
            raise InputError("polynomial is already reduced")
        return SparsePoly(self.variables, self.terms, F)

    def specialize(self, values: Mapping[str, int]) -> "SparsePoly":
        """Substitute the given variables; the result keeps only the others."""
        keep = [i for i, v in enumerate(self.variables) if v not in values]
        fixed = [(i, values[v]) for i, v in enumerate(self.variables) if v in values]
        R = self.ring
        t: dict = {}
        for e, c in self.terms.items():
            for i, x in fixed:
                if e[i]:
                    c = _rmul(c, _rpow(x, e[i], R), R)
                    if not c:
                        break
            if c:
                ee = tuple(e[i] for i in keep)
                t[ee] = _radd(t.get(ee, 0), c, R)
        return SparsePoly([self.variables[i] for i in keep], t, R)

    def evaluate(self, values: Mapping[str, int] | Sequence[int]):
        if not isinstance(values, Mapping):
            values = dict(zip(self.variables, values))
        missing = [v for v in self.variables if v not in values]
        if missing:
            raise InputError(f"no value for {missing}")
        r = self.specialize(values)
        return r.terms.get((), 0)

    def evaluate_batch(self, points: np.ndarray) -> np.ndarray:
        """Evaluate at each row of points (N, nvars); needs a small field ring."""
        F = self.ring
        if F is None or F.large:
            raise InputError("batched evaluation needs a small field")
        P = np.asarray(points, dtype=np.int64)
        N = P.shape[0]
        out = np.zeros(N, dtype=np.int64)
        powers: dict = {}

        def pw(i, k):
            if (i, k) not in powers:
                x = P[:, i]
                acc = np.ones(N, dtype=np.int64)
                for _ in range(k):
                    acc = F.vmul(acc, x)
                powers[(i, k)] = acc
            return powers[(i, k)]

        for e, c in self.terms.items():
            acc = np.full(N, c, dtype=np.int64)
            for i, k in enumerate(e):
                if k:
                    acc = F.vmul(acc, pw(i, k))
            out = F.vadd(out, acc)
        return out

    def div_by_var(self, name: str) -> tuple["SparsePoly", "SparsePoly"]:
        """(quotient, remainder) for division by a single variable."""
        i = self._indices([name])[0]
        q, r = {}, {}
        for e, c in self.terms.items():
            if e[i]:
                q[e[:i] + (e[i] - 1,) + e[i + 1 :]] = c
            else:
                r[e] = c
        return self._like(q), self._like(r)

    def coefficient(self, monomial: Mapping[str, int]) -> int:
        e = tuple(monomial.get(v, 0) for v in self.variables)
        return self.terms.get(e, 0)

    def to_text(self) -> str:
        return poly_format(self)

    def __repr__(self):
        return f"SparsePoly({self.to_text()!r})"


def _reduce(c, R):
    if R is None:
        return int(c)
    return R.from_int(c) if isinstance(c, int) and (c < 0 or c >= R.q) else R.coerce(c)


def _radd(a, b, R):
    return a + b if R is None else R.add(a, b)


def _rneg(a, R):
    return -a if R is None else R.neg(a)


def _rmul(a, b, R):
    return a * b if R is None else R.mul(a, b)


def _rpow(a, k, R):
    return a**k if R is None else R.pow(a, k)


# ---------------------------------------------------------------------------
# text format

_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z_0-9]*)|(\S))")


def _tokenize(text: str):
    pos = 0
    out = []
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:  # only trailing whitespace is left
            break
        start = m.start(m.lastindex)
        if m.group(1):
            out.append(("num", int(m.group(1)), start))
        elif m.group(2):
            out.append(("name", m.group(2), start))
        else:
            ch = m.group(3)
            if ch not in "+-*^()":
                raise PolySyntaxError(f"unexpected character {ch!r}", start)
            out.append((ch, ch, start))
        pos = m.end()
    out.append(("end", None, len(text)))
    return out


class _Parser:
    """expr := term (('+'|'-') term)* ; term := unary ('*' unary)* ;
    unary := '-' unary | power ; power := atom ('^' integer)? ;
    atom := integer | variable | '(' expr ')'."""

    def __init__(self, text, variables, ring):
        self.toks = _tokenize(text)
        self.i = 0
        self.variables = tuple(variables)
        self.ring = ring

    def peek(self):
        return self.toks[self.i]

    def take(self, kind=None):
        t = self.toks[self.i]
        if kind is not None and t[0] != kind:
            what = "end of input" if t[0] == "end" else repr(t[1])
            raise PolySyntaxError(f"expected {kind!r}, found {what}", t[2])
        self.i += 1
        return t

    def parse(self):
        p = self.expr()
        t = self.peek()
        if t[0] != "end":
            raise PolySyntaxError(f"unexpected {t[1]!r}", t[2])
        return p

    def expr(self):
        p = self.term()
        while self.peek()[0] in ("+", "-"):
            op = self.take()[0]
            q = self.term()
            p = p + q if op == "+" else p - q
        return p

    def term(self):
        p = self.unary()
        while self.peek()[0] == "*":
            self.take()
            p = p * self.unary()
        return p

    def unary(self):
        if self.peek()[0] == "-":
            self.take()
            return -self.unary()
        if self.peek()[0] == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self):
        p = self.atom()
        if self.peek()[0] == "^":
            self.take()
            t = self.take("num")
            p = p ** t[1]
        return p

    def atom(self):
        t = self.peek()
        if t[0] == "num":
            self.take()
            return SparsePoly.constant(t[1], self.variables, self.ring)
        if t[0] == "name":
            self.take()
            if t[1] not in self.variables:
                raise UnknownVariable(f"{t[1]} at position {t[2]}")
            return SparsePoly.var(t[1], self.variables, self.ring)
        if t[0] == "(":
            self.take()
            p = self.expr()
            self.take(")")
            return p
        what = "end of input" if t[0] == "end" else repr(t[1])
        raise PolySyntaxError(f"unexpected {what}", t[2])


def poly_parse(text: str, variables: Sequence[str] = DELTA_VARIABLES, ring: FieldSpec | None = None) -> SparsePoly:
    return _Parser(text, variables, ring).parse()


def poly_format(P: SparsePoly) -> str:
    """Canonical text: terms by decreasing exponent tuple, explicit '*' and '^'."""
    if not P.terms:
        return "0"
    R = P.ring
    parts = []
    for e in sorted(P.terms, reverse=True):
        c = P.terms[e]
        if R is None:
            neg, mag = c < 0, abs(c)
        else:
            neg, mag = False, c
        factors = [v if k == 1 else f"{v}^{k}" for v, k in zip(P.variables, e) if k]
        if mag != 1 or not factors:
            if R is not None and not R.is_prime_field:
                raise InputError("text output of extension-field coefficients is not supported")
            factors.insert(0, str(mag))
        body = "*".join(factors)
        if not parts:
            parts.append(("-" if neg else "") + body)
        else:
            parts.append((" - " if neg else " + ") + body)
    return "".join(parts)


# ---------------------------------------------------------------------------
# the shipped Delta


@dataclass(frozen=True)
class DeltaBundle:
    poly: SparsePoly
    sha256: str
    source: str

    def specialize_a(self, a: Mapping[tuple[int, int], int], F: FieldSpec | None = None) -> SparsePoly:
        """Delta as a cubic in c_1..c_8 after fixing the a_ij (reduced into F if given)."""
        P = self.poly.reduce(F) if F is not None else self.poly
        vals = {f"a{i}{j}": v for (i, j), v in a.items()}
        vals.update({v: 0 for v in A_VARIABLES if v not in vals})
        return P.specialize(vals)


_DELTA_LOCK = threading.Lock()
_DELTA_CACHE: dict = {}


def delta_source() -> str:
    return resources.files(__package__).joinpath("delta.poly").read_text()


def delta_polynomial(text: str | None = None) -> DeltaBundle:
    """Parse and validate a transcription of Delta (the shipped one by default)."""
    if text is None:
        text = delta_source()
    text = text.strip()
    with _DELTA_LOCK:
        if text in _DELTA_CACHE:
            return _DELTA_CACHE[text]
    P = poly_parse(text, DELTA_VARIABLES)
    validate_delta(P)
    b = DeltaBundle(P, hashlib.sha256(text.encode()).hexdigest(), text)
    with _DELTA_LOCK:
        _DELTA_CACHE[text] = b
    return b


def validate_delta(P: SparsePoly) -> None:
    if P.is_zero():
        raise TranscriptionInvalid("empty polynomial")
    if P.degrees_in(C_VARIABLES) != {3}:
        raise TranscriptionInvalid("not homogeneous of degree 3 in c")
    if P.degree(A_VARIABLES) > 3:
        raise TranscriptionInvalid("a term has degree above 3 in the a-variables")
    # Delta(0,...,0,1) must be -1 whatever the a-values
    at_e8 = P.specialize({c: int(c == "c8") for c in C_VARIABLES})
    if at_e8.terms != {(0,) * len(A_VARIABLES): -1}:
        raise TranscriptionInvalid("Delta(0,...,0,1) is not identically -1")


def corrupt_delta_text(text: str, seed: int = 0) -> str:
    """Change one integer coefficient of the transcription (mutation canary)."""
    P = poly_parse(text)
    rng = random.Random(seed)
    keys = sorted(P.terms)
    # keep the c8^3 block intact so the corrupted text still validates
    e8 = tuple(int(v == "c8") * 3 for v in C_VARIABLES)
    keys = [e for e in keys if e[len(A_VARIABLES):] != e8]
    e = keys[rng.randrange(len(keys))]
    t = dict(P.terms)
    t[e] = t[e] + 1 if t[e] != -1 else 2
    return poly_format(SparsePoly(P.variables, t))


# ---------------------------------------------------------------------------
# Pfaffians and the discriminant pipeline


def symbolic_pfaffian(M: Sequence[Sequence[SparsePoly]]) -> SparsePoly:
    """Pfaffian of an antisymmetric matrix of polynomials (perfect-matching expansion)."""
    n = len(M)
    if any(len(r) != n for r in M):
        raise NotAntisymmetric("matrix is not square")
    for i in range(n):
        if not M[i][i].is_zero():
            raise NotAntisymmetric("nonzero diagonal entry")
        for j in range(i + 1, n):
            if not (M[i][j] + M[j][i]).is_zero():
                raise NotAntisymmetric(f"entries ({i},{j}) and ({j},{i}) are not opposite")
    zero = M[0][0] * 0 if n else None
    if n == 0:
        raise InputError("empty matrix")
    total = zero
    for sign, pairs in perfect_matchings(n):
        term = None
        for i, j in pairs:
            term = M[i][j] if term is None else term * M[i][j]
            if term.is_zero():
                break
        if not term.is_zero():
            total = total + term if sign > 0 else total - term
    return total


def _eight_terms(a: Mapping[tuple[int, int], int]) -> dict:
    h = {t: 1 for t in ((1, 2, 3), (4, 5, 6), (1, 4, 7), (2, 5, 7), (3, 6, 7))}
    for (i, j), v in a.items():
        h[(i, j, 8)] = v
    return h


def restricted_form(a: Mapping[tuple[int, int], int], b: Sequence[int], F: FieldSpec):
    """h^1: h pulled back to V' : x_1 = b_2 x_2 + ... + b_8 x_8, in the basis e_i + b_i e_1."""
    from .exterior import AlternatingFunctional
    from .hyperplane import pullback

    if len(b) != 7:
        raise DimensionMismatch("need b_2..b_8")
    h = AlternatingFunctional.from_terms(_eight_terms(a), 8, 3, F)
    rows = []
    for i in range(2, 9):
        r = [0] * 8
        r[0] = F.coerce(b[i - 2])
        r[i - 1] = 1
        rows.append(r)
    return pullback(h, rows)


def pipeline_matrix(a, b, u: Sequence[int], F: FieldSpec) -> ExactMatrix:
    """The 8x8 matrix of (x, y) -> h^1(u, x, y); the first row and column are null."""
    h1 = restricted_form(a, b, F)
    T = h1.tensor()
    m = [[0] * 8 for _ in range(8)]
    for i in range(7):
        for j in range(7):
            acc = 0
            for k in range(7):
                if u[k] and T[k, i, j]:
                    acc = F.add(acc, F.mul(F.coerce(u[k]), int(T[k, i, j])))
            m[i + 1][j + 1] = acc
    return ExactMatrix(m, F)


@dataclass(frozen=True)
class QuadricExtraction:
    pfaffian: SparsePoly  # cubic in u2..u8
    quadric: SparsePoly  # quadratic form in u2..u8
    gram: ExactMatrix  # 7x7, q(u) = u^T G u


def quadric_from_pipeline(a, b: Sequence[int], F: FieldSpec, check_eigen: bool = True) -> QuadricExtraction:
    """Quadratic form whose zeros are the poles of H(V'), plus its Gram matrix."""
    if F.p == 2:
        raise CharacteristicTwo("the Gram symmetrization divides by 2")
    if check_eigen:
        A = ExactMatrix([[F.coerce(a.get((i, 3 + j), 0)) for j in range(1, 4)] for i in range(1, 4)], F)
        if has_eigenvalue(A):
            raise EigenvaluePresent("A has an eigenvalue in the field")
    h1 = restricted_form(a, b, F)
    T = h1.tensor()
    U = [SparsePoly.var(v, U_VARIABLES, F) for v in U_VARIABLES]
    zero = SparsePoly(U_VARIABLES, None, F)
    # minor on u2..u7 (drop the null first and the last row/column)
    M = [[zero] * 6 for _ in range(6)]
    for i in range(6):
        for j in range(6):
            acc = zero
            for k in range(7):
                c = int(T[k, i, j])
                if c:
                    acc = acc + U[k] * c
            M[i][j] = acc
    pf = symbolic_pfaffian(M)
    # route 1: exact division by u8
    q1, rem = pf.div_by_var("u8")
    # route 2: dehomogenize at u8 = 1, then rehomogenize as a quadratic form
    deh = pf.specialize({"u8": 1})
    t2 = {}
    for e, c in deh.terms.items():
        d = sum(e)
        if d > 2:
            raise InconsistentExtraction("the dehomogenized Pfaffian has a cubic part")
        t2[e + (2 - d,)] = c
    q2 = SparsePoly(U_VARIABLES, t2, F)
    if not rem.is_zero() or q1 != q2:
        raise InconsistentExtraction("the u8-division and rehomogenization routes disagree")
    half = F.inv(F.from_int(2))
    G = [[0] * 7 for _ in range(7)]
    for e, c in q1.terms.items():
        idx = [i for i, k in enumerate(e) for _ in range(k)]
        i, j = idx
        if i == j:
            G[i][i] = c
        else:
            G[i][j] = G[j][i] = F.mul(c, half)
    return QuadricExtraction(pf, q1, ExactMatrix(G, F))


def xi_one(a, c: Sequence[int], F: FieldSpec) -> int:
    """c_1^21 * det G(b) with b_i = -c_i / c_1."""
    if not c[0]:
        raise InputError("needs c_1 != 0")
    c = [F.coerce(x) for x in c]
    inv = F.inv(c[0])
    b = [F.neg(F.mul(x, inv)) for x in c[1:]]
    G = quadric_from_pipeline(a, b, F, check_eigen=False).gram
    return F.mul(F.pow(c[0], 21), det(G))


@dataclass
class EhomReport:
    field: str
    trials: int
    kappa: int | None
    passes: int
    failures: int
    mismatches: list
    delta_sha256: str
    seed: int

    @property
    def ok(self) -> bool:
        return self.failures == 0 and self.passes == self.trials

    def to_json(self) -> dict:
        return {
            "field": self.field,
            "trials": self.trials,
            "kappa": self.kappa,
            "passes": self.passes,
            "failures": self.failures,
            "mismatches": self.mismatches,
            "delta_sha256": self.delta_sha256,
            "seed": self.seed,
        }


MERSENNE61 = (1 << 61) - 1


def _ehom_sample(F, rng, normalized=True):
    from .hyperplane import random_eigfree

    c8 = random_eigfree(F, rng.randrange(1 << 62), normalized=normalized)
    c = [rng.randrange(1, F.q)] + [rng.randrange(F.q) for _ in range(7)]
    return c8, c


def verify_ehom(F: FieldSpec | None = None, trials: int = 50, seed: int = 0, delta: DeltaBundle | None = None, max_calibration: int = 20) -> EhomReport:
    """Random-evaluation test of c_1^21 det G = kappa * Delta(c)^3 * c_1^12."""
    if F is None:
        F = field_make(MERSENNE61, large=True)
    if F.p == 2:
        raise CharacteristicTwo("the discriminant pipeline needs odd characteristic")
    if trials < 1:
        raise InputError("trials must be at least 1")
    if delta is None:
        delta = delta_polynomial()
    rng = random.Random(seed)
    P = delta.poly.reduce(F)

    def both(c8, c):
        a = c8.as_dict()
        xi = xi_one(a, c, F)
        vals = {f"a{i}{j}": v for (i, j), v in a.items()}
        vals.update(dict(zip(C_VARIABLES, c)))
        d = P.evaluate(vals)
        rhs = F.mul(F.pow(d, 3), F.pow(c[0], 12))
        return xi, rhs, d

    kappa = None
    for _ in range(max_calibration):
        c8, c = _ehom_sample(F, rng)
        xi, rhs, d = both(c8, c)
        if rhs:
            kappa = F.div(xi, rhs)
            break
    if kappa is None:
        raise CalibrationDegenerate("Delta vanished on every calibration sample")
    passes = 0
    mism = []
    for t in range(trials):
        c8, c = _ehom_sample(F, rng)
        xi, rhs, _ = both(c8, c)
        if xi == F.mul(kappa, rhs):
            passes += 1
        else:
            mism.append({"trial": t, "a": {f"{i}{j}": v for (i, j), v in c8.as_dict().items()}, "c": list(c)})
    return EhomReport(str(F), trials, kappa, passes, trials - passes, mism, delta.sha256, seed)


# ---------------------------------------------------------------------------
# Delta versus hexagonality over a small field


@dataclass
class HexDeltaReport:
    field: str
    hyperplanes: int
    hexagonal: int
    delta_zeros: int
    mismatches: list
    infinity_ok: bool
    a: dict

    @property
    def ok(self) -> bool:
        return not self.mismatches and self.infinity_ok

    def to_json(self) -> dict:
        return {
            "field": self.field,
            "hyperplanes": self.hyperplanes,
            "hexagonal": self.hexagonal,
            "delta_zeros": self.delta_zeros,
            "mismatches": self.mismatches,
            "infinity_ok": self.infinity_ok,
            "a": self.a,
        }


def hyperplane_bases(C: np.ndarray, F: FieldSpec) -> np.ndarray:
    """For each normalized nonzero c (N, n), a basis (N, n-1, n) of the hyperplane c.x = 0."""
    N, n = C.shape
    out = np.zeros((N, n - 1, n), dtype=np.int64)
    lead = (C != 0).argmax(axis=1)
    for s in range(n):
        sel = np.nonzero(lead == s)[0]
        if not len(sel):
            continue
        cols = [j for j in range(n) if j != s]
        # c is normalized with c_s = 1: x_s = -sum_{j != s} c_j x_j
        for r, j in enumerate(cols):
            out[sel, r, j] = 1
            out[sel, r, s] = F.vneg(C[sel, j])
    return out


def _hex_flags_chunk(args):
    from .hyperplane import hexagonal_flags

    T8, bases, F = args
    T = np.einsum("nia,njb,nkc,abc->nijk", bases, bases, bases, T8, optimize=True)
    T = _reduce_array(T, F)
    return hexagonal_flags(T, F)


def _reduce_array(T, F):
    if F.m == 1:
        return T % F.p
    raise InputError("tensor transport over extension fields uses the generic path")


def _hex_flags_generic(h, bases, F):
    from .hyperplane import Hyperplane, hexagonal_flags, pullback

    out = []
    for B in bases:
        out.append(pullback(h, B.tolist()).tensor())
    return hexagonal_flags(np.stack(out), F)


def verify_delta_hexagonal(c8, F: FieldSpec | None = None, delta: DeltaBundle | None = None, workers: int = 1, chunk: int = 64) -> HexDeltaReport:
    """Check Delta(c) = 0 <=> H(V') not hexagonal for every hyperplane V' of GF(q)^8."""
    from .hyperplane import Hyperplane, is_hexagonal, restrict

    F = F or c8.field
    if F != c8.field:
        raise InputError("field mismatch")
    if has_eigenvalue(c8.A):
        raise EigenvaluePresent("A has an eigenvalue in the field")
    if not c8.is_normalized:
        raise InputError("expected a normalized form (a25 = a26 = a34 = a36 = 0)")
    if delta is None:
        delta = delta_polynomial()
    Dc = delta.specialize_a(c8.as_dict(), F)
    C = points_array(8, F)
    dvals = Dc.evaluate_batch(C)
    h = c8.functional()
    bases = hyperplane_bases(C, F)
    if F.m == 1:
        T8 = h.tensor()
        jobs = [(T8, bases[s : s + chunk], F) for s in range(0, len(C), chunk)]
        if workers > 1:
            with ProcessPoolExecutor(workers) as ex:
                parts = list(ex.map(_hex_flags_chunk, jobs))
        else:
            parts = [_hex_flags_chunk(j) for j in jobs]
        hexa = np.concatenate(parts)
    else:
        hexa = _hex_flags_generic(h, bases, F)
    mism = [
        {"c": [int(x) for x in C[i]], "delta": int(dvals[i]), "hexagonal": bool(hexa[i])}
        for i in np.nonzero((dvals != 0) != hexa)[0]
    ]
    # V_inf : x_8 = 0 is the last point in canonical order
    inf = [0] * 7 + [1]
    i_inf = int(np.nonzero((C == inf).all(axis=1))[0][0])
    from .geometry import canonicalize

    Vinf = canonicalize([[int(i == j) for j in range(8)] for i in range(7)], F, 8)
    inf_hex = is_hexagonal(restrict(Hyperplane(h), Vinf))
    infinity_ok = bool(inf_hex and hexa[i_inf] and dvals[i_inf] == F.neg(1))
    return HexDeltaReport(
        str(F),
        len(C),
        int(hexa.sum()),
        int((dvals == 0).sum()),
        mism,
        infinity_ok,
        {f"{i}{j}": v for (i, j), v in c8.as_dict().items()},
    )


def require_ok(report) -> None:
    """Raise Mismatch when a verification report contains counterexamples."""
    if not report.ok:
        raise Mismatch(f"verification failed: {len(getattr(report, 'mismatches', []))} mismatches")
