"""Counting obstruction to line spreads with hexagonal restrictions in even dimension n.

If R-up(H) were a spread for a hyperplane H of G_3(V), dim V = n = 2r + 2,
double counting the flags (point, H-plane) gives
    psi = (q^2+q+1) |H| = M (q^n - 1)/(q - 1),
where M is the number of H-planes through a point: the lines of the local
polar space at p, a cone with a one-point vertex over W(2r-1, q).
So M (q^n-1)/(q-1) must vanish mod q^2+q+1; it does not when r = 1 mod 3.
"""

from __future__ import annotations

import csv
import io
from dataclasses import asdict, dataclass

from .errors import InputError, OddDimension

NOT_A_SPREAD_POSSIBLE = "NotASpreadPossible"
DIVISIBILITY_HOLDS = "DivisibilityHolds"

SWEEP_Q = (2, 3, 4, 5, 7, 8, 9, 11, 13)
CSV_COLUMNS = ("q", "n", "r", "r_mod_3", "residue", "verdict")


def _check_q(q: int):
    from sympy import factorint

    if q < 2 or len(factorint(q)) != 1:
        raise InputError(f"q = {q} is not a prime power")


def lines_count_M(q: int, r: int) -> int:
    """Lines of the cone over W(2r-1, q) with a point vertex.

    Lines through the vertex (one per point of W) plus q^2 lifts of each line of W.
    """
    _check_q(q)
    if r < 1:
        raise InputError("r must be at least 1")
    points = (q ** (2 * r) - 1) // (q - 1)
    per_point = 1 + q * q * (q ** (2 * r - 2) - 1) // (q * q - 1)
    return points * per_point


@dataclass(frozen=True)
class CountReport:
    q: int
    n: int
    r: int
    M: int
    psi: int  # M (q^n - 1)/(q - 1)
    modulus: int  # q^2 + q + 1
    residue: int
    verdict: str

    def to_json(self) -> dict:
        d = asdict(self)
        # big integers as strings so JSON consumers keep them exact
        d["M"] = str(self.M)
        d["psi"] = str(self.psi)
        return d

    def csv_row(self) -> tuple:
        return (self.q, self.n, self.r, self.r % 3, self.residue, self.verdict)


def residue_check(q: int, n: int) -> CountReport:
    if n % 2:
        raise OddDimension(f"n = {n} is odd")
    if n < 6:
        raise InputError("n must be at least 6")
    r = (n - 2) // 2
    M = lines_count_M(q, r)
    psi = M * ((q**n - 1) // (q - 1))
    mod = q * q + q + 1
    res = psi % mod
    verdict = NOT_A_SPREAD_POSSIBLE if res else DIVISIBILITY_HOLDS
    return CountReport(q, n, r, M, psi, mod, res, verdict)


def residue_sweep(qs=SWEEP_Q, n_range=range(6, 41, 2)) -> list[CountReport]:
    return [residue_check(q, n) for q in qs for n in n_range]


def reports_csv(reports) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for rep in reports:
        w.writerow(rep.csv_row())
    return buf.getvalue()


def psi_brute_force(H) -> dict:
    """Count flags (point, H-plane) both ways for a hyperplane of G_3(V) over a small field.

    Returns the number of planes in H, the per-point counts, and
    psi computed as sum over points and as (q^2+q+1)|H|.
    """
    import numpy as np

    from .exterior import batch_matvec
    from .geometry import points_array, rref_array

    F = H.field
    n = H.n
    planes = rref_array(n, 3, F)
    # Plucker coordinates of every plane via 3x3 minors
    from .exterior import subsets

    cols = []
    for i, j, k in subsets(n, 3):
        A = planes[:, :, [i - 1, j - 1, k - 1]]
        cols.append(_det3(A, F))
    P = np.stack(cols, axis=1)
    vals = batch_matvec(np.array([H.functional.coeffs], dtype=np.int64), P, F)[:, 0]
    members = planes[vals == 0]
    pts = points_array(n, F)
    # a point lies on a plane iff appending it does not raise the rank
    from .exactalg import batch_rank

    counts = np.zeros(len(pts), dtype=np.int64)
    for s in range(0, len(members), 4096):
        blk = members[s : s + 4096]
        stack = np.concatenate(
            [np.repeat(blk[:, None], len(pts), axis=1), np.broadcast_to(pts[None, :, None, :], (len(blk), len(pts), 1, n))],
            axis=2,
        ).reshape(-1, 4, n)
        on = (batch_rank(stack, F) == 3).reshape(len(blk), len(pts))
        counts += on.sum(axis=0)
    q = F.q
    return {
        "planes": int(len(members)),
        "per_point": sorted(set(int(c) for c in counts)),
        "psi_points": int(counts.sum()),
        "psi_planes": int((q * q + q + 1) * len(members)),
    }


def _det3(A, F):
    def m(x, y):
        return F.vmul(x, y)

    a = A
    t1 = m(a[:, 0, 0], F.vsub(m(a[:, 1, 1], a[:, 2, 2]), m(a[:, 1, 2], a[:, 2, 1])))
    t2 = m(a[:, 0, 1], F.vsub(m(a[:, 1, 0], a[:, 2, 2]), m(a[:, 1, 2], a[:, 2, 0])))
    t3 = m(a[:, 0, 2], F.vsub(m(a[:, 1, 0], a[:, 2, 1]), m(a[:, 1, 1], a[:, 2, 0])))
    return F.vadd(F.vsub(t1, t2), t3)
