import pytest

from artifact.counting import (
    CSV_COLUMNS,
    DIVISIBILITY_HOLDS,
    NOT_A_SPREAD_POSSIBLE,
    SWEEP_Q,
    lines_count_M,
    psi_brute_force,
    reports_csv,
    residue_check,
    residue_sweep,
)
from artifact.errors import InputError, OddDimension
from artifact.exactalg import field_make
from artifact.hyperplane import Hyperplane, canonical_form


def test_lines_count_examples():
    assert lines_count_M(2, 1) == 3
    assert lines_count_M(2, 2) == 75
    # W(3, q) has (q+1)(q^2+1) points and as many lines; the cone adds
    # one line per point through the vertex and q^2 lifts per line
    for q in (3, 4, 5, 7):
        gq = (q + 1) * (q * q + 1)
        assert lines_count_M(q, 2) == gq + q * q * gq
    with pytest.raises(InputError):
        lines_count_M(6, 2)


def test_residue_examples():
    r = residue_check(2, 10)
    assert (r.r, r.residue, r.verdict) == (4, 3, NOT_A_SPREAD_POSSIBLE)
    assert (2**8 - 1) % 7 == 3
    r = residue_check(3, 16)
    assert r.r == 7 and r.residue == 4 and r.verdict == NOT_A_SPREAD_POSSIBLE
    r = residue_check(2, 8)
    assert r.residue == 0 and r.verdict == DIVISIBILITY_HOLDS
    with pytest.raises(OddDimension):
        residue_check(2, 9)


def test_sweep_residues():
    reps = residue_sweep()
    assert len(reps) == len(SWEEP_Q) * 18
    for rep in reps:
        assert rep.psi == rep.M * (rep.q**rep.n - 1) // (rep.q - 1)
        expect = rep.q + 1 if rep.r % 3 == 1 else 0
        assert rep.residue == expect, (rep.q, rep.n)


@pytest.mark.parametrize("q", SWEEP_Q)
def test_divisibility_helper(q):
    for i in range(1, 41):
        for j in range(1, 41):
            assert ((q**j - 1) % (q**i - 1) == 0) == (j % i == 0)


def test_csv():
    text = reports_csv([residue_check(2, 6), residue_check(2, 10)])
    lines = text.strip().split("\n")
    assert lines[0] == ",".join(CSV_COLUMNS)
    assert lines[2] == "2,10,4,1,3,NotASpreadPossible"


def test_report_json_keeps_big_integers():
    d = residue_check(13, 40).to_json()
    assert isinstance(d["M"], str) and int(d["psi"]) == residue_check(13, 40).psi


def test_psi_brute_force_spread_instance():
    F = field_make(2)
    out = psi_brute_force(Hyperplane(canonical_form("T10", 6, F)))
    assert out["planes"] == 675
    assert out["per_point"] == [75]
    assert out["psi_points"] == out["psi_planes"] == 4725
    assert out["psi_points"] == lines_count_M(2, 2) * 63
