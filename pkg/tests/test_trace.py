import pytest
from sympy import primerange

from cubicpoints.arith import is_squarefree
from cubicpoints.ecdb import CurveRecord
from cubicpoints.genus import genus_x0
from cubicpoints.trace import TraceError, count_points_ec, count_points_x0, sieve1_check, trace_hecke

from .oracles import count_points_naive

# Weierstrass models of the genus-one curves X_0(N)
GENUS_ONE = {
    11: (0, -1, 1, -10, -20),
    14: (1, 0, 1, 4, -6),
    15: (1, 1, 1, -10, -10),
    17: (1, -1, 1, -1, -14),
    19: (0, 1, 1, -9, -15),
}


def _record(N, ainvs, torsion=1):
    al = tuple((q, 1) for q in (2, 3, 5, 7, 11, 13, 17, 19) if N % q == 0)
    return CurveRecord(f"{N}z1", N, ainvs, 0, torsion, 1, al, True)


def naive_ap(ainvs, p):
    return p + 1 - count_points_naive(ainvs, p, 1)


def test_trace_of_identity_is_genus():
    for N in range(1, 624):
        if is_squarefree(N):
            assert trace_hecke(N, 1) == genus_x0(N), N


@pytest.mark.parametrize("N", sorted(GENUS_ONE))
def test_trace_matches_curve_coefficients(N):
    ainvs = GENUS_ONE[N]
    for p in primerange(2, 50):
        if N % p:
            assert trace_hecke(N, p) == naive_ap(ainvs, p), (N, p)


@pytest.mark.parametrize("N", sorted(GENUS_ONE))
def test_trace_at_prime_squares_on_genus_one(N):
    ainvs = GENUS_ONE[N]
    for p in primerange(2, 30):
        if N % p:
            a = naive_ap(ainvs, p)
            assert trace_hecke(N, p * p) == a * a - p


def test_point_counts_on_x0_11():
    for p in primerange(2, 50):
        if p == 11:
            continue
        for k in (1, 2):
            assert count_points_x0(11, p, k) == count_points_naive(GENUS_ONE[11], p, k), (p, k)


def test_curve_point_counts_match_naive():
    rec = _record(15, GENUS_ONE[15], torsion=8)
    for p in (2, 7, 11, 13):
        for k in (1, 2):
            assert count_points_ec(rec, p, k) == count_points_naive(rec.ainvs, p, k)


def test_trace_vanishes_in_genus_zero():
    for N in (1, 2, 3, 5, 6, 7, 10, 13):
        for m in (2, 3, 5, 9, 11):
            if m % N and all(m % q for q in (2, 3, 5, 7, 13) if N % q == 0):
                assert trace_hecke(N, m) == 0, (N, m)


def test_weil_bound_on_traces():
    for N in (37, 43, 53, 106, 222):
        g = genus_x0(N)
        for p in primerange(2, 40):
            if N % p:
                assert trace_hecke(N, p) ** 2 <= 4 * g * g * p


def test_point_counts_are_positive_and_hasse_weil():
    for N in (37, 65, 130, 222):
        g = genus_x0(N)
        for p in primerange(3, 30):
            if N % p == 0:
                continue
            for k in (1, 2):
                q = p ** k
                n = count_points_x0(N, p, k)
                assert n >= 0
                assert (n - q - 1) ** 2 <= 4 * g * g * q


def test_trace_rejects_bad_input():
    with pytest.raises(TraceError):
        trace_hecke(12, 5)
    with pytest.raises(TraceError):
        trace_hecke(22, 2)
    with pytest.raises(TraceError):
        count_points_x0(22, 11)
    with pytest.raises(TraceError):
        count_points_x0(22, 3, 3)


def test_sieve1_reports_first_violation():
    # 11a1 has 5 points over F_2 and F_4; X_0(407) has 8 and 46
    rec = _record(11, GENUS_ONE[11], torsion=5)
    assert count_points_x0(407, 2, 1) == 8 and count_points_x0(407, 2, 2) == 46
    assert sieve1_check(407, rec, (2, 3)) == (False, (2, 2))
    assert sieve1_check(11, rec, (2, 3, 5)) == (True, None)
