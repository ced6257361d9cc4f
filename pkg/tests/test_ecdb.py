import io
import json
import urllib.error
from math import gcd

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from sympy import primerange

from cubicpoints.ecdb import (
    HEADER,
    BadReductionError,
    CurveRecord,
    DataError,
    FetchError,
    an,
    ap,
    frobenius_trace,
    has_rational_two_torsion,
    lmfdb_fetch,
    load_db,
    record_from_lmfdb,
    to_csv_row,
)

from .oracles import count_points_naive

ROWS = [
    "11a1,11,0,-1,1,-10,-20,0,5,1,11:-1,1",
    "11a2,11,0,-1,1,-7820,-263580,0,1,5,11:-1,0",
    "11a3,11,0,-1,1,0,0,0,5,5,11:-1,0",
    "14a1,14,1,0,1,4,-6,0,6,1,2:+1;7:-1,1",
    "37a1,37,0,0,1,-1,0,1,1,2,37:+1,1",
]


def make_csv(rows=ROWS, meta="# complete_through=40 squarefree_only=1"):
    return "\n".join([meta, ",".join(HEADER), *rows]) + "\n"


@pytest.fixture
def db():
    return load_db(io.StringIO(make_csv()))


def test_load_and_lookup(db):
    assert len(db) == 5
    assert db.complete_through == 40 and db.squarefree_only
    assert db["37a1"].rank == 1
    assert [r.label for r in db.positive_rank_classes(37)] == ["37a1"]
    assert [r.label for r in db.conductor_divisors(22)] == ["11a1", "11a2", "11a3"]
    assert db.strong_curve("11a").label == "11a1"
    assert len(db.class_members("11a")) == 3


def test_byte_stream_and_path(tmp_path):
    path = tmp_path / "c.csv"
    path.write_text(make_csv(), encoding="utf-8")
    assert len(load_db(path)) == len(load_db(io.BytesIO(path.read_bytes()))) == 5


def test_missing_label_is_key_error(db):
    with pytest.raises(KeyError):
        db["99z9"]


def test_incomplete_range_is_data_error(db):
    with pytest.raises(DataError):
        db.conductor_divisors(41)


@pytest.mark.parametrize(
    "rows",
    [
        ROWS + ["37a1,37,0,0,1,-1,0,1,1,2,37:+1,1"],  # duplicate
        ["37a1,38,0,0,1,-1,0,1,1,2,37:+1,1"],  # label/conductor mismatch
        ["37a1,37,0,0,1,-1,0,1,1,2,37:1,1"],  # malformed sign
        ["37a1,37,0,0,1,-1,0,1,1,2,2:+1,1"],  # wrong bad primes
        ["37a1,37,0,0,0,0,0,1,1,2,37:+1,1"],  # singular
        ["37a1,37,0,0,1,-1,0,1,2,2,37:+1,1"],  # claims 2-torsion
        ["37a1,37,0,0,1,-1,x,1,1,2,37:+1,1"],
        ["37a1,37,0,0,1,-1,0,1,1,2,37:+1"],
    ],
)
def test_malformed_rows(rows):
    with pytest.raises(DataError):
        load_db(io.StringIO(make_csv(rows)))


def test_bad_header():
    with pytest.raises(DataError):
        load_db(io.StringIO("label,conductor\n"))
    with pytest.raises(DataError):
        load_db(io.StringIO(""))


def test_al_eigenvalues(db):
    E = db["14a1"]
    assert E.al_eigenvalue(1) == 1
    assert E.al_eigenvalue(14) == -1
    with pytest.raises(ValueError):
        E.al_eigenvalue(3)


def test_frobenius_trace_matches_naive(db):
    for rec in db.records:
        for p in primerange(2, 40):
            if rec.conductor % p:
                assert ap(rec, p) == p + 1 - count_points_naive(rec.ainvs, p, 1)


def test_hasse_bound(db):
    for rec in db.records:
        for p in primerange(2, 200):
            if rec.conductor % p:
                assert ap(rec, p) ** 2 <= 4 * p


def test_isogenous_curves_share_traces(db):
    for p in primerange(2, 100):
        if p != 11:
            assert ap(db["11a1"], p) == ap(db["11a2"], p) == ap(db["11a3"], p)


def test_bad_reduction_rejected(db):
    with pytest.raises(BadReductionError):
        ap(db["11a1"], 11)
    with pytest.raises(ValueError):
        ap(db["11a1"], 9)


def test_split_multiplicative_sign(db):
    # the Atkin-Lehner eigenvalue is minus the trace at the bad prime
    for rec in db.records:
        for q, e in rec.al:
            assert frobenius_trace(rec.ainvs, q) == -e


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 60), st.integers(1, 60))
def test_an_multiplicative(m, n):
    rec = CurveRecord("37a1", 37, (0, 0, 1, -1, 0), 1, 1, 2, ((37, 1),), True)
    if gcd(m, n) == 1 and gcd(m * n, 37) == 1:
        assert an(rec, m * n) == an(rec, m) * an(rec, n)


def test_an_prime_powers(db):
    E = db["37a1"]
    for p in (2, 3, 5):
        a = ap(E, p)
        assert an(E, p * p) == a * a - p
        assert an(E, p ** 3) == a * an(E, p * p) - p * a
    with pytest.raises(ValueError):
        an(E, 37)


def test_two_torsion(db):
    assert has_rational_two_torsion(db["14a1"])
    assert not has_rational_two_torsion(db["11a1"])
    assert not has_rational_two_torsion(db["37a1"])


def test_csv_round_trip(db):
    text = make_csv([to_csv_row(r).strip() for r in db.records])
    assert load_db(io.StringIO(text)).records == db.records


# ---------------------------------------------------------------- LMFDB client, no network


LMFDB_37A1 = {
    "data": [
        {"Clabel": "37a1", "ainvs": [0, 0, 1, -1, 0], "conductor": 37, "rank": 1,
         "torsion": 1, "degree": 2, "optimality": 1}
    ]
}


class FakeResponse(io.BytesIO):
    def __enter__(self):
        return self

    def __exit__(self, *exc):
        return False


def opener_for(payload, calls):
    def opener(url, timeout):
        calls.append((url, timeout))
        return FakeResponse(json.dumps(payload).encode())
    return opener


def test_fetch_parses_and_caches(tmp_path):
    calls = []
    rec = lmfdb_fetch("37a1", opener=opener_for(LMFDB_37A1, calls), cache=tmp_path)
    assert rec.ainvs == (0, 0, 1, -1, 0) and rec.moddeg == 2 and rec.al == ((37, 1),) and rec.strong
    assert "Clabel=37a1" in calls[0][0] and calls[0][1] > 0
    again = lmfdb_fetch("37a1", opener=opener_for({}, calls), cache=tmp_path)
    assert again == rec and len(calls) == 1


def test_fetch_network_failure(tmp_path):
    def opener(url, timeout):
        raise urllib.error.URLError("offline")

    with pytest.raises(FetchError):
        lmfdb_fetch("37a1", opener=opener, cache=tmp_path)


def test_fetch_schema_drift(tmp_path):
    with pytest.raises(FetchError):
        lmfdb_fetch("37a1", opener=opener_for({"rows": []}, []), cache=tmp_path)
    with pytest.raises(FetchError):
        record_from_lmfdb({"Clabel": "37a1", "ainvs": [0, 0, 1, -1, 0]})


def test_fetch_unknown_label(tmp_path):
    with pytest.raises(KeyError):
        lmfdb_fetch("37z9", opener=opener_for({"data": []}, []), cache=tmp_path)
    with pytest.raises(ValueError):
        lmfdb_fetch("not a label", cache=tmp_path)
