"""Elliptic curves of small square-free conductor: records, lookups and point counts."""

from __future__ import annotations

import csv
import io
import json
import os
import re
import urllib.error
import urllib.parse
import urllib.request
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from sympy import isprime

from .arith import kronecker, prime_factors

HEADER = ["label", "conductor", "a1", "a2", "a3", "a4", "a6", "rank", "torsion", "moddeg", "al", "strong"]
LABEL_RE = re.compile(r"^(\d+)([a-z]+)(\d+)$")
LMFDB_URL = "https://www.lmfdb.org/api/ec_curvedata/"
FETCH_TIMEOUT = 10


class DataError(Exception):
    """Malformed, inconsistent or incomplete curve data."""


class BadReductionError(ValueError):
    pass


class FetchError(Exception):
    """Network or schema failure while fetching a record."""


@dataclass(frozen=True)
class CurveRecord:
    label: str
    conductor: int
    ainvs: tuple[int, int, int, int, int]
    rank: int
    torsion: int
    moddeg: int
    al: tuple[tuple[int, int], ...]
    strong: bool

    @property
    def isogeny_class(self) -> str:
        m = LABEL_RE.match(self.label)
        return m.group(1) + m.group(2) if m else self.label

    def al_eigenvalue(self, r: int) -> int:
        """Eigenvalue of w_r on the newform; composite r multiplies prime eigenvalues."""
        if r < 1 or self.conductor % r:
            raise ValueError(f"{r} does not divide the conductor {self.conductor} of {self.label}")
        table = dict(self.al)
        out = 1
        for q in prime_factors(r) if r > 1 else []:
            out *= table[q]
        return out

    def b_invariants(self) -> tuple[int, int, int]:
        a1, a2, a3, a4, a6 = self.ainvs
        return a1 * a1 + 4 * a2, 2 * a4 + a1 * a3, a3 * a3 + 4 * a6

    def discriminant(self) -> int:
        a1, a2, a3, a4, a6 = self.ainvs
        b2, b4, b6 = self.b_invariants()
        b8 = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4
        return -b2 * b2 * b8 - 8 * b4 ** 3 - 27 * b6 * b6 + 9 * b2 * b4 * b6


@dataclass
class CurveDB:
    records: list[CurveRecord]
    complete_through: int = 0
    squarefree_only: bool = False
    by_label: dict[str, CurveRecord] = field(init=False)
    by_conductor: dict[int, list[CurveRecord]] = field(init=False)

    def __post_init__(self):
        self.by_label = {}
        self.by_conductor = {}
        for rec in self.records:
            if rec.label in self.by_label:
                raise DataError(f"duplicate label {rec.label}")
            self.by_label[rec.label] = rec
            self.by_conductor.setdefault(rec.conductor, []).append(rec)

    def __len__(self):
        return len(self.records)

    def __getitem__(self, label: str) -> CurveRecord:
        try:
            return self.by_label[label]
        except KeyError:
            raise KeyError(f"no curve labelled {label!r}") from None

    def require_complete(self, N: int) -> None:
        if N > self.complete_through:
            raise DataError(f"curve data is complete only through conductor {self.complete_through}, need {N}")

    def conductor_divisors(self, N: int) -> list[CurveRecord]:
        self.require_complete(N)
        return [r for M, recs in sorted(self.by_conductor.items()) if N % M == 0 for r in recs]

    def positive_rank_curves(self, N: int) -> list[CurveRecord]:
        return [r for r in self.conductor_divisors(N) if r.rank >= 1]

    def strong_curve(self, isogeny_class: str) -> CurveRecord:
        for rec in self.records:
            if rec.isogeny_class == isogeny_class and rec.strong:
                return rec
        raise DataError(f"no strong curve recorded for class {isogeny_class}")

    def class_members(self, isogeny_class: str) -> list[CurveRecord]:
        return [r for r in self.records if r.isogeny_class == isogeny_class]

    def positive_rank_classes(self, N: int) -> list[CurveRecord]:
        """One strong representative per positive-rank isogeny class with conductor dividing N."""
        return [r for r in self.positive_rank_curves(N) if r.strong]


# ---------------------------------------------------------------- loading


def _parse_al(text: str, lineno: int) -> tuple[tuple[int, int], ...]:
    out = []
    for part in filter(None, text.split(";")):
        q, _, e = part.partition(":")
        if e not in ("+1", "-1") or not q.isdigit():
            raise DataError(f"line {lineno}: bad Atkin-Lehner entry {part!r}")
        out.append((int(q), int(e)))
    return tuple(out)


def parse_row(row: list[str], lineno: int) -> CurveRecord:
    if len(row) != len(HEADER):
        raise DataError(f"line {lineno}: expected {len(HEADER)} fields, got {len(row)}")
    try:
        label = row[0]
        conductor, a1, a2, a3, a4, a6, rank, torsion, moddeg = (int(x) for x in row[1:10])
        strong = {"0": False, "1": True}[row[11]]
    except (ValueError, KeyError) as exc:
        raise DataError(f"line {lineno}: {exc}") from None
    m = LABEL_RE.match(label)
    if not m or int(m.group(1)) != conductor:
        raise DataError(f"line {lineno}: label {label!r} does not match conductor {conductor}")
    rec = CurveRecord(label, conductor, (a1, a2, a3, a4, a6), rank, torsion, moddeg, _parse_al(row[10], lineno), strong)
    if sorted(q for q, _ in rec.al) != prime_factors(conductor):
        raise DataError(f"line {lineno}: Atkin-Lehner primes do not match the conductor of {label}")
    if rec.discriminant() == 0:
        raise DataError(f"line {lineno}: singular model for {label}")
    return rec


def load_db(source) -> CurveDB:
    """Parse curve CSV from a path, a text stream or a byte stream."""
    if isinstance(source, (str, Path)):
        with open(source, "rb") as fh:
            return load_db(fh)
    data = source.read()
    text = data.decode("utf-8") if isinstance(data, bytes) else data
    meta = {}
    records = []
    header_seen = False
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        if line.startswith("#"):
            for item in line[1:].split():
                key, _, value = item.partition("=")
                meta[key] = value
            continue
        row = next(csv.reader([line]))
        if not header_seen:
            if row != HEADER:
                raise DataError(f"line {lineno}: unexpected header {row}")
            header_seen = True
            continue
        records.append(parse_row(row, lineno))
    if not header_seen:
        raise DataError("missing header")
    try:
        complete = int(meta.get("complete_through", 0))
    except ValueError:
        raise DataError("bad complete_through value") from None
    db = CurveDB(records, complete, meta.get("squarefree_only") == "1")
    for rec in records:
        check_record(rec)
    return db


def check_record(rec: CurveRecord) -> None:
    if has_rational_two_torsion(rec) != (rec.torsion % 2 == 0):
        raise DataError(f"{rec.label}: 2-torsion disagrees with torsion order {rec.torsion}")


def bundled_csv_path() -> Path:
    return Path(str(resources.files("cubicpoints") / "data" / "curves.csv"))


_DEFAULT = None


def default_db() -> CurveDB:
    """The database named by CUBICPOINTS_DB, or the bundled table."""
    global _DEFAULT
    path = os.environ.get("CUBICPOINTS_DB")
    if path:
        return load_db(path)
    if _DEFAULT is None:
        _DEFAULT = load_db(bundled_csv_path())
    return _DEFAULT


# ---------------------------------------------------------------- arithmetic of a record


def frobenius_trace(ainvs, p: int) -> int:
    """p minus the number of affine points of the reduction mod p (any p)."""
    a1, a2, a3, a4, a6 = (x % p for x in ainvs)
    if p == 2:
        count = sum(
            1
            for x in range(2)
            for y in range(2)
            if (y * y + a1 * x * y + a3 * y - x ** 3 - a2 * x * x - a4 * x - a6) % 2 == 0
        )
        return p - count
    b2, b4, b6 = a1 * a1 + 4 * a2, 2 * a4 + a1 * a3, a3 * a3 + 4 * a6
    count = 0
    for x in range(p):
        count += 1 + kronecker(4 * x ** 3 + b2 * x * x + 2 * b4 * x + b6, p)
    return p - count


def ap(curve: CurveRecord, p: int) -> int:
    if not isprime(p):
        raise ValueError(f"{p} is not prime")
    if curve.conductor % p == 0:
        raise BadReductionError(f"{curve.label} has bad reduction at {p}")
    return frobenius_trace(curve.ainvs, p)


def an(curve: CurveRecord, n: int) -> int:
    from math import gcd

    if n < 1 or gcd(n, curve.conductor) != 1:
        raise ValueError(f"a_n needs n >= 1 coprime to {curve.conductor}, got {n}")
    result = 1
    m = n
    for p in prime_factors(n) if n > 1 else []:
        e = 0
        while m % p == 0:
            m //= p
            e += 1
        a = ap(curve, p)
        prev, cur = 1, a
        for _ in range(e - 1):
            prev, cur = cur, a * cur - p * prev
        result *= cur
    return result


def has_rational_two_torsion(curve: CurveRecord) -> bool:
    # x = u/4 turns 4x^3 + b2 x^2 + 2 b4 x + b6 into the monic u^3 + b2 u^2 + 8 b4 u + 16 b6
    b2, b4, b6 = curve.b_invariants()
    coeffs = (1, b2, 8 * b4, 16 * b6)
    return any(_eval(coeffs, u) == 0 for u in _integer_root_candidates(coeffs))


def _eval(coeffs, x):
    out = 0
    for c in coeffs:
        out = out * x + c
    return out


def _integer_root_candidates(coeffs):
    import numpy as np

    roots = np.roots([float(c) for c in coeffs])
    seen = set()
    for r in roots:
        if abs(r.imag) > 1e-6 * max(1.0, abs(r.real)):
            continue
        base = int(round(r.real))
        for u in (base - 1, base, base + 1):
            if u not in seen:
                seen.add(u)
                yield u


# ---------------------------------------------------------------- optional LMFDB access


def cache_dir() -> Path:
    return Path(os.environ.get("CUBICPOINTS_CACHE", Path.home() / ".cache" / "cubicpoints"))


def record_from_lmfdb(entry: dict) -> CurveRecord:
    try:
        label = entry["Clabel"]
        ainvs = tuple(int(x) for x in entry["ainvs"])
        conductor = int(entry["conductor"])
        rank = int(entry["rank"])
        torsion = int(entry["torsion"])
        moddeg = int(entry["degree"])
    except (KeyError, TypeError, ValueError) as exc:
        raise FetchError(f"unexpected LMFDB record layout: {exc!r}") from None
    if len(ainvs) != 5:
        raise FetchError("unexpected LMFDB record layout: ainvs")
    optimality = entry.get("optimality")
    strong = optimality == 1 if optimality is not None else label.endswith("1")
    al = tuple((q, -frobenius_trace(ainvs, q)) for q in prime_factors(conductor))
    return CurveRecord(label, conductor, ainvs, rank, torsion, moddeg, al, strong)


def lmfdb_fetch(label: str, *, opener=urllib.request.urlopen, cache: Path | None = None) -> CurveRecord:
    """Fetch one curve by Cremona label, caching the raw JSON response."""
    if not LABEL_RE.match(label):
        raise ValueError(f"not a curve label: {label!r}")
    cache = cache if cache is not None else cache_dir()
    path = cache / f"{label}.json"
    if path.exists():
        payload = json.loads(path.read_text(encoding="utf-8"))
    else:
        query = urllib.parse.urlencode({"Clabel": label, "_format": "json"})
        try:
            with opener(f"{LMFDB_URL}?{query}", timeout=FETCH_TIMEOUT) as resp:
                payload = json.loads(resp.read().decode("utf-8"))
        except (urllib.error.URLError, TimeoutError, OSError) as exc:
            raise FetchError(f"could not reach LMFDB: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise FetchError(f"LMFDB returned invalid JSON: {exc}") from exc
        cache.mkdir(parents=True, exist_ok=True)
        tmp = path.with_suffix(".tmp")
        tmp.write_text(json.dumps(payload), encoding="utf-8")
        tmp.replace(path)
    data = payload.get("data") if isinstance(payload, dict) else None
    if data is None:
        raise FetchError("unexpected LMFDB response layout: no 'data' field")
    if not data:
        raise KeyError(f"LMFDB has no curve labelled {label!r}")
    return record_from_lmfdb(data[0])


def to_csv_row(rec: CurveRecord) -> str:
    buf = io.StringIO()
    al = ";".join(f"{q}:{'+1' if e > 0 else '-1'}" for q, e in rec.al)
    csv.writer(buf, lineterminator="\n").writerow(
        [rec.label, rec.conductor, *rec.ainvs, rec.rank, rec.torsion, rec.moddeg, al, int(rec.strong)]
    )
    return buf.getvalue()
