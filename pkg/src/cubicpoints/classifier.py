"""Decide whether X_0(N)/w_d has infinitely many cubic points over Q.

Low-gonality quotients are settled from the gonality tables and the bundled
models.  For the rest, infinitely many cubic points require a rational
degree-3 map to a positive-rank elliptic curve whose conductor divides N;
every such candidate is run through a fixed list of necessary conditions
(rules R1 to R8) and one sufficient construction (R9).
"""

from __future__ import annotations

import csv
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path

from .arith import exact_divisors, is_squarefree, omega, primes_up_to, psi
from .ecdb import CurveDB, CurveRecord, DataError, has_rational_two_torsion
from .genus import (
    check_index,
    degeneracy_degree,
    genus_biquotient,
    genus_quotient,
    has_fixed_points_on_quotient,
)
from .homlattice import GRAM_LEVEL_BOUND, PairError, gram_matrix, induced_degree, represents, validate_pair
from .lowgonality import DiagonalQuadric, SexticModel, degree3_exists_genus2, trigonal_over_Q
from .trace import sieve1_check

RULES = ("R1", "R2", "R3", "R4", "R5", "R6", "R7", "R8", "R9")
PSI_PRIME_BOUND = 97
POINT_COUNT_PRIMES = (2, 3, 5, 7, 11, 13)
SURVEY_BOUND = 623
SEARCH_HEIGHT = 10

INFINITE = "InfiniteCubic"
FINITE = "FiniteCubic"
OUT_OF_SCOPE = "OutOfScope"
UNDETERMINED = "Undetermined"

ADMISSIBLE = "Admissible"
NOT_ADMISSIBLE = "NotAdmissible"
INCONCLUSIVE = "Inconclusive"


# ---------------------------------------------------------------- ingested tables


@dataclass(frozen=True)
class GonalityTables:
    hyperelliptic: frozenset
    trigonal: frozenset
    bielliptic: frozenset
    models: dict = field(default_factory=dict, compare=False)
    quadrics: dict = field(default_factory=dict, compare=False)

    def _has(self, table, N, d):
        return any(row[0] == N and row[1] == d for row in table)

    def is_hyperelliptic(self, N, d):
        return self._has(self.hyperelliptic, N, d)

    def is_trigonal(self, N, d):
        return self._has(self.trigonal, N, d)

    def is_bielliptic(self, N, d):
        return self._has(self.bielliptic, N, d)

    def in_any(self, N, d):
        return self.is_hyperelliptic(N, d) or self.is_trigonal(N, d) or self.is_bielliptic(N, d)


def _data_path(name: str) -> Path:
    return Path(str(resources.files("cubicpoints") / "data" / name))


def load_tables(path=None, models_path=None, quadrics_path=None) -> GonalityTables:
    """Read the gonality tables and check every listed genus against the genus formula."""
    groups = {"hyp": set(), "trig": set(), "biell": set()}
    with open(path or _data_path("tables.tsv"), encoding="utf-8") as fh:
        for lineno, row in enumerate(csv.DictReader(fh, delimiter="\t"), start=2):
            try:
                N, d, g = int(row["N"]), int(row["d"]), int(row["genus"])
                groups[row["class"]].add((N, d, g))
            except (KeyError, ValueError, TypeError) as exc:
                raise DataError(f"tables line {lineno}: {exc!r}") from None
            if genus_quotient(N, d) != g:
                raise DataError(f"tables line {lineno}: genus of ({N}, {d}) is {genus_quotient(N, d)}, not {g}")
    return GonalityTables(
        frozenset(groups["hyp"]),
        frozenset(groups["trig"]),
        frozenset(groups["biell"]),
        load_models(models_path or _data_path("models.csv")),
        load_quadrics(quadrics_path or _data_path("quadrics.csv")),
    )


def load_models(path) -> dict:
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, row in enumerate(csv.DictReader(fh), start=2):
            try:
                N, d = int(row["N"]), int(row["d"])
                coeffs = tuple(int(row[f"c{i}"]) for i in range(6, -1, -1))
                model = SexticModel(coeffs, N, d, row.get("provenance") or "")
            except (KeyError, ValueError, TypeError) as exc:
                raise DataError(f"models line {lineno}: {exc!r}") from None
            if genus_quotient(N, d) != 2:
                raise DataError(f"models line {lineno}: ({N}, {d}) is not a genus-2 quotient")
            out[(N, d)] = model
    return out


def load_quadrics(path) -> dict:
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, row in enumerate(csv.DictReader(fh), start=2):
            try:
                N, d = int(row["N"]), int(row["d"])
                q = DiagonalQuadric(int(row["a"]), int(row["b"]), int(row["c"]), int(row["d4"]), N, d)
            except (KeyError, ValueError, TypeError) as exc:
                raise DataError(f"quadrics line {lineno}: {exc!r}") from None
            out[(N, d)] = q
    return out


# ---------------------------------------------------------------- admissibility of one triple


@dataclass(frozen=True)
class RuleOutcome:
    rule: str
    status: str  # "pass", "fail", "skip" or "construct"
    note: str

    def as_text(self) -> str:
        return f"{self.rule} {self.status}: {self.note}"


@dataclass(frozen=True)
class Admissibility:
    N: int
    d: int
    label: str
    verdict: str
    violated: tuple[str, ...]
    construction: str | None
    trace: tuple[RuleOutcome, ...]

    def to_dict(self) -> dict:
        return {
            "N": self.N,
            "d": self.d,
            "curve": self.label,
            "verdict": self.verdict,
            "violated": list(self.violated),
            "construction": self.construction,
            "trace": [o.as_text() for o in self.trace],
        }


def psi_bound_holds(N: int, p: int) -> bool:
    """(p - 1)/12 * psi(N) + 2^omega(N) <= 6 (p + 1)^2, cleared of denominators."""
    return (p - 1) * psi(N) + 12 * 2 ** omega(N) <= 72 * (p + 1) ** 2


def psi_bound_failure(N: int, bound: int = PSI_PRIME_BOUND) -> int | None:
    """The first prime p not dividing N (p <= bound) at which the psi bound fails."""
    for p in primes_up_to(bound):
        if N % p and not psi_bound_holds(N, p):
            return p
    return None


def class_has_two_torsion(db: CurveDB, curve: CurveRecord) -> bool:
    members = db.class_members(curve.isogeny_class) or [curve]
    return any(has_rational_two_torsion(c) for c in members)


def _descent_indices(curve: CurveRecord, d: int):
    """Indices r exactly dividing the conductor with r not in {1, d} and w_r = +1 on the curve."""
    return [r for r in exact_divisors(curve.conductor) if r not in (1, d) and curve.al_eigenvalue(r) == 1]


def _rule_r1(N, d, curve, ctx):
    if N % curve.conductor:
        return RuleOutcome("R1", "fail", f"conductor {curve.conductor} does not divide {N}")
    return RuleOutcome("R1", "pass", f"conductor {curve.conductor} divides {N}")


def _rule_r2(N, d, curve, ctx):
    if curve.conductor != N:
        return RuleOutcome("R2", "skip", "conductor is a proper divisor of the level")
    deg = ctx["db"].strong_curve(curve.isogeny_class).moddeg
    if 6 % deg:
        return RuleOutcome("R2", "fail", f"modular degree {deg} does not divide 6")
    return RuleOutcome("R2", "pass", f"modular degree {deg} divides 6")


def _rule_r3(N, d, curve, ctx):
    p = psi_bound_failure(N)
    if p is not None:
        return RuleOutcome("R3", "fail", f"psi bound fails at p={p}")
    return RuleOutcome("R3", "pass", f"psi bound holds for primes up to {PSI_PRIME_BOUND}")


def _rule_r4(N, d, curve, ctx):
    g = genus_quotient(N, d)
    for r in exact_divisors(N):
        if r in (1, d):
            continue
        g2 = genus_biquotient(N, d, r)
        if g > 2 * g2 + 5:
            return RuleOutcome("R4", "fail", f"genus {g} exceeds 2*{g2}+5 for w_{r}")
    return RuleOutcome("R4", "pass", "Castelnuovo-Severi bound holds for every w_r")


def _rule_r5(N, d, curve, ctx):
    ok, witness = sieve1_check(N, curve, ctx["primes"])
    if not ok:
        p, k = witness
        return RuleOutcome("R5", "fail", f"#X_0({N})(F_{p}^{k}) exceeds 6 #E")
    return RuleOutcome("R5", "pass", f"point counts compatible for primes {list(ctx['primes'])}")


def _rule_r6(N, d, curve, ctx):
    if class_has_two_torsion(ctx["db"], curve):
        return RuleOutcome("R6", "skip", "isogeny class has rational 2-torsion")
    rs = _descent_indices(curve, d)
    if rs:
        return RuleOutcome("R6", "fail", f"w_{rs[0]} acts as +1 and the class has no rational 2-torsion")
    return RuleOutcome("R6", "pass", "no index with eigenvalue +1 other than d")


def _rule_r7(N, d, curve, ctx):
    for r in _descent_indices(curve, d):
        if has_fixed_points_on_quotient(N, d, r):
            return RuleOutcome("R7", "fail", f"w_{r} acts as +1 and has fixed points on the quotient by w_{d}")
    return RuleOutcome("R7", "pass", "no eligible involution with fixed points")


def _fricke_pair(curve: CurveRecord, ctx):
    strong = ctx["db"].strong_curve(curve.isogeny_class)
    return validate_pair(strong, strong.conductor, strong.conductor)


def _rule_r8(N, d, curve, ctx):
    if d != curve.conductor:
        return RuleOutcome("R8", "skip", "index differs from the conductor")
    if N >= GRAM_LEVEL_BOUND:
        return RuleOutcome("R8", "skip", f"level {N} is at or above {GRAM_LEVEL_BOUND}")
    try:
        pair = _fricke_pair(curve, ctx)
    except PairError as exc:
        return RuleOutcome("R8", "skip", f"no valid pair: {exc}")
    lattice = gram_matrix(N, pair)
    witness = represents(lattice, 3)
    if witness is None:
        from .homlattice import quadratic_form_string

        return RuleOutcome("R8", "fail", f"degree form {quadratic_form_string(lattice)} never takes the value 3")
    return RuleOutcome("R8", "pass", f"degree form represents 3 at {list(witness)}")


def _rule_r9(N, d, curve, ctx):
    M = curve.conductor
    if d != M:
        return RuleOutcome("R9", "skip", "index differs from the conductor")
    try:
        pair = _fricke_pair(curve, ctx)
    except PairError as exc:
        return RuleOutcome("R9", "skip", f"no valid pair: {exc}")
    if genus_quotient(M, M) != 1:
        return RuleOutcome("R9", "skip", f"X_0({M})/w_{M} has genus {genus_quotient(M, M)}")
    total = degeneracy_degree(N, M) * induced_degree(pair)
    if total != 3:
        return RuleOutcome("R9", "skip", f"composite map has degree {total}")
    return RuleOutcome(
        "R9",
        "construct",
        f"X_0({N})/w_{d} -> X_0({M})/w_{M} = {pair.curve.label} has degree 3",
    )


_RULE_FUNCS = {
    "R1": _rule_r1,
    "R2": _rule_r2,
    "R3": _rule_r3,
    "R4": _rule_r4,
    "R5": _rule_r5,
    "R6": _rule_r6,
    "R7": _rule_r7,
    "R8": _rule_r8,
    "R9": _rule_r9,
}


class SoundnessError(RuntimeError):
    """A necessary condition failed for a triple that also has an explicit construction."""


def admissibility(
    N: int,
    d: int,
    curve: CurveRecord,
    db: CurveDB,
    tables: GonalityTables | None = None,
    *,
    rules=RULES,
    primes=POINT_COUNT_PRIMES,
) -> Admissibility:
    """Run the selected rules on the triple (N, d, curve) and combine them into a verdict."""
    check_index(N, d)
    db.require_complete(N)
    ctx = {"db": db, "primes": tuple(primes)}
    trace = tuple(_RULE_FUNCS[name](N, d, curve, ctx) for name in RULES if name in rules)
    violated = tuple(o.rule for o in trace if o.status == "fail")
    built = [o for o in trace if o.status == "construct"]
    if violated and built:
        raise SoundnessError(f"({N}, {d}, {curve.label}) violates {violated} yet {built[0].note}")
    if violated:
        verdict, construction = NOT_ADMISSIBLE, None
    elif built:
        verdict, construction = ADMISSIBLE, built[0].note
    else:
        verdict, construction = INCONCLUSIVE, None
    return Admissibility(N, d, curve.label, verdict, violated, construction, trace)


# ---------------------------------------------------------------- classification of a pair


@dataclass(frozen=True)
class Classification:
    N: int
    d: int
    genus: int
    verdict: str
    reason: str
    evidence: tuple[str, ...]

    def to_dict(self) -> dict:
        return {
            "N": self.N,
            "d": self.d,
            "genus": self.genus,
            "verdict": self.verdict,
            "reason": self.reason,
            "evidence": list(self.evidence),
        }


def candidate_curves(N: int, db: CurveDB) -> list[CurveRecord]:
    """Strong representatives of positive-rank isogeny classes with conductor dividing N."""
    return sorted(db.positive_rank_classes(N), key=lambda c: (c.conductor, c.label))


def _sweep(N, d, g, branch, db, tables, candidates, primes):
    if not candidates:
        return Classification(N, d, g, FINITE, f"{branch}: no positive-rank curve of conductor dividing {N}", ())
    results = [admissibility(N, d, c, db, tables, primes=primes) for c in candidates]
    results.sort(key=lambda a: a.label)
    evidence = []
    for a in results:
        if a.verdict == NOT_ADMISSIBLE:
            evidence.append(f"{a.label}: not admissible by {','.join(a.violated)}")
        elif a.verdict == ADMISSIBLE:
            evidence.append(f"{a.label}: admissible, {a.construction}")
        else:
            evidence.append(f"{a.label}: inconclusive after {','.join(o.rule for o in a.trace)}")
    admissible = [a for a in results if a.verdict == ADMISSIBLE]
    if admissible:
        return Classification(N, d, g, INFINITE, f"{branch}: degree-3 map to {admissible[0].label}", tuple(evidence))
    if all(a.verdict == NOT_ADMISSIBLE for a in results):
        return Classification(N, d, g, FINITE, f"{branch}: every candidate curve is excluded", tuple(evidence))
    open_labels = [a.label for a in results if a.verdict == INCONCLUSIVE]
    return Classification(N, d, g, UNDETERMINED, f"{branch}: undecided candidates {open_labels}", tuple(evidence))


def classify(
    N: int,
    d: int,
    db: CurveDB,
    tables: GonalityTables,
    *,
    primes=POINT_COUNT_PRIMES,
    candidate_order: random.Random | None = None,
) -> Classification:
    """Classify the quotient X_0(N)/w_d for square-free N and 1 < d < N."""
    check_index(N, d)
    if d in (1, N):
        raise ValueError("the index must satisfy 1 < d < N")
    g = genus_quotient(N, d)
    if g <= 1:
        return Classification(N, d, g, INFINITE, "B0: genus at most one with a rational cusp", ())
    if g == 2:
        model = tables.models.get((N, d))
        if model is not None:
            ok, tag = degree3_exists_genus2(model, SEARCH_HEIGHT)
            note = f"model {model.source or 'supplied'}: {tag}"
            return Classification(N, d, g, INFINITE, "B1: genus two", (note,))
        return Classification(N, d, g, INFINITE, "B1: genus two", ("no bundled model",))
    if N > db.complete_through:
        return Classification(N, d, g, OUT_OF_SCOPE, f"curve data ends at conductor {db.complete_through}", ())
    candidates = candidate_curves(N, db)
    if candidate_order is not None:
        candidate_order.shuffle(candidates)
    if tables.is_hyperelliptic(N, d):
        return _sweep(N, d, g, "B2", db, tables, candidates, primes)
    if tables.is_trigonal(N, d):
        if g == 3:
            return Classification(N, d, g, INFINITE, "B3: trigonal genus three, projection from the cusp", ())
        quadric = tables.quadrics.get((N, d))
        if quadric is None:
            return Classification(N, d, g, OUT_OF_SCOPE, "B4: trigonal genus four without a quadric", ())
        decision = trigonal_over_Q(quadric)
        if decision.trigonal_over_q:
            return Classification(N, d, g, INFINITE, "B4: quadric ruled over Q", (decision.describe(),))
        result = _sweep(N, d, g, "B4", db, tables, candidates, primes)
        return Classification(N, d, g, result.verdict, result.reason, (decision.describe(),) + result.evidence)
    if tables.is_bielliptic(N, d):
        return _sweep(N, d, g, "B5", db, tables, candidates, primes)
    return _sweep(N, d, g, "B6", db, tables, candidates, primes)


# ---------------------------------------------------------------- survey


def survey_pairs(n_max: int) -> list[tuple[int, int]]:
    return [
        (N, d)
        for N in range(2, n_max + 1)
        if is_squarefree(N)
        for d in exact_divisors(N)
        if 1 < d < N
    ]


def is_generic(N: int, d: int, tables: GonalityTables) -> bool:
    """Gonality at least four and no degree-2 map to an elliptic curve."""
    return genus_quotient(N, d) >= 2 and not tables.in_any(N, d)


def leftover_triples(db, tables, n_max=SURVEY_BOUND, rules=("R1", "R2", "R3", "R4", "R5", "R6", "R7")):
    """Generic triples that survive the selected necessary conditions."""
    out = []
    for N, d in survey_pairs(n_max):
        if not is_generic(N, d, tables):
            continue
        for c in candidate_curves(N, db):
            a = admissibility(N, d, c, db, tables, rules=rules)
            if not a.violated:
                out.append((N, d, c.label))
    return out


def leftover_levels(db, tables, n_max=SURVEY_BOUND):
    """Levels with a generic pair and a candidate passing the modular-degree and psi conditions."""
    return sorted({N for N, _, _ in leftover_triples(db, tables, n_max, rules=("R1", "R2", "R3"))})


def sieve_bound_check(n_from=SURVEY_BOUND, n_to=3 * SURVEY_BOUND) -> dict:
    failures = []
    for N in range(n_from + 1, n_to + 1):
        if not is_squarefree(N):
            continue
        p = next(q for q in primes_up_to(PSI_PRIME_BOUND) if N % q)
        if psi_bound_holds(N, p):
            failures.append(N)
    return {"from": n_from, "to": n_to, "ok": not failures, "exceptions": failures}


def _classify_star(args):
    N, d, db, tables, primes = args
    return classify(N, d, db, tables, primes=primes)


def run_survey(db, tables, n_max=SURVEY_BOUND, *, primes=POINT_COUNT_PRIMES, jobs=1) -> dict:
    """Classify every pair up to ``n_max`` and assemble the report."""
    pairs = survey_pairs(n_max)
    work = [(N, d, db, tables, primes) for N, d in pairs]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_classify_star, work, chunksize=16))
    else:
        results = [_classify_star(w) for w in work]
    infinite = {}
    for c in results:
        if c.verdict == INFINITE and c.genus >= 2:
            infinite.setdefault(str(c.genus), []).append([c.N, c.d])
    return {
        "pairs": [c.to_dict() for c in results],
        "infinite_by_genus": dict(sorted(infinite.items(), key=lambda kv: int(kv[0]))),
        "leftover_triples": [list(t) for t in leftover_triples(db, tables, n_max)],
        "leftover_levels": leftover_levels(db, tables, n_max),
        "sieve_bound_check": sieve_bound_check(SURVEY_BOUND, 3 * SURVEY_BOUND),
    }


def undetermined(report: dict) -> list[dict]:
    return [p for p in report["pairs"] if p["verdict"] == UNDETERMINED]


@lru_cache(maxsize=1)
def default_tables() -> GonalityTables:
    return load_tables()
