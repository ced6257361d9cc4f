"""Generate src/cubicpoints/data/curves.csv from weight-2 modular symbols.

For every square-free conductor up to the bound we find the rational
newforms, recover the optimal curve from its period lattice, and close
the isogeny class under prime-degree isogenies.  Every record is checked
against the newform coefficients by point counting before it is written.

Usage: python3 tools/build_curves.py [--bound 623] [--jobs 4] [--out PATH]
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

sys.path.insert(0, os.path.dirname(__file__))

import mpmath  # noqa: E402
from joblib import Parallel, delayed  # noqa: E402
from sympy import primerange  # noqa: E402

import ellcurve as ec  # noqa: E402
from cubicpoints.arith import is_squarefree  # noqa: E402
from newforms import (  # noqa: E402
    Level,
    analytic_rank,
    c4c6_from_periods,
    choose_twists,
    cycle_lattice,
    modular_degree,
    periods,
    terms_needed,
)

CHECK_BOUND = 200
ISOGENY_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 37)


def optimal_curve(level, f, twists, lattice):
    last = None
    for digits in (16, 30, 60):
        need = max(terms_needed(level.N, D, digits) for D, _ in twists.values())
        level.fill_ap(f, max(need, CHECK_BOUND))
        alpha, beta = periods(f, twists, digits)
        c4, c6 = c4c6_from_periods(alpha, beta, lattice, digits)
        r4, r6 = int(mpmath.nint(c4.real)), int(mpmath.nint(c6.real))
        err = max(abs(c4 - r4), abs(c6 - r6))
        last = (r4, r6, float(err))
        if err > 0.05 or not ec.kraus_ok(r4, r6):
            continue
        a = ec.c4c6_to_ai(r4, r6)
        if matches(a, level.N, f):
            return a
    raise RuntimeError(f"level {level.N}: could not recover a model from periods {last}")


def matches(a, N, f) -> bool:
    if ec.conductor_semistable(a) != N:
        return False
    if ec.minimal_model(a) != a:
        return False
    return all(ec.ap(a, p) == f.ap[p] for p in primerange(2, CHECK_BOUND) if N % p)


def isogeny_class(opt, N, f):
    """All curves isogenous to ``opt`` with the degree of the cyclic isogeny from it."""
    candidates = [
        ell for ell in ISOGENY_PRIMES
        if all((f.ap[p] - 1 - p) % ell == 0 for p in primerange(3, CHECK_BOUND) if N % p and p != ell)
    ]
    found = {opt: 1}
    queue = [opt]
    while queue:
        E = queue.pop(0)
        for ell in candidates:
            for ker in ec.kernel_polynomials(E, ell):
                E2 = ec.kohel_isogenous(E, ker, ell)
                if E2 not in found:
                    if not matches(E2, N, f):
                        raise RuntimeError(f"level {N}: isogenous curve {E2} fails checks")
                    found[E2] = found[E] * ell
                    queue.append(E2)
    return found


def process_level(N: int):
    t0 = time.time()
    level = Level(N)
    out = []
    for f in level.rational_newforms():
        level.complete(f)
        lattice = cycle_lattice(level, f)
        deg = modular_degree(level, f, lattice)
        rank = analytic_rank(level, f)
        twists = choose_twists(level, f)
        opt = optimal_curve(level, f, twists, lattice)
        cls = isogeny_class(opt, N, f)
        curves = []
        for E, isog in cls.items():
            curves.append(
                {
                    "ainvs": list(E),
                    "torsion": ec.torsion_order(E),
                    "moddeg": deg * isog,
                    "isogeny_degree": isog,
                    "optimal": E == opt,
                }
            )
        out.append(
            {
                "conductor": N,
                "rank": rank,
                "al": {str(q): e for q, e in sorted(f.al.items())},
                "ap": [f.ap[p] for p in primerange(2, 100)],
                "curves": curves,
            }
        )
    return N, out, time.time() - t0


def label_classes(results):
    """Assign class letters by sorting on (a_2, a_3, a_5, ...) and number curves within a class."""
    rows = []
    for N in sorted(results):
        classes = sorted(results[N], key=lambda c: c["ap"])
        for i, cls in enumerate(classes):
            letter = _letters(i)
            cls["label"] = f"{N}{letter}"
            members = sorted(cls["curves"], key=lambda c: (not c["optimal"], c["isogeny_degree"], c["ainvs"]))
            for j, c in enumerate(members, start=1):
                al = ";".join(f"{q}:{'+1' if e > 0 else '-1'}" for q, e in cls["al"].items())
                a1, a2, a3, a4, a6 = c["ainvs"]
                rows.append(
                    f"{N}{letter}{j},{N},{a1},{a2},{a3},{a4},{a6},{cls['rank']},{c['torsion']},"
                    f"{c['moddeg']},{al},{1 if c['optimal'] else 0}"
                )
    return rows


def _letters(i: int) -> str:
    s = ""
    i += 1
    while i:
        i, r = divmod(i - 1, 26)
        s = chr(ord("a") + r) + s
    return s


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--bound", type=int, default=623)
    ap.add_argument("--jobs", type=int, default=4)
    ap.add_argument("--out", default=os.path.join(os.path.dirname(__file__), "..", "src", "cubicpoints", "data", "curves.csv"))
    ap.add_argument("--raw", default=os.path.join(os.path.dirname(__file__), ".cache", "newforms.json"))
    args = ap.parse_args(argv)
    levels = [N for N in range(11, args.bound + 1) if is_squarefree(N)]
    os.makedirs(os.path.dirname(args.raw), exist_ok=True)
    results = {}
    if os.path.exists(args.raw):
        with open(args.raw) as fh:
            results = {int(k): v for k, v in json.load(fh).items()}
    todo = [N for N in levels if N not in results]
    # largest levels first so the pool stays busy
    todo.sort(reverse=True)
    for N, forms, dt in Parallel(n_jobs=args.jobs, return_as="generator_unordered")(delayed(process_level)(N) for N in todo):
        results[N] = forms
        print(f"{N}: {len(forms)} classes, {sum(len(c['curves']) for c in forms)} curves ({dt:.1f}s)", flush=True)
        with open(args.raw, "w") as fh:
            json.dump(results, fh)
    rows = label_classes({N: results[N] for N in levels})
    with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"# complete_through={args.bound} squarefree_only=1\n")
        fh.write("label,conductor,a1,a2,a3,a4,a6,rank,torsion,moddeg,al,strong\n")
        for r in rows:
            fh.write(r + "\n")
    print(f"wrote {len(rows)} curves to {args.out}")


if __name__ == "__main__":
    main()
