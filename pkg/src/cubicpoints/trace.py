"""Traces of Hecke operators on weight-2 cusp forms for Gamma_0(N) and point counts of X_0(N)."""

from __future__ import annotations

from functools import lru_cache
from math import gcd, isqrt

from sympy import isprime

from .arith import class_number, divisors, is_discriminant, is_squarefree, psi, units_count
from .ecdb import CurveRecord, ap
from .genus import genus_x0


class TraceError(ValueError):
    pass


def _class_weight12(D: int) -> int:
    """Twelve times h(D) weighted by 2/#units, so 12 for a generic order."""
    return 24 * class_number(D) // units_count(D)


def _root_count(t: int, m: int, modulus: int) -> int:
    return sum(1 for x in range(modulus) if (x * x - t * x + m) % modulus == 0)


def _embedding_count(t: int, f: int, m: int, N: int) -> int:
    """Local solution count at the level for the elliptic term, with conductor f."""
    Nf = gcd(N, f)
    # solutions modulo N*Nf averaged over lifts of residues modulo N
    count = _root_count(t, m, N * Nf)
    assert count % Nf == 0
    return psi(N) // psi(N // Nf) * (count // Nf)


def _elliptic_term24(N: int, m: int) -> int:
    """Twenty-four times the (negated) elliptic contribution, before halving."""
    total = 0
    t = 0
    while t * t < 4 * m:
        n = 4 * m - t * t
        inner = 0
        f = 1
        while f * f <= n:
            if n % (f * f) == 0 and is_discriminant(-(n // (f * f))):
                inner += _class_weight12(-(n // (f * f))) * _embedding_count(t, f, m, N)
            f += 1
        total += inner if t == 0 else 2 * inner
        t += 1
    return total


def _hyperbolic_term(N: int, m: int) -> int:
    """Twice the (negated) hyperbolic contribution."""
    total = 0
    for d in divisors(m):
        e = m // d
        local = 0
        for tau in divisors(N):
            g = gcd(tau, N // tau)
            if gcd(N, d - e) % g == 0:
                local += _euler_phi(g)
        total += min(d, e) * local
    return total


def _euler_phi(n: int) -> int:
    return sum(1 for k in range(1, n + 1) if gcd(k, n) == 1)


@lru_cache(maxsize=None)
def trace_hecke(N: int, m: int) -> int:
    """Trace of T_m on S_2(Gamma_0(N)) for square-free N and m coprime to N."""
    if N < 1 or not is_squarefree(N):
        raise TraceError(f"level must be square-free, got {N}")
    if m < 1 or gcd(m, N) != 1:
        raise TraceError(f"index {m} must be positive and coprime to the level {N}")
    # everything below is scaled by 12
    identity = psi(N) if isqrt(m) ** 2 == m else 0
    elliptic = -_elliptic_term24(N, m)
    hyperbolic = -6 * _hyperbolic_term(N, m)
    sigma = 12 * sum(divisors(m))
    total = identity + elliptic // 2 + hyperbolic + sigma
    if elliptic % 2 or total % 12:
        raise ArithmeticError(f"non-integral trace at N={N}, m={m}")
    return total // 12


def count_points_x0(N: int, p: int, k: int = 1) -> int:
    """Number of F_{p^k}-points on the reduction of X_0(N), k in {1, 2}."""
    if not isprime(p) or N % p == 0:
        raise TraceError(f"{p} must be a prime of good reduction for X_0({N})")
    if k == 1:
        return p + 1 - trace_hecke(N, p)
    if k == 2:
        return p * p + 1 + p * genus_x0(N) - trace_hecke(N, p * p)
    raise TraceError(f"only k = 1 or 2 is supported, got {k}")


def count_points_ec(curve: CurveRecord, p: int, k: int = 1) -> int:
    a = ap(curve, p)
    if k == 1:
        return p + 1 - a
    if k == 2:
        return p * p + 1 - (a * a - 2 * p)
    raise TraceError(f"only k = 1 or 2 is supported, got {k}")


def sieve1_check(N: int, curve: CurveRecord, primes) -> tuple[bool, tuple[int, int] | None]:
    """Check #X_0(N)(F_{p^k}) <= 6 #E(F_{p^k}) for the given primes and k = 1, 2.

    Returns ``(True, None)`` or ``(False, (p, k))`` for the first violation.
    """
    for p in primes:
        if N % p == 0:
            continue
        for k in (1, 2):
            if count_points_x0(N, p, k) > 6 * count_points_ec(curve, p, k):
                return False, (p, k)
    return True, None
