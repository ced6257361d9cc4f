"""Elementary arithmetic on integers and imaginary quadratic discriminants."""

from __future__ import annotations

from functools import lru_cache
from math import gcd, isqrt

from sympy import factorint, primerange


def prime_factors(n: int) -> list[int]:
    """Sorted distinct prime divisors of ``n`` (``n >= 1``)."""
    if n < 1:
        raise ValueError(f"prime_factors needs a positive integer, got {n}")
    return sorted(factorint(n))


def is_squarefree(n: int) -> bool:
    return n >= 1 and all(e == 1 for e in factorint(n).values())


def omega(n: int) -> int:
    """Number of distinct prime divisors."""
    return len(prime_factors(n))


def psi(n: int) -> int:
    """Dedekind psi: the index of Gamma_0(n) in SL_2(Z)."""
    result = n
    for p in prime_factors(n):
        result = result // p * (p + 1)
    return result


def exact_divisors(n: int) -> list[int]:
    """Divisors ``r`` of ``n`` with ``gcd(r, n // r) == 1``, ascending."""
    out = [1]
    for p, e in factorint(n).items():
        out += [r * p**e for r in out]
    return sorted(out)


def divisors(n: int) -> list[int]:
    out = [1]
    for p, e in factorint(n).items():
        out = [r * p**k for r in out for k in range(e + 1)]
    return sorted(out)


def primes_up_to(bound: int) -> list[int]:
    return list(primerange(2, bound + 1))


def kronecker(a: int, n: int) -> int:
    """Kronecker symbol (a | n) for arbitrary integers."""
    if n == 0:
        return 1 if abs(a) == 1 else 0
    result = 1
    if n < 0:
        n = -n
        if a < 0:
            result = -result
    v = 0
    while n % 2 == 0:
        n //= 2
        v += 1
    if v:
        if a % 2 == 0:
            return 0
        if v % 2 and a % 8 in (3, 5):
            result = -result
    # Jacobi symbol (a | n) for odd n > 0
    a %= n
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                result = -result
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            result = -result
        a %= n
    return result if n == 1 else 0


def is_discriminant(D: int) -> bool:
    return D % 4 in (0, 1)


@lru_cache(maxsize=None)
def class_number(D: int) -> int:
    """Number of reduced primitive positive definite forms of discriminant ``D < 0``."""
    if D >= 0 or not is_discriminant(D):
        raise ValueError(f"not a negative discriminant: {D}")
    count = 0
    a = 1
    while 3 * a * a <= -D:
        for b in range(-a + 1, a + 1):
            if (b - D) % 2:
                continue
            num = b * b - D
            if num % (4 * a):
                continue
            c = num // (4 * a)
            if c < a or (c == a and b < 0):
                continue
            if gcd(gcd(a, abs(b)), c) == 1:
                count += 1
        a += 1
    return count


def units_count(D: int) -> int:
    """Number of units in the imaginary quadratic order of discriminant ``D``."""
    return {-3: 6, -4: 4}.get(D, 2)


@lru_cache(maxsize=None)
def hurwitz12(n: int) -> int:
    """Twelve times the Hurwitz class number H(n); ``hurwitz12(0) == -1``."""
    if n == 0:
        return -1
    if n < 0 or n % 4 in (1, 2):
        return 0
    total = 0
    f = 1
    while f * f <= n:
        if n % (f * f) == 0 and is_discriminant(-(n // (f * f))):
            D = -(n // (f * f))
            total += 24 * class_number(D) // units_count(D)
        f += 1
    return total


def is_square(n: int) -> bool:
    return n >= 0 and isqrt(n) ** 2 == n
