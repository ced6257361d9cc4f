"""Genera of X_0(N) and of its Atkin-Lehner quotients for square-free N."""

from __future__ import annotations

from math import gcd, prod

from .arith import class_number, is_squarefree, kronecker, omega, prime_factors, psi


class LevelError(ValueError):
    """Raised for a level or Atkin-Lehner index outside the supported range."""


def check_level(N: int) -> None:
    if not isinstance(N, int) or N < 1 or not is_squarefree(N):
        raise LevelError(f"level must be a square-free positive integer, got {N!r}")


def check_index(N: int, d: int) -> None:
    check_level(N)
    if not isinstance(d, int) or d < 1 or N % d:
        raise LevelError(f"{d!r} is not a divisor of {N}")


def genus_x0(N: int) -> int:
    check_level(N)
    nu2 = prod(1 + kronecker(-4, p) for p in prime_factors(N))
    nu3 = prod(1 + kronecker(-3, p) for p in prime_factors(N))
    twelve_g = 12 + psi(N) - 3 * nu2 - 4 * nu3 - 6 * 2 ** omega(N)
    assert twelve_g % 12 == 0, N
    return twelve_g // 12


def _local_count(D: int, M: int) -> int:
    """Product over p | M of the local optimal-embedding counts for discriminant D."""

    def local(p: int) -> int:
        # 2 divides the conductor of Z[sqrt(-d)] when d = 3 mod 4
        if p == 2 and D % 16 == 4:
            return 2
        return 1 + kronecker(D, p)

    return prod(local(p) for p in prime_factors(M))


def fixed_points(N: int, d: int) -> int:
    """Number of fixed points of the involution w_d on X_0(N), ``d > 1``."""
    check_index(N, d)
    if d == 1:
        raise LevelError("w_1 is the identity")
    M = N // d
    if d == 2:
        return class_number(-4) * _local_count(-4, M) + class_number(-8) * _local_count(-8, M)
    if d == 3:
        return class_number(-3) * _local_count(-3, M) + class_number(-12) * _local_count(-12, M)
    count = class_number(-4 * d) * _local_count(-4 * d, M)
    if d % 4 == 3:
        count += class_number(-d) * _local_count(-d, M)
    return count


def genus_quotient(N: int, d: int) -> int:
    """Genus of X_0(N)/w_d."""
    if d == 1:
        check_level(N)
        return genus_x0(N)
    twice_euler = 2 * genus_x0(N) + 2 - fixed_points(N, d)
    if twice_euler % 4:
        raise ArithmeticError(f"Riemann-Hurwitz parity failure at ({N}, {d})")
    return twice_euler // 4


def complementary_index(d: int, r: int) -> int:
    """The index t with w_d w_r = w_t."""
    return d * r // gcd(d, r) ** 2


def genus_biquotient(N: int, d: int, r: int) -> int:
    """Genus of X_0(N)/<w_d, w_r> for distinct nontrivial d, r."""
    check_index(N, d)
    check_index(N, r)
    t = complementary_index(d, r)
    if 1 in (d, r, t):
        raise LevelError("w_d and w_r must generate a group of order 4")
    total = 2 * genus_x0(N) - 2 - sum(fixed_points(N, e) for e in (d, r, t))
    if total % 4:
        raise ArithmeticError(f"Riemann-Hurwitz parity failure at ({N}, {d}, {r})")
    return (total // 4 + 2) // 2


def has_fixed_points_on_quotient(N: int, d: int, r: int) -> bool:
    """Whether w_r, acting on X_0(N)/w_d, has a fixed point."""
    g1 = genus_quotient(N, d)
    g2 = genus_biquotient(N, d, r)
    return 2 * g1 - 2 > 2 * (2 * g2 - 2)


def degeneracy_degree(N: int, M: int) -> int:
    """Degree of a degeneracy map X_0(N) -> X_0(M)."""
    check_level(N)
    if not isinstance(M, int) or M < 1 or N % M:
        raise LevelError(f"{M!r} does not divide {N}")
    return psi(N) // psi(M)
