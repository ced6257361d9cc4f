"""Degree pairing lattices on maps from Atkin-Lehner quotients to elliptic curves.

For a strong Weil curve E of conductor M on which the Fricke involution acts
trivially, the compositions of the induced map X_0(M)/w_M -> E with the
degeneracy maps from level N give a basis of the maps from the quotient of
level N.  The degree of an integer combination is a positive-definite
quadratic form in the coefficients; this module builds and queries it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .arith import divisors, psi
from .ecdb import CurveRecord, an, has_rational_two_torsion
from .genus import check_index, check_level, fixed_points

# the basis statement is only available below this level
GRAM_LEVEL_BOUND = 408


class PairError(ValueError):
    """The curve and index do not form a valid pair; ``reason`` names the failed condition."""

    def __init__(self, reason: str, message: str):
        super().__init__(message)
        self.reason = reason


class OutOfGuarantee(ValueError):
    pass


class LatticeError(ArithmeticError):
    pass


@dataclass(frozen=True)
class ErPair:
    curve: CurveRecord
    r: int
    M: int


@dataclass(frozen=True)
class HomLattice:
    level: int
    pair: ErPair
    basis: tuple[int, ...]
    gram: tuple[tuple[int, ...], ...]

    @property
    def rank(self) -> int:
        return len(self.basis)


def validate_pair(curve: CurveRecord, r: int, M: int) -> ErPair:
    if curve.conductor != M:
        raise PairError("conductor", f"{curve.label} has conductor {curve.conductor}, not {M}")
    check_index(M, r)
    if r == 1:
        raise PairError("index", "the index must be a nontrivial exact divisor")
    if curve.al_eigenvalue(r) != 1:
        raise PairError("eigenvalue", f"w_{r} acts as -1 on {curve.label}")
    if r < M and has_rational_two_torsion(curve) and fixed_points(M, r) == 0:
        raise PairError(
            "two-torsion",
            f"{curve.label} has rational 2-torsion and w_{r} has no fixed point on X_0({M})",
        )
    return ErPair(curve, r, M)


def induced_degree(pair: ErPair) -> int:
    """Degree of the map X_0(M)/w_r -> E induced by the modular parametrization."""
    deg = pair.curve.moddeg
    if deg % 2:
        raise LatticeError(f"odd modular degree {deg} for {pair.curve.label} cannot descend to a quotient")
    return deg // 2


def gram_matrix(N: int, pair: ErPair) -> HomLattice:
    check_level(N)
    M = pair.M
    if N % M:
        raise ValueError(f"conductor {M} does not divide {N}")
    if pair.r != M:
        raise ValueError("only the Fricke index r = M is supported")
    if N >= GRAM_LEVEL_BOUND:
        raise OutOfGuarantee(f"level {N} is at or above {GRAM_LEVEL_BOUND}; the degeneracy basis is not guaranteed")
    deg = induced_degree(pair)
    basis = tuple(divisors(N // M))
    rows = []
    for d1 in basis:
        row = []
        for d2 in basis:
            g = math.gcd(d1, d2)
            lcm = d1 * d2 // g
            num = psi(N)
            den = psi(M * lcm // g)
            if num % den:
                raise LatticeError(f"non-integral pairing at ({d1}, {d2})")
            row.append(deg * an(pair.curve, d1 * d2 // (g * g)) * (num // den))
        rows.append(tuple(row))
    return HomLattice(N, pair, basis, tuple(rows))


def ldl(gram) -> list[Fraction]:
    """Pivots of the LDL^T factorization; raises if the matrix is not positive definite."""
    n = len(gram)
    A = [[Fraction(x) for x in row] for row in gram]
    pivots = []
    for k in range(n):
        if A[k][k] <= 0:
            raise LatticeError("Gram matrix is not positive definite")
        pivots.append(A[k][k])
        for i in range(k + 1, n):
            factor = A[i][k] / A[k][k]
            for j in range(k + 1, n):
                A[i][j] -= factor * A[k][j]
    return pivots


def _cholesky_upper(gram):
    """q[i][i] and q[i][j] with x^T G x = sum_i q_ii (x_i + sum_{j>i} q_ij x_j)^2."""
    n = len(gram)
    q = [[Fraction(gram[i][j]) for j in range(n)] for i in range(n)]
    for i in range(n):
        if q[i][i] <= 0:
            raise LatticeError("Gram matrix is not positive definite")
        for j in range(i + 1, n):
            q[j][i] = q[i][j]
            q[i][j] = q[i][j] / q[i][i]
        for k in range(i + 1, n):
            for l in range(k, n):
                q[k][l] -= q[k][i] * q[i][l]
    return q


def short_vectors(gram, m: int):
    """All integer vectors x with x^T G x == m, by Fincke-Pohst enumeration."""
    n = len(gram)
    q = _cholesky_upper(gram)
    x = [0] * n
    out = []

    def recurse(i, remaining):
        centre = -sum(q[i][j] * x[j] for j in range(i + 1, n))
        radius = remaining / q[i][i]
        lo = math.ceil(centre - _sqrt_upper(radius))
        hi = math.floor(centre + _sqrt_upper(radius))
        for xi in range(lo, hi + 1):
            used = q[i][i] * (xi - centre) ** 2
            if used > remaining:
                continue
            x[i] = xi
            if i == 0:
                if remaining - used == 0:
                    out.append(tuple(x))
            else:
                recurse(i - 1, remaining - used)
        x[i] = 0

    recurse(n - 1, Fraction(m))
    return out


def _sqrt_upper(value: Fraction) -> Fraction:
    # a rational upper bound for sqrt(value), tight to within 1
    num, den = value.numerator, value.denominator
    return Fraction(math.isqrt(num * den) + 1, den)


def represents(lattice: HomLattice, m: int) -> tuple[int, ...] | None:
    """A nonzero vector of norm ``m`` if one exists, preferring the lexicographically largest."""
    if m <= 0:
        raise ValueError("m must be positive")
    vecs = short_vectors(lattice.gram, m)
    return max(vecs) if vecs else None


_SUB = str.maketrans("0123456789", "₀₁₂₃₄₅₆₇₈₉")


def _var(i: int) -> str:
    return "x" + str(i + 1).translate(_SUB)


def quadratic_form_string(lattice: HomLattice) -> str:
    """Render the degree form as e.g. ``4x₁²−4x₁x₂+4x₂²``."""
    n = lattice.rank
    terms = []
    for i in range(n):
        for j in range(i, n):
            c = lattice.gram[i][j] if i == j else 2 * lattice.gram[i][j]
            if c == 0:
                continue
            mono = _var(i) + "²" if i == j else _var(i) + _var(j)
            sign = "−" if c < 0 else "+"
            mag = "" if abs(c) == 1 else str(abs(c))
            terms.append((sign, mag + mono))
    if not terms:
        return "0"
    first_sign, first = terms[0]
    out = ("−" if first_sign == "−" else "") + first
    for sign, body in terms[1:]:
        out += sign + body
    return out


def content(lattice: HomLattice) -> int:
    """gcd of the values of the form, i.e. of diagonal entries and doubled cross terms."""
    g = 0
    for i, row in enumerate(lattice.gram):
        for j, v in enumerate(row):
            g = math.gcd(g, v if i == j else 2 * v)
    return g
