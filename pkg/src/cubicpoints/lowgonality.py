"""Genus-2 sextic models and genus-4 quadrics: rational points and degree-3 maps to the line."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import sympy

from .arith import is_square


class ModelError(ValueError):
    pass


@dataclass(frozen=True)
class SexticModel:
    """y^2 = c6 x^6 + ... + c0; ``coeffs`` runs from c6 down to c0."""

    coeffs: tuple[int, int, int, int, int, int, int]
    N: int = 0
    d: int = 0
    source: str = ""

    def __post_init__(self):
        if len(self.coeffs) != 7:
            raise ModelError("a sextic model needs seven coefficients")
        if self.coeffs[0] == 0 and self.coeffs[1] == 0:
            raise ModelError("degree must be 5 or 6")
        x = sympy.Symbol("x")
        if sympy.discriminant(sympy.Poly(self.coeffs, x)) == 0:
            raise ModelError("the sextic has a repeated root")

    @property
    def genus(self) -> int:
        return 2

    def binary_form(self, u: int, v: int) -> int:
        """The degree-6 homogenization F(u, v) = v^6 f(u/v)."""
        return sum(c * u ** (6 - i) * v ** i for i, c in enumerate(self.coeffs))


@dataclass(frozen=True)
class DiagonalQuadric:
    a: int
    b: int
    c: int
    d: int
    N: int = 0
    level_d: int = 0

    @property
    def coefficients(self) -> tuple[int, int, int, int]:
        return (self.a, self.b, self.c, self.d)

    @property
    def rank(self) -> int:
        return sum(1 for x in self.coefficients if x)


def squarefree_part(n: int) -> int:
    if n == 0:
        raise ValueError("zero has no square class")
    sign = -1 if n < 0 else 1
    out = 1
    for p, e in sympy.factorint(abs(n)).items():
        if e % 2:
            out *= p
    return sign * out


# ---------------------------------------------------------------- points on y^2 = f(x)


def search_points(model: SexticModel, height: int) -> list[tuple[int, int, int]]:
    """Rational points of naive height at most ``height`` on the weighted projective model.

    Points are triples (u : y : v) with y^2 = F(u, v), weights (1, 3, 1); points at
    infinity are (1 : y : 0).  Each point is returned once with v >= 0 and gcd(u, v) = 1.
    """
    if height < 1:
        raise ValueError("height must be positive")
    points = set()
    lead = model.coeffs[0]
    if lead and is_square(lead):
        r = math.isqrt(lead)
        points.update({(1, r, 0), (1, -r, 0)})
    for v in range(1, height + 1):
        for u in range(-height, height + 1):
            if math.gcd(u, v) != 1:
                continue
            value = model.binary_form(u, v)
            if value >= 0 and is_square(value):
                r = math.isqrt(value)
                points.update({(u, r, v), (u, -r, v)})
    return sorted(points)


def on_curve(model: SexticModel, point) -> bool:
    u, y, v = point
    return y * y == model.binary_form(u, v)


def hyperelliptic_image(point):
    u, y, v = point
    return (u, -y, v)


def degree3_exists_genus2(model: SexticModel, height: int = 10) -> tuple[bool, str]:
    """Whether a rational degree-3 map to the line is certified by the point search.

    ``(True, "three-points")`` when at least three rational points were found,
    ``(True, "swapped-pair")`` when two distinct points are exchanged by the
    hyperelliptic involution, ``(False, "not-established")`` otherwise.  A False
    answer only reflects the search height.
    """
    if model.genus != 2:
        raise ModelError("only genus-2 models are supported")
    pts = search_points(model, height)
    if len(pts) >= 3:
        return True, "three-points"
    for P in pts:
        Q = hyperelliptic_image(P)
        if Q != P and Q in pts:
            return True, "swapped-pair"
    return False, "not-established"


def swapped_pairs(model: SexticModel, height: int = 10):
    pts = search_points(model, height)
    return [(P, hyperelliptic_image(P)) for P in pts if P[1] > 0 and hyperelliptic_image(P) in pts]


# ---------------------------------------------------------------- genus-4 quadrics


@dataclass(frozen=True)
class TrigonalDecision:
    trigonal_over_q: bool
    discriminant_class: int

    def describe(self) -> str:
        if self.trigonal_over_q:
            return "ruling defined over Q"
        return f"ruling needs sqrt({self.discriminant_class})"


def trigonal_over_Q(q: DiagonalQuadric) -> TrigonalDecision:
    """Decide whether the rulings of the quadric containing a genus-4 canonical curve are rational."""
    if q.rank <= 2:
        raise ModelError("quadric of rank at most 2 cannot contain a canonical genus-4 curve")
    if q.rank == 3:
        warnings.warn(
            "rank-3 quadric: treated as a cone over Q; a cone needing a quadratic field is not detected",
            stacklevel=2,
        )
        return TrigonalDecision(True, 1)
    disc = q.a * q.b * q.c * q.d
    cls = squarefree_part(disc)
    return TrigonalDecision(cls == 1, cls)

