"""Exact Weierstrass-model utilities for the curve-table build."""

from __future__ import annotations

from fractions import Fraction
from math import gcd, isqrt

import sympy
from sympy import factorint

from cubicpoints.arith import kronecker


def b_invariants(a):
    a1, a2, a3, a4, a6 = a
    b2 = a1 * a1 + 4 * a2
    b4 = 2 * a4 + a1 * a3
    b6 = a3 * a3 + 4 * a6
    b8 = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4
    return b2, b4, b6, b8


def c_invariants(a):
    b2, b4, b6, b8 = b_invariants(a)
    c4 = b2 * b2 - 24 * b4
    c6 = -b2 ** 3 + 36 * b2 * b4 - 216 * b6
    disc = -b2 * b2 * b8 - 8 * b4 ** 3 - 27 * b6 * b6 + 9 * b2 * b4 * b6
    return c4, c6, disc


def kraus_ok(c4: int, c6: int) -> bool:
    """Whether integral (c4, c6) come from an integral Weierstrass model."""
    if (c4 ** 3 - c6 ** 2) % 1728 or c4 ** 3 == c6 ** 2:
        return False
    if c6 % 27 == 9 or c6 % 27 == 18:
        return False
    if c6 % 4 == 3:
        return True
    if c4 % 16 == 0 and c6 % 32 in (0, 8):
        return True
    return False


def c4c6_to_ai(c4: int, c6: int):
    """Reduced integral model (a1, a3 in {0,1}, a2 in {-1,0,1}) with the given invariants."""
    b2 = (-c6) % 12
    if b2 > 6:
        b2 -= 12
    b4, r = divmod(b2 * b2 - c4, 24)
    assert r == 0
    b6, r = divmod(-b2 ** 3 + 36 * b2 * b4 - c6, 216)
    assert r == 0
    a1 = b2 % 2
    a3 = b6 % 2
    a2 = (b2 - a1) // 4
    a4 = (b4 - a1 * a3) // 2
    a6 = (b6 - a3) // 4
    a = (a1, a2, a3, a4, a6)
    assert c_invariants(a)[:2] == (c4, c6), (c4, c6, a)
    return a


def minimal_c4c6(c4: int, c6: int):
    """Scale (c4, c6) to a global minimal model (Q has class number one)."""
    for p in factorint(abs(gcd(c4, c6)) or 1):
        while True:
            if c4 % p ** 4 or c6 % p ** 6:
                break
            n4, n6 = c4 // p ** 4, c6 // p ** 6
            if not kraus_ok(n4, n6):
                break
            c4, c6 = n4, n6
    return c4, c6


def minimal_model(a):
    c4, c6, _ = c_invariants(a)
    return c4c6_to_ai(*minimal_c4c6(c4, c6))


def count_affine_mod_p(a, p: int) -> int:
    a1, a2, a3, a4, a6 = (x % p for x in a)
    if p == 2:
        n = 0
        for x in range(2):
            for y in range(2):
                if (y * y + a1 * x * y + a3 * y - x ** 3 - a2 * x * x - a4 * x - a6) % 2 == 0:
                    n += 1
        return n
    b2, b4, b6, _ = b_invariants(a)
    # (2y + a1 x + a3)^2 = 4x^3 + b2 x^2 + 2 b4 x + b6
    n = 0
    for x in range(p):
        rhs = (4 * x ** 3 + b2 * x * x + 2 * b4 * x + b6) % p
        n += 1 + kronecker(rhs, p)
    return n


def ap(a, p: int) -> int:
    """Trace of Frobenius at a good prime, or the usual +1/-1/0 at bad primes."""
    return p - count_affine_mod_p(a, p)


def conductor_semistable(a):
    """Radical of the minimal discriminant, or None if reduction is additive somewhere."""
    c4, c6, disc = c_invariants(a)
    N = 1
    for p in factorint(abs(disc)):
        if c4 % p == 0:
            return None
        N *= p
    return N


# ---------------------------------------------------------------- isogenies


def _poly_from_roots_symmetric(coeffs):
    """Elementary symmetric s1, s2, s3 from a monic polynomial (descending coefficients)."""
    n = len(coeffs) - 1
    s = [Fraction(1)] + [Fraction((-1) ** k) * Fraction(coeffs[k]) for k in range(1, n + 1)]
    s += [Fraction(0)] * 4
    return s[1], s[2], s[3]


def kohel_isogenous(a, kernel_poly, ell):
    """Codomain of the isogeny with the given kernel polynomial (monic, descending)."""
    a1, a2, a3, a4, a6 = (Fraction(x) for x in a)
    b2, b4, b6, _ = (Fraction(x) for x in b_invariants(a))
    if ell == 2:
        x0 = -Fraction(kernel_poly[1])
        y0 = -(a1 * x0 + a3) / 2
        t = 3 * x0 * x0 + 2 * a2 * x0 + a4 - a1 * y0
        w = x0 * t
    else:
        n = len(kernel_poly) - 1
        s1, s2, s3 = _poly_from_roots_symmetric(kernel_poly)
        t = 6 * (s1 * s1 - 2 * s2) + b2 * s1 + n * b4
        w = 10 * (s1 ** 3 - 3 * s1 * s2 + 3 * s3) + 2 * b2 * (s1 * s1 - 2 * s2) + 3 * b4 * s1 + n * b6
    new = (a1, a2, a3, a4 - 5 * t, a6 - b2 * t - 7 * w)
    # clear denominators by scaling with u = 1/den
    den = 1
    for i, x in enumerate(new):
        weight = (1, 2, 3, 4, 6)[i]
        while (x * den ** weight).denominator != 1:
            den *= (x * den ** weight).denominator
    scaled = tuple(int(x * den ** w) for x, w in zip(new, (1, 2, 3, 4, 6)))
    return minimal_model(scaled)


def division_polynomial(a, ell):
    """The ell-division polynomial in x (as a sympy Poly) for odd ell."""
    x = sympy.Symbol("x")
    b2, b4, b6, b8 = b_invariants(a)
    psi2sq = 4 * x ** 3 + b2 * x ** 2 + 2 * b4 * x + b6
    f = {0: sympy.Integer(0), 1: sympy.Integer(1), 2: sympy.Integer(1)}
    # f_n = psi_n for odd n, psi_n / psi_2 for even n
    f[3] = 3 * x ** 4 + b2 * x ** 3 + 3 * b4 * x ** 2 + 3 * b6 * x + b8
    f[4] = 2 * x ** 6 + b2 * x ** 5 + 5 * b4 * x ** 4 + 10 * b6 * x ** 3 + 10 * b8 * x ** 2 + (b2 * b8 - b4 * b6) * x + b4 * b8 - b6 ** 2
    F = psi2sq ** 2

    def get(n):
        if n in f:
            return f[n]
        m = n // 2
        if n % 2:
            if m % 2:
                val = get(m + 2) * get(m) ** 3 - F * get(m - 1) * get(m + 1) ** 3
            else:
                val = F * get(m + 2) * get(m) ** 3 - get(m - 1) * get(m + 1) ** 3
        else:
            val = get(m) * (get(m + 2) * get(m - 1) ** 2 - get(m - 2) * get(m + 1) ** 2)
        f[n] = sympy.expand(val)
        return f[n]

    return sympy.Poly(get(ell), x)


def kernel_polynomials(a, ell):
    """Monic rational kernel polynomials of ell-isogenies (ell prime)."""
    x = sympy.Symbol("x")
    if ell == 2:
        b2, b4, b6, _ = b_invariants(a)
        poly = sympy.Poly(4 * x ** 3 + b2 * x ** 2 + 2 * b4 * x + b6, x)
        return [[1, -r] for r in sympy.roots(poly, filter="Q") if r.is_rational]
    poly = division_polynomial(a, ell)
    want = (ell - 1) // 2
    out = []
    _, factors = sympy.factor_list(poly)
    for fac, _mult in factors:
        if fac.degree() == want:
            c = [Fraction(int(sympy.numer(t)), int(sympy.denom(t))) for t in fac.monic().all_coeffs()]
            if _is_kernel(a, c, ell):
                out.append(c)
    if want > 1:
        # kernel polynomials can also appear as products of smaller factors
        small = [fac for fac, _ in factors if fac.degree() < want]
        for combo in _subsets_of_degree(small, want):
            prod_poly = sympy.Poly(1, x)
            for fac in combo:
                prod_poly *= fac
            c = [Fraction(int(sympy.numer(t)), int(sympy.denom(t))) for t in prod_poly.monic().all_coeffs()]
            if _is_kernel(a, c, ell) and c not in out:
                out.append(c)
    return out


def _subsets_of_degree(factors, target, start=0):
    if target == 0:
        yield []
        return
    for i in range(start, len(factors)):
        d = factors[i].degree()
        if d <= target:
            for rest in _subsets_of_degree(factors, target - d, i + 1):
                yield [factors[i]] + rest


def _is_kernel(a, coeffs, ell):
    """A factor is a kernel polynomial iff the isogenous model has integral j-expansion check."""
    try:
        E2 = kohel_isogenous(a, coeffs, ell)
    except (AssertionError, ZeroDivisionError, ValueError):
        return False
    for p in sympy.primerange(3, 60):
        if conductor_semistable(a) and conductor_semistable(a) % p == 0:
            continue
        if ap(a, p) != ap(E2, p):
            return False
    return True


# ---------------------------------------------------------------- torsion


def _add(P, Q, a):
    """Group law on the generalized Weierstrass model with Fraction coordinates; None is O."""
    if P is None:
        return Q
    if Q is None:
        return P
    a1, a2, a3, a4, a6 = a
    x1, y1 = P
    x2, y2 = Q
    if x1 == x2:
        if y1 + y2 + a1 * x2 + a3 == 0:
            return None
        lam = (3 * x1 * x1 + 2 * a2 * x1 + a4 - a1 * y1) / (2 * y1 + a1 * x1 + a3)
    else:
        lam = (y2 - y1) / (x2 - x1)
    nu = y1 - lam * x1
    x3 = lam * lam + a1 * lam - a2 - x1 - x2
    y3 = -(lam + a1) * x3 - nu - a3
    return (x3, y3)


def torsion_order(a) -> int:
    """Order of E(Q)_tors by Nagell-Lutz on the short model, checked against the group law."""
    c4, c6, _ = c_invariants(a)
    A, B = -27 * c4, -54 * c6
    D = abs(4 * A ** 3 + 27 * B ** 2)
    fac = factorint(D)
    ys = [1]
    for p, e in fac.items():
        ys = [y * p ** k for y in ys for k in range(e // 2 + 1)]
    candidates = set()
    x = sympy.Symbol("x")
    for y in [0] + ys:
        for yy in {y, -y}:
            poly = sympy.Poly(x ** 3 + A * x + B - yy * yy, x)
            for r in sympy.roots(poly, filter="Z"):
                candidates.add((int(r), yy))
    b2 = b_invariants(a)[0]
    a1, a2, a3, a4, a6 = (Fraction(t) for t in a)
    count = 1
    for X, Y in candidates:
        # back to the original model: X = 36x + 3 b2, Y = 108 (2y + a1 x + a3)
        xx = Fraction(X - 3 * b2, 36)
        yy = (Fraction(Y, 108) - a1 * xx - a3) / 2
        P = (xx, yy)
        Q = P
        for _ in range(12):
            if Q is None:
                break
            Q = _add(Q, P, (a1, a2, a3, a4, a6))
        if Q is None:
            count += 1
    return count


def isqrt_exact(n):
    r = isqrt(n)
    return r if r * r == n else None
