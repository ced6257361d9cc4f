"""Rational newforms of square-free level and the invariants of their optimal curves."""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from math import gcd, isqrt, lcm

import mpmath
import numpy as np
from sympy import primerange

from cubicpoints.arith import divisors, kronecker, prime_factors
from modsym import (
    PRIMES_MOD,
    ModularSymbols,
    heilbronn_cremona,
    heilbronn_merel,
    left_kernel_mod,
    rational_reconstruct,
    right_kernel_mod,
    rref_mod,
)

ELL = PRIMES_MOD[0]
SPLIT_PRIME_BOUND = 100
HEILBRONN_CACHE = os.path.join(os.path.dirname(__file__), ".cache", "heilbronn.npz")


def _signed(x: int, ell: int) -> int:
    x = int(x) % ell
    return x - ell if x > ell // 2 else x


@dataclass
class Newform:
    level: int
    split: list  # (p, a_p) pairs that isolate the form
    al: dict = field(default_factory=dict)  # q -> Atkin-Lehner eigenvalue
    psi_plus: np.ndarray | None = None  # integer functional on P^1, even part
    psi_minus: np.ndarray | None = None
    ap: dict = field(default_factory=dict)

    @property
    def root_number(self) -> int:
        w = 1
        for e in self.al.values():
            w *= e
        return -w


class Level:
    def __init__(self, N: int):
        self.N = N
        self.plus = ModularSymbols(N, 1)
        self.minus = ModularSymbols(N, -1)
        self._hecke = {}

    def heilbronn(self, p):
        return heilbronn_merel(p) if self.N % p == 0 else heilbronn_cremona(p)

    def T(self, space, p, ell=ELL):
        key = (space.sign, p, ell)
        if key not in self._hecke:
            self._hecke[key] = space.hecke_mod(self.heilbronn(p), ell)
        return self._hecke[key]

    # -------------------------------------------------------------- splitting

    def rational_newforms(self) -> list[Newform]:
        N = self.N
        good = [p for p in primerange(2, SPLIT_PRIME_BOUND) if N % p]
        bad = prime_factors(N)
        found = []
        m = self.plus.dim
        start = np.eye(m, dtype=np.int64)

        def restrict(B, T):
            BT = B @ T % ELL
            _, piv = rref_mod(B, ELL)
            return BT[:, piv]

        def visit(B, i, eigs):
            k = B.shape[0]
            if k == 0:
                return
            if k == 1 and i > 0:
                found.append((B, eigs))
                return
            if i < len(good):
                p = good[i]
                R = restrict(B, self.T(self.plus, p))
                bound = isqrt(4 * p)
                for a in range(-bound, bound + 1):
                    K = left_kernel_mod((R - a * np.eye(k, dtype=np.int64)) % ELL, ELL)
                    if len(K):
                        sub, _ = rref_mod(K @ B % ELL, ELL)
                        visit(sub, i + 1, eigs + [(p, a)])
                return
            j = i - len(good)
            if j < len(bad):
                q = bad[j]
                R = restrict(B, self.T(self.plus, q))
                for a in (1, -1):
                    K = left_kernel_mod((R - a * np.eye(k, dtype=np.int64)) % ELL, ELL)
                    if len(K):
                        sub, _ = rref_mod(K @ B % ELL, ELL)
                        visit(sub, i + 1, eigs + [(q, a)])
                return
            raise RuntimeError(f"level {N}: eigenspace of dimension {k} survives all operators")

        visit(start, 0, [])
        forms = []
        for _B, eigs in found:
            forms.append(Newform(N, eigs))
        return forms

    # -------------------------------------------------------------- dual eigenvectors

    def dual_eigenvector(self, space, eigs) -> np.ndarray:
        """Primitive integer functional on P^1 cut out by the given eigenvalues."""
        residues = []
        for ell in PRIMES_MOD[:6]:
            rows = [(self.T(space, p, ell) - a * np.eye(space.dim, dtype=np.int64)) % ell for p, a in eigs]
            K = right_kernel_mod(np.vstack(rows), ell)
            if K.shape[0] != 1:
                raise RuntimeError(f"level {self.N}: dual eigenspace has dimension {K.shape[0]}")
            residues.append((ell, K[0]))
        # normalise at a common nonzero coordinate
        j = next(i for i in range(space.dim) if all(v[i] % ell for ell, v in residues))
        modulus = 1
        combined = np.zeros(space.dim, dtype=object)
        for ell, v in residues:
            v = [int(x) * pow(int(v[j]), -1, ell) % ell for x in v]
            combined = [_crt(int(c), modulus, x, ell) for c, x in zip(combined, v)]
            modulus *= ell
        fracs = [rational_reconstruct(c, modulus) for c in combined]
        if any(f is None for f in fracs):
            raise RuntimeError(f"level {self.N}: rational reconstruction failed")
        den = reduce(lcm, (f.denominator for f in fracs), 1)
        vec = [int(f * den) for f in fracs]
        values = []
        for row in space.coords:
            values.append(sum((c * vec[k] for k, c in row.items()), Fraction(0)))
        den = reduce(lcm, (v.denominator for v in values), 1)
        ints = [int(v * den) for v in values]
        g = reduce(gcd, ints, 0)
        psi = np.array([x // g for x in ints], dtype=object)
        self._verify_eigen(space, psi, eigs)
        return psi

    def _verify_eigen(self, space, psi, eigs):
        p1 = space.p1
        base = np.array(space.basis_symbols)
        for p, a in eigs[:6]:
            H = self.heilbronn(p)
            img = p1.act(base[:, None], H[:, 0][None, :], H[:, 1][None, :], H[:, 2][None, :], H[:, 3][None, :])
            vals = np.where(img >= 0, psi[np.where(img >= 0, img, 0)], 0).sum(axis=1)
            if any(v != a * psi[x] for v, x in zip(vals, base)):
                raise RuntimeError(f"level {self.N}: exact eigen check failed at p={p}")

    def complete(self, f: Newform):
        f.psi_plus = _compact(self.dual_eigenvector(self.plus, f.split))
        f.psi_minus = _compact(self.dual_eigenvector(self.minus, f.split))
        for q, a in f.split:
            if self.N % q == 0:
                f.al[q] = -a
        for q in prime_factors(self.N):
            if q not in f.al:
                f.al[q] = -self._eigenvalue(f, q)
        return f

    def _eigenvalue(self, f, p, H=None):
        p1 = self.plus.p1
        x0 = int(np.nonzero(f.psi_plus)[0][0])
        H = self.heilbronn(p) if H is None else H
        img = p1.act(x0, H[:, 0], H[:, 1], H[:, 2], H[:, 3])
        img = img[img >= 0]
        s = int(f.psi_plus[img].sum())
        base = int(f.psi_plus[x0])
        assert s % base == 0, (self.N, p)
        return s // base

    def fill_ap(self, f: Newform, bound: int, heilbronn_table=None):
        for p in primerange(2, bound + 1):
            if p in f.ap:
                continue
            if self.N % p == 0:
                f.ap[p] = -f.al[p]
                continue
            H = heilbronn_table(p) if heilbronn_table else heilbronn_cremona(p)
            f.ap[p] = self._eigenvalue(f, p, H)
            assert f.ap[p] ** 2 <= 4 * p, (self.N, p, f.ap[p])
        return f


def _compact(psi):
    if max(abs(int(x)) for x in psi) < 2 ** 40:
        return psi.astype(np.int64)
    return psi


def _crt(r1, m1, r2, m2):
    if m1 == 1:
        return r2 % m2
    t = (r2 - r1) * pow(m1, -1, m2) % m2
    return r1 + m1 * t


# ------------------------------------------------------------------ invariants


def analytic_rank(level: Level, f: Newform) -> int:
    zero_inf = int(level.plus.p1.index(0, 1))
    vanishes = f.psi_plus[zero_inf] == 0
    if f.root_number == -1:
        return 1
    return 2 if vanishes else 0


def cycle_lattice(level: Level, f: Newform):
    """Basis (2x2 integer rows) of the image of integral cycles under (psi+, psi-)."""
    N = level.N
    p1 = level.plus.p1
    n = p1.n
    head = [gcd(int(c), N) for c in p1.c]
    tail = [gcd(int(d), N) for d in p1.d]
    vec = [(int(f.psi_plus[x]), int(f.psi_minus[x])) for x in range(n)]
    adj = {}
    for x in range(n):
        adj.setdefault(tail[x], []).append((head[x], x, 1))
        adj.setdefault(head[x], []).append((tail[x], x, -1))
    pot = {}
    gens = []
    for root in adj:
        if root in pot:
            continue
        pot[root] = (0, 0)
        stack = [root]
        while stack:
            u = stack.pop()
            for w, x, s in adj[u]:
                val = (pot[u][0] + s * vec[x][0], pot[u][1] + s * vec[x][1])
                if w not in pot:
                    pot[w] = val
                    stack.append(w)
    for x in range(n):
        u, w = tail[x], head[x]
        gens.append((vec[x][0] - pot[w][0] + pot[u][0], vec[x][1] - pot[w][1] + pot[u][1]))
    return _hnf2(gens)


def _hnf2(vectors):
    """Upper-triangular basis ((a, b), (0, c)) of the Z-span of integer 2-vectors."""
    a = b = c = 0
    for x, y in vectors:
        g, s, t = _xgcd(a, x)
        if g == 0:
            c = gcd(c, y)
            continue
        leftover = (x // g) * b - (a // g) * y
        a, b = g, s * b + t * y
        c = gcd(c, leftover)
    if c:
        b %= c
    return (a, b), (0, c)


def _xgcd(a, b):
    if b == 0:
        return (abs(a), (1 if a >= 0 else -1), 0) if a else (0, 0, 0)
    x0, x1, y0, y1 = 1, 0, 0, 1
    while b:
        q = a // b
        a, b = b, a - q * b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        a, x0, y0 = -a, -x0, -y0
    return a, x0, y0


def modular_degree(level: Level, f: Newform, lattice) -> int:
    p1 = level.plus.p1
    ids = np.arange(p1.n)
    t = p1.tau(ids)
    pp = f.psi_plus
    pm = f.psi_minus
    total = int((pp * pm[t] - pm * pp[t]).sum())
    (a0, a1), (b0, b1) = lattice
    det = abs(a0 * b1 - a1 * b0)
    num = abs(total)
    if num % (6 * det):
        raise RuntimeError(f"level {level.N}: non-integral modular degree {Fraction(num, 6 * det)}")
    return num // (6 * det)


# ------------------------------------------------------------------ periods


def _symbol_0_to(level: Level, b: int, d: int) -> list[tuple[int, int]]:
    """{0, b/d} as a signed list of Manin symbol indices, via continued fractions."""
    p1 = level.plus.p1
    # {0, b/d} = {0, inf} + {inf, b/d}
    out = [(int(p1.index(0, 1)), 1)]
    pk_1, qk_1 = 1, 0
    num, den = b, d
    cf = []
    while den:
        q = num // den
        cf.append(q)
        num, den = den, num - q * den
    pk_2, qk_2 = 0, 1
    for a in cf:
        pk, qk = a * pk_1 + pk_2, a * qk_1 + qk_2
        det = pk * qk_1 - pk_1 * qk
        # g = [[pk, pk_1], [qk, qk_1]] up to sign maps 0 -> pk_1/qk_1, inf -> pk/qk
        c, dd = (qk, qk_1) if det == 1 else (-qk, qk_1)
        out.append((int(p1.index(c, dd)), 1))
        pk_2, qk_2, pk_1, qk_1 = pk_1, qk_1, pk, qk
    return out


def _eval(psi, combo):
    return sum(int(psi[x]) * s for x, s in combo)


def twisted_sum(level: Level, f: Newform, D: int):
    """Sum over a mod |D| of chi_D(a) * psi_sign({a/|D|, infinity})."""
    m = abs(D)
    psi = f.psi_plus if D > 0 else f.psi_minus
    total = 0
    for a in range(m):
        chi = kronecker(D, a)
        if chi == 0:
            continue
        combo = _symbol_0_to(level, a, m)
        # {a/m, inf} = {0, inf} - {0, a/m}
        val = int(psi[int(level.plus.p1.index(0, 1))]) - _eval(psi, combo)
        total += chi * val
    return total


def _fundamental(D):
    if D % 4 == 1:
        return all(D % (p * p) for p in prime_factors(abs(D)))
    if D % 4 == 0:
        m = D // 4
        return m % 4 in (2, 3) and all(m % (p * p) for p in prime_factors(abs(m)))
    return False


def an_list(f: Newform, n_max: int) -> list[int]:
    a = [0] * (n_max + 1)
    a[1] = 1
    primes = list(primerange(2, n_max + 1))
    # a_{p^k}
    pp = {}
    for p in primes:
        ap = f.ap[p]
        vals = [1, ap]
        bad = f.level % p == 0
        while p ** len(vals) <= n_max:
            vals.append(ap * vals[-1] - (0 if bad else p * vals[-2]))
        pp[p] = vals
    spf = list(range(n_max + 1))
    for p in primes:
        if p * p > n_max:
            break
        for k in range(p * p, n_max + 1, p):
            if spf[k] == k:
                spf[k] = p
    for n in range(2, n_max + 1):
        p = spf[n]
        m, e = n, 0
        while m % p == 0:
            m //= p
            e += 1
        a[n] = pp[p][e] * a[m]
    return a


def twisted_L(f: Newform, D: int, an, digits=30) -> mpmath.mpf:
    mpmath.mp.dps = digits
    m = abs(D)
    x = 2 * mpmath.pi / (m * mpmath.sqrt(f.level))
    total = mpmath.mpf(0)
    for n in range(1, len(an)):
        if an[n]:
            chi = kronecker(D, n)
            if chi:
                total += chi * an[n] * mpmath.exp(-x * n) / n
    return 2 * total


def choose_twists(level: Level, f: Newform):
    """Smallest fundamental D > 0 and D < 0 with a nonvanishing twisted central value."""
    N = level.N
    out = {}
    for sign in (1, -1):
        D = 0
        while True:
            D += sign
            if abs(D) > 500:
                raise RuntimeError(f"level {N}: no usable twist")
            if abs(D) == 1 and D == 1:
                pass
            elif not _fundamental(D):
                continue
            if gcd(D, N) != 1 or f.root_number * kronecker(D, -N) != 1:
                continue
            S = twisted_sum(level, f, D)
            if S:
                out[sign] = (D, S)
                break
    return out


def terms_needed(N, D, digits):
    return int(abs(D) * N ** 0.5 * digits * 2.31 / (2 * 3.14159)) + 20


def periods(f: Newform, twists, digits=30):
    """(alpha, beta) with integration = alpha psi+ + i beta psi- on cycles (up to sign)."""
    out = {}
    for sign, (D, S) in twists.items():
        n = terms_needed(f.level, D, digits)
        an = an_list(f, n)
        L = twisted_L(f, D, an, digits)
        out[sign] = L * mpmath.sqrt(abs(D)) / S
    return out[1], out[-1]


def c4c6_from_periods(alpha, beta, lattice, digits=30):
    mpmath.mp.dps = digits
    (x1, y1), (x2, y2) = lattice
    w1 = mpmath.mpc(alpha * x1, beta * y1)
    w2 = mpmath.mpc(alpha * x2, beta * y2)
    tau = w2 / w1
    if tau.imag < 0:
        w2 = -w2
        tau = -tau
    # reduce tau into the fundamental domain, tracking w1
    for _ in range(200):
        k = mpmath.nint(tau.real)
        w2 -= k * w1
        tau = w2 / w1
        if abs(tau) < 1:
            w1, w2 = w2, -w1
            tau = w2 / w1
        else:
            break
    q = mpmath.exp(2j * mpmath.pi * tau)
    E4 = 1 + 240 * sum(n ** 3 * q ** n / (1 - q ** n) for n in range(1, 60))
    E6 = 1 - 504 * sum(n ** 5 * q ** n / (1 - q ** n) for n in range(1, 60))
    c4 = (2 * mpmath.pi / w1) ** 4 * E4
    c6 = (2 * mpmath.pi / w1) ** 6 * E6
    return c4, c6


def divisors_of(n):
    return divisors(n)
