"""Weight-2 modular symbols for Gamma_0(N), N square-free.

Build-time only: used by build_curves.py to produce the bundled curve table.
Manin symbols are indexed by P^1(Z/N); linear algebra for eigenspace
splitting is done modulo 26-bit primes (so dot products fit in int64) with numpy, and the dual
eigenvectors we keep are reconstructed exactly and re-verified over Z.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import gcd

import numpy as np

PRIMES_MOD = (67108859, 67108837, 67108819, 67108777, 67108763, 67108757, 67108753, 67108747)


class P1:
    """The projective line over Z/N with a dense lookup table."""

    def __init__(self, N: int):
        self.N = N
        table = np.full((N, N), -1, dtype=np.int64)
        units = np.array([u for u in range(N) if gcd(u, N) == 1], dtype=np.int64)
        reps = []
        for c in range(N):
            for d in range(N):
                if table[c, d] >= 0 or gcd(gcd(c, d), N) != 1:
                    continue
                table[(units * c) % N, (units * d) % N] = len(reps)
                reps.append((c, d))
        self.table = table
        self.c = np.array([r[0] for r in reps], dtype=np.int64)
        self.d = np.array([r[1] for r in reps], dtype=np.int64)
        self.n = len(reps)

    def index(self, c, d):
        return self.table[np.asarray(c) % self.N, np.asarray(d) % self.N]

    def act(self, idx, a, b, c, d):
        """Index of (x) * [[a, b], [c, d]] for symbol indices ``idx`` (broadcasting)."""
        x, y = self.c[idx], self.d[idx]
        return self.index(x * a + y * c, x * b + y * d)

    def S(self, idx):
        return self.act(idx, 0, -1, 1, 0)

    def tau(self, idx):
        return self.act(idx, 0, -1, 1, -1)

    def star(self, idx):
        return self.act(idx, -1, 0, 0, 1)


class ModularSymbols:
    """Sign-quotient (or full) space of weight-2 modular symbols for Gamma_0(N).

    ``coords`` is an exact map from Manin symbols to coordinates in the
    quotient basis (an n x m matrix of Fractions stored sparsely).
    """

    def __init__(self, N: int, sign: int):
        self.N = N
        self.sign = sign
        self.p1 = P1(N)
        self._build()

    def _build(self):
        n = self.p1.n
        ids = np.arange(n)
        S = self.p1.S(ids)
        star = self.p1.star(ids)
        tau = self.p1.tau(ids)
        # two-term relations: x = -xS, x = sign * x*
        gen = [-1] * n
        coef = [0] * n
        free_of = []
        dead = set()
        for start in range(n):
            if gen[start] != -1:
                continue
            g = len(free_of)
            free_of.append(start)
            gen[start], coef[start] = g, 1
            stack = [start]
            zero = False
            members = [start]
            while stack:
                x = stack.pop()
                links = [(int(S[x]), -1)]
                if self.sign:
                    links.append((int(star[x]), self.sign))
                for y, s in links:
                    if gen[y] == -1:
                        gen[y], coef[y] = g, coef[x] * s
                        stack.append(y)
                        members.append(y)
                    elif coef[y] != coef[x] * s:
                        zero = True
            if zero:
                for y in members:
                    coef[y] = 0
                dead.add(g)
        # three-term relations in terms of the two-term generators
        ngen = len(free_of)
        rows = []
        seen = set()
        for x in range(n):
            orbit = (x, int(tau[x]), int(tau[tau[x]]))
            key = min(orbit)
            if key in seen:
                continue
            seen.add(key)
            row = {}
            for y in orbit:
                if coef[y]:
                    row[gen[y]] = row.get(gen[y], 0) + coef[y]
            row = {k: Fraction(v) for k, v in row.items() if v}
            if row:
                rows.append(row)
        pivots = {}  # generator -> expression (dict over generators) it equals
        for row in rows:
            row = self._reduce(row, pivots)
            if not row:
                continue
            p = min(row, key=lambda k: (abs(row[k]) != 1, k))
            c = row.pop(p)
            expr = {k: -v / c for k, v in row.items()}
            for q, e in pivots.items():
                if p in e:
                    f = e.pop(p)
                    for k, v in expr.items():
                        nv = e.get(k, 0) + f * v
                        if nv:
                            e[k] = nv
                        else:
                            e.pop(k, None)
            pivots[p] = expr
        free = [g for g in range(ngen) if g not in pivots and g not in dead]
        pos = {g: i for i, g in enumerate(free)}
        gen_expr = []
        for g in range(ngen):
            if g in dead:
                gen_expr.append({})
            elif g in pos:
                gen_expr.append({pos[g]: Fraction(1)})
            else:
                gen_expr.append({pos[k]: v for k, v in pivots[g].items()})
        self.dim = len(free)
        self.basis_symbols = [free_of[g] for g in free]
        self.coords = []
        for x in range(n):
            if coef[x] == 0:
                self.coords.append({})
            else:
                self.coords.append({k: coef[x] * v for k, v in gen_expr[gen[x]].items()})
        self._dense_cache = {}

    @staticmethod
    def _reduce(row, pivots):
        out = {}
        for k, v in row.items():
            if k in pivots:
                for kk, vv in pivots[k].items():
                    out[kk] = out.get(kk, 0) + v * vv
            else:
                out[k] = out.get(k, 0) + v
        return {k: v for k, v in out.items() if v}

    def dense_mod(self, ell: int) -> np.ndarray:
        """The coordinate map as an n x dim integer matrix modulo ``ell``."""
        if ell not in self._dense_cache:
            C = np.zeros((self.p1.n, self.dim), dtype=np.int64)
            for x, row in enumerate(self.coords):
                for k, v in row.items():
                    C[x, k] = v.numerator % ell * pow(v.denominator, -1, ell) % ell
            self._dense_cache[ell] = C
        return self._dense_cache[ell]

    def hecke_mod(self, heilbronn: np.ndarray, ell: int) -> np.ndarray:
        """Matrix (row convention) of the operator given by a list of 2x2 matrices."""
        C = self.dense_mod(ell)
        base = np.array(self.basis_symbols, dtype=np.int64)
        T = np.zeros((self.dim, self.dim), dtype=np.int64)
        for chunk in np.array_split(heilbronn, max(1, len(heilbronn) // 64)):
            a, b, c, d = (chunk[:, i][None, :] for i in range(4))
            img = self.p1.act(base[:, None], a, b, c, d)
            valid = img >= 0
            rows = C[np.where(valid, img, 0)] * valid[:, :, None]
            T = (T + rows.sum(axis=1)) % ell
        return T


# ---------------------------------------------------------------- Heilbronn


@lru_cache(maxsize=None)
def heilbronn_cremona(p: int) -> np.ndarray:
    """Cremona's Heilbronn matrices of determinant p (p prime)."""
    if p == 2:
        return np.array([[1, 0, 0, 2], [2, 0, 0, 1], [2, 1, 0, 1], [1, 0, 1, 2]], dtype=np.int64)
    out = [(1, 0, 0, p)]
    half = p // 2
    for r in range(-half, half + 1):
        x1, x2, y1, y2, a, b = p, -r, 0, 1, -p, r
        out.append((x1, x2, y1, y2))
        while b:
            q = _round_half_away(a, b)
            c = a - b * q
            a, b = -b, c
            x1, x2 = x2, q * x2 - x1
            y1, y2 = y2, q * y2 - y1
            out.append((x1, x2, y1, y2))
    return np.array(out, dtype=np.int64)


def _round_half_away(a: int, b: int) -> int:
    q = Fraction(a, b)
    fl = q.numerator // q.denominator
    rem = q - fl
    if rem > Fraction(1, 2) or (rem == Fraction(1, 2) and q > 0):
        return fl + 1
    return fl


@lru_cache(maxsize=None)
def heilbronn_merel(n: int) -> np.ndarray:
    """Merel's set: ad - bc = n, a > b >= 0, d > c >= 0."""
    out = []
    for a in range(1, n + 1):
        for d in range(1, n + 2 - a):
            m = a * d - n
            if m < 0:
                continue
            if m == 0:
                out += [(a, b, 0, d) for b in range(a)]
                out += [(a, 0, c, d) for c in range(1, d)]
                continue
            for b in range(1, a):
                if m % b == 0 and m // b < d:
                    out.append((a, b, m // b, d))
    return np.array(out, dtype=np.int64)


# ---------------------------------------------------------------- linear algebra mod ell


def rref_mod(A: np.ndarray, ell: int):
    """Reduced row echelon form modulo ell; returns (R, pivot_columns)."""
    A = A.copy() % ell
    rows, cols = A.shape
    piv = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.nonzero(A[r:, c])[0]
        if len(nz) == 0:
            continue
        k = r + nz[0]
        if k != r:
            A[[r, k]] = A[[k, r]]
        inv = pow(int(A[r, c]), -1, ell)
        A[r] = A[r] * inv % ell
        f = A[:, c].copy()
        f[r] = 0
        nzr = np.nonzero(f)[0]
        if len(nzr):
            A[nzr] = (A[nzr] - f[nzr, None] * A[r][None, :]) % ell
        piv.append(c)
        r += 1
    return A[:r], piv


def right_kernel_mod(A: np.ndarray, ell: int) -> np.ndarray:
    """Basis (as rows) of {v : A v = 0} modulo ell."""
    cols = A.shape[1]
    R, piv = rref_mod(A, ell)
    free = [c for c in range(cols) if c not in set(piv)]
    K = np.zeros((len(free), cols), dtype=np.int64)
    for i, f in enumerate(free):
        K[i, f] = 1
        for j, p in enumerate(piv):
            K[i, p] = (-R[j, f]) % ell
    return K


def left_kernel_mod(A: np.ndarray, ell: int) -> np.ndarray:
    return right_kernel_mod(A.T.copy(), ell)


def rational_reconstruct(a: int, m: int) -> Fraction | None:
    """Find n/d with |n|, d <= sqrt(m/2) and n = a d mod m."""
    a %= m
    bound = int((m // 2) ** 0.5)
    r0, r1 = m, a
    s0, s1 = 0, 1
    while r1 > bound:
        q = r0 // r1
        r0, r1 = r1, r0 - q * r1
        s0, s1 = s1, s0 - q * s1
    if s1 == 0 or abs(s1) > bound:
        return None
    return Fraction(r1, s1)
