"""Independent reference implementations used by the tests.

Nothing here imports the package's arithmetic: forms, curves, the extension
field used for torsion points and the combiner state vectors are all
recomputed from scratch (or with sympy) so that agreement means something.
"""

from __future__ import annotations

import math
import random
from fractions import Fraction
from itertools import product

import numpy as np
import sympy
from mpmath import mp, mpf

# -- binary quadratic forms --------------------------------------------------


def brute_reduced_forms(delta: int) -> set[tuple[int, int, int]]:
    """Scan every (a, b, c) with a <= sqrt(|delta|/3) for reduced primitive forms."""
    out = set()
    a = 1
    while 3 * a * a <= -delta:
        for b in range(-a, a + 1):
            num = b * b - delta
            if num % (4 * a):
                continue
            c = num // (4 * a)
            if c < a or math.gcd(math.gcd(a, b), c) != 1:
                continue
            if b < 0 and (-b == a or a == c):
                continue
            out.add((a, b, c))
        a += 1
    return out


def act(f, m):
    """Right action of [[p, q], [r, s]] in SL2(Z) on the form f."""
    a, b, c = f
    p, q, r, s = m
    return (
        a * p * p + b * p * r + c * r * r,
        2 * a * p * q + b * (p * s + q * r) + 2 * c * r * s,
        a * q * q + b * q * s + c * s * s,
    )


def random_sl2(rng: random.Random, steps: int = 6):
    m = (1, 0, 0, 1)
    for _ in range(steps):
        k = rng.randint(-3, 3)
        g = rng.choice([(1, k, 0, 1), (1, 0, k, 1), (0, -1, 1, 0)])
        p, q, r, s = m
        P, Q, R, S = g
        m = (p * P + q * R, p * Q + q * S, r * P + s * R, r * Q + s * S)
    return m


def equivalence_class(f, reduced: set) -> tuple[int, int, int]:
    """Reduced form properly equivalent to f, by classical Gauss steps written out longhand."""
    a, b, c = f
    while True:
        if not (-a < b <= a):
            # translate x -> x + k y
            k = (a - b) // (2 * a)
            b, c = b + 2 * k * a, a * k * k + b * k + c
            continue
        if a > c or (a == c and b < 0):
            a, b, c = c, -b, a
            continue
        break
    assert (a, b, c) in reduced
    return (a, b, c)


def dirichlet_compose(f, g, rng: random.Random, reduced: set):
    """Dirichlet composition after moving to representatives with coprime leading coefficients."""
    delta = f[1] ** 2 - 4 * f[0] * f[2]
    for _ in range(10_000):
        f2 = act(f, random_sl2(rng))
        g2 = act(g, random_sl2(rng))
        a1, b1, _ = f2
        a2, b2, _ = g2
        if a1 <= 0 or a2 <= 0 or math.gcd(a1, a2) != 1:
            continue
        # B = b1 mod 2a1, B = b2 mod 2a2, and B^2 = delta mod 4 a1 a2
        B = int(sympy.ntheory.modular.crt([2 * a1, 2 * a2], [b1, b2], check=True)[0])
        assert (B * B - delta) % (4 * a1 * a2) == 0
        return equivalence_class((a1 * a2, B, (B * B - delta) // (4 * a1 * a2)), reduced)
    raise RuntimeError("no coprime representatives found")


# -- elliptic curves ---------------------------------------------------------


def brute_point_count(p: int, A: int, B: int) -> int:
    squares = {}
    for y in range(p):
        squares[y * y % p] = squares.get(y * y % p, 0) + 1
    return 1 + sum(squares.get((x**3 + A * x + B) % p, 0) for x in range(p))


def division_polynomial_sympy(p: int, A: int, B: int, ell: int) -> sympy.Poly:
    """psi_ell as a polynomial in x over GF(p), via the bivariate recurrence.

    Elements of F_p[x, y]/(y^2 - f) are pairs (u, w) meaning u + y w.
    """
    x = sympy.Symbol("x")
    P = lambda e: sympy.Poly(e, x, modulus=p)  # noqa: E731
    f = P(x**3 + A * x + B)
    zero = P(0)

    def mul(s, t):
        return (s[0] * t[0] + f * s[1] * t[1], s[0] * t[1] + s[1] * t[0])

    def sub(s, t):
        return (s[0] - t[0], s[1] - t[1])

    psi = {
        0: (zero, zero),
        1: (P(1), zero),
        2: (zero, P(2)),
        3: (P(3 * x**4 + 6 * A * x**2 + 12 * B * x - A * A), zero),
        4: (zero, P(4 * (x**6 + 5 * A * x**4 + 20 * B * x**3 - 5 * A * A * x**2 - 4 * A * B * x - 8 * B * B - A**3))),
    }

    def get(n):
        if n in psi:
            return psi[n]
        m = n // 2
        if n % 2:
            val = sub(mul(get(m + 2), mul(get(m), mul(get(m), get(m)))), mul(get(m - 1), mul(get(m + 1), mul(get(m + 1), get(m + 1)))))
        else:
            t = sub(mul(get(m + 2), mul(get(m - 1), get(m - 1))), mul(get(m - 2), mul(get(m + 1), get(m + 1))))
            t = mul(get(m), t)
            # t has no y part, so psi_n = t / (2y) = y * t / (2 f)
            assert t[1].is_zero
            q, r = (t[0] * pow(2, -1, p)).div(f)
            assert r.is_zero, "even division polynomial is not divisible by y"
            val = (zero, q)
        psi[n] = val
        return val

    out = get(ell)
    assert out[1].is_zero
    return out[0]


class FF:
    """Arithmetic in F_p[z]/(g) with g irreducible; elements are coefficient lists."""

    def __init__(self, p: int, g: list[int]):
        self.p = p
        self.g = [c % p for c in g]  # low degree first, monic
        self.d = len(g) - 1

    def red(self, a):
        a = [c % self.p for c in a]
        d, p, g = self.d, self.p, self.g
        for i in range(len(a) - 1, d - 1, -1):
            c = a[i]
            if c:
                for j in range(d + 1):
                    a[i - d + j] = (a[i - d + j] - c * g[j]) % p
        a = a[:d] + [0] * max(0, d - len(a))
        return tuple(a[:d])

    def add(self, a, b):
        return tuple((x + y) % self.p for x, y in zip(a, b))

    def sub(self, a, b):
        return tuple((x - y) % self.p for x, y in zip(a, b))

    def mul(self, a, b):
        out = [0] * (2 * self.d)
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    out[i + j] += x * y
        return self.red(out)

    def scal(self, c, a):
        return tuple(c * x % self.p for x in a)

    def const(self, c):
        return self.red([c])

    def pow(self, a, e):
        out = self.const(1)
        while e:
            if e & 1:
                out = self.mul(out, a)
            a = self.mul(a, a)
            e >>= 1
        return out

    def inv(self, a):
        assert any(a), "inverting zero"
        return self.pow(a, self.p**self.d - 2)


def frobenius_eigenspace_roots(p: int, A: int, B: int, ell: int, lam: int) -> set[tuple[int, ...]]:
    """Irreducible factors (as coefficient tuples) of psi_ell whose roots x0 satisfy pi(P) = [lam]P.

    For each irreducible factor g of psi_ell we work in K = F_p[z]/(g) with
    x0 = z.  A point P = (x0, y0) has y0^2 = r in K; every multiple of P has
    the form (X, y0 * Y) with X, Y in K, so the group law runs inside K.
    Frobenius sends P to (x0^p, y0 * r^((p-1)/2)).
    """
    psi = division_polynomial_sympy(p, A, B, ell)
    _, factors = psi.factor_list()
    keep = set()
    for g, _mult in factors:
        coeffs = [int(c) % p for c in reversed(g.all_coeffs())]
        inv = pow(coeffs[-1], -1, p)
        coeffs = [c * inv % p for c in coeffs]
        K = FF(p, coeffs)
        z = K.red([0, 1])
        r = K.add(K.add(K.mul(z, K.mul(z, z)), K.scal(A, z)), K.const(B))

        def add_pts(P1, P2):
            X1, Y1 = P1
            X2, Y2 = P2
            if X1 == X2:
                # doubling (P1 = P2 since [i]P != -P for i < ell - 1)
                assert Y1 == Y2
                num = K.add(K.scal(3, K.mul(X1, X1)), K.const(A))
                s = K.mul(num, K.inv(K.scal(2, K.mul(r, Y1))))
            else:
                s = K.mul(K.sub(Y2, Y1), K.inv(K.sub(X2, X1)))
            X3 = K.sub(K.sub(K.mul(r, K.mul(s, s)), X1), X2)
            Y3 = K.sub(K.mul(s, K.sub(X1, X3)), Y1)
            return X3, Y3

        P = (z, K.const(1))
        Q = P
        for _ in range(lam % ell - 1):
            Q = add_pts(Q, P)
        frob = (K.pow(z, p), K.pow(r, (p - 1) // 2))
        if frob == Q:
            keep.add(tuple(coeffs))
    return keep


def roots_cover(kernel_coeffs: tuple[int, ...], factors: set[tuple[int, ...]], p: int) -> bool:
    """True when the monic polynomial kernel_coeffs is the product of the given monic factors."""
    x = sympy.Symbol("x")
    prod = sympy.Poly(1, x, modulus=p)
    for g in factors:
        prod = prod * sympy.Poly(list(reversed(g)), x, modulus=p)
    target = sympy.Poly(list(reversed(kernel_coeffs)), x, modulus=p)
    return (prod - target).is_zero


# -- combiners as state vectors ----------------------------------------------


def statevector_law(kind: str, labels, thetas, params, pairing):
    """Exact outcome law of one combiner call, computed from amplitudes.

    ``labels`` are the integers the combiner works on and ``thetas`` the
    phase exponents.  Returns {outcome: probability} where an outcome is
    ('abort', reason) or ('ok', d) with d the coefficient vector y** - y*;
    ``pairing`` maps d to the phase the output must carry, and every
    successful branch is checked against the phase read off the amplitudes.
    The colliding strings are matched in uniformly random order.
    """
    k = len(labels)
    ys = list(product((0, 1), repeat=k))
    amp = np.array([np.exp(2j * np.pi * sum(float(t) * b for t, b in zip(thetas, y))) for y in ys]) / 2 ** (k / 2)
    dot = lambda y: sum(u * b for u, b in zip(labels, y))  # noqa: E731
    if kind == "D":
        B, Bp = params
        if any(u >= 2 * Bp * (B // (2 * Bp)) for u in labels):
            return {("abort", "input-bound"): 1.0}
        key, weight = (lambda y: dot(y) // (2 * Bp)), dot
    elif kind == "LSB":
        _, lp = params
        key, weight = (lambda y: dot(y) % (1 << lp)), dot
    else:
        _, Bp = params
        key, weight = (lambda y: dot(y) // Bp), dot
    law: dict = {}

    def bump(o, pr):
        law[o] = law.get(o, 0.0) + pr

    for q in sorted({key(y) for y in ys}):
        idx = [i for i, y in enumerate(ys) if key(y) == q]
        p_q = float(np.sum(np.abs(amp[idx]) ** 2))
        nonzero = [i for i in idx if any(ys[i])]
        nu = len(nonzero)
        if nu == 1:
            bump(("abort", "single-solution"), p_q)
            continue
        if len(nonzero) < len(idx):
            bump(("abort", "unpaired"), float(abs(amp[idx[0]]) ** 2))
        # uniformly random matching of the nu strings: a given string is left
        # over with probability 1/nu when nu is odd, otherwise it is matched
        # with each of the others equally often
        partner = 1 / (nu - 1) if nu % 2 == 0 else 1 / nu
        for a in nonzero:
            pa = float(abs(amp[a]) ** 2)
            if nu % 2:
                bump(("abort", "unpaired"), pa / nu)
            for b in nonzero:
                if b == a:
                    continue
                # the projection onto span{a, b} is reached from either string;
                # charging each string its own share keeps the total at |a|^2 + |b|^2
                pr = pa * partner
                lo, hi = sorted((a, b), key=lambda i: (weight(ys[i]), ys[i]))
                d = tuple(u - v for u, v in zip(ys[hi], ys[lo]))
                rel = np.angle(amp[hi] / amp[lo]) / (2 * np.pi)
                want = float(pairing(d))
                assert abs(((rel - want) + 0.5) % 1 - 0.5) < 1e-9, "phase read off amplitudes disagrees"
                if kind == "D":
                    x = dot(ys[hi]) - dot(ys[lo])
                    if x >= params[1]:
                        bump(("abort", "post-selection"), pr)
                        continue
                    keep = params[1] / (2 * params[1] - x) if x else 1.0
                    bump(("abort", "post-selection"), pr * (1 - keep))
                    bump(("ok", d), pr * keep)
                else:
                    bump(("ok", d), pr)
    return law


# -- schedule formulas -------------------------------------------------------


def lemma_k(N: int) -> int:
    mp.dps = 60
    lg = mp.log(N, 2)
    return int(mp.floor(mp.sqrt(lg * mp.log(lg, 2) / 2)))


def _floor_close(v) -> int:
    r = int(mp.nint(v))
    return r if abs(v - r) < mpf(10) ** -40 else int(mp.floor(v))


def lemma_smaller_labels(N: int):
    """(k, m, [B_0..B_m]) with m = ceil(log2(N/2)/(k - log2 2k)), rho = (N/2)^(1/m)."""
    mp.dps = 60
    k = lemma_k(N)
    den = k - mp.log(2 * k, 2)
    if den <= 0:
        return k, None, None
    m = int(mp.ceil(mp.log(mpf(N) / 2, 2) / den))
    rho = (mpf(N) / 2) ** (mpf(1) / m)
    return k, m, [_floor_close(mpf(N) / rho**i) for i in range(m + 1)]


def lemma_zero_components(N: int):
    """(k, m, [B_0..B_m]) with m = ceil(log2 N/(k - log2 4k)), rho = N^(1/m)."""
    mp.dps = 60
    k = lemma_k(N)
    den = k - mp.log(4 * k, 2)
    if den <= 0:
        return k, None, None
    m = int(mp.ceil(mp.log(N, 2) / den))
    rho = mpf(N) ** (mpf(1) / m)
    return k, m, [_floor_close(mpf(N) / rho**i) for i in range(m + 1)]


def bounds_for_m(N: int, m: int, final: int):
    """Bounds floor(N / rho^i) with rho = (N/final)^(1/m)."""
    mp.dps = 60
    rho = (mpf(N) / final) ** (mpf(1) / m)
    return [_floor_close(mpf(N) / rho**i) for i in range(m + 1)]


def exact_states_phases(N: int, s: int, labels) -> list[Fraction]:
    return [Fraction(s * x, N) % 1 for x in labels]
