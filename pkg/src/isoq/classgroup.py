"""Ideal class groups of imaginary quadratic orders via binary quadratic forms.

Forms ``(a, b, c)`` stand for ``a x^2 + b x y + c y^2``; the form ``(a, b, c)``
corresponds to the ideal ``a Z + (-b + sqrt(delta))/2 Z``, so the ``a``
coefficient of a reduced form is the norm of the reduced ideal in its class.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field

from .ntheory import is_prime, kronecker, sqrt_mod

DEFAULT_DISC_CAP = 10**6


class FormError(ValueError):
    pass


def check_discriminant(delta: int) -> int:
    if delta >= 0 or delta % 4 not in (0, 1):
        raise FormError(f"{delta} is not a negative discriminant")
    return delta


@dataclass(frozen=True, order=True)
class QuadForm:
    a: int
    b: int
    c: int

    @property
    def delta(self) -> int:
        return self.b * self.b - 4 * self.a * self.c

    @property
    def norm(self) -> int:
        return self.a

    def is_primitive(self) -> bool:
        return math.gcd(math.gcd(self.a, self.b), self.c) == 1

    def is_reduced(self) -> bool:
        a, b, c = self.a, self.b, self.c
        if not (abs(b) <= a <= c):
            return False
        if b < 0 and (a == -b or a == c):
            return False
        return True

    def __str__(self) -> str:
        return f"({self.a},{self.b},{self.c})"


def form_from_ab(a: int, b: int, delta: int) -> QuadForm:
    num = b * b - delta
    if num % (4 * a):
        raise FormError(f"b^2 - delta not divisible by 4a for a={a}, b={b}")
    return QuadForm(a, b, num // (4 * a))


def identity(delta: int) -> QuadForm:
    check_discriminant(delta)
    return form_from_ab(1, delta % 2, delta)


def _normalize(a: int, b: int, c: int) -> tuple[int, int, int]:
    # move b into (-a, a]
    r = (a - b) // (2 * a)
    return a, b + 2 * r * a, a * r * r + b * r + c


def reduce(f: QuadForm) -> QuadForm:
    """Unique reduced form properly equivalent to the positive-definite form f."""
    a, b, c = f.a, f.b, f.c
    if a <= 0 or b * b - 4 * a * c >= 0:
        raise FormError(f"{f} is not positive definite")
    if not f.is_primitive():
        raise FormError(f"{f} is not primitive")
    a, b, c = _normalize(a, b, c)
    while a > c or (a == c and b < 0):
        # (a, b, c) -> (c, -b, a) then normalise
        a, b, c = _normalize(c, -b, a)
    return QuadForm(a, b, c)


def _xgcd(a: int, b: int) -> tuple[int, int, int]:
    x0, x1, y0, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    return a, x0, y0


def compose(f: QuadForm, g: QuadForm) -> QuadForm:
    """Gauss composition followed by reduction (Shanks/Cohen formulation)."""
    if f.delta != g.delta:
        raise FormError(f"discriminant mismatch: {f.delta} != {g.delta}")
    delta = f.delta
    if f.a > g.a:
        f, g = g, f
    a1, b1 = f.a, f.b
    a2, b2, c2 = g.a, g.b, g.c
    s = (b1 + b2) // 2
    n = b2 - s
    if a2 % a1 == 0:
        y1, d = 0, a1
    else:
        d, u, _ = _xgcd(a2, a1)
        y1 = u
    if s % d == 0:
        y2, x2, d1 = -1, 0, d
    else:
        d1, x2, y2 = _xgcd(s, d)
        y2 = -y2
    v1 = a1 // d1
    v2 = a2 // d1
    r = (y1 * y2 * n - x2 * c2) % v1
    b3 = b2 + 2 * v2 * r
    a3 = v1 * v2
    return reduce(form_from_ab(a3, b3, delta))


def inverse(f: QuadForm) -> QuadForm:
    return reduce(QuadForm(f.a, -f.b, f.c))


def power(f: QuadForm, e: int) -> QuadForm:
    base = inverse(f) if e < 0 else reduce(f)
    e = abs(e)
    result = identity(f.delta)
    while e:
        if e & 1:
            result = compose(result, base)
        e >>= 1
        if e:
            base = compose(base, base)
    return result


@dataclass(frozen=True)
class PrimeForm:
    ell: int
    form: QuadForm

    @property
    def b(self) -> int:
        return self.form.b

    def conjugate(self) -> QuadForm:
        return QuadForm(self.form.a, -self.form.b, self.form.c)


def prime_form(ell: int, delta: int, rng: random.Random | None = None) -> PrimeForm | None:
    """Split prime form (ell, b, c) with the smallest b in (0, 2 ell), b^2 = delta mod 4 ell.

    Returns None when ell is inert or ramified.
    """
    check_discriminant(delta)
    if ell == 2:
        raise FormError("ell = 2 is not supported")
    if ell < 3 or not is_prime(ell):
        raise FormError(f"{ell} is not an odd prime")
    if kronecker(delta, ell) != 1:
        return None
    r = sqrt_mod(delta, ell, rng)
    # the two roots mod ell lift to b, b' in (0, 2 ell) with b = delta mod 2
    cands = []
    for root in (r, ell - r):
        b = root if (root - delta) % 2 == 0 else root + ell
        cands.append(b)
    b = min(cands)
    return PrimeForm(ell, form_from_ab(ell, b, delta))


def reduced_forms(delta: int) -> list[QuadForm]:
    """All reduced primitive forms of discriminant delta, sorted by (a, b)."""
    check_discriminant(delta)
    out = []
    amax = math.isqrt(-delta // 3)
    for a in range(1, amax + 1):
        for b in range(-a + 1, a + 1):
            if (b - delta) % 2:
                continue
            num = b * b - delta
            if num % (4 * a):
                continue
            c = num // (4 * a)
            f = QuadForm(a, b, c)
            if f.is_reduced() and f.is_primitive():
                out.append(f)
    out.sort(key=lambda f: (f.a, abs(f.b), -f.b))
    return out


def _smith(rows: list[list[int]], r: int) -> tuple[list[int], list[list[int]]]:
    """Smith normal form D = P R Q of an integer relation matrix.

    Returns the diagonal and Q (column transform, r x r unimodular).
    """
    m = [row[:] for row in rows]
    nrows = len(m)
    q = [[int(i == j) for j in range(r)] for i in range(r)]

    def col_swap(i, j):
        for row in m:
            row[i], row[j] = row[j], row[i]
        for row in q:
            row[i], row[j] = row[j], row[i]

    def col_addmul(dst, src, k):
        for row in m:
            row[dst] += k * row[src]
        for row in q:
            row[dst] += k * row[src]

    diag = []
    t = 0
    while t < r and t < nrows:
        # pivot: smallest nonzero absolute entry in the trailing block
        piv = None
        for i in range(t, nrows):
            for j in range(t, r):
                if m[i][j] and (piv is None or abs(m[i][j]) < abs(m[piv[0]][piv[1]])):
                    piv = (i, j)
        if piv is None:
            break
        i, j = piv
        m[t], m[i] = m[i], m[t]
        col_swap(t, j)
        done = False
        while not done:
            done = True
            for j in range(t + 1, r):
                k = m[t][j] // m[t][t]
                if k:
                    col_addmul(j, t, -k)
                if m[t][j]:
                    done = False
                    col_swap(t, j)
            for i in range(t + 1, nrows):
                k = m[i][t] // m[t][t]
                if k:
                    m[i] = [x - k * y for x, y in zip(m[i], m[t])]
                if m[i][t]:
                    done = False
                    m[t], m[i] = m[i], m[t]
            if done:
                # divisibility condition d_t | every remaining entry
                for i in range(t + 1, nrows):
                    for j in range(t + 1, r):
                        if m[i][j] % m[t][t]:
                            m[t] = [x + y for x, y in zip(m[t], m[i])]
                            done = False
                            break
                    if not done:
                        break
        if m[t][t] < 0:
            m[t] = [-x for x in m[t]]
        diag.append(m[t][t])
        t += 1
    diag += [0] * (r - len(diag))
    return diag, q


def _inverse_unimodular(q: list[list[int]]) -> list[list[int]]:
    from fractions import Fraction

    n = len(q)
    aug = [[Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(q)]
    for col in range(n):
        piv = next(i for i in range(col, n) if aug[i][col] != 0)
        aug[col], aug[piv] = aug[piv], aug[col]
        pv = aug[col][col]
        aug[col] = [x / pv for x in aug[col]]
        for i in range(n):
            if i != col and aug[i][col] != 0:
                k = aug[i][col]
                aug[i] = [x - k * y for x, y in zip(aug[i], aug[col])]
    inv = [[int(x) for x in row[n:]] for row in aug]
    return inv


@dataclass
class ClassGroup:
    delta: int
    elements: list[QuadForm]
    generators: list[QuadForm]
    orders: list[int]
    dlog_table: dict[QuadForm, tuple[int, ...]] = field(repr=False)

    @property
    def class_number(self) -> int:
        return len(self.elements)

    h = class_number

    @property
    def identity(self) -> QuadForm:
        return identity(self.delta)

    def element(self, exps) -> QuadForm:
        """Recombine g_1^{e_1} ... g_k^{e_k} into a reduced form."""
        out = identity(self.delta)
        for g, e, n in zip(self.generators, exps, self.orders):
            out = compose(out, power(g, e % n))
        return out

    def dlog(self, f: QuadForm) -> tuple[int, ...]:
        return self.dlog_table[reduce(f)]

    def structure(self) -> str:
        if not self.orders:
            return "trivial"
        return " x ".join(f"Z_{n}" for n in self.orders)


def generator_scan_bound(delta: int) -> int:
    """Norm bound 6 ln^2|delta| for a generating set of ideal classes (under GRH)."""
    return max(2, int(6 * math.log(abs(delta)) ** 2))


def enumerate_class_group(delta: int, cap: int = DEFAULT_DISC_CAP) -> ClassGroup:
    """Enumerate Cl(delta) and compute an invariant-factor decomposition.

    Candidate generators are scanned in order of norm, first those below
    ``generator_scan_bound`` and then the remaining classes; the relation
    lattice of the chosen generators is diagonalised by Smith normal form.
    """
    check_discriminant(delta)
    if -delta > cap:
        raise FormError(f"|delta| = {-delta} exceeds enumeration cap {cap}")
    elems = reduced_forms(delta)
    one = identity(delta)

    # greedy generating set; vecs maps element -> exponent vector over gens
    gens: list[QuadForm] = []
    vecs: dict[QuadForm, tuple[int, ...]] = {one: ()}
    bound = generator_scan_bound(delta)
    ordered = [f for f in elems if f.a <= bound] + [f for f in elems if f.a > bound]
    relations: list[list[int]] = []
    for cand in ordered:
        if len(vecs) == len(elems):
            break
        if cand in vecs:
            continue
        gens.append(cand)
        vecs = {f: v + (0,) for f, v in vecs.items()}
        relations = [row + [0] for row in relations]
        # breadth-first closure; every collision yields a relation
        frontier = list(vecs)
        while frontier:
            nxt = []
            for f in frontier:
                for i, g in enumerate(gens):
                    h = compose(f, g)
                    v = list(vecs[f])
                    v[i] += 1
                    if h in vecs:
                        rel = [x - y for x, y in zip(v, vecs[h])]
                        if any(rel):
                            relations.append(rel)
                    else:
                        vecs[h] = tuple(v)
                        nxt.append(h)
            frontier = nxt

    r = len(gens)
    if r == 0:
        return ClassGroup(delta, elems, [], [], {one: ()})
    diag, q = _smith(relations, r)
    qinv = _inverse_unimodular(q)
    # new generator i = prod_j gens_j^{qinv[i][j]}; coordinates w = v Q
    new_gens, orders, keep = [], [], []
    for i, d in enumerate(diag):
        if d == 1:
            continue
        g = one
        for j in range(r):
            g = compose(g, power(gens[j], qinv[i][j]))
        new_gens.append(g)
        orders.append(d)
        keep.append(i)
    table: dict[QuadForm, tuple[int, ...]] = {}
    for f, v in vecs.items():
        w = [sum(v[j] * q[j][i] for j in range(r)) for i in range(r)]
        table[f] = tuple(w[i] % diag[i] for i in keep)
    group = ClassGroup(delta, elems, new_gens, orders, table)
    assert math.prod(orders) == len(elems) == len(table)
    return group


def class_number(delta: int) -> int:
    return len(reduced_forms(delta))
