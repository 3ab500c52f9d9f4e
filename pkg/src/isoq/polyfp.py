"""Dense univariate polynomials over a prime field F_p."""

from __future__ import annotations

import random
from dataclasses import dataclass

import numpy as np

# above this length products go through numpy int64 convolution (exact for p < 2^20)
_NUMPY_MIN = 24


def _trim(c: list[int]) -> list[int]:
    while c and c[-1] == 0:
        c.pop()
    return c


def _mul(a: list[int], b: list[int], p: int) -> list[int]:
    if not a or not b:
        return []
    if min(len(a), len(b)) >= _NUMPY_MIN and p < 2**20:
        prod = np.convolve(np.asarray(a, dtype=np.int64), np.asarray(b, dtype=np.int64))
        return _trim([int(x) for x in prod % p])
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return _trim([x % p for x in out])


def _divmod(a: list[int], b: list[int], p: int) -> tuple[list[int], list[int]]:
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    db = len(b) - 1
    inv = pow(b[-1], -1, p)
    if len(a) <= db:
        return [], list(a)
    if db >= _NUMPY_MIN and p < 2**20:
        arr = np.asarray(a, dtype=np.int64)
        bb = np.asarray(b, dtype=np.int64)
        q = np.zeros(len(a) - db, dtype=np.int64)
        for i in range(len(a) - 1, db - 1, -1):
            coef = int(arr[i]) * inv % p
            if coef:
                q[i - db] = coef
                off = i - db
                arr[off : i + 1] = (arr[off : i + 1] - coef * bb) % p
        return _trim([int(x) for x in q]), _trim([int(x) for x in arr[:db]])
    a = list(a)
    q = [0] * (len(a) - db)
    for i in range(len(a) - 1, db - 1, -1):
        coef = a[i] * inv % p
        if coef:
            q[i - db] = coef
            off = i - db
            for j in range(db + 1):
                a[off + j] = (a[off + j] - coef * b[j]) % p
    return _trim(q), _trim(a[:db])


@dataclass(frozen=True)
class FieldPoly:
    """Polynomial with coefficients (low degree first) reduced mod p."""

    p: int
    coeffs: tuple[int, ...]

    @classmethod
    def make(cls, p: int, coeffs) -> FieldPoly:
        return cls(p, tuple(_trim([int(c) % p for c in coeffs])))

    @classmethod
    def x(cls, p: int) -> FieldPoly:
        return cls(p, (0, 1))

    @classmethod
    def const(cls, p: int, c: int) -> FieldPoly:
        return cls.make(p, [c])

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def lead(self) -> int:
        return self.coeffs[-1] if self.coeffs else 0

    def _lift(self, other) -> FieldPoly:
        if isinstance(other, FieldPoly):
            if other.p != self.p:
                raise ValueError("field mismatch")
            return other
        return FieldPoly.const(self.p, other)

    def __add__(self, other):
        other = self._lift(other)
        n = max(len(self.coeffs), len(other.coeffs))
        a = list(self.coeffs) + [0] * (n - len(self.coeffs))
        for i, c in enumerate(other.coeffs):
            a[i] += c
        return FieldPoly.make(self.p, a)

    __radd__ = __add__

    def __neg__(self):
        return FieldPoly.make(self.p, [-c for c in self.coeffs])

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        other = self._lift(other)
        return FieldPoly(self.p, tuple(_mul(list(self.coeffs), list(other.coeffs), self.p)))

    __rmul__ = __mul__

    def __divmod__(self, other):
        other = self._lift(other)
        q, r = _divmod(list(self.coeffs), list(other.coeffs), self.p)
        return FieldPoly(self.p, tuple(q)), FieldPoly(self.p, tuple(r))

    def __floordiv__(self, other):
        return divmod(self, other)[0]

    def __mod__(self, other):
        return divmod(self, other)[1]

    def __pow__(self, e: int):
        out = FieldPoly.const(self.p, 1)
        base = self
        while e:
            if e & 1:
                out = out * base
            e >>= 1
            if e:
                base = base * base
        return out

    def __call__(self, x):
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc % self.p if isinstance(x, int) else acc

    def monic(self) -> FieldPoly:
        if not self.coeffs:
            return self
        inv = pow(self.coeffs[-1], -1, self.p)
        return FieldPoly.make(self.p, [c * inv for c in self.coeffs])

    def derivative(self) -> FieldPoly:
        return FieldPoly.make(self.p, [i * c for i, c in enumerate(self.coeffs)][1:])

    def powmod(self, e: int, modulus: FieldPoly) -> FieldPoly:
        out = FieldPoly.const(self.p, 1) % modulus
        base = self % modulus
        while e:
            if e & 1:
                out = (out * base) % modulus
            e >>= 1
            if e:
                base = (base * base) % modulus
        return out

    def roots(self) -> list[int]:
        """Roots in F_p by exhaustive evaluation (small p only)."""
        return [x for x in range(self.p) if self(x) == 0]

    def __str__(self) -> str:
        if not self.coeffs:
            return "0"
        terms = []
        for i in range(len(self.coeffs) - 1, -1, -1):
            c = self.coeffs[i]
            if not c:
                continue
            mono = "" if i == 0 else ("x" if i == 1 else f"x^{i}")
            if i and c == 1:
                terms.append(mono)
            else:
                terms.append(f"{c}{'*' if mono else ''}{mono}")
        return " + ".join(terms)


def gcd(a: FieldPoly, b: FieldPoly) -> FieldPoly:
    while not b.is_zero():
        a, b = b, a % b
    return a.monic()


def is_irreducible(f: FieldPoly) -> bool:
    """Ben-Or test: gcd(x^{p^i} - x, f) = 1 for i <= deg/2."""
    n = f.degree
    if n <= 0:
        return False
    x = FieldPoly.x(f.p)
    xp = x
    for _ in range(n // 2):
        xp = xp.powmod(f.p, f)
        if gcd(xp - x, f).degree > 0:
            return False
    return True


def random_irreducible(p: int, degree: int, rng: random.Random) -> FieldPoly:
    while True:
        f = FieldPoly.make(p, [rng.randrange(p) for _ in range(degree)] + [1])
        if is_irreducible(f):
            return f


def squarefree(f: FieldPoly) -> bool:
    return gcd(f, f.derivative()).degree == 0
