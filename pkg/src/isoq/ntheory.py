"""Small exact number-theory helpers shared by the other modules."""

import math
import random


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    small = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)
    for p in small:
        if n % p == 0:
            return n == p
    d, r = n - 1, 0
    while d % 2 == 0:
        d //= 2
        r += 1
    # deterministic Miller-Rabin for n < 3.3e24
    for a in small:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def primes_up_to(bound: int) -> list[int]:
    if bound < 2:
        return []
    sieve = bytearray([1]) * (bound + 1)
    sieve[0] = sieve[1] = 0
    for i in range(2, math.isqrt(bound) + 1):
        if sieve[i]:
            sieve[i * i :: i] = bytearray(len(range(i * i, bound + 1, i)))
    return [i for i, v in enumerate(sieve) if v]


def factorize(n: int) -> dict[int, int]:
    """Trial-division factorisation of |n| (desk-scale inputs only)."""
    n = abs(n)
    if n == 0:
        raise ValueError("cannot factor 0")
    out: dict[int, int] = {}
    d = 2
    while d * d <= n:
        while n % d == 0:
            out[d] = out.get(d, 0) + 1
            n //= d
        d += 1 if d == 2 else 2
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def kronecker(a: int, n: int) -> int:
    """Kronecker symbol (a | n) for n > 0."""
    if n <= 0:
        raise ValueError("n must be positive")
    result = 1
    while n % 2 == 0:
        n //= 2
        if a % 2 == 0:
            return 0
        if a % 8 in (3, 5):
            result = -result
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


def sqrt_mod(a: int, p: int, rng: random.Random | None = None) -> int | None:
    """Tonelli-Shanks square root modulo an odd prime p; None for non-residues.

    The non-residue search draws from ``rng`` (a fixed-seed stream by default) so
    the returned root is reproducible.
    """
    a %= p
    if a == 0:
        return 0
    if p == 2:
        return a
    if pow(a, (p - 1) // 2, p) != 1:
        return None
    if p % 4 == 3:
        return pow(a, (p + 1) // 4, p)
    rng = rng or random.Random(0)
    q, s = p - 1, 0
    while q % 2 == 0:
        q //= 2
        s += 1
    z = rng.randrange(2, p)
    while pow(z, (p - 1) // 2, p) != p - 1:
        z = rng.randrange(2, p)
    m, c, t, r = s, pow(z, q, p), pow(a, q, p), pow(a, (q + 1) // 2, p)
    while t != 1:
        i, t2 = 0, t
        while t2 != 1:
            t2 = t2 * t2 % p
            i += 1
        b = pow(c, 1 << (m - i - 1), p)
        m, c = i, b * b % p
        t, r = t * c % p, r * b % p
    return r


def squarefree_part(n: int) -> tuple[int, int]:
    """Return (d, f) with n = d * f**2 and d squarefree (sign kept on d)."""
    sign = -1 if n < 0 else 1
    d, f = 1, 1
    for p, e in factorize(n).items():
        f *= p ** (e // 2)
        if e % 2:
            d *= p
    return sign * d, f


def fundamental_discriminant(n: int) -> tuple[int, int]:
    """Split a negative discriminant n = v^2 * delta with delta fundamental."""
    if n >= 0 or n % 4 not in (0, 1):
        raise ValueError(f"{n} is not a negative discriminant")
    d, f = squarefree_part(n)
    if d % 4 == 1:
        return d, f
    # d = 2,3 mod 4 -> delta = 4d and n = (f/2)^2 * 4d
    return 4 * d, f // 2


def L_notation(n: float, alpha: float, c: float) -> float:
    """L_n(alpha, c) = exp(c (ln n)^alpha (ln ln n)^(1-alpha)), o(1) taken as 0."""
    ln = math.log(n)
    return math.exp(c * ln**alpha * math.log(ln) ** (1 - alpha))


def crt(residues: list[int], moduli: list[int]) -> tuple[int, int]:
    """Chinese remaindering for pairwise coprime moduli."""
    x, m = 0, 1
    for r, n in zip(residues, moduli):
        g = math.gcd(m, n)
        if g != 1:
            raise ValueError("moduli must be pairwise coprime")
        t = (r - x) * pow(m, -1, n) % n
        x += m * t
        m *= n
    return x % m, m
