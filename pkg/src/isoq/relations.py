"""Relations over a factor base of small split primes, and random walks on Cl(delta).

A relation for a class [b] is an exponent vector z with
``[b] = [p_1^{z_1} ... p_f^{z_f}]``.  It is found by walking randomly from
[b] along factor-base primes until the reduced form of the endpoint has a
norm that factors over the base.
"""

from __future__ import annotations

import math
import random
import warnings
from dataclasses import dataclass

from . import classgroup as cg
from .classgroup import PrimeForm, QuadForm
from .ntheory import L_notation, primes_up_to

WALK_C = 2.0


class EmptyFactorBase(ValueError):
    pass


class WalkLengthError(ValueError):
    pass


@dataclass(frozen=True)
class FactorBase:
    delta: int
    q: int
    n: int
    conductor_v: int
    bound_x: int
    primes: tuple[PrimeForm, ...]

    @property
    def f(self) -> int:
        return len(self.primes)

    def ells(self) -> list[int]:
        return [p.ell for p in self.primes]


@dataclass(frozen=True)
class WalkVector:
    entries: tuple[int, ...]
    t: int

    @property
    def l1(self) -> int:
        return sum(abs(e) for e in self.entries)


@dataclass(frozen=True)
class Relation:
    z: tuple[int, ...]

    @property
    def l1(self) -> int:
        return sum(abs(e) for e in self.z)


def factor_base_bound(delta: int, q: int, smoothness_z: float, minimum: int = 3) -> int:
    big = max(abs(delta), q, 3)
    return max(minimum, math.ceil(L_notation(big, 0.5, smoothness_z)))


def build_factor_base(
    delta: int,
    q: int,
    n: int,
    conductor_v: int = 1,
    smoothness_z: float = 0.5,
    *,
    minimum: int = 3,
    bound: int | None = None,
) -> FactorBase:
    """Odd split primes up to the L(1/2, z) bound that do not divide q * n * v.

    ``bound`` overrides the computed bound outright.
    """
    cg.check_discriminant(delta)
    if smoothness_z <= 0:
        raise ValueError("smoothness_z must be positive")
    x = bound if bound is not None else factor_base_bound(delta, q, smoothness_z, minimum)
    bad = q * n * conductor_v
    primes = []
    for ell in primes_up_to(x):
        if ell == 2 or (bad and bad % ell == 0):
            continue
        pf = cg.prime_form(ell, delta)
        if pf is not None:
            primes.append(pf)
    if not primes:
        raise EmptyFactorBase(f"no odd split primes <= {x} for delta={delta}")
    return FactorBase(delta, q, n, conductor_v, x, tuple(primes))


def generated_subgroup(fb: FactorBase) -> set[QuadForm]:
    """Closure of the factor-base classes under composition (desk-scale h only)."""
    seen = {cg.identity(fb.delta)}
    frontier = list(seen)
    while frontier:
        nxt = []
        for g in frontier:
            for p in fb.primes:
                y = cg.compose(g, p.form)
                if y not in seen:
                    seen.add(y)
                    nxt.append(y)
        frontier = nxt
    return seen


def generating_factor_base(
    delta: int,
    q: int,
    n: int,
    conductor_v: int = 1,
    smoothness_z: float = 0.5,
    *,
    h: int | None = None,
    max_bound: int = 1000,
) -> FactorBase:
    """Smallest factor base, starting from the L(1/2, z) bound, whose primes generate Cl(delta).

    Relations only exist for every class when the base generates the group, so the
    bound is raised prime by prime until it does.
    """
    if h is None:
        h = cg.class_number(delta)
    x = factor_base_bound(delta, q, smoothness_z)
    while x <= max_bound:
        try:
            fb = build_factor_base(delta, q, n, conductor_v, smoothness_z, bound=x)
        except EmptyFactorBase:
            fb = None
        if fb is not None and len(generated_subgroup(fb)) == h:
            return fb
        x += 1
    raise EmptyFactorBase(f"no generating factor base below {max_bound} for delta={delta}")


def mixing_factor_base(delta: int, exponent_b: float = 2.1) -> FactorBase:
    """All odd split primes up to (ln|delta|)^B, B > 2, as used for rapid mixing."""
    if exponent_b <= 2:
        raise ValueError("the mixing bound needs B > 2")
    x = math.ceil(math.log(abs(delta)) ** exponent_b)
    return build_factor_base(delta, 1, 1, bound=max(3, x))


def walk_range(delta: int, h: int, C: float = WALK_C) -> tuple[float, float]:
    """Admissible walk lengths C ln h / ln ln|delta| <= t <= C ln|delta|."""
    lo = C * math.log(h) / math.log(math.log(abs(delta))) if h > 1 else 0.0
    return lo, C * math.log(abs(delta))


def check_walk_length(delta: int, h: int | None, t: int, C: float = WALK_C, strict: bool = False) -> None:
    if h is None:
        h = cg.class_number(delta)
    lo, hi = walk_range(delta, h, C)
    if lo <= t <= hi:
        return
    msg = f"walk length t={t} outside [{lo:.2f}, {hi:.2f}]"
    if strict:
        raise WalkLengthError(msg)
    warnings.warn(msg, stacklevel=3)


def sample_walk(
    fb: FactorBase,
    t: int,
    rng: random.Random,
    *,
    nonnegative: bool = False,
    C: float = WALK_C,
    h: int | None = None,
    strict: bool = False,
    check: bool = True,
) -> WalkVector:
    """Random walk of t steps over the factor base.

    The default takes t uniform steps over the 2f signed generators
    (the multiset A u A^{-1}) and accumulates them, so opposite steps cancel.
    ``nonnegative=True`` instead draws v >= 0 uniformly among vectors with
    |v|_1 = t and entries below |delta|.
    """
    if t < 0:
        raise WalkLengthError("t must be non-negative")
    if check and t > 0:
        check_walk_length(fb.delta, h, t, C, strict)
    f = fb.f
    entries = [0] * f
    if nonnegative:
        while True:
            # stars and bars: f-1 bars among t+f-1 slots
            bars = sorted(rng.sample(range(t + f - 1), f - 1))
            prev = -1
            entries = []
            for b in bars + [t + f - 1]:
                entries.append(b - prev - 1)
                prev = b
            if max(entries) < abs(fb.delta):
                break
    else:
        for _ in range(t):
            step = rng.randrange(2 * f)
            entries[step >> 1] += -1 if step & 1 else 1
    return WalkVector(tuple(entries), t)


def evaluate(fb: FactorBase, exps) -> QuadForm:
    """Reduced form of prod p_i^{e_i} over the factor base."""
    out = cg.identity(fb.delta)
    for p, e in zip(fb.primes, exps):
        if e:
            out = cg.compose(out, cg.power(p.form, e))
    return out


def factor_over_base(a_v: QuadForm, fb: FactorBase) -> tuple[int, ...] | None:
    """Exponent vector e with a_v = prod p_i^{e_i}, or None if N(a_v) is not smooth.

    The sign of each exponent records which of the two conjugate primes above
    ell divides the ideal: +e when a_v.b = b_ell (mod 2 ell).
    """
    norm = a_v.a
    exps = []
    for p in fb.primes:
        ell = p.ell
        e = 0
        while norm % ell == 0:
            norm //= ell
            e += 1
        if e and (a_v.b - p.b) % (2 * ell):
            e = -e
        exps.append(e)
    if norm != 1:
        return None
    exps = tuple(exps)
    if evaluate(fb, exps) != cg.reduce(a_v):
        raise ArithmeticError(f"factorisation of {a_v} over the base did not recompose")
    return exps


def default_max_iters(fb: FactorBase, smoothness_z: float = 0.5) -> int:
    big = max(abs(fb.delta), fb.q, 3)
    return math.ceil(L_notation(big, 0.5, 1 / (4 * smoothness_z)))


def find_relation(
    fb: FactorBase,
    target: QuadForm,
    t: int,
    rng: random.Random,
    max_iters: int | None = None,
    *,
    nonnegative: bool = False,
    C: float = WALK_C,
    h: int | None = None,
    strict: bool = False,
) -> Relation | None:
    if target.delta != fb.delta:
        raise cg.FormError("target has the wrong discriminant")
    target = cg.reduce(target)
    if max_iters is None:
        max_iters = default_max_iters(fb)
    if t > 0:
        check_walk_length(fb.delta, h, t, C, strict)
    for _ in range(max_iters):
        v = sample_walk(fb, t, rng, nonnegative=nonnegative, check=False)
        a_v = cg.compose(target, evaluate(fb, v.entries))
        a = factor_over_base(a_v, fb)
        if a is None:
            continue
        z = tuple(x - y for x, y in zip(a, v.entries))
        if evaluate(fb, z) != target:
            raise ArithmeticError("relation failed recomposition")
        return Relation(z)
    return None


def relation_norm_bound(delta: int, t: int) -> float:
    """|z|_1 <= t + log2 sqrt(|delta|/3) for every relation from a length-t walk."""
    return t + math.log2(math.sqrt(abs(delta) / 3))


def mixing_probability(
    delta: int,
    fb: FactorBase,
    t: int,
    target_set,
    trials: int,
    rng: random.Random,
) -> float:
    """Empirical probability that a t-step signed walk from the identity lands in target_set."""
    targets = {cg.reduce(f) for f in target_set}
    if not targets:
        return 0.0
    if trials <= 0:
        raise ValueError("trials must be positive")
    hits = 0
    # precompute powers so each trial costs f compositions at most
    cache: dict[tuple[int, ...], QuadForm] = {}
    for _ in range(trials):
        v = sample_walk(fb, t, rng, check=False).entries
        end = cache.get(v)
        if end is None:
            end = cache[v] = evaluate(fb, v)
        hits += end in targets
    return hits / trials


__all__ = [
    "EmptyFactorBase",
    "FactorBase",
    "Relation",
    "WalkLengthError",
    "WalkVector",
    "build_factor_base",
    "default_max_iters",
    "evaluate",
    "factor_over_base",
    "find_relation",
    "generated_subgroup",
    "generating_factor_base",
    "mixing_factor_base",
    "mixing_probability",
    "relation_norm_bound",
    "sample_walk",
    "walk_range",
]
