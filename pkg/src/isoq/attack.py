"""Recovering the ideal class that links two horizontally isogenous curves.

The hiding functions are f_c(x) = ([b_1]^{x_1} ... [b_k]^{x_k}) * j(E_c) over
the invariant-factor decomposition of Cl(delta).  Since f_1(x) = f_0(x + s),
the hidden shift s gives the quotient [s] = prod [b_i]^{s_i} with
[s] * j(E_0) = j(E_1).
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from . import classgroup as cg
from . import curves as cv
from . import relations as rel
from .classgroup import ClassGroup, QuadForm
from .curves import Curve, CurveContext, StarEvaluator
from .ntheory import factorize, is_prime
from .sieve import AbelianGroup, HiddenShiftError, ShiftError, ShiftOracle, solve_hidden_shift


class InstanceError(ValueError):
    pass


class AttackError(RuntimeError):
    pass


def admissible(ctx: CurveContext) -> bool:
    """True when the class group action on ctx is that of the maximal order.

    With conductor v > 1 the endomorphism ring may be a suborder; the action
    is still that of Cl(delta) when every order between has the same class number.
    """
    if ctx.conductor_v == 1:
        return True
    h = cg.class_number(ctx.delta)
    divisors = {1}
    for q, e in factorize(ctx.conductor_v).items():
        divisors = {d * q**i for d in divisors for i in range(e + 1)}
    return all(cg.class_number(ctx.delta * d * d) == h for d in divisors)


@dataclass(frozen=True)
class Instance:
    p: int
    E0: Curve
    E1: Curve
    ctx0: CurveContext
    ctx1: CurveContext
    delta: int

    def __post_init__(self):
        if self.E0.p != self.p or self.E1.p != self.p:
            raise InstanceError("curves are over different fields")
        if self.ctx0.n != self.ctx1.n or self.ctx0.delta != self.ctx1.delta:
            raise InstanceError("curves are not horizontally isogenous (n or delta differ)")
        if self.ctx0.delta != self.delta:
            raise InstanceError("delta does not match the curves")
        if not (admissible(self.ctx0) and admissible(self.ctx1)):
            raise InstanceError(f"conductor {self.ctx0.conductor_v} changes the class group")

    @classmethod
    def from_curves(cls, E0: Curve, E1: Curve, delta: int | None = None) -> Instance:
        ctx0, ctx1 = cv.point_count(E0), cv.point_count(E1)
        if delta is not None and delta != ctx0.delta:
            raise InstanceError(f"given delta {delta} but point counting gives {ctx0.delta}")
        return cls(E0.p, E0, E1, ctx0, ctx1, ctx0.delta)


@dataclass(frozen=True)
class Quotient:
    cls: QuadForm

    def __post_init__(self):
        object.__setattr__(self, "cls", cg.reduce(self.cls))

    def __str__(self) -> str:
        return str(self.cls)


@dataclass(frozen=True)
class AttackConfig:
    budget: int = 200_000
    retries: int = 16
    k: int | None = None
    smoothness_z: float = 0.5


def hiding_value(
    c: int,
    exponents,
    instance: Instance,
    group: ClassGroup,
    fb: rel.FactorBase,
    rng: random.Random | None = None,
    *,
    evaluator: StarEvaluator | None = None,
) -> int:
    if c not in (0, 1):
        raise ValueError("c must be 0 or 1")
    exponents = tuple(exponents)
    if len(exponents) != len(group.orders) or any(not 0 <= e < n for e, n in zip(exponents, group.orders)):
        raise ValueError(f"exponents {exponents} outside orders {group.orders}")
    ev = evaluator or StarEvaluator(fb, rng)
    ctx = instance.ctx0 if c == 0 else instance.ctx1
    return ev(ctx, group.element(exponents))


def verify_quotient(
    instance: Instance,
    q: Quotient,
    fb: rel.FactorBase | None = None,
    rng: random.Random | None = None,
) -> bool:
    """Check [q] * j(E0) = j(E1) with a fresh star evaluation."""
    if q.cls.delta != instance.delta:
        return False
    fb = fb or cv.factor_base_for(instance.ctx0)
    return StarEvaluator(fb, rng or random.Random()).curve(instance.ctx0, q.cls).j == instance.ctx1.j


def run_attack(
    instance: Instance,
    config: AttackConfig | None = None,
    rng: random.Random | None = None,
) -> Quotient:
    config = config or AttackConfig()
    rng = rng or random.Random()
    group = cg.enumerate_class_group(instance.delta)
    fb = cv.factor_base_for(instance.ctx0, config.smoothness_z)
    if not group.orders:
        q = Quotient(group.identity)
    else:
        ev = StarEvaluator(fb, rng)
        A = AbelianGroup(tuple(group.orders))

        def f0(x):
            return hiding_value(0, x, instance, group, fb, evaluator=ev)

        def f1(x):
            return hiding_value(1, x, instance, group, fb, evaluator=ev)

        oracle = ShiftOracle.honest(A, f0, f1, rng)
        try:
            s = solve_hidden_shift(oracle, rng, config.budget, retries=config.retries, k=config.k)
        except ShiftError as exc:
            raise AttackError(f"hiding functions do not define a shift: {exc}") from exc
        except HiddenShiftError as exc:
            raise AttackError(str(exc)) from exc
        q = Quotient(group.element(s))
    if not verify_quotient(instance, q, fb, random.Random(rng.random())):
        raise AttackError(f"quotient {q} failed independent verification")
    return q


def generate_instance(
    p_min: int,
    p_max: int,
    h_min: int,
    rng: random.Random,
    *,
    h_max: int | None = None,
    max_tries: int = 20_000,
) -> tuple[Instance, Quotient]:
    """Random ordinary admissible curve with h_min <= h <= h_max, plus a planted quotient."""
    if p_max > cv.DEFAULT_P_CAP:
        raise InstanceError(f"p_max={p_max} exceeds the point-counting cap")
    primes = [p for p in range(max(5, p_min), p_max + 1) if is_prime(p)]
    if not primes:
        raise InstanceError(f"no primes >= 5 in [{p_min}, {p_max}]")
    h_cache: dict[int, int] = {}
    for _ in range(max_tries):
        p = rng.choice(primes)
        try:
            E0 = Curve(p, rng.randrange(p), rng.randrange(p))
            ctx0 = cv.point_count(E0)
        except cv.CurveError:
            continue
        h = h_cache.get(ctx0.delta)
        if h is None:
            h = h_cache[ctx0.delta] = cg.class_number(ctx0.delta)
        if h < h_min or (h_max is not None and h > h_max) or not admissible(ctx0):
            continue
        group = cg.enumerate_class_group(ctx0.delta)
        planted = Quotient(rng.choice(group.elements))
        fb = cv.factor_base_for(ctx0)
        ctx1 = cv.star_curve(ctx0, planted.cls, fb, rng=rng)
        return Instance(p, E0, ctx1.curve, ctx0, ctx1, ctx0.delta), planted
    raise InstanceError(f"no admissible curve with class number in [{h_min}, {h_max}] after {max_tries} tries")


__all__ = [
    "AttackConfig",
    "AttackError",
    "Instance",
    "InstanceError",
    "Quotient",
    "admissible",
    "generate_instance",
    "hiding_value",
    "run_attack",
    "verify_quotient",
]
