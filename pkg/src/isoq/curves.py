"""Ordinary elliptic curves over small prime fields and the isogeny star operator.

Curves are short Weierstrass ``y^2 = x^3 + A x + B`` over F_p with p >= 5.
A split prime form ``(ell, b, c)`` of discriminant delta acts through the
ell-isogeny whose kernel is the Frobenius eigenspace with eigenvalue
``(t + v b) / 2 mod ell``; a negative exponent uses the conjugate form and
hence the other eigenvalue.
"""

from __future__ import annotations

import math
import random
import threading
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import classgroup as cg
from . import relations as rel
from .classgroup import PrimeForm, QuadForm
from .ntheory import fundamental_discriminant, is_prime
from .polyfp import FieldPoly, gcd

DEFAULT_P_CAP = 10**6


class CurveError(ValueError):
    pass


class KernelError(ArithmeticError):
    pass


@dataclass(frozen=True)
class Curve:
    p: int
    A: int
    B: int

    def __post_init__(self):
        if self.p < 5 or not is_prime(self.p):
            raise CurveError(f"p={self.p} must be a prime >= 5")
        object.__setattr__(self, "A", self.A % self.p)
        object.__setattr__(self, "B", self.B % self.p)
        if (4 * self.A**3 + 27 * self.B**2) % self.p == 0:
            raise CurveError(f"singular curve A={self.A}, B={self.B} over F_{self.p}")

    @property
    def j(self) -> int:
        p = self.p
        a3 = 4 * self.A**3
        return 1728 * a3 * pow(a3 + 27 * self.B**2, -1, p) % p

    def rhs(self) -> FieldPoly:
        return FieldPoly.make(self.p, [self.B, self.A, 0, 1])

    def __str__(self) -> str:
        return f"y^2 = x^3 + {self.A}x + {self.B} over F_{self.p}"


@dataclass(frozen=True)
class CurveContext:
    curve: Curve
    n: int
    t: int
    conductor_v: int
    delta: int

    @property
    def p(self) -> int:
        return self.curve.p

    @property
    def j(self) -> int:
        return self.curve.j


@dataclass(frozen=True)
class IsogenyStep:
    ell: int
    eigenvalue: int
    kernel_poly: FieldPoly
    codomain: Curve


def count_points(c: Curve) -> int:
    """#E(F_p) by summing quadratic characters over all x (vectorised)."""
    p = c.p
    xs = np.arange(p, dtype=np.int64)
    chi = np.full(p, -1, dtype=np.int64)
    chi[(xs * xs) % p] = 1
    chi[0] = 0
    fx = (((xs * xs) % p * xs) % p + c.A * xs + c.B) % p
    return int(p + 1 + chi[fx].sum())


def point_count(c: Curve, cap: int = DEFAULT_P_CAP) -> CurveContext:
    if c.p > cap:
        raise CurveError(f"p={c.p} exceeds point-counting cap {cap}")
    n = count_points(c)
    t = c.p + 1 - n
    if t % c.p == 0:
        raise CurveError(f"curve {c} is supersingular (t={t}); ordinary required")
    delta, v = fundamental_discriminant(t * t - 4 * c.p)
    return CurveContext(c, n, t, v, delta)


@lru_cache(maxsize=256)
def _division_polys(A: int, B: int, p: int, top: int, modulus: tuple[int, ...] | None) -> tuple[FieldPoly, ...]:
    """y-free division polynomials f_0..f_top (psi_n = f_n for odd n, 2y f_n for even n).

    Optionally reduced modulo ``modulus`` (coefficient tuple) throughout.
    """
    M = FieldPoly(p, modulus) if modulus else None

    def red(g: FieldPoly) -> FieldPoly:
        return g % M if M is not None else g

    F = FieldPoly.make(p, [B, A, 0, 1])
    F2 = red(F * F * 16)
    f = [
        FieldPoly.const(p, 0),
        FieldPoly.const(p, 1),
        FieldPoly.const(p, 1),
        FieldPoly.make(p, [-A * A, 12 * B, 6 * A, 0, 3]),
        FieldPoly.make(p, [-2 * (8 * B * B + A**3), -8 * A * B, -10 * A * A, 40 * B, 10 * A, 0, 2]),
    ]
    f = [red(g) for g in f]
    for k in range(5, top + 1):
        m = k // 2
        if k % 2:
            # psi_{2m+1} = psi_{m+2} psi_m^3 - psi_{m-1} psi_{m+1}^3
            if m % 2 == 0:
                g = F2 * f[m + 2] * red(f[m] ** 3) - f[m - 1] * red(f[m + 1] ** 3)
            else:
                g = f[m + 2] * red(f[m] ** 3) - F2 * f[m - 1] * red(f[m + 1] ** 3)
        else:
            g = f[m] * (red(f[m + 2] * f[m - 1] * f[m - 1]) - red(f[m - 2] * f[m + 1] * f[m + 1]))
        f.append(red(g))
    return tuple(f[: top + 1])


def division_polynomial(c: Curve, ell: int) -> FieldPoly:
    """psi_ell(x) for odd ell; degree (ell^2 - 1)/2 when ell != p."""
    if ell < 3 or ell % 2 == 0:
        raise CurveError("ell must be odd and >= 3")
    if ell == c.p:
        raise CurveError("ell must differ from the characteristic")
    return _division_polys(c.A, c.B, c.p, max(ell, 4), None)[ell]


def eigenvalue_of(pf: PrimeForm, ctx: CurveContext, sign: int = 1) -> int:
    """Frobenius eigenvalue (t + v b)/2 mod ell attached to pf (sign=-1: its conjugate)."""
    ell = pf.ell
    if ell % 2 == 0:
        raise CurveError("ell must be odd")
    if pf.form.delta != ctx.delta:
        raise CurveError("prime form discriminant does not match the curve")
    if (ctx.conductor_v * ctx.p) % ell == 0:
        raise CurveError(f"ell={ell} divides v*p")
    b = pf.b if sign > 0 else -pf.b
    lam = (ctx.t + ctx.conductor_v * b) * pow(2, -1, ell) % ell
    assert (lam * lam - ctx.t * lam + ctx.p) % ell == 0
    return lam


def kernel_polynomial(ctx: CurveContext, ell: int, lam: int) -> FieldPoly:
    """Monic factor of psi_ell whose roots are x(P) for P with Frobenius(P) = [lam]P.

    Frobenius (x^p, y^p) is compared with the multiplication-by-n map for an
    odd representative n of lam, using the division-polynomial formulas
    modulo psi_ell; the kernel is the gcd of psi_ell with both conditions.
    """
    c = ctx.curve
    p = c.p
    if lam % ell == 0:
        raise KernelError("eigenvalue must be a unit mod ell")
    psi = division_polynomial(c, ell).monic()
    n = lam % ell
    if n % 2 == 0:
        n += ell
    fs = _division_polys(c.A, c.B, p, n + 2, psi.coeffs)

    def fn(k: int) -> FieldPoly:
        return -fs[-k] if k < 0 else fs[k]

    x = FieldPoly.x(p)
    F = c.rhs() % psi
    xp = x.powmod(p, psi)
    fn2 = (fn(n) * fn(n)) % psi
    xcond = ((xp - x) * fn2 + F * 4 * ((fn(n + 1) * fn(n - 1)) % psi)) % psi
    w = (fn(n + 2) * ((fn(n - 1) * fn(n - 1)) % psi) - fn(n - 2) * ((fn(n + 1) * fn(n + 1)) % psi)) % psi
    ycond = (F.powmod((p - 1) // 2, psi) * ((fn2 * fn(n)) % psi) - w) % psi
    h = gcd(gcd(psi, xcond), ycond)
    if h.degree != (ell - 1) // 2:
        raise KernelError(f"eigenspace for lambda={lam} mod {ell} has x-degree {h.degree}")
    return h


def velu_codomain(c: Curve, h: FieldPoly) -> Curve:
    """Codomain of the odd-degree isogeny with kernel polynomial h (Kohel's form of Velu)."""
    p = c.p
    h = h.monic()
    d = h.degree
    if d < 1:
        raise KernelError("kernel polynomial must have positive degree")
    ell = 2 * d + 1
    if not (division_polynomial(c, ell) % h).is_zero():
        raise KernelError("h does not divide the division polynomial")
    co = list(h.coeffs) + [0, 0, 0]
    # elementary symmetric functions of the roots
    e1 = -co[d - 1]
    e2 = co[d - 2] if d >= 2 else 0
    e3 = -co[d - 3] if d >= 3 else 0
    p1 = e1
    p2 = e1 * e1 - 2 * e2
    p3 = e1**3 - 3 * e1 * e2 + 3 * e3
    v = 6 * p2 + 2 * d * c.A
    w = 10 * p3 + 6 * c.A * p1 + 4 * d * c.B
    return Curve(p, c.A - 5 * v, c.B - 7 * w)


def isogeny_step(ctx: CurveContext, pf: PrimeForm, sign: int = 1) -> IsogenyStep:
    lam = eigenvalue_of(pf, ctx, sign)
    h = kernel_polynomial(ctx, pf.ell, lam)
    return IsogenyStep(pf.ell, lam, h, velu_codomain(ctx.curve, h))


def _recontext(ctx: CurveContext, curve: Curve) -> CurveContext:
    new = point_count(curve)
    if (new.n, new.t, new.delta) != (ctx.n, ctx.t, ctx.delta):
        raise CurveError("isogeny step changed (n, t, delta)")
    return new


def star_smooth_curve(ctx: CurveContext, steps) -> CurveContext:
    """Apply prod p_i^{e_i} for a sequence of (PrimeForm, exponent) pairs."""
    for pf, e in steps:
        for _ in range(abs(e)):
            step = isogeny_step(ctx, pf, 1 if e > 0 else -1)
            ctx = _recontext(ctx, step.codomain)
    return ctx


def star_smooth(ctx: CurveContext, steps) -> int:
    return star_smooth_curve(ctx, steps).j


class RelationNotFound(RuntimeError):
    pass


def default_walk_length(delta: int, h: int, C: float = rel.WALK_C) -> int:
    lo, hi = rel.walk_range(delta, h, C)
    return max(0, min(math.floor(hi), math.ceil(lo)))


def star_curve(
    ctx: CurveContext,
    target_class: QuadForm,
    fb: rel.FactorBase,
    t: int | None = None,
    rng: random.Random | None = None,
    max_iters: int | None = None,
    retries: int = 8,
) -> CurveContext:
    """[target_class] * E as a curve: find a relation over fb, then walk it."""
    if target_class.delta != ctx.delta:
        raise CurveError("class and curve have different discriminants")
    rng = rng or random.Random()
    target = cg.reduce(target_class)
    if target == cg.identity(ctx.delta):
        return ctx
    h = cg.class_number(ctx.delta)
    if t is None:
        t = default_walk_length(ctx.delta, h)
    lo, hi = rel.walk_range(ctx.delta, h)
    for attempt in range(retries):
        # a walk's endpoint class depends on the parity of t when the base
        # has order-2 elements, so odd retries use the other parity
        tt = t + (attempt & 1) if t + 1 <= hi else max(0, t - (attempt & 1))
        r = rel.find_relation(fb, target, tt, rng, max_iters, h=h)
        if r is not None:
            return star_smooth_curve(ctx, list(zip(fb.primes, r.z)))
    raise RelationNotFound(f"no relation for {target} after {retries} searches")


def star(ctx, target_class, fb, t=None, rng=None, max_iters=None) -> int:
    return star_curve(ctx, target_class, fb, t, rng, max_iters).j


class StarEvaluator:
    """Memoised star operator; the cache is keyed by (curve, reduced class)."""

    def __init__(self, fb: rel.FactorBase, rng: random.Random | None = None, t: int | None = None):
        self.fb = fb
        self.rng = rng or random.Random()
        self.t = t
        self._cache: dict[tuple[Curve, QuadForm], CurveContext] = {}
        self._lock = threading.Lock()
        self.evaluations = 0

    def curve(self, ctx: CurveContext, cls: QuadForm) -> CurveContext:
        key = (ctx.curve, cg.reduce(cls))
        with self._lock:
            hit = self._cache.get(key)
        if hit is not None:
            return hit
        out = star_curve(ctx, key[1], self.fb, self.t, self.rng)
        with self._lock:
            self.evaluations += 1
            self._cache.setdefault(key, out)
        return out

    def __call__(self, ctx: CurveContext, cls: QuadForm) -> int:
        return self.curve(ctx, cls).j


def factor_base_for(ctx: CurveContext, smoothness_z: float = 0.5, **kw) -> rel.FactorBase:
    """Factor base for walks from ctx; with no explicit bound, the smallest generating one."""
    if "bound" in kw:
        return rel.build_factor_base(ctx.delta, ctx.p, ctx.n, ctx.conductor_v, smoothness_z, **kw)
    return rel.generating_factor_base(ctx.delta, ctx.p, ctx.n, ctx.conductor_v, smoothness_z, **kw)
