"""Exact classical simulation of a polynomial-space sieve for the abelian hidden shift problem.

States are single qubits (|0> + e^{2 pi i theta}|1>)/sqrt 2 with a known
group label x.  Phases are kept as exact rationals, so the invariant
theta = sum_j s_j x_j / N_j (mod 1) can be asserted rather than estimated.
Measurement in the combiners is simulated by sampling the basis string
y in {0,1}^k uniformly (all joint amplitudes have equal magnitude) and
then computing the collapsed subspace by brute force.
"""

from __future__ import annotations

import math
import random
from collections import Counter
from dataclasses import dataclass, field, replace
from fractions import Fraction
from itertools import product
from typing import Callable, Sequence

import numpy as np

from .ntheory import crt

ABORT_REASONS = ("input-bound", "single-solution", "unpaired", "post-selection", "carry")


def _kind(n: int) -> str:
    if n & (n - 1) == 0:
        return "pow2"
    return "odd" if n % 2 else "mixed"


@dataclass(frozen=True)
class AbelianGroup:
    """Z_{N_1} x ... x Z_{N_t}; components that are neither odd nor 2-powers are 'mixed'."""

    moduli: tuple[int, ...]

    def __post_init__(self):
        mods = tuple(int(n) for n in self.moduli)
        if any(n < 2 for n in mods):
            raise ValueError(f"every modulus must be >= 2, got {mods}")
        object.__setattr__(self, "moduli", mods)

    @property
    def t(self) -> int:
        return len(self.moduli)

    @property
    def order(self) -> int:
        return math.prod(self.moduli)

    @property
    def kinds(self) -> tuple[str, ...]:
        return tuple(_kind(n) for n in self.moduli)

    def is_split(self) -> bool:
        return "mixed" not in self.kinds

    def zero(self) -> tuple[int, ...]:
        return (0,) * self.t

    def normalize(self, x) -> tuple[int, ...]:
        x = tuple(x)
        if len(x) != self.t:
            raise ValueError(f"element {x} has the wrong length for {self}")
        return tuple(int(a) % n for a, n in zip(x, self.moduli))

    def add(self, x, y) -> tuple[int, ...]:
        return tuple((a + b) % n for a, b, n in zip(x, y, self.moduli))

    def sub(self, x, y) -> tuple[int, ...]:
        return tuple((a - b) % n for a, b, n in zip(x, y, self.moduli))

    def elements(self):
        return product(*(range(n) for n in self.moduli))

    def random_element(self, rng: random.Random) -> tuple[int, ...]:
        return tuple(rng.randrange(n) for n in self.moduli)

    def pairing(self, s, x) -> Fraction:
        """<s, x> = sum_j s_j x_j / N_j reduced into [0, 1)."""
        return sum((Fraction(a * b, n) for a, b, n in zip(s, x, self.moduli)), Fraction(0)) % 1

    def crt_split(self) -> CrtSplit:
        return CrtSplit.of(self)

    def __str__(self) -> str:
        return " x ".join(f"Z_{n}" for n in self.moduli)


@dataclass(frozen=True)
class CrtSplit:
    """Isomorphism from a group to one whose components are all odd or 2-powers.

    Z_N with N = 2^n M splits as Z_{2^n} x Z_M.  Labels reduce componentwise;
    a secret s maps to (s M^{-1} mod 2^n, s 2^{-n} mod M) so that the phase
    s x / N is unchanged.
    """

    source: AbelianGroup
    target: AbelianGroup
    # for each source component, the target indices it maps to
    parts: tuple[tuple[int, ...], ...]

    @classmethod
    def of(cls, group: AbelianGroup) -> CrtSplit:
        mods: list[int] = []
        parts = []
        for n in group.moduli:
            two = n & -n
            odd = n // two
            idx = []
            for piece in (two, odd):
                if piece > 1:
                    idx.append(len(mods))
                    mods.append(piece)
            parts.append(tuple(idx))
        return cls(group, AbelianGroup(tuple(mods)), tuple(parts))

    def label(self, x) -> tuple[int, ...]:
        out = [0] * self.target.t
        for a, idx in zip(x, self.parts):
            for i in idx:
                out[i] = a % self.target.moduli[i]
        return tuple(out)

    def secret_to_target(self, s) -> tuple[int, ...]:
        out = [0] * self.target.t
        for a, n, idx in zip(s, self.source.moduli, self.parts):
            for i in idx:
                piece = self.target.moduli[i]
                out[i] = a * pow(n // piece, -1, piece) % piece
        return tuple(out)

    def secret_from_target(self, s) -> tuple[int, ...]:
        out = []
        for n, idx in zip(self.source.moduli, self.parts):
            residues, moduli = [], []
            for i in idx:
                piece = self.target.moduli[i]
                residues.append(s[i] * (n // piece) % piece)
                moduli.append(piece)
            out.append(crt(residues, moduli)[0])
        return tuple(out)

    def state(self, st: PsiState) -> PsiState:
        return PsiState(self.label(st.x), st.theta, self.target.moduli)


@dataclass(frozen=True)
class PsiState:
    """Phase state with known label x; theta is the relative phase exponent."""

    x: tuple[int, ...]
    theta: Fraction
    moduli: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "theta", Fraction(self.theta) % 1)

    @property
    def group(self) -> AbelianGroup:
        return AbelianGroup(self.moduli)


class ShiftError(ValueError):
    pass


class ShiftOracle:
    """Source of phase states for a hidden shift s with f_1(x) = f_0(x + s).

    Cheat mode stores s directly.  Honest mode only holds f_0 and f_1 and
    simulates coset-state preparation from their tables.
    """

    def __init__(self, group: AbelianGroup, rng: random.Random | None = None, *, secret=None, f0=None, f1=None):
        self.group = group
        self.rng = rng or random.Random()
        if secret is not None:
            self.mode = "cheat"
            self._secret = group.normalize(secret)
        elif f0 is not None and f1 is not None:
            self.mode = "honest"
            self._secret = None
        else:
            raise ValueError("need a secret (cheat) or both hiding functions (honest)")
        self.f0, self.f1 = f0, f1
        self._inv0: dict | None = None
        self._images: list | None = None
        self._inv1: dict | None = None
        self.samples = 0

    @classmethod
    def cheat(cls, group: AbelianGroup, secret, rng: random.Random | None = None) -> ShiftOracle:
        return cls(group, rng, secret=secret)

    @classmethod
    def honest(cls, group: AbelianGroup, f0: Callable, f1: Callable, rng: random.Random | None = None) -> ShiftOracle:
        return cls(group, rng, f0=f0, f1=f1)

    def _tabulate(self) -> None:
        if self._inv0 is not None:
            return
        G = self.group
        elems = list(G.elements())
        inv0 = {}
        for x in elems:
            w = self.f0(x)
            if w in inv0:
                raise ShiftError(f"f0 is not injective: f0{inv0[w]} = f0{x}")
            inv0[w] = x
        images = [self.f1(x) for x in elems]
        if images[0] not in inv0:
            raise ShiftError("f1(0) is not an image of f0, so no shift exists")
        s = inv0[images[0]]
        for x, w in zip(elems, images):
            if inv0.get(w) != G.add(x, s):
                raise ShiftError("f1 is not a shift of f0")
        self._inv0, self._images, self._secret = inv0, images, s
        self._inv1 = dict(zip(images, elems))

    @property
    def shift(self) -> tuple[int, ...]:
        if self.mode == "honest":
            self._tabulate()
        return self._secret

    def sample(self) -> PsiState:
        G = self.group
        self.samples += 1
        if self.mode == "cheat":
            x = G.random_element(self.rng)
            return PsiState(x, G.pairing(self._secret, x), G.moduli)
        self._tabulate()
        # measuring the function register picks an image w; the qubit then holds
        # |0,a> + |1,b> with f0(a) = f1(b) = w, and the character measurement
        # returns a uniform x with relative phase <a - b, x>
        w = self._images[self.rng.randrange(len(self._images))]
        a, b = self._inv0[w], self._inv1[w]
        x = G.random_element(self.rng)
        return PsiState(x, G.pairing(G.sub(a, b), x), G.moduli)

    def verify(self, s) -> bool:
        s = self.group.normalize(s)
        if self.mode == "cheat":
            return s == self._secret
        self._tabulate()
        return all(self._inv0.get(w) == self.group.add(x, s) for x, w in zip(self.group.elements(), self._images))

    def audit(self, st: PsiState) -> bool:
        return st.theta == self.group.pairing(self.shift, st.x)


def fourier_sample(oracle: ShiftOracle) -> PsiState:
    return oracle.sample()


@dataclass(frozen=True)
class Abort:
    reason: str


def _pair(k: int, key: Callable, weight: Callable, rng: random.Random):
    """Measure the ancilla and project onto a pair; returns the difference y** - y* or an Abort.

    The colliding strings are paired in a uniformly random order.  A fixed
    order (say lexicographic) mostly pairs nested subsets, whose label
    differences are biased towards 0.
    """
    strings = list(product((0, 1), repeat=k))
    y = strings[rng.randrange(len(strings))]
    q = key(y)
    sols = [z for z in strings[1:] if key(z) == q]
    if len(sols) == 1:
        return Abort("single-solution")
    if not any(y):
        return Abort("unpaired")
    rng.shuffle(sols)
    if len(sols) % 2 and y == sols[-1]:
        return Abort("unpaired")
    i = sols.index(y)
    a, b = sols[i - i % 2], sols[i - i % 2 + 1]
    lo, hi = sorted((a, b), key=lambda z: (weight(z), z))
    return tuple(u - v for u, v in zip(hi, lo))


def _apply(states: Sequence[PsiState], d) -> PsiState:
    moduli = states[0].moduli
    x = [0] * len(moduli)
    theta = Fraction(0)
    for st, c in zip(states, d):
        if c:
            theta += c * st.theta
            for j, a in enumerate(st.x):
                x[j] += c * a
    return PsiState(tuple(a % n for a, n in zip(x, moduli)), theta, moduli)


def _check_states(states: Sequence[PsiState]) -> None:
    if not states:
        raise ValueError("need at least one state")
    if len({st.moduli for st in states}) != 1:
        raise ValueError("states come from different groups")


def _single(x, component):
    if component is None:
        if len(x) != 1:
            raise ValueError("multi-component labels need an explicit component or view")
        return x[0]
    return x[component]


def _dot(u, y) -> int:
    return sum(a for a, b in zip(u, y) if b)


def combine_d(
    states: Sequence[PsiState],
    B: int,
    B_prime: int,
    rng: random.Random,
    *,
    view: Callable | None = None,
    component: int | None = None,
) -> PsiState | Abort:
    """Merge k states with integer labels below B into one with label below B'.

    ``view`` maps a group label to the integer the combiner works on (an
    automorphic image such as 2^{-j} x); it must be additive on the labels.
    """
    _check_states(states)
    if B_prime < 1 or B < 1:
        raise ValueError("bounds must be positive")
    view = view or (lambda x: _single(x, component))
    u = [view(st.x) for st in states]
    if any(v is None or not 0 <= v < B for v in u):
        raise ValueError(f"labels {u} are not all in [0, {B})")
    cut = 2 * B_prime * (B // (2 * B_prime))
    if any(v >= cut for v in u):
        return Abort("input-bound")
    d = _pair(len(states), lambda y: _dot(u, y) // (2 * B_prime), lambda y: _dot(u, y), rng)
    if isinstance(d, Abort):
        return d
    out = _apply(states, d)
    diff = sum(a * c for a, c in zip(u, d))
    if view(out.x) != diff:
        raise ArithmeticError("view is not additive on these labels")
    # keep with probability B'/(2B'-x'), which flattens the triangular law of |r** - r*|
    if diff >= B_prime or (diff and rng.randrange(2 * B_prime - diff) < B_prime - diff):
        return Abort("post-selection")
    return out


def combine_lsb(
    states: Sequence[PsiState],
    l: int,
    l_prime: int,
    rng: random.Random,
    *,
    component: int | None = None,
) -> PsiState | Abort:
    """Merge k states whose labels are divisible by 2^l into one divisible by 2^l'."""
    _check_states(states)
    c = 0 if component is None and len(states[0].moduli) == 1 else component
    if c is None:
        raise ValueError("multi-component labels need an explicit component")
    N = states[0].moduli[c]
    if _kind(N) != "pow2":
        raise ValueError(f"component modulus {N} is not a power of 2")
    if not 0 <= l <= l_prime or 1 << l_prime > N:
        raise ValueError(f"need 0 <= l <= l' and 2^l' <= N, got l={l}, l'={l_prime}, N={N}")
    u = [st.x[c] for st in states]
    if any(v % (1 << l) for v in u):
        raise ValueError(f"labels {u} are not all divisible by 2^{l}")
    mask = (1 << l_prime) - 1
    d = _pair(len(states), lambda y: _dot(u, y) & mask, lambda y: _dot(u, y), rng)
    if isinstance(d, Abort):
        return d
    out = _apply(states, d)
    assert out.x[c] & mask == 0
    return out


def mixed_radix(x, group: AbelianGroup, components: Sequence[int] | None = None) -> int:
    """mu(x) = sum_j x_j prod_{j' < j} N_j' over the first t-1 components (or the given ones)."""
    if components is None:
        if group.t < 2:
            raise ValueError("mixed radix needs at least two components")
        components = range(group.t - 1)
    mu, scale = 0, 1
    for j in components:
        mu += x[j] * scale
        scale *= group.moduli[j]
    return mu


def combine_z(
    states: Sequence[PsiState],
    B: int,
    B_prime: int,
    rng: random.Random,
    *,
    components: Sequence[int] | None = None,
) -> PsiState | Abort:
    """Merge k states with mu(x) < B into one with mu(x') < B'.

    When several components are flattened a borrow between digits can make
    mu(x') differ from the integer combination; such outcomes abort as 'carry'.
    """
    _check_states(states)
    if B_prime < 1:
        raise ValueError("B' must be positive")
    G = states[0].group
    mu = [mixed_radix(st.x, G, components) for st in states]
    if any(not 0 <= v < B for v in mu):
        raise ValueError(f"mixed-radix labels {mu} are not all in [0, {B})")
    d = _pair(len(states), lambda y: _dot(mu, y) // B_prime, lambda y: _dot(mu, y), rng)
    if isinstance(d, Abort):
        return d
    out = _apply(states, d)
    if mixed_radix(out.x, G, components) != sum(a * c for a, c in zip(mu, d)):
        return Abort("carry")
    return out


# -- schedules ---------------------------------------------------------------


def sieve_k(N: int) -> int:
    """k = floor(sqrt(1/2 log2 N log2 log2 N)), at least 1."""
    if N < 4:
        return 1
    lg = math.log2(N)
    return max(1, math.floor(math.sqrt(0.5 * lg * math.log2(lg))))


def _iroot(n: int, m: int) -> int:
    """floor(n^(1/m)) for integers n >= 0, m >= 1."""
    if n < 2 or m == 1:
        return n
    x = 1 << -(-n.bit_length() // m)
    while True:
        y = ((m - 1) * x + n // x ** (m - 1)) // m
        if y >= x:
            break
        x = y
    while x**m > n:
        x -= 1
    while (x + 1) ** m <= n:
        x += 1
    return x


@dataclass(frozen=True)
class TargetSet:
    """Label set S_i of a sieve stage.

    kind 'all' accepts everything; 'Z' bounds one component (x_c < bound);
    'LSB' asks for 2^bits | x_c; 'D' bounds the view u of x_c, where u is
    2^{-twist} x_c for odd N and x_c / 2^twist for N a power of 2.  Every
    kind also requires the components in ``zeroed`` to vanish, and ``exact``
    narrows a D set to u = 1.
    """

    kind: str
    component: int
    modulus: int
    bound: int | None = None
    bits: int = 0
    twist: int = 0
    zeroed: frozenset = frozenset()
    exact: bool = False

    def view(self, x) -> int | None:
        v = x[self.component]
        if self.modulus % 2:
            return v * pow(2, -self.twist, self.modulus) % self.modulus
        if v % (1 << self.twist):
            return None
        return v >> self.twist

    def contains(self, x) -> bool:
        if any(x[j] for j in self.zeroed):
            return False
        c = self.component
        if self.kind == "all":
            return True
        if self.kind == "Z":
            return x[c] < self.bound
        if self.kind == "LSB":
            return x[c] % (1 << self.bits) == 0
        u = self.view(x)
        if u is None:
            return False
        return u == 1 if self.exact else u < self.bound

    def describe(self) -> str:
        z = ",".join(str(j) for j in sorted(self.zeroed)) or "-"
        if self.kind == "all":
            body = "all"
        elif self.kind == "Z":
            body = f"x[{self.component}]<{self.bound}"
        elif self.kind == "LSB":
            body = f"2^{self.bits}|x[{self.component}]"
        else:
            body = f"u[{self.component}]" + ("=1" if self.exact else f"<{self.bound}")
            body += f" twist={self.twist}"
        return f"{body} zeroed={z}"


@dataclass(frozen=True)
class Stage:
    combiner: str  # "D" | "LSB" | "Z"
    source: TargetSet
    target: TargetSet
    component: int = 0
    B: int = 0
    B_prime: int = 0
    l: int = 0
    l_prime: int = 0
    degraded: bool = False

    def combine(self, states: Sequence[PsiState], rng: random.Random) -> PsiState | Abort:
        if self.combiner == "D":
            return combine_d(states, self.B, self.B_prime, rng, view=self.target.view)
        if self.combiner == "LSB":
            return combine_lsb(states, self.l, self.l_prime, rng, component=self.component)
        return combine_z(states, self.B, self.B_prime, rng, components=(self.component,))


@dataclass(frozen=True)
class SieveSchedule:
    """Sets S_0..S_m with the combiner producing S_i from S_{i-1}.

    ``bounds``, ``rho`` and ``formula_defined`` record the raw schedule
    formula for single-segment schedules; composite plans leave them empty.
    """

    k: int
    sets: tuple[TargetSet, ...]
    stages: tuple[Stage, ...]
    bounds: tuple[int, ...] = ()
    rho: float = 0.0
    formula_defined: bool = True

    @property
    def m(self) -> int:
        return len(self.stages)

    @property
    def degraded(self) -> tuple[bool, ...]:
        return tuple(st.degraded for st in self.stages)


def _d_degraded(k: int, B: int, Bp: int) -> bool:
    return not (4 * k * Bp <= B and B * k <= (1 << k) * Bp)


def _z_degraded(k: int, B: int, Bp: int) -> bool:
    return not (B * 2 * k <= (1 << k) * Bp)


def _formula_m(numerator: float, denom: float) -> tuple[int, bool]:
    if numerator <= 0:
        return 0, True
    if denom <= 0:
        # the formula is undefined: fall back to one bit per stage
        return math.ceil(numerator), False
    return max(1, math.ceil(numerator / denom)), True


def schedule_smaller_labels(N: int, k: int | None = None, m: int | None = None) -> SieveSchedule:
    """B_i = floor(N / rho^i) with rho = (N/2)^{1/m}, ending at B_m = 2."""
    if N < 2:
        raise ValueError("N must be at least 2")
    k = sieve_k(N) if k is None else k
    if k < 1:
        raise ValueError("k must be positive")
    defined = True
    if m is None:
        m, defined = _formula_m(math.log2(N / 2), k - math.log2(2 * k))
    if m < 0:
        raise ValueError("m must be non-negative")
    if m == 0:
        bounds = (N,)
        rho = 1.0
    else:
        # B_i^m <= N^m / (N/2)^i  <=>  B_i^m <= N^{m-i} 2^i
        bounds = tuple(_iroot(N ** (m - i) * 2**i, m) for i in range(m + 1))
        rho = (N / 2) ** (1 / m)
    sets = tuple(TargetSet("D", 0, N, bound=b) for b in bounds)
    stages = tuple(
        Stage("D", sets[i - 1], sets[i], B=bounds[i - 1], B_prime=bounds[i], degraded=_d_degraded(k, bounds[i - 1], bounds[i]))
        for i in range(1, len(bounds))
    )
    return SieveSchedule(k, sets, stages, bounds, rho, defined)


def schedule_zero_components(N: int, k: int | None = None, m: int | None = None) -> SieveSchedule:
    """B_i = floor(N / rho^i) with rho = N^{1/m}, ending at B_m = 1."""
    if N < 2:
        raise ValueError("N must be at least 2")
    k = sieve_k(N) if k is None else k
    if k < 1:
        raise ValueError("k must be positive")
    defined = True
    if m is None:
        m, defined = _formula_m(math.log2(N), k - math.log2(4 * k))
    if m < 1:
        raise ValueError("m must be positive")
    bounds = tuple(_iroot(N ** (m - i), m) for i in range(m + 1))
    rho = N ** (1 / m)
    sets = tuple(TargetSet("Z", 0, N, bound=b) for b in bounds)
    stages = tuple(
        Stage("Z", sets[i - 1], sets[i], B=bounds[i - 1], B_prime=bounds[i], degraded=_z_degraded(k, bounds[i - 1], bounds[i]))
        for i in range(1, len(bounds))
    )
    return SieveSchedule(k, sets, stages, bounds, rho, defined)


def _thin(bounds: Sequence[int], min_gain: float) -> list[int]:
    """Drop bounds that shrink by less than min_gain bits from the last kept one."""
    factor = 2.0**min_gain
    kept = [bounds[0]]
    for b in bounds[1:]:
        if b * factor <= kept[-1]:
            kept.append(b)
    return kept


def build_stage_plan(
    group: AbelianGroup,
    component: int,
    j: int,
    *,
    k: int | None = None,
    min_gain: float = 1.0,
) -> SieveSchedule:
    """Plan producing the state with label 2^j on ``component`` and zero elsewhere.

    Z stages clear the other components one at a time, LSB stages (2-power
    moduli) cancel the j low bits at most k-1 per stage, and D stages shrink
    the remaining view down to 1.  Formula bounds that gain less than
    ``min_gain`` bits are dropped, which is what makes desk-sized moduli usable.
    """
    G = group
    if not 0 <= component < G.t:
        raise ValueError(f"no component {component} in {G}")
    c, N = component, G.moduli[component]
    kind = _kind(N)
    if kind == "mixed":
        raise ValueError(f"component modulus {N} must be odd or a power of 2; split the group first")
    n = N.bit_length() - 1
    top = n if kind == "odd" else n - 1
    if not 0 <= j <= top:
        raise ValueError(f"exponent j={j} out of range 0..{top} for N={N}")
    k = max(3, sieve_k(G.order)) if k is None else k
    if k < 2:
        raise ValueError("k must be at least 2")

    sets = [TargetSet("all", c, N)]
    stages: list[Stage] = []

    def push(comb: str, target: TargetSet, **kw) -> None:
        stages.append(Stage(comb, sets[-1], target, target.component, **kw))
        sets.append(target)

    zeroed: frozenset = frozenset()
    for o in range(G.t):
        if o == c:
            continue
        No = G.moduli[o]
        bounds = _thin(schedule_zero_components(No, k).bounds, min_gain)
        for B, Bp in zip(bounds, bounds[1:]):
            tgt = TargetSet("Z", o, No, bound=Bp, zeroed=zeroed | ({o} if Bp == 1 else set()))
            push("Z", tgt, B=B, B_prime=Bp, degraded=_z_degraded(k, B, Bp))
        zeroed = zeroed | {o}

    if kind == "pow2":
        Neff = 1 << (n - j)
        l = 0
        while l < j:
            l2 = min(j, l + k - 1)
            if l2 == j:
                tgt = TargetSet("D", c, N, bound=Neff, twist=j, zeroed=zeroed)
            else:
                tgt = TargetSet("LSB", c, N, bits=l2, zeroed=zeroed)
            push("LSB", tgt, l=l, l_prime=l2, degraded=k < l2 - l + 1)
            l = l2
    else:
        Neff = N

    bounds = schedule_smaller_labels(Neff, k).bounds if Neff > 2 else (Neff,)
    bounds = _thin(bounds, min_gain)
    for B, Bp in zip(bounds, bounds[1:]):
        tgt = TargetSet("D", c, N, bound=Bp, twist=j, zeroed=zeroed)
        push("D", tgt, B=B, B_prime=Bp, degraded=_d_degraded(k, B, Bp))

    final = TargetSet("D", c, N, bound=bounds[-1], twist=j, zeroed=zeroed, exact=True)
    sets[-1] = final
    if stages:
        stages[-1] = replace(stages[-1], target=final)
    return SieveSchedule(k, tuple(sets), tuple(stages))


# -- the sieve ---------------------------------------------------------------


@dataclass
class SieveStats:
    prepared: int = 0
    combined: Counter = field(default_factory=Counter)
    succeeded: Counter = field(default_factory=Counter)
    aborts: Counter = field(default_factory=Counter)  # (stage, reason) -> count
    off_target: Counter = field(default_factory=Counter)


class SieveFailure(RuntimeError):
    def __init__(self, msg: str, stats: SieveStats):
        super().__init__(msg)
        self.stats = stats


class PhaseAuditError(AssertionError):
    pass


def run_sieve(
    schedule: SieveSchedule,
    source: Callable[[], PsiState],
    rng: random.Random,
    budget: int,
    *,
    stats: SieveStats | None = None,
    audit: Callable[[PsiState], bool] | None = None,
) -> PsiState:
    """Pipeline of stage pools; the lowest-index stage holding k states is combined first."""
    stats = stats if stats is not None else SieveStats()
    m, k = schedule.m, schedule.k
    first, last = schedule.sets[0], schedule.sets[-1]
    pools: list[list[PsiState]] = [[] for _ in range(m)]

    def check(st: PsiState) -> None:
        if audit is not None and not audit(st):
            raise PhaseAuditError(f"phase audit failed for label {st.x}")

    while True:
        ready = next((i for i in range(m) if len(pools[i]) >= k), None)
        if ready is None:
            if stats.prepared >= budget:
                raise SieveFailure(f"budget of {budget} preparations exhausted", stats)
            st = source()
            stats.prepared += 1
            check(st)
            if not first.contains(st.x):
                stats.off_target[0] += 1
                continue
            if m == 0:
                return st
            pools[0].append(st)
            continue
        batch, pools[ready] = pools[ready][:k], pools[ready][k:]
        stats.combined[ready + 1] += 1
        out = schedule.stages[ready].combine(batch, rng)
        if isinstance(out, Abort):
            stats.aborts[(ready + 1, out.reason)] += 1
            continue
        check(out)
        if not schedule.sets[ready + 1].contains(out.x):
            stats.off_target[ready + 1] += 1
            continue
        stats.succeeded[ready + 1] += 1
        if ready + 1 == m:
            assert last.contains(out.x)
            return out
        pools[ready + 1].append(out)


class AmbiguousReconstruction(ArithmeticError):
    pass


def reconstruction_scores(states: Sequence[PsiState], N: int, component: int = 0) -> np.ndarray:
    """c(s~) = |sum_y exp(2 pi i (theta(y) - s~ y / N))|^2 for every s~ in Z_N.

    For labels 2^j the sum over y factorises, giving prod_j 4 cos^2(pi (theta_j - s~ 2^j / N)).
    """
    cand = np.arange(N, dtype=np.float64)
    score = np.ones(N)
    for st in states:
        x = st.x[component] % N
        score *= 4 * np.cos(np.pi * (float(st.theta) - cand * x / N)) ** 2
    return score


def reconstruct(states: Sequence[PsiState], N: int, component: int = 0) -> int:
    """Deterministic argmax over s~ of the score for states psi_1, psi_2, ..., psi_{2^{k-1}}."""
    k = len(states)
    if k == 0 or (1 << k) < N:
        raise ValueError(f"need 2^k >= N, got k={k}, N={N}")
    labels = [st.x[component] % N for st in states]
    if labels != [pow(2, j, N) for j in range(k)]:
        raise ValueError(f"labels {labels} are not 2^0..2^{k - 1} mod {N}")
    score = reconstruction_scores(states, N, component)
    order = np.argsort(score)[::-1]
    best = int(order[0])
    if N > 1 and score[order[1]] >= score[best] * (1 - 1e-9):
        raise AmbiguousReconstruction(f"tie between {best} and {int(order[1])}")
    return best


class HiddenShiftError(RuntimeError):
    pass


def target_exponents(N: int) -> range:
    """Exponents j for which psi_{2^j} is prepared on a Z_N component."""
    n = N.bit_length() - 1
    return range(n) if _kind(N) == "pow2" else range(n + 1)


def solve_hidden_shift(
    oracle: ShiftOracle,
    rng: random.Random | None = None,
    budget: int = 200_000,
    *,
    retries: int = 16,
    k: int | None = None,
    stats: SieveStats | None = None,
) -> tuple[int, ...]:
    """Recover s componentwise after a CRT split, then check it against the oracle."""
    rng = rng or random.Random()
    split = oracle.group.crt_split()
    H = split.target

    def source() -> PsiState:
        return split.state(oracle.sample())

    audit = None
    if oracle.mode == "cheat":
        inner = split.secret_to_target(oracle.shift)

        def audit(st: PsiState) -> bool:
            return st.theta == H.pairing(inner, st.x)

    plans = {
        (c, j): build_stage_plan(H, c, j, k=k) for c in range(H.t) for j in target_exponents(H.moduli[c])
    }
    last = "no attempt made"
    for _ in range(retries):
        try:
            parts = []
            for c in range(H.t):
                N = H.moduli[c]
                got = [run_sieve(plans[c, j], source, rng, budget, stats=stats, audit=audit) for j in target_exponents(N)]
                parts.append(reconstruct(got, N, c))
        except (SieveFailure, AmbiguousReconstruction) as exc:
            last = str(exc)
            continue
        s = split.secret_from_target(parts)
        if oracle.verify(s):
            return s
        last = f"candidate {s} failed verification"
    raise HiddenShiftError(f"no verified shift after {retries} attempts: {last}")


__all__ = [
    "ABORT_REASONS",
    "Abort",
    "AbelianGroup",
    "AmbiguousReconstruction",
    "CrtSplit",
    "HiddenShiftError",
    "PhaseAuditError",
    "PsiState",
    "ShiftError",
    "ShiftOracle",
    "SieveFailure",
    "SieveSchedule",
    "SieveStats",
    "Stage",
    "TargetSet",
    "build_stage_plan",
    "combine_d",
    "combine_lsb",
    "combine_z",
    "fourier_sample",
    "mixed_radix",
    "reconstruct",
    "reconstruction_scores",
    "run_sieve",
    "schedule_smaller_labels",
    "schedule_zero_components",
    "sieve_k",
    "solve_hidden_shift",
]
