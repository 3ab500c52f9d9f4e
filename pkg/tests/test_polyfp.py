import random

import pytest
import sympy
from sympy.polys.domains import ZZ
from sympy.polys.galoistools import gf_pow_mod
from hypothesis import given, settings
from hypothesis import strategies as st

from isoq.polyfp import FieldPoly, gcd, is_irreducible, random_irreducible, squarefree

X = sympy.Symbol("x")


def to_sympy(f: FieldPoly) -> sympy.Poly:
    return sympy.Poly(list(reversed(f.coeffs)) or [0], X, modulus=f.p)


def same(f: FieldPoly, g: sympy.Poly) -> bool:
    return (to_sympy(f) - g).is_zero


coeffs = st.lists(st.integers(min_value=0, max_value=96), min_size=0, max_size=60)


@given(coeffs, coeffs)
@settings(max_examples=150, deadline=None)
def test_ring_ops_match_sympy(a, b):
    p = 97
    f, g = FieldPoly.make(p, a), FieldPoly.make(p, b)
    F, G = to_sympy(f), to_sympy(g)
    assert same(f + g, F + G)
    assert same(f - g, F - G)
    assert same(f * g, F * G)
    if not g.is_zero():
        q, r = divmod(f, g)
        Q, R = F.div(G)
        assert same(q, Q) and same(r, R)


def test_numpy_paths_agree_with_schoolbook():
    # degrees well above the vectorisation threshold, large prime
    rng = random.Random(0)
    p = 999_983
    f = FieldPoly.make(p, [rng.randrange(p) for _ in range(90)])
    g = FieldPoly.make(p, [rng.randrange(p) for _ in range(40)] + [1])
    q, r = divmod(f * g + 5, g)
    assert q == f and r == FieldPoly.const(p, 5)
    assert same(f * g, to_sympy(f) * to_sympy(g))


def test_division_by_zero():
    with pytest.raises(ZeroDivisionError):
        divmod(FieldPoly.x(5), FieldPoly.make(5, []))


def test_powmod_matches_sympy():
    p = 101
    m = FieldPoly.make(p, [3, 0, 7, 1, 0, 1])
    got = FieldPoly.x(p).powmod(p**3, m)
    want = gf_pow_mod([1, 0], p**3, list(reversed(m.coeffs)), p, ZZ)
    assert list(reversed(got.coeffs)) == want


def test_gcd_is_monic_common_factor():
    p = 13
    a = FieldPoly.make(p, [1, 1])
    b = FieldPoly.make(p, [2, 0, 1])
    c = FieldPoly.make(p, [5, 3, 1])
    g = gcd(a * b * 4, a * c * 7)
    assert g == a.monic()


@pytest.mark.parametrize("p,deg", [(5, 2), (7, 3), (11, 4), (101, 5)])
def test_irreducibility_matches_sympy(p, deg):
    rng = random.Random(p * deg)
    for _ in range(30):
        f = FieldPoly.make(p, [rng.randrange(p) for _ in range(deg)] + [1])
        assert is_irreducible(f) == to_sympy(f).is_irreducible
    g = random_irreducible(p, deg, rng)
    assert g.degree == deg and to_sympy(g).is_irreducible


def test_roots_and_evaluation():
    f = FieldPoly.make(7, [6, 0, 1])  # x^2 - 1
    assert f.roots() == [1, 6]
    assert f(3) == 1
    assert str(f) == "x^2 + 6"


def test_squarefree():
    a = FieldPoly.make(7, [1, 1])
    assert squarefree(a * FieldPoly.make(7, [2, 1]))
    assert not squarefree(a * a)
