import random

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from isoq import ntheory as nt


def test_is_prime_matches_sympy_below_5000():
    assert [n for n in range(5000) if nt.is_prime(n)] == list(sympy.primerange(0, 5000))


def test_primes_up_to():
    assert nt.primes_up_to(30) == [2, 3, 5, 7, 11, 13, 17, 19, 23, 29]
    assert nt.primes_up_to(1) == []


@given(st.integers(min_value=1, max_value=10**9))
@settings(max_examples=200, deadline=None)
def test_factorize_matches_sympy(n):
    assert nt.factorize(n) == sympy.factorint(n)


@given(st.integers(min_value=-10**6, max_value=10**6), st.integers(min_value=1, max_value=2000))
@settings(max_examples=300, deadline=None)
def test_kronecker_matches_sympy_jacobi_for_odd_n(a, n):
    n = 2 * n + 1
    assert nt.kronecker(a, n) == sympy.jacobi_symbol(a, n)


def test_kronecker_at_two():
    # (a|2) is 0 for even a, +1 for a = +-1 mod 8, -1 for a = +-3 mod 8
    assert [nt.kronecker(a, 2) for a in (-23, -11, -3, 4)] == [1, -1, -1, 0]


@pytest.mark.parametrize("p", [3, 5, 7, 13, 17, 41, 97, 101, 257, 65537])
def test_sqrt_mod_all_residues(p):
    rng = random.Random(p)
    for a in range(p):
        r = nt.sqrt_mod(a, p, rng)
        if sympy.is_quad_residue(a, p):
            assert r is not None and r * r % p == a
        else:
            assert r is None


def test_fundamental_discriminant():
    # t^2 - 4p for p=5, t=-3 is -11; for p=83, t=12 it is -188 = 4 * -47
    assert nt.fundamental_discriminant(-11) == (-11, 1)
    assert nt.fundamental_discriminant(-188) == (-47, 2)
    assert nt.fundamental_discriminant(-4 * 9 * 5) == (-20, 3)


def test_crt():
    assert nt.crt([2, 1], [3, 5]) == (11, 15)
