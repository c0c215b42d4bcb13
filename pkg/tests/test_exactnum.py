from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from ellheights import exactnum
from ellheights.exactnum import (
    Factorization,
    UnfactoredPart,
    ZeroInput,
    factorize,
    int_valuation,
    is_prime,
    valuation,
)


def test_factorize_pinned():
    f = factorize(-161051)
    assert f.sign == -1 and f.factors == ((11, 5),)
    assert f.value() == -161051
    assert factorize(1) == Factorization(1, ())
    assert factorize(37).factors == ((37, 1),)


def test_factorize_zero():
    with pytest.raises(ZeroInput):
        factorize(0)


def test_factorize_large_semiprime():
    n = 1000003 * 1000033  # both just above the default trial bound
    f = factorize(n)
    assert f.factors == ((1000003, 1), (1000033, 1))


def test_unfactored_part(monkeypatch):
    monkeypatch.setattr(exactnum, "_RHO_MAX_ATTEMPTS", 0)
    with pytest.raises(UnfactoredPart):
        factorize(1000003 * 1000033)


def test_primality_witnesses():
    assert is_prime(2) and is_prime(3) and is_prime(104729)
    assert not is_prime(1) and not is_prime(3215031751)  # strong pseudoprime to 2,3,5,7
    assert is_prime(2**61 - 1)
    assert not is_prime(2**67 - 1)


def test_valuation_pinned():
    assert valuation(Fraction(1, 4), 2) == -2
    assert valuation(-432, 3) == 3
    assert valuation(Fraction(5, 7), 11) == 0
    with pytest.raises(ZeroInput):
        valuation(Fraction(0), 5)
    with pytest.raises(ZeroInput):
        int_valuation(0, 3)


@given(st.integers(min_value=-(10**10), max_value=10**10).filter(lambda n: n != 0))
def test_factorize_multiply_back(n):
    f = factorize(n)
    assert f.value() == n
    primes = f.primes()
    assert list(primes) == sorted(primes)
    assert all(is_prime(p) for p in primes)


_nonzero_rats = st.fractions(
    min_value=-1000, max_value=1000, max_denominator=400
).filter(lambda q: q != 0)


@given(_nonzero_rats, _nonzero_rats, st.sampled_from([2, 3, 5, 7, 11]))
def test_valuation_multiplicative(a, b, p):
    assert valuation(a * b, p) == valuation(a, p) + valuation(b, p)


@given(_nonzero_rats, _nonzero_rats, st.sampled_from([2, 3, 5, 7, 11]))
def test_valuation_ultrametric(a, b, p):
    if a + b == 0:
        return
    va, vb = valuation(a, p), valuation(b, p)
    vs = valuation(a + b, p)
    assert vs >= min(va, vb)
    if va != vb:
        assert vs == min(va, vb)
