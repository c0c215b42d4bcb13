"""Exact integer and rational arithmetic: factorization and p-adic valuations.

All operations are pure functions over immutable values (Python ints and
``fractions.Fraction``), so they are safe for unrestricted concurrent use.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

Rational = Fraction

DEFAULT_FACTOR_BOUND = 10**5

# Deterministic Miller-Rabin witness set, valid for all n < 3.317e24.
_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)

_RHO_MAX_ATTEMPTS = 24


class ZeroInput(ValueError):
    """Raised when an operation that needs a nonzero value receives zero."""


class UnfactoredPart(ArithmeticError):
    """A composite cofactor survived trial division and all rho attempts.

    Callers treat this as "skip the curve"; it must never be silently
    misclassified as prime.
    """

    def __init__(self, cofactor: int):
        self.cofactor = cofactor
        super().__init__(f"unfactored composite cofactor {cofactor}")


@dataclass(frozen=True)
class Factorization:
    """Sign and sorted (prime, exponent) decomposition of a nonzero integer."""

    sign: int
    factors: tuple[tuple[int, int], ...]

    def value(self) -> int:
        n = self.sign
        for p, e in self.factors:
            n *= p**e
        return n

    def primes(self) -> tuple[int, ...]:
        return tuple(p for p, _ in self.factors)

    def exponent(self, p: int) -> int:
        for q, e in self.factors:
            if q == p:
                return e
        return 0


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin primality test (exact below 3.3e24)."""
    if n < 2:
        return False
    for p in _MR_BASES:
        if n % p == 0:
            return n == p
    d = n - 1
    s = 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


@lru_cache(maxsize=8)
def _primes_up_to(bound: int) -> tuple[int, ...]:
    sieve = bytearray([1]) * (bound + 1)
    sieve[0:2] = b"\x00\x00"
    for p in range(2, int(bound**0.5) + 1):
        if sieve[p]:
            start = p * p
            sieve[start : bound + 1 : p] = b"\x00" * ((bound - start) // p + 1)
    return tuple(i for i, flag in enumerate(sieve) if flag)


def _rho_brent(n: int, c: int) -> int:
    """One Brent-cycle rho attempt on composite n; returns a divisor or n."""
    x = 2
    y = 2
    d = 1
    power = lam = 1
    while d == 1:
        if power == lam:
            y = x
            power *= 2
            lam = 0
        x = (x * x + c) % n
        lam += 1
        d = _gcd(abs(x - y), n)
        if lam > 1_000_000:
            return n
    return d


def _gcd(a: int, b: int) -> int:
    while b:
        a, b = b, a % b
    return a


def _split(n: int, out: list[int]) -> None:
    """Recursively split n (odd, composite, no small factors) into primes."""
    if is_prime(n):
        out.append(n)
        return
    for c in range(1, _RHO_MAX_ATTEMPTS + 1):
        d = _rho_brent(n, c)
        if 1 < d < n:
            _split(d, out)
            _split(n // d, out)
            return
    raise UnfactoredPart(n)


def factorize(n: int, bound: int = DEFAULT_FACTOR_BOUND) -> Factorization:
    """Factor a nonzero integer by trial division then deterministic rho.

    The output is deterministic and satisfies sign * prod(p^e) == n exactly.
    Raises UnfactoredPart if a composite cofactor resists all rho attempts.
    """
    if n == 0:
        raise ZeroInput("cannot factor 0")
    sign = 1 if n > 0 else -1
    m = abs(n)
    found: dict[int, int] = {}
    for p in _primes_up_to(bound):
        if p * p > m:
            break
        while m % p == 0:
            found[p] = found.get(p, 0) + 1
            m //= p
    if m > 1:
        if m <= bound * bound or is_prime(m):
            found[m] = found.get(m, 0) + 1
        else:
            big: list[int] = []
            _split(m, big)
            for q in big:
                found[q] = found.get(q, 0) + 1
    return Factorization(sign, tuple(sorted(found.items())))


def int_valuation(n: int, p: int) -> int:
    """Largest k with p^k | n, for nonzero n."""
    if n == 0:
        raise ZeroInput("valuation of 0 is undefined")
    k = 0
    while n % p == 0:
        n //= p
        k += 1
    return k


def valuation(q: Rational | int, p: int) -> int:
    """p-adic valuation of a nonzero rational; may be negative."""
    if q == 0:
        raise ZeroInput("valuation of 0 is undefined")
    if isinstance(q, int):
        return int_valuation(q, p)
    return int_valuation(q.numerator, p) - int_valuation(q.denominator, p)
