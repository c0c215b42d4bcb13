"""Exact computation of the rational torsion subgroup.

The order bound comes from reduction point counts at good odd primes; the
candidate points come from a Lutz-Nagell search on the scaled integral model
plus rational roots of small division polynomials.  Every candidate is
verified by exact scalar multiplication, so the classification theorems are
never used in the computation itself (only as a final cross-check).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import product

from .exactnum import UnfactoredPart, factorize, int_valuation
from .weierstrass import (
    INFINITY,
    CurvePoint,
    WeierstrassModel,
    add_points,
    compute_invariants,
    on_curve,
    scalar_mul,
)

__all__ = ["TorsionSubgroup", "BadPrime", "point_count_mod_p", "torsion_subgroup"]

# Mazur: group order of E(Q)_tor; used as a cross-check assertion only.
_MAZUR_ORDERS = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 12, 16}


class BadPrime(ValueError):
    """The prime is unusable for reduction counting (p=2 or bad reduction)."""


@dataclass(frozen=True)
class TorsionSubgroup:
    order: int
    structure: str
    points: tuple[CurvePoint, ...]

    @property
    def affine_points(self) -> tuple[CurvePoint, ...]:
        return tuple(P for P in self.points if not P.is_infinity)


def point_count_mod_p(model: WeierstrassModel, p: int) -> int:
    """#E~(F_p) by direct enumeration, for a good odd prime p."""
    inv = compute_invariants(model)
    if p == 2 or not model.is_integral() or int(inv.disc) % p == 0:
        raise BadPrime(f"p={p} is not an odd prime of good reduction")
    b2, b4, b6 = int(inv.b2) % p, int(inv.b4) % p, int(inv.b6) % p
    squares = [0] * p
    for t in range((p + 1) // 2):
        squares[t * t % p] = 1
    count = 1  # point at infinity
    for x in range(p):
        g = ((4 * x + b2) * x + 2 * b4) * x + b6
        g %= p
        if g == 0:
            count += 1
        elif squares[g]:
            count += 2
    if abs(count - p - 1) > 2 * math.isqrt(4 * p):
        raise AssertionError(f"Hasse bound violated at p={p}")
    return count


def _good_odd_primes(disc: int, how_many: int, limit: int = 200) -> list[int]:
    out = []
    p = 3
    while len(out) < how_many and p <= limit:
        if _is_small_prime(p) and disc % p != 0:
            out.append(p)
        p += 2
    return out


def _is_small_prime(n: int) -> bool:
    if n < 2:
        return False
    for d in range(2, int(n**0.5) + 1):
        if n % d == 0:
            return False
    return True


def _order_bound(model: WeierstrassModel, disc: int) -> int:
    """gcd of reduction counts over the first five good odd primes, with a
    sixth prime thrown in whenever one of the used primes divides the gcd."""
    primes = _good_odd_primes(disc, 5)
    bound = 0
    for p in primes:
        bound = math.gcd(bound, point_count_mod_p(model, p))
    if any(bound % p == 0 for p in primes):
        extra = _good_odd_primes(disc, 6)
        if len(extra) > len(primes):
            bound = math.gcd(bound, point_count_mod_p(model, extra[-1]))
    return bound


def _square_divisors(fact_pairs: list[tuple[int, int]]) -> list[int]:
    """All y >= 1 with y^2 dividing the factored value."""
    ranges = [[p**k for k in range(e // 2 + 1)] for p, e in fact_pairs]
    out = []
    for combo in product(*ranges):
        y = 1
        for v in combo:
            y *= v
        out.append(y)
    return sorted(set(out))


def _integer_cubic_roots(A: int, B: int) -> list[int]:
    """Integer roots of X^3 + A X + B, via floating roots plus exact checks."""
    import numpy as np

    roots = np.roots([1.0, 0.0, float(A), float(B)])
    cands = set()
    for z in roots:
        if abs(z.imag) < 1e-6 * (1 + abs(z.real)):
            r = int(round(z.real))
            cands.update((r - 1, r, r + 1))
    return [x for x in sorted(cands) if x**3 + A * x + B == 0]


def _lutz_nagell_candidates(model: WeierstrassModel, disc_fact) -> list[CurvePoint]:
    """Torsion candidates from the scaled model Y^2 = X^3 - 27 c4 X - 54 c6.

    All rational torsion maps to integral (X, Y) with Y = 0 or Y^2 | 6^12 disc.
    """
    inv = compute_invariants(model)
    A = -27 * int(inv.c4)
    B = -54 * int(inv.c6)
    b2 = int(inv.b2)
    a1, a3 = model.a1, model.a3

    merged: dict[int, int] = {2: 12, 3: 12}
    for p, e in disc_fact.factors:
        merged[p] = merged.get(p, 0) + e
    ys = _square_divisors(sorted(merged.items()))

    points = []
    for y_abs in [0] + ys:
        for X in _integer_cubic_roots(A, B - y_abs * y_abs):
            for Y in {y_abs, -y_abs}:
                x = Fraction(X - 3 * b2, 36)
                y = (Fraction(Y, 108) - a1 * x - a3) / 2
                P = CurvePoint(x, y)
                if on_curve(model, P):
                    points.append(P)
    return points


def _division_poly_x_candidates(model: WeierstrassModel, bound: int) -> list[CurvePoint]:
    """Rational x-roots of psi_n for primes n <= 5 dividing the order bound."""
    inv = compute_invariants(model)
    b2, b4, b6, b8 = (int(inv.b2), int(inv.b4), int(inv.b6), int(inv.b8))
    polys = []
    if bound % 2 == 0:
        polys.append([b6, 2 * b4, b2, 4])  # psi2^2 as a polynomial in x
    if bound % 3 == 0:
        polys.append([b8, 3 * b6, 3 * b4, b2, 3])
    if bound % 5 == 0:
        polys.append(_psi5_poly(b2, b4, b6, b8))
    out = []
    for coeffs in polys:  # coeffs low-to-high
        for x in _rational_roots(coeffs):
            P = _lift_x(model, x)
            if P is not None:
                out.append(P)
    return out


def _poly_mul(f: list[int], g: list[int]) -> list[int]:
    out = [0] * (len(f) + len(g) - 1)
    for i, a in enumerate(f):
        if a:
            for j, b in enumerate(g):
                out[i + j] += a * b
    return out


def _poly_sub(f: list[int], g: list[int]) -> list[int]:
    n = max(len(f), len(g))
    return [(f[i] if i < len(f) else 0) - (g[i] if i < len(g) else 0) for i in range(n)]


def _psi5_poly(b2: int, b4: int, b6: int, b8: int) -> list[int]:
    """psi5 as a univariate polynomial in x (odd index, y eliminated)."""
    psi2sq = [b6, 2 * b4, b2, 4]
    psi3 = [b8, 3 * b6, 3 * b4, b2, 3]
    quart = [
        b4 * b8 - b6 * b6,
        b2 * b8 - b4 * b6,
        10 * b8,
        10 * b6,
        5 * b4,
        b2,
        2,
    ]
    # psi4 = psi2 * quart, psi5 = psi4 psi2^3 - psi3^3 = quart * psi2sq^2 - psi3^3
    lhs = _poly_mul(quart, _poly_mul(psi2sq, psi2sq))
    rhs = _poly_mul(psi3, _poly_mul(psi3, psi3))
    return _poly_sub(lhs, rhs)


def _rational_roots(coeffs: list[int]) -> list[Fraction]:
    """Rational roots of an integer polynomial (coeffs low-to-high)."""
    while coeffs and coeffs[-1] == 0:
        coeffs = coeffs[:-1]
    shift = 0
    while coeffs and coeffs[0] == 0:
        coeffs = coeffs[1:]
        shift = 1
    if not coeffs:
        return []
    roots = {Fraction(0)} if shift else set()
    try:
        num_divs = _all_divisors(abs(coeffs[0]))
        den_divs = _all_divisors(abs(coeffs[-1]))
    except UnfactoredPart:
        return sorted(roots)
    for num in num_divs:
        for den in den_divs:
            for cand in (Fraction(num, den), Fraction(-num, den)):
                if _poly_eval(coeffs, cand) == 0:
                    roots.add(cand)
    return sorted(roots)


def _poly_eval(coeffs: list[int], x: Fraction) -> Fraction:
    acc = Fraction(0)
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


@lru_cache(maxsize=256)
def _all_divisors(n: int) -> tuple[int, ...]:
    if n == 0:
        return (0,)
    fact = factorize(n)
    divs = [1]
    for p, e in fact.factors:
        divs = [d * p**k for d in divs for k in range(e + 1)]
        if len(divs) > 20000:
            raise UnfactoredPart(n)
    return tuple(sorted(divs))


def _lift_x(model: WeierstrassModel, x: Fraction) -> CurvePoint | None:
    """Rational point on the model with the given x, if one exists."""
    a1, a2, a3, a4, a6 = model.a_invariants
    # y^2 + (a1 x + a3) y - (x^3 + a2 x^2 + a4 x + a6) = 0
    b = a1 * x + a3
    c = -(x**3 + a2 * x * x + a4 * x + a6)
    disc = b * b - 4 * c
    if disc < 0:
        return None
    root = _frac_sqrt(disc)
    if root is None:
        return None
    return CurvePoint(x, (-b + root) / 2)


def _frac_sqrt(q: Fraction) -> Fraction | None:
    if q < 0:
        return None
    rn = math.isqrt(q.numerator)
    rd = math.isqrt(q.denominator)
    if rn * rn == q.numerator and rd * rd == q.denominator:
        return Fraction(rn, rd)
    return None


def _exact_order(model: WeierstrassModel, P: CurvePoint, bound: int) -> int | None:
    """Order of P if it is torsion of order dividing the reduction bound."""
    if P.is_infinity:
        return 1
    Q = P
    for n in range(2, min(bound, 16) + 2):
        Q = add_points(model, Q, P)
        if Q.is_infinity:
            return n if bound % n == 0 else None
    return None


def torsion_subgroup(model: WeierstrassModel) -> TorsionSubgroup:
    """E(Q)_tor of a globally minimal model: order, structure, all points."""
    inv = compute_invariants(model)
    disc = int(inv.disc)
    disc_fact = factorize(disc)
    bound = _order_bound(model, disc)

    candidates = _lutz_nagell_candidates(model, disc_fact)
    candidates += _division_poly_x_candidates(model, bound)

    points = {INFINITY}
    for P in candidates:
        if _exact_order(model, P, bound) is not None:
            points.add(P)
            points.add(CurvePoint(P.x, -P.y - model.a1 * P.x - model.a3))

    # Close under addition (small sets; at most 16 elements by Mazur).
    changed = True
    while changed:
        changed = False
        for P in list(points):
            for Q in list(points):
                R = add_points(model, P, Q)
                if R not in points:
                    points.add(R)
                    changed = True

    order = len(points)
    two_torsion = sum(
        1 for P in points if not P.is_infinity and 2 * P.y + model.a1 * P.x + model.a3 == 0
    )
    if two_torsion == 3:
        structure = f"Z/2 x Z/{order // 2}"
    elif order == 1:
        structure = "trivial"
    else:
        structure = f"Z/{order}"

    if bound % order != 0:
        raise AssertionError("torsion order does not divide the reduction bound")
    if order not in _MAZUR_ORDERS or (two_torsion == 3 and order % 4 != 0):
        raise AssertionError(f"torsion structure outside the rational range: {order}")
    ordered = tuple(
        sorted(points, key=lambda P: (not P.is_infinity, P.x or 0, P.y or 0))
    )
    return TorsionSubgroup(order, structure, ordered)
