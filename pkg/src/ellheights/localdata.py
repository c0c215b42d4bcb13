"""Tate's algorithm and global reduction data for elliptic curves over Q.

Per prime: Kodaira class, discriminant exponent delta, conductor exponent
eta (via Ogg's formula delta = eta + m - 1), component count m, Tamagawa
number c, and the reduction type with its split/nonsplit distinction.
Globally: log norms of minimal discriminant and conductor, and the Szpiro
ratio sigma.

The algorithm must be run on a globally minimal model; reaching the
"rescale and restart" branch therefore raises TateError.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

from .exactnum import Factorization, factorize, int_valuation
from .weierstrass import (
    ModelTransform,
    WeierstrassModel,
    compute_invariants,
    minimal_model,
)

__all__ = [
    "LocalReductionData",
    "GlobalReductionData",
    "NotMultiplicative",
    "TateError",
    "tate_local",
    "split_multiplicative_test",
    "global_data",
    "szpiro_ratio",
]

GOOD = "good"
SPLIT = "split-multiplicative"
NONSPLIT = "nonsplit-multiplicative"
ADDITIVE = "additive"


class NotMultiplicative(ValueError):
    """The operation requires multiplicative reduction at p."""


class TateError(AssertionError):
    """Internal invariant violation (e.g. a non-minimal model was supplied)."""


@dataclass(frozen=True)
class LocalReductionData:
    p: int
    delta: int
    eta: int
    m: int
    c: int
    kodaira: str
    reduction: str

    @property
    def is_multiplicative(self) -> bool:
        return self.reduction in (SPLIT, NONSPLIT)

    @property
    def is_split(self) -> bool:
        return self.reduction == SPLIT


@dataclass(frozen=True)
class GlobalReductionData:
    minimal: WeierstrassModel
    transform: ModelTransform
    local: tuple[LocalReductionData, ...]
    log_norm_discriminant: float
    log_norm_conductor: float
    sigma: float

    def at(self, p: int) -> LocalReductionData | None:
        for loc in self.local:
            if loc.p == p:
                return loc
        return None

    @property
    def bad_primes(self) -> tuple[int, ...]:
        return tuple(loc.p for loc in self.local)


def _inv_mod(a: int, p: int) -> int:
    return pow(a % p, -1, p)


def _legendre(a: int, p: int) -> int:
    a %= p
    if a == 0:
        return 0
    return 1 if pow(a, (p - 1) // 2, p) == 1 else -1


def _quad_root_count(A: int, B: int, C: int, p: int) -> int:
    """Number of distinct roots of A*T^2 + B*T + C in F_p (A nonzero mod p)."""
    if p == 2:
        return sum(1 for t in (0, 1) if (A * t * t + B * t + C) % 2 == 0)
    d = (B * B - 4 * A * C) % p
    if d == 0:
        return 1
    return 2 if _legendre(d, p) == 1 else 0


def _cubic_root_count(A: int, B: int, C: int, p: int) -> int:
    """Distinct F_p-roots of the separable cubic T^3 + A*T^2 + B*T + C."""
    if p < 60:
        return sum(1 for t in range(p) if (t**3 + A * t * t + B * t + C) % p == 0)
    # deg gcd(X^p - X, P) via polynomial arithmetic mod (P, p)
    A %= p
    B %= p
    C %= p

    def mulmod(f, g):
        prod = [0] * 5
        for i, fi in enumerate(f):
            if fi:
                for j, gj in enumerate(g):
                    prod[i + j] = (prod[i + j] + fi * gj) % p
        # reduce degrees 4 then 3 by X^3 = -A X^2 - B X - C
        for d in (4, 3):
            lead = prod[d]
            if lead:
                prod[d] = 0
                prod[d - 1] = (prod[d - 1] - lead * A) % p
                prod[d - 2] = (prod[d - 2] - lead * B) % p
                prod[d - 3] = (prod[d - 3] - lead * C) % p
        return prod[:3]

    result = [1, 0, 0]
    base = [0, 1, 0]
    e = p
    while e:
        if e & 1:
            result = mulmod(result, base)
        base = mulmod(base, base)
        e >>= 1
    # gcd(X^p - X, P) in F_p[X]; X^p mod P = result
    f = [(result[0]) % p, (result[1] - 1) % p, result[2] % p]  # X^p - X mod P
    g = [C, B, A, 1]

    def degree(poly):
        for i in range(len(poly) - 1, -1, -1):
            if poly[i] % p:
                return i
        return -1

    def polymod(num, den):
        num = [c % p for c in num]
        dd = degree(den)
        inv_lead = _inv_mod(den[dd], p)
        while degree(num) >= dd:
            dn = degree(num)
            coef = num[dn] * inv_lead % p
            for i in range(dd + 1):
                num[dn - dd + i] = (num[dn - dd + i] - coef * den[i]) % p
        return num

    a_poly, b_poly = g, f
    while degree(b_poly) >= 0:
        a_poly, b_poly = b_poly, polymod(a_poly, b_poly)
    return degree(a_poly)


def _rst_shift(a: tuple[int, ...], r: int, s: int, t: int) -> tuple[int, ...]:
    """Integral (u=1) coordinate change on integer a-invariants."""
    a1, a2, a3, a4, a6 = a
    return (
        a1 + 2 * s,
        a2 - s * a1 + 3 * r - s * s,
        a3 + r * a1 + 2 * t,
        a4 - s * a3 + 2 * r * a2 - (t + r * s) * a1 + 3 * r * r - 2 * s * t,
        a6 + r * a4 + r * r * a2 + r**3 - t * a3 - t * t - r * t * a1,
    )


def _b_invariants(a: tuple[int, ...]) -> tuple[int, int, int, int]:
    a1, a2, a3, a4, a6 = a
    b2 = a1 * a1 + 4 * a2
    b4 = 2 * a4 + a1 * a3
    b6 = a3 * a3 + 4 * a6
    b8 = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4
    return b2, b4, b6, b8


def _val(n: int, p: int) -> int:
    return 10**9 if n == 0 else int_valuation(n, p)


def _singular_shift(a: tuple[int, ...], p: int, c4: int, c6: int) -> tuple[int, int]:
    """(r, t) moving the singular point of the reduced curve to the origin."""
    a1, a2, a3, a4, a6 = a
    if p == 2:
        for x0 in (0, 1):
            for y0 in (0, 1):
                on = (y0 * y0 + a1 * x0 * y0 + a3 * y0 - x0**3 - a2 * x0 * x0 - a4 * x0 - a6) % 2 == 0
                fx = (a1 * y0 + x0 * x0 + a4) % 2 == 0
                fy = (a1 * x0 + a3) % 2 == 0
                if on and fx and fy:
                    return x0, y0
        raise TateError("no singular point found mod 2")
    b2, b4, b6, _ = _b_invariants(a)
    if p == 3:
        r = (-b6) % 3 if b2 % 3 == 0 else (-b2 * b4) % 3
        t = (a1 * r + a3) % 3
        return r, t
    if c4 % p == 0:
        r = -b2 * _inv_mod(12, p) % p
    else:
        r = -(c6 + b2 * c4) * _inv_mod(12 * c4 % p, p) % p
    t = -(a1 * r + a3) * _inv_mod(2, p) % p
    return r, t


def _normalize_for_cubic(a: tuple[int, ...], p: int) -> tuple[int, ...]:
    """Translate so p|a1, p|a2, p^2|a3, p^2|a4, p^3|a6 (additive case)."""

    def ok(aa):
        return (
            aa[0] % p == 0
            and aa[1] % p == 0
            and aa[2] % p**2 == 0
            and aa[3] % p**2 == 0
            and aa[4] % p**3 == 0
        )

    if p in (2, 3):
        for s in range(p):
            for rho in range(p * p):
                for tau in range(p * p):
                    cand = _rst_shift(a, p * rho, s, p * tau)
                    if ok(cand):
                        return cand
        raise TateError(f"normalization search failed at p={p}")
    s = -a[0] * _inv_mod(2, p) % p
    a = _rst_shift(a, 0, s, 0)
    t = -a[2] * _inv_mod(2, p * p) % (p * p)
    a = _rst_shift(a, 0, 0, t)
    if not ok(a):
        raise TateError(f"normalization failed at p={p}")
    return a


def _tate_uncached(model: WeierstrassModel, p: int) -> LocalReductionData:
    if not model.is_integral():
        raise ValueError("Tate's algorithm needs an integral model")
    a = tuple(int(x) for x in model.a_invariants)
    inv = compute_invariants(model)
    c4, c6, disc = int(inv.c4), int(inv.c6), int(inv.disc)
    n = _val(disc, p)
    if n == 0:
        return LocalReductionData(p, 0, 0, 1, 1, "I0", GOOD)

    r, t = _singular_shift(a, p, c4, c6)
    a = _rst_shift(a, r, 0, t)
    if not (a[2] % p == 0 and a[3] % p == 0 and a[4] % p == 0):
        raise TateError(f"singular point shift failed at p={p}")

    if c4 % p != 0:
        # Node: multiplicative reduction of type I_n.
        b2 = a[0] * a[0] + 4 * a[1]
        if p == 2:
            split = a[1] % 2 == 0
        else:
            split = _legendre(b2, p) == 1
        if split:
            c = n
        else:
            c = 2 if n % 2 == 0 else 1
        data = LocalReductionData(p, n, 1, n, c, f"I{n}", SPLIT if split else NONSPLIT)
        return _checked(data)

    # Cusp: additive reduction.
    if _val(a[4], p) < 2:  # a6
        return _checked(LocalReductionData(p, n, n, 1, 1, "II", ADDITIVE))
    b2, b4, b6, b8 = _b_invariants(a)
    if _val(b8, p) < 3:
        return _checked(LocalReductionData(p, n, n - 1, 2, 2, "III", ADDITIVE))
    if _val(b6, p) < 3:
        cnt = _quad_root_count(1, a[2] // p, -(a[4] // (p * p)), p)
        c = 3 if cnt == 2 else 1
        return _checked(LocalReductionData(p, n, n - 2, 3, c, "IV", ADDITIVE))

    a = _normalize_for_cubic(a, p)
    A, B, C = a[1] // p, a[3] // (p * p), a[4] // p**3
    disc3 = (
        18 * A * B * C - 4 * A**3 * C + A * A * B * B - 4 * B**3 - 27 * C * C
    ) % p
    if disc3 != 0:
        cnt = _cubic_root_count(A, B, C, p)
        c = 1 + cnt
        return _checked(LocalReductionData(p, n, n - 4, 5, c, "I0*", ADDITIVE))

    if p == 3:
        triple = A % 3 == 0 and B % 3 == 0
    elif p == 2:
        triple = (A - B) % 2 == 0 and (A - C) % 2 == 0
    else:
        triple = (A * A - 3 * B) % p == 0

    if not triple:
        # Double root of the cubic: types I_nu* via the alternating loop.
        if p == 2:
            t0 = B % 2
        elif p == 3:
            t0 = B * _inv_mod(A, 3) % 3
        else:
            t0 = (9 * C - A * B) * _inv_mod(2 * (A * A - 3 * B) % p, p) % p
        a = _rst_shift(a, p * t0, 0, 0)
        if a[3] % p**3 != 0 or a[4] % p**4 != 0:
            raise TateError("double root shift failed")
        ix, iy = 3, 3
        mx = my = p * p
        for _ in range(n + 2):
            a2t = a[1] // p
            a3t = a[2] // my
            a4t = a[3] // (p * mx)
            a6t = a[4] // (mx * my)
            if (a3t * a3t + 4 * a6t) % p != 0:
                nu = ix + iy - 5
                c = 2 + _quad_root_count(1, a3t, -a6t, p)
                return _checked(
                    LocalReductionData(p, n, n - 4 - nu, 5 + nu, c, f"I{nu}*", ADDITIVE)
                )
            y0 = a6t % 2 if p == 2 else -a3t * _inv_mod(2, p) % p
            a = _rst_shift(a, 0, 0, my * y0)
            my *= p
            iy += 1
            if a[2] % my != 0 or a[4] % (mx * my) != 0:
                raise TateError("In* y-shift failed")
            a2t = a[1] // p
            a3t = a[2] // my
            a4t = a[3] // (p * mx)
            a6t = a[4] // (mx * my)
            if (a4t * a4t - 4 * a2t * a6t) % p != 0:
                nu = ix + iy - 5
                c = 2 + _quad_root_count(a2t, a4t, a6t, p)
                return _checked(
                    LocalReductionData(p, n, n - 4 - nu, 5 + nu, c, f"I{nu}*", ADDITIVE)
                )
            if p == 2:
                x0 = a6t * _inv_mod(a2t, 2) % 2
            else:
                x0 = -a4t * _inv_mod(2 * a2t % p, p) % p
            a = _rst_shift(a, mx * x0, 0, 0)
            mx *= p
            ix += 1
            if a[3] % (p * mx) != 0 or a[4] % (mx * my) != 0:
                raise TateError("In* x-shift failed")
        raise TateError("In* loop failed to terminate")

    # Triple root: types IV*, III*, II*.
    t0 = (-C) % 3 if p == 3 else -A * _inv_mod(3, p) % p
    a = _rst_shift(a, p * t0, 0, 0)
    if a[1] % p**2 != 0 or a[3] % p**3 != 0 or a[4] % p**4 != 0:
        raise TateError("triple root shift failed")
    a32 = a[2] // (p * p)
    a64 = a[4] // p**4
    if (a32 * a32 + 4 * a64) % p != 0:
        c = 3 if _quad_root_count(1, a32, -a64, p) == 2 else 1
        return _checked(LocalReductionData(p, n, n - 6, 7, c, "IV*", ADDITIVE))
    y0 = a64 % 2 if p == 2 else -a32 * _inv_mod(2, p) % p
    a = _rst_shift(a, 0, 0, p * p * y0)
    if a[2] % p**3 != 0 or a[4] % p**5 != 0:
        raise TateError("IV* exit shift failed")
    if _val(a[3], p) < 4:
        return _checked(LocalReductionData(p, n, n - 7, 8, 2, "III*", ADDITIVE))
    if _val(a[4], p) < 6:
        return _checked(LocalReductionData(p, n, n - 8, 9, 1, "II*", ADDITIVE))
    raise TateError(f"model is not minimal at p={p}")


def _checked(d: LocalReductionData) -> LocalReductionData:
    """Enforce the classical consistency rules before returning."""
    if d.delta != d.eta + d.m - 1:
        raise TateError(f"Ogg's formula violated: {d}")
    if d.reduction == GOOD and (d.delta, d.eta, d.m, d.c) != (0, 0, 1, 1):
        raise TateError(f"bad good-reduction data: {d}")
    if d.reduction == SPLIT and (d.eta != 1 or d.c != d.delta):
        raise TateError(f"bad split-multiplicative data: {d}")
    if d.reduction == NONSPLIT and (d.eta != 1 or d.c not in (1, 2)):
        raise TateError(f"bad nonsplit-multiplicative data: {d}")
    if d.reduction == ADDITIVE:
        if d.eta < 2 or d.c > 4:
            raise TateError(f"bad additive data: {d}")
        if d.p >= 5 and d.eta != 2:
            raise TateError(f"wild conductor exponent at tame prime: {d}")
    return d


@lru_cache(maxsize=4096)
def tate_local(model: WeierstrassModel, p: int) -> LocalReductionData:
    """Run Tate's algorithm for a globally minimal integral model at p."""
    return _tate_uncached(model, p)


def split_multiplicative_test(model: WeierstrassModel, p: int) -> bool:
    """Split/nonsplit test at a multiplicative prime of a minimal model.

    For p >= 5 this is the quadratic-residue test on -c6; for p in {2, 3}
    the tangent directions at the node are inspected directly.
    """
    inv = compute_invariants(model)
    disc = int(inv.disc)
    c4, c6 = int(inv.c4), int(inv.c6)
    if _val(disc, p) == 0 or c4 % p == 0:
        raise NotMultiplicative(f"reduction at {p} is not multiplicative")
    if p >= 5:
        return _legendre(-c6, p) == 1
    a = tuple(int(x) for x in model.a_invariants)
    r, t = _singular_shift(a, p, c4, c6)
    a = _rst_shift(a, r, 0, t)
    if p == 2:
        return a[1] % 2 == 0
    b2 = a[0] * a[0] + 4 * a[1]
    return _legendre(b2, 3) == 1


def szpiro_ratio(local: tuple[LocalReductionData, ...] | list[LocalReductionData]) -> float:
    """Szpiro ratio from per-prime data; 1 by convention with no bad primes."""
    bad = [d for d in local if d.delta > 0]
    if not bad:
        return 1.0
    log_disc = sum(d.delta * math.log(d.p) for d in bad)
    log_cond = sum(d.eta * math.log(d.p) for d in bad)
    return log_disc / log_cond


@lru_cache(maxsize=1024)
def global_data(model: WeierstrassModel, factor_bound: int | None = None) -> GlobalReductionData:
    """Minimal model, all bad-prime local data, log norms, and sigma."""
    mm, tr = minimal_model(model, factor_bound=factor_bound)
    disc = int(compute_invariants(mm).disc)
    fact: Factorization = factorize(disc) if factor_bound is None else factorize(disc, factor_bound)
    local = []
    for p, e in fact.factors:
        d = tate_local(mm, p)
        if d.delta != e:
            raise TateError(f"delta mismatch at {p}: {d.delta} != {e}")
        local.append(d)
    local_t = tuple(local)
    log_disc = sum(d.delta * math.log(d.p) for d in local_t)
    log_cond = sum(d.eta * math.log(d.p) for d in local_t)
    return GlobalReductionData(
        minimal=mm,
        transform=tr,
        local=local_t,
        log_norm_discriminant=log_disc,
        log_norm_conductor=log_cond,
        sigma=szpiro_ratio(local_t),
    )
