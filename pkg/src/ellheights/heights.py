"""Neron local heights, canonical heights, height-discriminant sums, and the
Neron function on a complex torus.

Normalization: at every place v,

    lambda_v = lambda_v^clean - (1/12) log|disc|_v,

where lambda^clean satisfies the offset-free division relation
lambda(nP) = n^2 lambda(P) - log|psi_n(P)|_v.  Consequences pinned by tests:

  * lambda_v(nP) = n^2 lambda_v(P) - log|psi_n(P)|_v + ((n^2-1)/12) log|disc|_v
  * lambda_p(P)  = (1/2) max(0, -ord_p x) log p + (delta_p/12) log p on E_0
  * hhat(P) = sum_v lambda_v(P) = (1/2) lim 4^{-n} h_x(2^n P),
    which is half the value most contemporary software reports.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

try:
    from gmpy2 import mpz
except ImportError:  # pragma: no cover - gmpy2 is a declared dependency
    mpz = int

from .exactnum import Rational, factorize, int_valuation, valuation
from .localdata import (
    GOOD,
    LocalReductionData,
    NotMultiplicative,
    global_data,
    tate_local,
)
from .weierstrass import (
    INFINITY,
    CurvePoint,
    InfinityInput,
    WeierstrassModel,
    add_points,
    compute_invariants,
    division_polynomial,
    float_of_frac,
    log_abs_frac,
    log_abs_int,
    map_point,
    minimal_model,
    scalar_mul,
    sub_points,
)

__all__ = [
    "HeightConfig",
    "TorusPoint",
    "LocalHeightBreakdown",
    "NonConvergent",
    "LatticePoint",
    "EqualPoints",
    "DuplicatePoints",
    "b2_periodic",
    "good_local",
    "has_nonsingular_reduction",
    "component_fraction",
    "nonarch_local_height",
    "arch_local_height",
    "canonical_height",
    "local_height_breakdown",
    "ij_decomposition",
    "lambda_sum",
    "height_disc_sum",
    "doubling_oracle",
    "torus_neron",
    "j_tau",
    "reduce_tau",
]


class NonConvergent(ArithmeticError):
    """The archimedean series failed to stabilize after the doubling cap."""


class LatticePoint(ValueError):
    """The Neron function is not defined at lattice points."""


class EqualPoints(ValueError):
    """The decomposition needs two distinct points."""


class DuplicatePoints(ValueError):
    """Height-discriminant sums need distinct points."""


@dataclass(frozen=True)
class HeightConfig:
    series_tol: float = 1e-12
    doubling_oracle_steps: int = 12


DEFAULT_CONFIG = HeightConfig()


@dataclass(frozen=True)
class TorusPoint:
    """z = t1 + t2*tau on C/(Z + tau Z), Im(tau) > 0."""

    t1: float
    t2: float
    tau: complex

    def __post_init__(self):
        if complex(self.tau).imag <= 0:
            raise ValueError("tau must lie in the upper half-plane")


@dataclass(frozen=True)
class LocalHeightBreakdown:
    place: int | None  # prime, or None for the real place
    lam: float
    r_value: Rational | None = None
    i_part: float | None = None
    j_part: float | None = None


def b2_periodic(t):
    """Periodic second Bernoulli polynomial B2({t}) = {t}^2 - {t} + 1/6.

    Exact on Fraction inputs, float otherwise.
    """
    if isinstance(t, Fraction):
        u = t - math.floor(t)
        return u * u - u + Fraction(1, 6)
    u = t - math.floor(t)
    return u * u - u + 1.0 / 6.0


def good_local(p: int) -> LocalReductionData:
    """Trivial local data for a prime of good reduction."""
    return LocalReductionData(p, 0, 0, 1, 1, "I0", GOOD)


def has_nonsingular_reduction(model: WeierstrassModel, p: int, P: CurvePoint) -> bool:
    """Whether P lies in E_0(Q_p) for the given minimal integral model."""
    if P.is_infinity:
        return True
    x, y = P.x, P.y
    if x != 0 and valuation(x, p) < 0:
        return True  # reduces to the origin of the formal group
    a1, a2, a3, a4 = (int(model.a1), int(model.a2), int(model.a3), int(model.a4))
    xm = _frac_mod(x, p)
    ym = _frac_mod(y, p)
    fy = (2 * ym + a1 * xm + a3) % p
    fx = (a1 * ym - 3 * xm * xm - 2 * a2 * xm - a4) % p
    return not (fx == 0 and fy == 0)


def _frac_mod(q: Fraction, p: int) -> int:
    den = q.denominator % p
    return q.numerator * pow(den, -1, p) % p


def component_fraction(
    model: WeierstrassModel, local: LocalReductionData, P: CurvePoint
) -> Fraction:
    """Image of P under the component map at a multiplicative prime,
    sign-reduced to [0, 1/2]; 0 exactly when P has nonsingular reduction."""
    if not local.is_multiplicative:
        raise NotMultiplicative(f"reduction at {local.p} is not multiplicative")
    if P.is_infinity:
        return Fraction(0)
    p, delta = local.p, local.delta
    if has_nonsingular_reduction(model, p, P):
        return Fraction(0)
    psi2 = 2 * P.y + model.a1 * P.x + model.a3
    if psi2 == 0:
        # Rational 2-torsion off the identity component sits halfway around.
        return Fraction(1, 2)
    b = valuation(psi2, p)
    return min(Fraction(b, delta), Fraction(1, 2))


def nonarch_local_height(
    model: WeierstrassModel, local: LocalReductionData, P: CurvePoint
) -> float:
    """Neron local height at a finite place of the minimal model."""
    if P.is_infinity:
        raise InfinityInput("local height needs an affine point")
    p, delta = local.p, local.delta
    logp = math.log(p)
    if has_nonsingular_reduction(model, p, P):
        ordx = valuation(P.x, p) if P.x != 0 else 0
        return 0.5 * max(0, -ordx) * logp + delta / 12.0 * logp
    if local.is_multiplicative:
        r = component_fraction(model, local, P)
        return 0.5 * float(b2_periodic(r)) * delta * logp
    return _additive_singular_height(model, local, P)


def _additive_singular_height(
    model: WeierstrassModel, local: LocalReductionData, P: CurvePoint
) -> float:
    """Division-relation chain for singular points at additive primes.

    The component group has order <= 4, so some n <= 4 moves P into E_0.
    """
    p, delta = local.p, local.delta
    logp = math.log(p)
    log_disc_p = -delta * logp  # log|disc|_p
    for n in (2, 3, 4):
        nP = scalar_mul(model, n, P)
        if nP.is_infinity:
            # (n+1)P = P, so the n+1 relation closes on lambda(P).
            k = n + 1
            psi = division_polynomial(model, k, P)
            log_psi_p = -valuation(psi, p) * logp
            denom = k * k - 1
            return (log_psi_p - denom / 12.0 * log_disc_p) / denom
        if has_nonsingular_reduction(model, p, nP):
            lam_n = nonarch_local_height(model, local, nP)
            psi = division_polynomial(model, n, P)
            log_psi_p = -valuation(psi, p) * logp
            return (lam_n + log_psi_p - (n * n - 1) / 12.0 * log_disc_p) / (n * n)
    raise AssertionError(f"component order exceeds 4 at p={p}")


# ---------------------------------------------------------------------------
# Archimedean local height


def _arch_clean_series(model: WeierstrassModel, P: CurvePoint, tol: float):
    """lambda^clean(P) = (1/2) sum_n 4^{-(n+1)} log|omega(x_n)|, where
    omega = psi2^2 as a polynomial in x and x_n = x(2^n P).

    The orbit is tracked in floats with two charts (x or 1/x, whichever is
    in [-1, 1]).  Returns (value, ok); ok=False flags a hazardous pass
    (near-vanishing denominator while the 4^{-n} weight still matters).
    """
    inv = compute_invariants(model)
    b2, b4, b6, b8 = (float(inv.b2), float(inv.b4), float(inv.b6), float(inv.b8))
    scale = 4.0 + abs(b2) + 2 * abs(b4) + 2 * abs(b6) + abs(b8) + 1.0

    try:
        xf = float_of_frac(P.x)
    except OverflowError:
        return 0.0, False
    if abs(xf) <= 1:
        u, inverted = xf, False
    else:
        u, inverted = float_of_frac(1 / P.x), True

    acc = 0.0
    weight = 0.25
    for n in range(82):
        if not inverted:
            om = ((4 * u + b2) * u + 2 * b4) * u + b6
            ph = ((u * u - b4) * u - 2 * b6) * u - b8
            num, den = ph, om
            term_arg = abs(om)
            term = math.log(term_arg) if term_arg > 0 else None
        else:
            # s = 1/x: omega(x) = x^3 (4 + b2 s + 2 b4 s^2 + b6 s^3)
            om = ((b6 * u + 2 * b4) * u + b2) * u + 4
            ph = ((-b8 * u - 2 * b6) * u - b4) * u * u + 1
            num, den = ph, u * om  # x' = phi/omega = ph / (s * om)
            term = (
                -3 * math.log(abs(u)) + math.log(abs(om)) if om != 0 and u != 0 else None
            )
        # Near-root passes are harmless (the 4^{-n} weight cancels the error
        # growth); only exact or near-exact hits need the exact fallback.
        hazardous = term is None or abs(om) < 1e-11 * scale
        if hazardous and weight > tol * 1e-3:
            return acc, False
        if term is not None:
            acc += 0.5 * weight * term
            if n >= 8 and weight * (abs(term) + 40.0) < 0.1 * tol:
                return acc, True
        if num == 0:  # orbit landed exactly on x = 0; stay in the plain chart
            u, inverted = 0.0, False
        elif abs(num) >= abs(den):
            u, inverted = den / num, True
        else:
            u, inverted = num / den, False
        weight *= 0.25
    return acc, True


def _arch_clean(model: WeierstrassModel, P: CurvePoint, cfg: HeightConfig) -> float:
    """Clean-normalized archimedean local height (no discriminant offset)."""
    if P.is_infinity:
        raise InfinityInput("archimedean height needs an affine point")
    # Exact doublings until the float series runs hazard-free, then unwind
    # with lambda(Q) = (lambda(2Q) + log|psi2(Q)|)/4.
    parts: list[float] = []
    Q = P
    while True:
        psi2 = 2 * Q.y + model.a1 * Q.x + model.a3
        if psi2 == 0:
            # 2-torsion: 3Q = Q gives lambda(Q) = (1/8) log|psi3(Q)|.
            value = log_abs_frac(division_polynomial(model, 3, Q)) / 8.0
            break
        value, ok = _arch_clean_series(model, Q, cfg.series_tol)
        if ok:
            break
        if len(parts) >= 40:
            raise NonConvergent("archimedean series failed after 40 doublings")
        parts.append(log_abs_frac(psi2))
        Q = add_points(model, Q, Q)
        if Q.is_infinity:
            value = 0.0  # unreachable: psi2 == 0 catches 2-torsion first
            break
    for part in reversed(parts):
        value = (value + part) / 4.0
    return value


def arch_local_height(
    model: WeierstrassModel, P: CurvePoint, config: HeightConfig = DEFAULT_CONFIG
) -> float:
    """Neron local height at the real place (paper normalization)."""
    disc = compute_invariants(model).disc
    return _arch_clean(model, P, config) - log_abs_frac(abs(disc)) / 12.0


# ---------------------------------------------------------------------------
# Canonical height and height-discriminant sums


def canonical_height(
    model: WeierstrassModel, P: CurvePoint, config: HeightConfig = DEFAULT_CONFIG
) -> float:
    """hhat(P) = sum of local heights over the real place, bad primes, and
    denominator primes of the minimal model; equals half the doubling limit."""
    g = global_data(model)
    Q = map_point(g.transform, P)
    if Q.is_infinity:
        return 0.0
    total = arch_local_height(g.minimal, Q, config)
    bad = set()
    for loc in g.local:
        bad.add(loc.p)
        total += nonarch_local_height(g.minimal, loc, Q)
    den = Q.x.denominator
    if den > 1:
        for p, _ in factorize(den).factors:
            if p not in bad:
                total += nonarch_local_height(g.minimal, good_local(p), Q)
    return total


def local_height_breakdown(
    model: WeierstrassModel, P: CurvePoint, config: HeightConfig = DEFAULT_CONFIG
) -> list[LocalHeightBreakdown]:
    """Per-place heights for P, with the i/j split at multiplicative primes."""
    g = global_data(model)
    Q = map_point(g.transform, P)
    if Q.is_infinity:
        raise InfinityInput("breakdown needs an affine point")
    out = [LocalHeightBreakdown(None, arch_local_height(g.minimal, Q, config))]
    places = {loc.p: loc for loc in g.local}
    den = Q.x.denominator
    if den > 1:
        for p, _ in factorize(den).factors:
            places.setdefault(p, good_local(p))
    for p in sorted(places):
        loc = places[p]
        lam = nonarch_local_height(g.minimal, loc, Q)
        if loc.is_multiplicative:
            r = component_fraction(g.minimal, loc, Q)
            j_part = 0.5 * float(b2_periodic(r)) * loc.delta * math.log(p)
            out.append(LocalHeightBreakdown(p, lam, r, lam - j_part, j_part))
        else:
            out.append(LocalHeightBreakdown(p, lam))
    return out


def ij_decomposition(
    model: WeierstrassModel,
    local: LocalReductionData,
    P: CurvePoint,
    Q: CurvePoint,
    config: HeightConfig = DEFAULT_CONFIG,
) -> tuple[float, float]:
    """(i_v, j_v) at a multiplicative prime: j from the Bernoulli term of
    r(P-Q), i recovered as lambda - j."""
    if not local.is_multiplicative:
        raise NotMultiplicative(f"reduction at {local.p} is not multiplicative")
    if P == Q:
        raise EqualPoints("need P != Q")
    D = sub_points(model, P, Q)
    r = component_fraction(model, local, D)
    j_part = 0.5 * float(b2_periodic(r)) * local.delta * math.log(local.p)
    lam = nonarch_local_height(model, local, D)
    return lam - j_part, j_part


def lambda_sum(
    model: WeierstrassModel,
    Z: list[CurvePoint],
    place: int | None,
    config: HeightConfig = DEFAULT_CONFIG,
) -> float:
    """Lambda_v(Z) = N^-2 sum_{i != j} lambda_v(P_i - P_j)."""
    _check_distinct(Z)
    N = len(Z)
    if N == 1:
        return 0.0
    g = global_data(model)
    pts = [map_point(g.transform, P) for P in Z]
    if place is None:
        loc = None
    else:
        loc = g.at(place) or good_local(place)
    total = 0.0
    for i in range(N):
        for j in range(N):
            if i == j:
                continue
            D = sub_points(g.minimal, pts[i], pts[j])
            if place is None:
                total += arch_local_height(g.minimal, D, config)
            else:
                total += nonarch_local_height(g.minimal, loc, D)
    return total / (N * N)


def height_disc_sum(
    model: WeierstrassModel, Z: list[CurvePoint], config: HeightConfig = DEFAULT_CONFIG
) -> float:
    """Lambda(Z) = N^-2 sum_{i,j} hhat(P_i - P_j)."""
    _check_distinct(Z)
    N = len(Z)
    g = global_data(model)
    pts = [map_point(g.transform, P) for P in Z]
    total = 0.0
    for i in range(N):
        for j in range(N):
            if i == j:
                continue
            total += canonical_height(g.minimal, sub_points(g.minimal, pts[i], pts[j]), config)
    return total / (N * N)


def _check_distinct(Z) -> None:
    if len(set(Z)) != len(Z):
        raise DuplicatePoints("point set must consist of distinct points")
    if not Z:
        raise ValueError("point set must be nonempty")


# ---------------------------------------------------------------------------
# Doubling-limit oracle


def doubling_oracle(
    model: WeierstrassModel, P: CurvePoint, steps: int = 12
) -> float:
    """(1/2) 4^{-steps} h_x(2^steps P) on the minimal model.

    Independent of the local-height machinery: x-only projective doubling
    over exact integers, with common discriminant-prime powers stripped
    (the duplication resultant is disc^2, so this keeps gcd(N, D) = 1).
    """
    mm, tr = minimal_model(model)
    Q = map_point(tr, P)
    if Q.is_infinity:
        return 0.0
    inv = compute_invariants(mm)
    b2, b4, b6, b8 = (int(inv.b2), int(inv.b4), int(inv.b6), int(inv.b8))
    bad = [p for p, _ in factorize(int(inv.disc)).factors]
    N = mpz(Q.x.numerator)
    D = mpz(Q.x.denominator)
    for _ in range(steps):
        N2 = N * N
        D2 = D * D
        ND = N * D
        Nn = N2 * N2 - b4 * N2 * D2 - 2 * b6 * ND * D2 - b8 * D2 * D2
        Dn = 4 * N2 * ND + b2 * N2 * D2 + 2 * b4 * ND * D2 + b6 * D2 * D2
        if Dn == 0:
            return 0.0  # hit a torsion multiple
        for p in bad:
            while Nn % p == 0 and Dn % p == 0:
                Nn //= p
                Dn //= p
        N, D = Nn, Dn
    h = log_abs_int(int(max(abs(N), abs(D))))
    return 0.5 * h / 4.0**steps


# ---------------------------------------------------------------------------
# Torus Neron function and modular j


def reduce_tau(tau: complex) -> complex:
    """Translate tau into the standard fundamental domain."""
    tau = complex(tau)
    if tau.imag <= 0:
        raise ValueError("tau must lie in the upper half-plane")
    for _ in range(200):
        tau = complex(tau.real - round(tau.real), tau.imag)
        if abs(tau) < 1 - 1e-15:
            tau = -1 / tau
        else:
            return tau
    return tau


def torus_neron(
    z: TorusPoint, config: HeightConfig = DEFAULT_CONFIG
) -> float:
    """Neron function on C/(Z + tau Z) via the q-product expansion."""
    tau = complex(z.tau)
    t1 = z.t1 - math.floor(z.t1)
    t2 = z.t2 - math.floor(z.t2)
    if t1 == 0.0 and t2 == 0.0:
        raise LatticePoint("Neron function undefined on the lattice")
    q = cmath.exp(2j * cmath.pi * tau)
    absq = abs(q)
    if absq >= 1:
        raise ValueError("need |q| < 1")
    w = cmath.exp(2j * cmath.pi * (t1 + t2 * tau))
    lam = 0.5 * float(b2_periodic(t2)) * (-math.log(absq))
    lam -= math.log(abs(1 - w))
    qn = 1.0 + 0j
    tol = config.series_tol
    for n in range(1, 500):
        qn *= q
        lam -= math.log(abs((1 - qn * w) * (1 - qn / w)))
        if absq**(n - t2) < tol * (1 - absq) / 8:
            break
    return lam


def _divisor_power_sums(limit: int, k: int) -> list[int]:
    out = [0] * (limit + 1)
    for d in range(1, limit + 1):
        dk = d**k
        for m in range(d, limit + 1, d):
            out[m] += dk
    return out


_SIGMA3 = _divisor_power_sums(40, 3)
_SIGMA5 = _divisor_power_sums(40, 5)


def j_tau(tau: complex) -> complex:
    """Modular j via Eisenstein q-series, j = E4^3 / Delta; j(i) = 1728,
    j(rho) = 0.  Delta comes from the eta product q prod(1-q^n)^24, which
    avoids the catastrophic cancellation of E4^3 - E6^2 at small |q|."""
    tau = reduce_tau(tau)
    q = cmath.exp(2j * cmath.pi * tau)
    e4 = 1 + 0j
    eta24 = 1 + 0j
    qn = 1.0 + 0j
    for n in range(1, 40):
        qn *= q
        e4 += 240 * _SIGMA3[n] * qn
        eta24 *= (1 - qn) ** 24
        if abs(qn) < 1e-18:
            break
    return e4**3 / (q * eta24)
