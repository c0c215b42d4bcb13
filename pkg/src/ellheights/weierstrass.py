"""Weierstrass models over Q: invariants, group law, division polynomials,
coordinate transforms, global minimal models, and the naive x-height.

Points carry no reference to a model; every operation takes the model
explicitly, because transforms move points between models.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .exactnum import Factorization, Rational, factorize, int_valuation

__all__ = [
    "WeierstrassModel",
    "CurveInvariants",
    "CurvePoint",
    "ModelTransform",
    "INFINITY",
    "IDENTITY_TRANSFORM",
    "SingularModel",
    "InfinityInput",
    "compute_invariants",
    "on_curve",
    "negate",
    "add_points",
    "sub_points",
    "scalar_mul",
    "division_polynomial",
    "apply_transform",
    "map_point",
    "invert_transform",
    "compose_transforms",
    "minimal_model",
    "naive_x_height",
    "log_abs_int",
    "log_abs_frac",
    "float_of_frac",
]


class SingularModel(ValueError):
    """The model has discriminant zero."""


class InfinityInput(ValueError):
    """An affine point was required but the point at infinity was given."""


def _frac(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


@dataclass(frozen=True)
class WeierstrassModel:
    a1: Rational
    a2: Rational
    a3: Rational
    a4: Rational
    a6: Rational

    def __post_init__(self):
        for name in ("a1", "a2", "a3", "a4", "a6"):
            object.__setattr__(self, name, _frac(getattr(self, name)))

    @property
    def a_invariants(self) -> tuple[Rational, ...]:
        return (self.a1, self.a2, self.a3, self.a4, self.a6)

    def is_integral(self) -> bool:
        return all(a.denominator == 1 for a in self.a_invariants)


@dataclass(frozen=True)
class CurveInvariants:
    b2: Rational
    b4: Rational
    b6: Rational
    b8: Rational
    c4: Rational
    c6: Rational
    disc: Rational
    j: Rational


@dataclass(frozen=True)
class CurvePoint:
    """Affine point (x, y), or the point at infinity when x is None."""

    x: Rational | None = None
    y: Rational | None = None

    def __post_init__(self):
        if (self.x is None) != (self.y is None):
            raise ValueError("affine points need both coordinates")
        if self.x is not None:
            object.__setattr__(self, "x", _frac(self.x))
            object.__setattr__(self, "y", _frac(self.y))

    @property
    def is_infinity(self) -> bool:
        return self.x is None

    def __repr__(self):
        if self.is_infinity:
            return "CurvePoint(O)"
        return f"CurvePoint({self.x}, {self.y})"


INFINITY = CurvePoint()


def compute_invariants(model: WeierstrassModel) -> CurveInvariants:
    """b-, c-, discriminant and j invariants; raises SingularModel if disc=0."""
    a1, a2, a3, a4, a6 = model.a_invariants
    b2 = a1 * a1 + 4 * a2
    b4 = 2 * a4 + a1 * a3
    b6 = a3 * a3 + 4 * a6
    b8 = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4
    c4 = b2 * b2 - 24 * b4
    c6 = -(b2**3) + 36 * b2 * b4 - 216 * b6
    disc = -b2 * b2 * b8 - 8 * b4**3 - 27 * b6 * b6 + 9 * b2 * b4 * b6
    if disc == 0:
        raise SingularModel(f"discriminant vanishes for {model}")
    return CurveInvariants(b2, b4, b6, b8, c4, c6, disc, c4**3 / disc)


def on_curve(model: WeierstrassModel, P: CurvePoint) -> bool:
    if P.is_infinity:
        return True
    a1, a2, a3, a4, a6 = model.a_invariants
    x, y = P.x, P.y
    return y * y + a1 * x * y + a3 * y == x**3 + a2 * x * x + a4 * x + a6


def negate(model: WeierstrassModel, P: CurvePoint) -> CurvePoint:
    if P.is_infinity:
        return INFINITY
    return CurvePoint(P.x, -P.y - model.a1 * P.x - model.a3)


def add_points(model: WeierstrassModel, P: CurvePoint, Q: CurvePoint) -> CurvePoint:
    """Chord-tangent addition; total on all inputs on the model."""
    if P.is_infinity:
        return Q
    if Q.is_infinity:
        return P
    a1, a2, a3, a4, a6 = model.a_invariants
    x1, y1 = P.x, P.y
    x2, y2 = Q.x, Q.y
    if x1 == x2:
        if y1 + y2 + a1 * x2 + a3 == 0:
            return INFINITY
        denom = 2 * y1 + a1 * x1 + a3
        lam = (3 * x1 * x1 + 2 * a2 * x1 + a4 - a1 * y1) / denom
        nu = (-(x1**3) + a4 * x1 + 2 * a6 - a3 * y1) / denom
    else:
        lam = (y2 - y1) / (x2 - x1)
        nu = (y1 * x2 - y2 * x1) / (x2 - x1)
    x3 = lam * lam + a1 * lam - a2 - x1 - x2
    y3 = -(lam + a1) * x3 - nu - a3
    return CurvePoint(x3, y3)


def sub_points(model: WeierstrassModel, P: CurvePoint, Q: CurvePoint) -> CurvePoint:
    return add_points(model, P, negate(model, Q))


def scalar_mul(model: WeierstrassModel, n: int, P: CurvePoint) -> CurvePoint:
    """n*P by double-and-add; scalar_mul(-n, P) = -(scalar_mul(n, P))."""
    if n < 0:
        return negate(model, scalar_mul(model, -n, P))
    result = INFINITY
    addend = P
    while n:
        if n & 1:
            result = add_points(model, result, addend)
        addend = add_points(model, addend, addend)
        n >>= 1
    return result


def division_polynomial(model: WeierstrassModel, n: int, P: CurvePoint) -> Rational:
    """psi_n(P) for 1 <= n <= 5, from the closed forms in b-invariants.

    psi_n(P) = 0 exactly when P is affine n-torsion.
    """
    if P.is_infinity:
        raise InfinityInput("division polynomial needs an affine point")
    if not 1 <= n <= 5:
        raise ValueError("only n in 1..5 is supported")
    inv = compute_invariants(model)
    b2, b4, b6, b8 = inv.b2, inv.b4, inv.b6, inv.b8
    x, y = P.x, P.y
    if n == 1:
        return Fraction(1)
    psi2 = 2 * y + model.a1 * x + model.a3
    if n == 2:
        return psi2
    psi3 = 3 * x**4 + b2 * x**3 + 3 * b4 * x * x + 3 * b6 * x + b8
    if n == 3:
        return psi3
    quart = (
        2 * x**6
        + b2 * x**5
        + 5 * b4 * x**4
        + 10 * b6 * x**3
        + 10 * b8 * x * x
        + (b2 * b8 - b4 * b6) * x
        + (b4 * b8 - b6 * b6)
    )
    psi4 = psi2 * quart
    if n == 4:
        return psi4
    return psi4 * psi2**3 - psi3**3


@dataclass(frozen=True)
class ModelTransform:
    """Change of Weierstrass coordinates x = u^2 x' + r, y = u^3 y' + s u^2 x' + t."""

    u: Rational
    r: Rational
    s: Rational
    t: Rational

    def __post_init__(self):
        for name in ("u", "r", "s", "t"):
            object.__setattr__(self, name, _frac(getattr(self, name)))
        if self.u == 0:
            raise ValueError("transform needs u != 0")


IDENTITY_TRANSFORM = ModelTransform(1, 0, 0, 0)


def apply_transform(model: WeierstrassModel, tr: ModelTransform) -> WeierstrassModel:
    a1, a2, a3, a4, a6 = model.a_invariants
    u, r, s, t = tr.u, tr.r, tr.s, tr.t
    na1 = (a1 + 2 * s) / u
    na2 = (a2 - s * a1 + 3 * r - s * s) / u**2
    na3 = (a3 + r * a1 + 2 * t) / u**3
    na4 = (a4 - s * a3 + 2 * r * a2 - (t + r * s) * a1 + 3 * r * r - 2 * s * t) / u**4
    na6 = (a6 + r * a4 + r * r * a2 + r**3 - t * a3 - t * t - r * t * a1) / u**6
    return WeierstrassModel(na1, na2, na3, na4, na6)


def map_point(tr: ModelTransform, P: CurvePoint) -> CurvePoint:
    """Image of P under the transform (to the primed coordinates)."""
    if P.is_infinity:
        return INFINITY
    u, r, s, t = tr.u, tr.r, tr.s, tr.t
    nx = (P.x - r) / u**2
    ny = (P.y - s * (P.x - r) - t) / u**3
    return CurvePoint(nx, ny)


def invert_transform(tr: ModelTransform) -> ModelTransform:
    u, r, s, t = tr.u, tr.r, tr.s, tr.t
    return ModelTransform(1 / u, -r / u**2, -s / u, (r * s - t) / u**3)


def compose_transforms(first: ModelTransform, second: ModelTransform) -> ModelTransform:
    """Transform equivalent to applying `first`, then `second`."""
    u1, r1, s1, t1 = first.u, first.r, first.s, first.t
    u2, r2, s2, t2 = second.u, second.r, second.s, second.t
    return ModelTransform(
        u1 * u2,
        r1 + u1 * u1 * r2,
        s1 + u1 * s2,
        t1 + u1 * u1 * r2 * s1 + u1**3 * t2,
    )


def _lcm(a: int, b: int) -> int:
    return a // math.gcd(a, b) * b


def _reduced_from_c4c6(c4: int, c6: int) -> WeierstrassModel | None:
    """Integral model with given invariants and reduced (a1, a2, a3), if any.

    Searches the finite set of reduced (a1, a2, a3) triples; returns None when
    the Kraus conditions fail, i.e. no integral model exists.
    """
    for a1 in (0, 1):
        for a2 in (-1, 0, 1):
            b2 = a1 * a1 + 4 * a2
            num_b4 = b2 * b2 - c4
            if num_b4 % 24 != 0:
                continue
            b4 = num_b4 // 24
            num_b6 = -(b2**3) + 36 * b2 * b4 - c6
            if num_b6 % 216 != 0:
                continue
            b6 = num_b6 // 216
            for a3 in (0, 1):
                if (b4 - a1 * a3) % 2 != 0:
                    continue
                if (b6 - a3 * a3) % 4 != 0:
                    continue
                a4 = (b4 - a1 * a3) // 2
                a6 = (b6 - a3 * a3) // 4
                cand = WeierstrassModel(a1, a2, a3, a4, a6)
                inv = compute_invariants(cand)
                if inv.c4 == c4 and inv.c6 == c6:
                    return cand
    return None


def minimal_model(
    model: WeierstrassModel, factor_bound: int | None = None
) -> tuple[WeierstrassModel, ModelTransform]:
    """Global minimal model over Q via Laska-Kraus-Connell.

    The output model is reduced (a1, a3 in {0,1}, a2 in {-1,0,1}) and each
    local discriminant exponent is minimal.  The returned transform maps the
    input model to the minimal one.  Propagates UnfactoredPart from factorize.
    """
    inv0 = compute_invariants(model)  # raises SingularModel early

    # Clear denominators: scale by 1/L so a_i -> a_i * L^i is integral.
    L = 1
    for a in model.a_invariants:
        L = _lcm(L, a.denominator)
    work = model
    if L != 1:
        work = apply_transform(model, ModelTransform(Fraction(1, L), 0, 0, 0))
    inv = compute_invariants(work)
    c4, c6, disc = int(inv.c4), int(inv.c6), int(inv.disc)

    kwargs = {} if factor_bound is None else {"bound": factor_bound}
    disc_fact = factorize(disc, **kwargs)

    # Largest exponent d_p with p^{4d} | c4, p^{6d} | c6, p^{12d} | disc.
    exps: dict[int, int] = {}
    for p, e in disc_fact.factors:
        d = e // 12
        if c4 != 0:
            d = min(d, int_valuation(c4, p) // 4)
        if c6 != 0:
            d = min(d, int_valuation(c6, p) // 6)
        if d > 0:
            exps[p] = d

    u_odd = 1
    for p, d in exps.items():
        if p > 3:
            u_odd *= p**d
    e2 = exps.get(2, 0)
    e3 = exps.get(3, 0)

    # Kraus conditions can only fail at 2 and 3; try the largest exponents
    # first and back off.  Validity is independent between the two primes.
    best = None
    for d2 in range(e2, -1, -1):
        for d3 in range(e3, -1, -1):
            u = u_odd * 2**d2 * 3**d3
            cand = _reduced_from_c4c6(c4 // u**4, c6 // u**6)
            if cand is not None:
                best = (cand, u)
                break
        if best is not None:
            break
    if best is None:  # u = 1 always works for an integral model
        raise AssertionError("minimal model construction failed")
    minimal, u_int = best

    # Recover the full transform from the original model exactly.
    u = Fraction(u_int, L)
    s = (u * minimal.a1 - model.a1) / 2
    r = (u**2 * minimal.a2 - model.a2 + s * model.a1 + s * s) / 3
    t = (u**3 * minimal.a3 - model.a3 - r * model.a1) / 2
    tr = ModelTransform(u, r, s, t)
    if apply_transform(model, tr) != minimal:
        raise AssertionError("minimal model transform reconstruction failed")
    assert inv0.disc == compute_invariants(minimal).disc * u**12
    return minimal, tr


def log_abs_int(n: int) -> float:
    """log|n| for arbitrary-size nonzero integers (no float overflow)."""
    n = abs(n)
    if n == 0:
        raise ValueError("log of zero")
    bits = n.bit_length()
    if bits <= 512:
        return math.log(n)
    shift = bits - 60
    return math.log(n >> shift) + shift * math.log(2)


def log_abs_frac(q: Fraction) -> float:
    """log|q| for nonzero rationals of arbitrary size."""
    return log_abs_int(q.numerator) - log_abs_int(q.denominator)


def float_of_frac(q: Fraction) -> float:
    """Nearest float to q, robust against overflow of numerator/denominator."""
    try:
        return q.numerator / q.denominator
    except OverflowError:
        sign = -1.0 if q < 0 else 1.0
        return sign * math.exp(log_abs_frac(q))


def naive_x_height(P: CurvePoint) -> float:
    """h(P) = log max(|num x|, den x) in lowest terms; 0 at infinity."""
    if P.is_infinity:
        return 0.0
    return log_abs_int(max(abs(P.x.numerator), P.x.denominator))
