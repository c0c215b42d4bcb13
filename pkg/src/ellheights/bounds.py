"""Evaluation of the explicit torsion/height bounds and their verification
against computed curve data.

Every verifier returns a BoundReport.  Margin semantics are uniform: a check
passes iff margin >= -slack, where margin is the room left in the inequality
(rhs - lhs for upper bounds, lhs - rhs for lower bounds).  The theorems are
unconditional, so failures on valid inputs indicate implementation bugs;
slack (default 1e-9) only absorbs series truncation noise.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .exactnum import valuation
from .heights import (
    DEFAULT_CONFIG,
    HeightConfig,
    TorusPoint,
    canonical_height,
    height_disc_sum,
    j_tau,
    lambda_sum,
    torus_neron,
)
from .localdata import GlobalReductionData, LocalReductionData, global_data
from .torsion import TorsionSubgroup, torsion_subgroup
from .weierstrass import CurvePoint, WeierstrassModel, compute_invariants, log_abs_frac

__all__ = [
    "PaperConstants",
    "CONSTANTS",
    "BoundInputs",
    "BoundReport",
    "GoodReduction",
    "TorsionPointSupplied",
    "DEFAULT_SLACK",
    "torsion_bound",
    "lang_constant",
    "small_height_threshold",
    "tlem_bound",
    "tlem_brute",
    "verify_theorem1",
    "verify_theorem2",
    "verify_prop41",
    "verify_lemma31",
    "verify_lemma32",
    "verify_hindry_torus",
    "verify_local_conductor_ineq",
    "verify_ogg",
    "verify_j_discriminant_ineq",
    "verify_tamagawa_rules",
    "verify_szpiro",
    "verify_parallelogram",
]

DEFAULT_SLACK = 1e-9


class GoodReduction(ValueError):
    """The local check only applies at primes of bad reduction."""


class TorsionPointSupplied(ValueError):
    """A torsion point was supplied where a non-torsion point is required."""


@dataclass(frozen=True)
class PaperConstants:
    c1: int = 134861
    c2: int = 104613
    lang_denominator_base: int = 10**15
    threshold_divisor: int = 2**13 * 3  # 24576
    elkies: tuple[float, float, float] = (0.5, 1.0 / 12.0, 16.0 / 5.0)
    torus: tuple[float, float] = (1.0 / 24.0, 1.0 / 288.0)
    tlem_factor: float = math.e / (math.e - 1.0)


CONSTANTS = PaperConstants()
assert CONSTANTS.threshold_divisor == 24576


@dataclass(frozen=True)
class BoundInputs:
    d: int = 1
    sigma: float = 1.0
    log_norm_discriminant: float = 0.0

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("field degree d must be >= 1")
        if self.sigma < 1:
            raise ValueError("Szpiro ratio is >= 1")
        if self.log_norm_discriminant < 0:
            raise ValueError("log |N(disc)| is >= 0")


@dataclass(frozen=True)
class BoundReport:
    check_name: str
    lhs: float
    rhs: float
    status: str  # pass | fail | skipped
    margin: float
    context: str = ""


def _report(name: str, lhs: float, rhs: float, margin: float, slack: float, context: str) -> BoundReport:
    status = "pass" if margin >= -slack else "fail"
    return BoundReport(name, lhs, rhs, status, margin, context)


def torsion_bound(inputs: BoundInputs, constants: PaperConstants = CONSTANTS) -> float:
    """c1 * d * sigma^2 * log(c2 * d * sigma^2)."""
    ds2 = inputs.d * inputs.sigma**2
    return constants.c1 * ds2 * math.log(constants.c2 * ds2)


def lang_constant(inputs: BoundInputs, constants: PaperConstants = CONSTANTS) -> float:
    """1 / (10^15 d^3 sigma^6 log^2(c2 d sigma^2))."""
    d, s = inputs.d, inputs.sigma
    return 1.0 / (
        constants.lang_denominator_base * d**3 * s**6 * math.log(constants.c2 * d * s * s) ** 2
    )


def small_height_threshold(inputs: BoundInputs, constants: PaperConstants = CONSTANTS) -> float:
    """log|N(disc)| / (2^13 * 3 * d * sigma^2)."""
    return inputs.log_norm_discriminant / (constants.threshold_divisor * inputs.d * inputs.sigma**2)


_TLEM_N = np.arange(1, 10_001)
_TLEM_LOG = np.log(_TLEM_N)


def tlem_bound(A: float, B: float, constants: PaperConstants = CONSTANTS) -> float:
    """(e/(e-1)) * (A log A + B), valid for any N with N <= A log N + B."""
    if A <= 0 or B < 0:
        raise ValueError("need A > 0 and B >= 0")
    return constants.tlem_factor * (A * math.log(A) + B)


def tlem_brute(A: float, B: float) -> int:
    """max{N in [1, 10^4] : N <= A log N + B} by full scan; 0 if none."""
    mask = _TLEM_N <= A * _TLEM_LOG + B
    if not mask.any():
        return 0
    return int(_TLEM_N[mask].max())


def _require_rational_field(d: int) -> None:
    if d != 1:
        raise ValueError("curve-level verification is implemented over Q only (d = 1)")


def _inputs_for(g: GlobalReductionData) -> BoundInputs:
    return BoundInputs(1, g.sigma, g.log_norm_discriminant)


def verify_theorem1(
    model: WeierstrassModel,
    slack: float = DEFAULT_SLACK,
    context: str = "",
    constants: PaperConstants = CONSTANTS,
) -> BoundReport:
    """|E(Q)_tor| <= c1 d sigma^2 log(c2 d sigma^2)."""
    g = global_data(model)
    tors = torsion_subgroup(g.minimal)
    lhs = float(tors.order)
    rhs = torsion_bound(_inputs_for(g), constants)
    return _report("thm11-torsion", lhs, rhs, rhs - lhs, slack, context)


def verify_theorem2(
    model: WeierstrassModel,
    nontorsion_points: list[CurvePoint],
    config: HeightConfig = DEFAULT_CONFIG,
    slack: float = DEFAULT_SLACK,
    context: str = "",
    constants: PaperConstants = CONSTANTS,
) -> BoundReport:
    """hhat(P) >= c(d, sigma) log|N(disc)| for supplied non-torsion points."""
    if not nontorsion_points:
        return BoundReport("thm12-lang", 0.0, 0.0, "skipped", 0.0, context + " no points")
    g = global_data(model)
    heights = []
    for P in nontorsion_points:
        h = canonical_height(model, P, config)
        if h <= 10 * slack:
            raise TorsionPointSupplied(f"{P} appears to be torsion (hhat = {h})")
        heights.append(h)
    lhs = min(heights)
    rhs = lang_constant(_inputs_for(g), constants) * g.log_norm_discriminant
    return _report("thm12-lang", lhs, rhs, lhs - rhs, slack, context)


def verify_prop41(
    model: WeierstrassModel,
    points: list[CurvePoint],
    config: HeightConfig = DEFAULT_CONFIG,
    slack: float = DEFAULT_SLACK,
    context: str = "",
    constants: PaperConstants = CONSTANTS,
) -> BoundReport:
    """#{P : hhat(P) <= log|N(disc)|/(2^13 3 d sigma^2)} <= torsion bound,
    over the supplied points together with the torsion subgroup."""
    g = global_data(model)
    tors = torsion_subgroup(g.minimal)
    inputs = _inputs_for(g)
    threshold = small_height_threshold(inputs, constants)
    pool = set(tors.points)
    pool.update(points)
    small = 0
    for P in pool:
        h = 0.0 if P.is_infinity else canonical_height(model, P, config)
        if h <= threshold + slack:
            small += 1
    lhs = float(small)
    rhs = torsion_bound(inputs, constants)
    return _report("prop41-small-points", lhs, rhs, rhs - lhs, slack, context)


def verify_lemma31(
    model: WeierstrassModel,
    Z: list[CurvePoint],
    p: int,
    config: HeightConfig = DEFAULT_CONFIG,
    slack: float = DEFAULT_SLACK,
    context: str = "",
) -> BoundReport:
    """Lambda_p(Z) >= (1/c^2 - 1/N) (delta/12) log p."""
    g = global_data(model)
    loc = g.at(p)
    c = loc.c if loc is not None else 1
    delta = loc.delta if loc is not None else 0
    N = len(Z)
    lhs = lambda_sum(model, Z, p, config)
    rhs = (1.0 / (c * c) - 1.0 / N) * delta / 12.0 * math.log(p)
    return _report("lemma31", lhs, rhs, lhs - rhs, slack, context)


def verify_lemma32(
    model: WeierstrassModel,
    Z: list[CurvePoint],
    config: HeightConfig = DEFAULT_CONFIG,
    slack: float = DEFAULT_SLACK,
    context: str = "",
    constants: PaperConstants = CONSTANTS,
) -> BoundReport:
    """Lambda_inf(Z) >= -log(N)/(2N) - log+|j|/(12N) - 16/(5N)."""
    half, twelfth, elkies_const = constants.elkies
    N = len(Z)
    j = compute_invariants(model).j
    logplus_j = max(0.0, log_abs_frac(j)) if j != 0 else 0.0
    lhs = lambda_sum(model, Z, None, config)
    rhs = -half * math.log(N) / N - twelfth * logplus_j / N - elkies_const / N
    return _report("lemma32", lhs, rhs, lhs - rhs, slack, context)


def verify_hindry_torus(
    tau: complex,
    sample_count: int,
    seed: int,
    config: HeightConfig = DEFAULT_CONFIG,
    slack: float = DEFAULT_SLACK,
    context: str = "",
    constants: PaperConstants = CONSTANTS,
) -> BoundReport:
    """lambda(z) >= (1/288) max(1, log|j(tau)|) for deterministic samples
    z = r1 + r2 tau with max(|r1|, |r2|) <= 1/24."""
    box, floor_const = constants.torus
    rhs = floor_const * max(1.0, math.log(abs(j_tau(tau))))
    rng = random.Random(seed)
    lhs = math.inf
    done = 0
    while done < sample_count:
        r1 = rng.uniform(-box, box)
        r2 = rng.uniform(-box, box)
        if r1 == 0.0 and r2 == 0.0:
            continue
        lhs = min(lhs, torus_neron(TorusPoint(r1, r2, tau), config))
        done += 1
    return _report("hindry-torus", lhs, rhs, lhs - rhs, slack, context)


def verify_local_conductor_ineq(
    local: LocalReductionData, context: str = ""
) -> BoundReport:
    """eta^2 c^2 <= 16 delta^2, exact integer arithmetic, bad primes only."""
    if local.delta == 0:
        raise GoodReduction(f"p={local.p} has good reduction")
    lhs = local.eta**2 * local.c**2
    rhs = 16 * local.delta**2
    return _report("conductor-48", float(lhs), float(rhs), float(rhs - lhs), 0.0, context)


def verify_ogg(local: LocalReductionData, context: str = "") -> BoundReport:
    """delta = eta + m - 1, exact."""
    lhs = local.delta
    rhs = local.eta + local.m - 1
    margin = -abs(lhs - rhs)
    return _report("ogg", float(lhs), float(rhs), float(margin), 0.0, context)


def verify_j_discriminant_ineq(
    model: WeierstrassModel, local: LocalReductionData, context: str = ""
) -> BoundReport:
    """max(0, -ord_p j) <= delta_p, equality iff good or multiplicative."""
    j = compute_invariants(model).j
    lhs = max(0, -valuation(j, local.p)) if j != 0 else 0
    rhs = local.delta
    ok = lhs <= rhs
    equality_expected = local.reduction != "additive"
    ok = ok and ((lhs == rhs) == equality_expected)
    return _report("j-delta-32", float(lhs), float(rhs), 0.0 if ok else -1.0, 0.0, context)


def verify_tamagawa_rules(local: LocalReductionData, context: str = "") -> BoundReport:
    """c = delta at split multiplicative primes; c <= 4 otherwise; eta <= delta."""
    ok = local.eta <= local.delta
    if local.reduction == "split-multiplicative":
        ok = ok and local.c == local.delta and local.eta == 1
    elif local.reduction == "nonsplit-multiplicative":
        ok = ok and local.c in (1, 2) and (local.c == 2) == (local.delta % 2 == 0)
    elif local.reduction == "additive":
        ok = ok and local.c <= 4 and local.eta >= 2
    return _report(
        "tamagawa", float(local.c), float(local.delta), 0.0 if ok else -1.0, 0.0, context
    )


def verify_szpiro(g: GlobalReductionData, context: str = "") -> BoundReport:
    """sigma >= 1 (with the sigma = 1 convention for good reduction)."""
    return _report("szpiro-ge-1", g.sigma, 1.0, g.sigma - 1.0, 1e-12, context)


def verify_parallelogram(
    model: WeierstrassModel,
    Z: list[CurvePoint],
    config: HeightConfig = DEFAULT_CONFIG,
    slack: float = DEFAULT_SLACK,
    context: str = "",
) -> BoundReport:
    """Lambda(Z) <= (4/N) sum_j hhat(P_j)."""
    N = len(Z)
    lhs = height_disc_sum(model, Z, config)
    rhs = 4.0 / N * sum(
        0.0 if P.is_infinity else canonical_height(model, P, config) for P in Z
    )
    return _report("parallelogram", lhs, rhs, rhs - lhs, slack, context)
