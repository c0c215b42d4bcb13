import math
from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from ellheights.exactnum import valuation
from ellheights.weierstrass import (
    INFINITY,
    IDENTITY_TRANSFORM,
    CurvePoint,
    InfinityInput,
    ModelTransform,
    SingularModel,
    WeierstrassModel,
    add_points,
    apply_transform,
    compose_transforms,
    compute_invariants,
    division_polynomial,
    invert_transform,
    map_point,
    minimal_model,
    naive_x_height,
    negate,
    on_curve,
    scalar_mul,
    sub_points,
)


def test_invariants_37a1(m37):
    inv = compute_invariants(m37)
    assert (inv.b2, inv.b4, inv.b6, inv.b8) == (0, -2, 1, -1)
    assert (inv.c4, inv.c6, inv.disc) == (48, -216, 37)
    assert inv.j == F(110592, 37)
    assert 1728 * 37 == 48**3 - (-216) ** 2


def test_invariants_identities(m11a1):
    inv = compute_invariants(m11a1)
    assert 4 * inv.b8 == inv.b2 * inv.b6 - inv.b4**2
    assert 1728 * inv.disc == inv.c4**3 - inv.c6**2
    assert inv.j * inv.disc == inv.c4**3


def test_invariants_11a3(m11a3):
    assert compute_invariants(m11a3).disc == -11


def test_singular_model():
    with pytest.raises(SingularModel):
        compute_invariants(WeierstrassModel(0, 0, 0, 0, 0))


def test_group_law_pinned(m11a3, m37):
    P, Q = CurvePoint(0, 0), CurvePoint(1, -1)
    assert add_points(m11a3, P, Q) == CurvePoint(1, 0)
    assert add_points(m11a3, P, INFINITY) == P
    assert add_points(m11a3, P, negate(m11a3, P)) == INFINITY
    assert scalar_mul(m11a3, 5, P) == INFINITY
    assert scalar_mul(m11a3, 1, P) == P
    assert scalar_mul(m37, 2, CurvePoint(0, 0)) == CurvePoint(1, 0)
    assert scalar_mul(m37, 8, CurvePoint(0, 0)) == CurvePoint(F(21, 25), F(-69, 125))
    assert scalar_mul(m37, -3, CurvePoint(0, 0)) == negate(
        m37, scalar_mul(m37, 3, CurvePoint(0, 0))
    )


@settings(deadline=None, max_examples=40)
@given(st.integers(-6, 6), st.integers(-6, 6), st.integers(-6, 6))
def test_group_law_assoc_comm(n1, n2, n3):
    model = WeierstrassModel(0, 0, 1, -1, 0)
    gen = CurvePoint(0, 0)
    P, Q, R = (scalar_mul(model, k, gen) for k in (n1, n2, n3))
    assert add_points(model, P, Q) == add_points(model, Q, P)
    lhs = add_points(model, add_points(model, P, Q), R)
    rhs = add_points(model, P, add_points(model, Q, R))
    assert lhs == rhs
    assert on_curve(model, lhs)


def test_division_polynomial_pinned(m37):
    P = CurvePoint(0, 0)
    assert division_polynomial(m37, 2, P) == 1
    assert division_polynomial(m37, 1, P) == 1
    with pytest.raises(InfinityInput):
        division_polynomial(m37, 2, INFINITY)
    # 2-torsion on 24a1: psi2 vanishes there, psi4 too, psi3/psi5 do not
    m24 = WeierstrassModel(0, -1, 0, -4, 4)
    T = CurvePoint(1, 0)
    assert division_polynomial(m24, 2, T) == 0
    assert division_polynomial(m24, 4, T) == 0
    assert division_polynomial(m24, 3, T) != 0
    assert division_polynomial(m24, 5, T) != 0
    # 5-torsion on 11a3
    m11a3 = WeierstrassModel(0, -1, 1, 0, 0)
    assert division_polynomial(m11a3, 5, CurvePoint(0, 0)) == 0
    assert division_polynomial(m11a3, 3, CurvePoint(0, 0)) != 0


def test_division_poly_multiple_identity(m37):
    P = CurvePoint(0, 0)
    psi = lambda n: division_polynomial(m37, n, P)
    for n in (2, 3, 4):
        expected = P.x - psi(n - 1) * psi(n + 1) / psi(n) ** 2
        assert scalar_mul(m37, n, P).x == expected


def test_transform_roundtrip(m37):
    tr = ModelTransform(F(1, 2), 3, F(5, 7), -2)
    m2 = apply_transform(m37, tr)
    P = scalar_mul(m37, 3, CurvePoint(0, 0))
    P2 = map_point(tr, P)
    assert on_curve(m2, P2)
    inv_tr = invert_transform(tr)
    assert apply_transform(m2, inv_tr) == m37
    assert map_point(inv_tr, P2) == P
    assert apply_transform(m37, compose_transforms(tr, inv_tr)) == m37
    assert apply_transform(m37, IDENTITY_TRANSFORM) == m37
    # disc scales by u^-12, c4 by u^-4
    i1, i2 = compute_invariants(m37), compute_invariants(m2)
    assert i2.disc == i1.disc / tr.u**12
    assert i2.c4 == i1.c4 / tr.u**4


def test_minimal_model_pinned(m37, m11a1):
    big = WeierstrassModel(0, 0, 0, 0, 16)
    mm, tr = minimal_model(big)
    assert mm == WeierstrassModel(0, 0, 1, 0, 0)
    assert compute_invariants(big).disc == -110592
    assert compute_invariants(mm).disc == -27
    assert tr.u == 2  # disc ratio 2^-12

    assert minimal_model(m37) == (m37, IDENTITY_TRANSFORM)
    assert minimal_model(m11a1)[0] == m11a1  # delta = 5 < 12 forces minimality


def test_minimal_model_rational_input():
    # non-integral model equivalent to 37a1
    tr = ModelTransform(F(3, 2), F(1, 4), F(2, 3), F(5, 6))
    m37 = WeierstrassModel(0, 0, 1, -1, 0)
    scrambled = apply_transform(m37, tr)
    mm, back = minimal_model(scrambled)
    assert mm == m37
    assert apply_transform(scrambled, back) == m37


@settings(deadline=None, max_examples=30)
@given(st.integers(-8, 8), st.integers(-8, 8), st.integers(-8, 8), st.integers(-8, 8), st.integers(-8, 8))
def test_minimal_model_properties(a1, a2, a3, a4, a6):
    model = WeierstrassModel(a1, a2, a3, a4, a6)
    try:
        inv = compute_invariants(model)
    except SingularModel:
        return
    mm, tr = minimal_model(model)
    mi = compute_invariants(mm)
    assert mi.disc == inv.disc / tr.u**12
    assert tr.u.denominator == 1  # integral input: u is a positive integer
    assert tr.u >= 1
    assert mm.is_integral()
    assert int(mm.a1) in (0, 1) and int(mm.a2) in (-1, 0, 1) and int(mm.a3) in (0, 1)
    for p in {p for p, _ in __import__("ellheights.exactnum", fromlist=["factorize"]).factorize(int(inv.disc)).factors}:
        assert valuation(mi.disc, p) <= valuation(inv.disc, p)


def test_naive_height():
    assert naive_x_height(CurvePoint(2, 1)) == pytest.approx(math.log(2))
    assert naive_x_height(CurvePoint(F(-3, 4), 1)) == pytest.approx(math.log(4))
    assert naive_x_height(INFINITY) == 0.0
    P8 = CurvePoint(F(21, 25), F(-69, 125))
    assert naive_x_height(P8) == pytest.approx(math.log(25))


def test_sub_points(m37):
    P = CurvePoint(0, 0)
    Q = scalar_mul(m37, 3, P)
    assert sub_points(m37, Q, P) == scalar_mul(m37, 2, P)
