"""Jet arithmetic: exact examples, ring axioms, and a finite-difference oracle."""

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import biconserve.jets as J
from biconserve.errors import (
    BasePointMismatchError,
    DomainError,
    OrderOverflowError,
    SingularJetError,
)
from _oracles import richardson_partial


def test_square_of_coordinate():
    s = J.jet_variable("s", 3.0)
    sq = s * s
    assert sq.value == 9.0
    assert sq.partial(1, 0) == 6.0
    assert sq.partial(2, 0) == 2.0
    assert sq.partial(3, 0) == 0.0
    assert sq.partial(0, 1) == 0.0


def test_reciprocal_partials():
    # 1/(1+s) at s=0: raw partials are n! * (-1)^n
    s = J.jet_variable("s", 0.0)
    r = 1.0 / (1.0 + s)
    assert r.value == pytest.approx(1.0, abs=1e-15)
    assert r.partial(1, 0) == pytest.approx(-1.0, abs=1e-15)
    assert r.partial(2, 0) == pytest.approx(2.0, abs=1e-15)
    assert r.partial(3, 0) == pytest.approx(-6.0, abs=1e-15)


def test_rational_power_derivative():
    # d/ds s^{3/4} at s=16 is (3/4) 16^{-1/4} = 0.375
    s = J.jet_variable("s", 16.0)
    p = J.powr(s, 3, 4)
    assert p.value == pytest.approx(8.0, rel=1e-15)
    assert p.partial(1, 0) == pytest.approx(0.375, rel=1e-14)


def test_sin_cos_partials():
    s = J.jet_variable("s", 0.7)
    sn, cs = J.sin(s), J.cos(s)
    assert sn.partial(1, 0) == pytest.approx(math.cos(0.7), rel=1e-15)
    assert sn.partial(2, 0) == pytest.approx(-math.sin(0.7), rel=1e-15)
    assert sn.partial(3, 0) == pytest.approx(-math.cos(0.7), rel=1e-15)
    assert (sn * sn + cs * cs).partial(2, 0) == pytest.approx(0.0, abs=1e-14)


def test_mixed_partial_of_product():
    s = J.jet_variable("s", 2.0, other=5.0)
    t = J.jet_variable("t", 5.0, other=2.0)
    prod = (s * s) * t
    assert prod.base == (2.0, 5.0)
    assert prod.partial(1, 1) == pytest.approx(4.0)
    assert prod.partial(2, 1) == pytest.approx(2.0)
    assert prod.partial(0, 2) == 0.0


def _example_field(s, t):
    return math.sin(1.3 * s) * math.exp(0.2 * t) + s * s * t


def _example_jet(s, t):
    base = (s, t)
    sj = J.Jet.variable("s", base)
    tj = J.Jet.variable("t", base)
    # exp via composition through cos/sin is unavailable; build exp(0.2 t)
    # from its derivatives instead
    v = math.exp(0.2 * t)
    ex = J._compose(tj, [v, 0.2 * v, 0.04 * v, 0.008 * v])
    return J.sin(sj * 1.3) * ex + sj * sj * tj


@pytest.mark.parametrize("i,j", [(i, j) for i in range(4) for j in range(4)
                                 if i + j <= 3])
def test_against_richardson_differences(i, j):
    s0, t0 = 0.8, -0.4
    jet = _example_jet(s0, t0)
    fd = richardson_partial(_example_field, s0, t0, i, j)
    assert jet.partial(i, j) == pytest.approx(fd, rel=2e-6, abs=2e-6)


def test_derivative_shifts_indices():
    jet = _example_jet(0.3, 0.9)
    ds = jet.derivative("s")
    assert ds.degree == 2
    assert ds.value == jet.partial(1, 0)
    assert ds.partial(1, 1) == jet.partial(2, 1)
    with pytest.raises(OrderOverflowError):
        ds.partial(3, 0)


def test_truncation_is_prefix():
    jet = _example_jet(0.3, 0.9)
    tr = jet.truncate(1)
    assert tr.coeffs == jet.coeffs[:3]
    with pytest.raises(OrderOverflowError):
        tr.truncate(2)


def test_base_point_mismatch_rejected():
    a = J.jet_variable("s", 1.0)
    b = J.jet_variable("s", 2.0)
    with pytest.raises(BasePointMismatchError):
        _ = a + b


def test_division_by_zero_value_jet():
    z = J.jet_variable("s", 0.0)
    with pytest.raises(SingularJetError):
        _ = 1.0 / z


def test_fractional_power_needs_positive_value():
    z = J.Jet.constant(-2.0, (0.0, 0.0))
    with pytest.raises(DomainError):
        J.sqrt(z)
    # integer powers are fine for any value
    assert J.powr(z, 3).value == -8.0


def test_integrate_s_inverts_derivative():
    s = J.jet_variable("s", 1.7, other=0.5)
    g = (s * s).truncate(2)
    anti = J.integrate_s(g, 5.0)
    assert anti.value == 5.0
    assert anti.derivative("s").coeffs == pytest.approx(g.coeffs)
    t = J.jet_variable("t", 0.5, other=1.7)
    with pytest.raises(DomainError):
        J.integrate_s((s * t).truncate(2), 0.0)


def test_jet_func_dispatch():
    s = J.jet_variable("s", 4.0)
    assert J.jet_func(s, "sqrt").value == 2.0
    assert J.jet_func(s, "pow_rational", 3, 2).value == pytest.approx(8.0)
    assert J.extract_partial(J.jet_func(s, "sin"), 1, 0) == pytest.approx(
        math.cos(4.0))
    with pytest.raises(ValueError):
        J.jet_func(s, "exp")


coeff = st.floats(min_value=-10, max_value=10, allow_nan=False)
jets = st.lists(coeff, min_size=10, max_size=10).map(
    lambda c: J.Jet(c, (0.5, -0.25)))


@settings(max_examples=100, deadline=None)
@given(jets, jets, jets)
def test_ring_axioms(a, b, c):
    left = ((a + b) * c).coeffs
    right = (a * c + b * c).coeffs
    scale = 1.0 + max(abs(x) for x in left + right)
    for x, y in zip(left, right):
        assert abs(x - y) < 1e-9 * scale
    assoc_l = ((a * b) * c).coeffs
    assoc_r = (a * (b * c)).coeffs
    scale = 1.0 + max(abs(x) for x in assoc_l + assoc_r)
    for x, y in zip(assoc_l, assoc_r):
        assert abs(x - y) < 1e-9 * scale


@settings(max_examples=100, deadline=None)
@given(jets)
def test_multiplication_commutes_with_truncation(a):
    b = a * a
    low = (a.truncate(2) * a.truncate(2)).coeffs
    assert b.truncate(2).coeffs == pytest.approx(low)


@settings(max_examples=100, deadline=None)
@given(jets)
def test_reciprocal_roundtrip(a):
    if abs(a.value) < 1e-3:
        return
    r = (1.0 / a) * a
    assert r.value == pytest.approx(1.0, rel=1e-9)
    for k in range(1, 10):
        assert abs(r.coeffs[k]) < 1e-6 * (1.0 + max(abs(x) for x in a.coeffs)) ** 3
