from __future__ import annotations

import math

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from b1classes.errors import DomainError
from b1classes.logradius import LogRadius, parse_radius, radius_to_str


def test_float_round_trip():
    r = LogRadius.from_float(0.125)
    assert r.ell(1) == pytest.approx(math.log(8.0))
    assert r.to_float() == pytest.approx(0.125, rel=1e-15)
    assert r.ell(2) == pytest.approx(math.log(math.log(8.0)))


def test_deep_radius_against_mpmath():
    mpmath.mp.dps = 50
    r = LogRadius(4, 3.0)
    ell3 = mpmath.e ** 3
    ell2 = mpmath.e ** ell3
    assert r.ell(3) == pytest.approx(float(ell3), rel=1e-14)
    assert r.ell(2) == pytest.approx(float(ell2), rel=1e-13)
    assert r.to_float() == 0.0
    assert r.log_r == -math.inf or r.log_r < -1e8


def test_ordering_and_shift():
    a, b = LogRadius.from_float(0.1), LogRadius.from_float(0.01)
    assert b < a
    assert a.scale(0.1) == b
    mid = LogRadius(2, 5.0)
    assert mid.shift(5.0) < mid
    assert mid.shift(5.0).ell(1) == pytest.approx(math.exp(5.0) + 5.0, rel=1e-15)
    deep = LogRadius(3, 10.0)  # ell1 overflows, so a finite shift is absorbed
    assert deep.shift(5.0) == deep
    with pytest.raises(DomainError):
        LogRadius(0, 1.0)
    with pytest.raises(DomainError):
        LogRadius.from_float(0.0)


def test_parse_and_format():
    assert parse_radius("0.25") == 0.25
    r = parse_radius("ell4=30")
    assert isinstance(r, LogRadius)
    assert parse_radius(radius_to_str(r)) == r
    assert radius_to_str(LogRadius.from_float(0.5)) == "0.5"
    with pytest.raises(DomainError):
        parse_radius("half")


@settings(max_examples=200, deadline=None)
@given(st.floats(1e-300, 0.9), st.floats(-20.0, 20.0))
def test_shift_matches_float_arithmetic(r, d):
    lr = LogRadius.from_float(r)
    shifted = lr.shift(d)
    assert shifted.ell(1) == pytest.approx(-math.log(r) + d, rel=1e-14, abs=1e-14)
