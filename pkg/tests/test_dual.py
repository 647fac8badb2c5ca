import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from adev.dual import (
    Dual, add_d, cos_d, div_d, exp_d, log_d, mul_d, normal_cdf, normal_cdf_d, normal_pdf,
    normal_pdf_d, pow_d, sin_d, sub_d,
)
from adev.errors import AdevRuntimeError


def test_add():
    assert add_d((1, 2), (3, 4)) == Dual(4, 6)


def test_mul():
    assert mul_d((3, 1), (5, 0)) == Dual(15, 5)


def test_pow():
    assert pow_d(Dual(2.0, 1.0), 3) == Dual(8.0, 12.0)


def test_pow_zero_is_one_with_zero_tangent():
    assert pow_d(Dual(2.0, 1.0), 0) == Dual(1.0, 0.0)


def test_exp_log():
    assert exp_d((0.0, 1.0)) == Dual(1.0, 1.0)
    y = log_d((2.0, 1.0))
    assert y.primal == pytest.approx(math.log(2.0), abs=1e-15)
    assert y.tangent == 0.5


def test_domain_errors():
    with pytest.raises(AdevRuntimeError):
        log_d((0.0, 1.0))
    with pytest.raises(AdevRuntimeError):
        div_d((1.0, 0.0), (0.0, 1.0))
    with pytest.raises(AdevRuntimeError):
        exp_d((1e6, 0.0))


def test_normal_helpers():
    assert normal_pdf(0.0) == pytest.approx(1 / math.sqrt(2 * math.pi))
    assert normal_cdf(0.0) == 0.5
    assert normal_cdf_d((0.0, 2.0)).tangent == pytest.approx(2 * normal_pdf(0.0))


H = 1e-4
TOL = 1e-5


def fd(f, x):
    return (f(x + H) - f(x - H)) / (2 * H)


points = st.floats(-3.0, 3.0, allow_nan=False)
# bounded away from 0 so the O(h²) error of the central difference stays below TOL
positive = st.floats(0.5, 5.0, allow_nan=False)


@settings(max_examples=100, deadline=None)
@given(points, points)
def test_binary_ops_match_finite_differences(x, y):
    for op in (add_d, sub_d, mul_d):
        assert op((x, 1.0), (y, 0.0)).tangent == pytest.approx(
            fd(lambda t: op((t, 0.0), (y, 0.0))[0], x), abs=TOL)
        assert op((x, 0.0), (y, 1.0)).tangent == pytest.approx(
            fd(lambda t: op((x, 0.0), (t, 0.0))[0], y), abs=TOL)


@settings(max_examples=100, deadline=None)
@given(points, positive)
def test_division_matches_finite_differences(x, y):
    assert div_d((x, 1.0), (y, 0.0)).tangent == pytest.approx(fd(lambda t: t / y, x), abs=TOL)
    assert div_d((x, 0.0), (y, 1.0)).tangent == pytest.approx(fd(lambda t: x / t, y), abs=TOL)


@settings(max_examples=100, deadline=None)
@given(points)
def test_unary_ops_match_finite_differences(x):
    for op, f in ((exp_d, math.exp), (sin_d, math.sin), (cos_d, math.cos)):
        assert op((x, 1.0)).tangent == pytest.approx(fd(f, x), abs=TOL)
    for n in range(5):
        assert pow_d((x, 1.0), n).tangent == pytest.approx(fd(lambda t: t ** n, x), abs=TOL)


@settings(max_examples=100, deadline=None)
@given(positive)
def test_log_matches_finite_differences(x):
    assert log_d((x, 1.0)).tangent == pytest.approx(fd(math.log, x), abs=TOL)


@settings(max_examples=100, deadline=None)
@given(points, points, positive)
def test_normal_density_matches_finite_differences(x, mu, sigma):
    def dens(a, b, c):
        return normal_pdf(a, b, c)

    assert normal_pdf_d((x, 0.0), (mu, 1.0), (sigma, 0.0)).tangent == pytest.approx(
        fd(lambda t: dens(x, t, sigma), mu), abs=TOL)
    assert normal_pdf_d((x, 0.0), (mu, 0.0), (sigma, 1.0)).tangent == pytest.approx(
        fd(lambda t: dens(x, mu, t), sigma), abs=TOL)
