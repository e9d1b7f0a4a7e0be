import io
import math

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from cnfxor.bounds import (OutOfValidity, beta, beta_residual, curve, lambda_lower,
                           log_inner_ratio, lower_slope, r_validity_max, s_lower, s_upper,
                           upper_slope)
from cnfxor.formula import InvalidParams

mpmath.mp.dps = 50
KS = range(3, 17)


def mp_beta(k):
    # smallest positive root of b(2-b)^(k-1) = 1, via bracketed solve on (0, 2/k]
    f = lambda b: b * (2 - b) ** (k - 1) - 1
    return mpmath.findroot(f, (mpmath.mpf(0), mpmath.mpf(2) / k), solver="anderson")


def mp_ratio(k):
    b = mp_beta(k)
    return ((1 - b / 2) ** k - mpmath.mpf(2) ** -k) ** 2 / (1 - b) ** k


def test_beta_k3_closed_form():
    assert abs(beta(3) - (3 - math.sqrt(5)) / 2) < 1e-12
    b = (3 - mpmath.sqrt(5)) / 2
    assert abs(b * (2 - b) ** 2 - 1) < mpmath.mpf(10) ** -40


def test_beta_k10_near_asymptote():
    b = beta(10)
    assert abs(b - 0.0019705) < 1e-6
    assert abs(b / 2 ** -9 - 1) < 0.01


@pytest.mark.parametrize("k", KS)
def test_beta_matches_mpmath(k):
    assert abs(beta(k) - float(mp_beta(k))) < 1e-12
    assert beta_residual(k) < 1e-12
    assert 0 < beta(k) <= 2 / k


def test_beta_rejects_small_k():
    with pytest.raises(InvalidParams):
        beta(2)


@pytest.mark.parametrize("k", KS)
def test_inner_ratio_matches_mpmath(k):
    assert abs(math.exp(log_inner_ratio(k)) - float(mp_ratio(k))) < 1e-12
    assert log_inner_ratio(k) < 0


def test_lambda_k3():
    assert lambda_lower(3, 0) == 4
    assert abs(lambda_lower(3, 1) - 4 * float(mp_ratio(3))) < 1e-12
    assert abs(float(mp_ratio(3)) - 0.6931356) < 1e-6
    vals = [lambda_lower(3, r / 4) for r in range(12)]
    assert all(a > b for a, b in zip(vals, vals[1:]))


@pytest.mark.parametrize("k", KS)
def test_curves_meet_at_one(k):
    assert abs(s_lower(k, 0) - 1) < 1e-12 and abs(s_upper(k, 0) - 1) < 1e-12


def test_k3_slopes():
    assert abs(lower_slope(3) - float(mpmath.log(mp_ratio(3), 2) / 2)) < 1e-12
    assert abs(lower_slope(3) - (-0.26444)) < 1e-4
    assert abs(upper_slope(3) - math.log2(7 / 8)) < 1e-15
    assert abs(upper_slope(3) - (-0.1926450)) < 1e-7
    assert abs(s_upper(3, 2.0) - (1 - 2 * 0.19264507794239588)) < 1e-12


def test_validity_limit_k3():
    assert abs(r_validity_max(3) - 2.6589) < 1e-4
    expect = 8 * mpmath.log(2) - ((4 * mpmath.log(2) + 3) / 2)
    assert abs(r_validity_max(3) - float(expect)) < 1e-12


def test_lower_matches_log_of_lambda():
    for r in (0.3, 1.0, 2.2):
        assert abs(s_lower(3, r) - 0.5 * math.log2(lambda_lower(3, r))) < 1e-12


def test_out_of_validity():
    with pytest.raises(OutOfValidity):
        s_lower(3, 2.7)
    assert s_lower(3, 2.7, extrapolate=True) == pytest.approx(1 - 2.7 * 0.2643952, abs=1e-6)


@pytest.mark.parametrize("k", KS)
def test_sandwich_200_points(k):
    rmax = r_validity_max(k)
    for i in range(200):
        r = rmax * i / 200
        assert s_lower(k, r) <= s_upper(k, r)


@pytest.mark.parametrize("k", [3, 8, 16])
def test_affine_collinearity(k):
    r0, r1, r2 = 0.0, 0.7, 1.9
    for fn in (lambda r: s_lower(k, r), lambda r: s_upper(k, r)):
        slope_a = (fn(r1) - fn(r0)) / (r1 - r0)
        slope_b = (fn(r2) - fn(r1)) / (r2 - r1)
        assert abs(slope_a - slope_b) < 1e-10


def test_curve_k3_grid():
    bc = curve(3, [0, 0.5, 1.0, 1.5, 2.0, 2.5])
    assert all(lo <= hi for _, lo, hi, _ in bc.samples)
    assert bc.beta_k == beta(3)


def test_curve_single_point_csv():
    bc = curve(3, [0])
    assert bc.samples == [(0, 1.0, 1.0, False)]
    buf = io.StringIO()
    bc.write_csv(buf)
    assert buf.getvalue() == "r,s_lower,s_upper,extrapolated\n0,1,1,false\n"


def test_curve_k8_within_validity():
    rmax = r_validity_max(8)
    bc = curve(8, [rmax * i / 10 for i in range(10)])
    assert len(bc.samples) == 10


def test_curve_extrapolated_rows_flagged():
    bc = curve(3, [2.0, 3.0], extrapolate=True)
    assert [row[3] for row in bc.samples] == [False, True]
    with pytest.raises(OutOfValidity):
        curve(3, [2.0, 3.0])


def test_curve_unsorted():
    with pytest.raises(InvalidParams):
        curve(3, [1.0, 0.5])


@settings(max_examples=200, deadline=None)
@given(st.integers(3, 16), st.floats(0, 1))
def test_sandwich_property(k, frac):
    r = frac * r_validity_max(k) * 0.999999
    assert s_lower(k, r) <= s_upper(k, r) <= 1
