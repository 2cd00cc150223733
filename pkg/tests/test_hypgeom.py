import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wpsystole import hypgeom as hg
from wpsystole.errors import ContractViolation, DomainError
from wpsystole.volumes import VolumeTable

mpmath.mp.dps = 400
length = st.floats(0, 60, allow_nan=False)


def f8_ref(x, y, z):
    x, y, z = map(mpmath.mpf, (x, y, z))
    return 2 * mpmath.acosh(mpmath.cosh(z / 2) + 2 * mpmath.cosh(x / 2) * mpmath.cosh(y / 2))


def D_ref(x, y, z):
    x, y, z = map(mpmath.mpf, (x, y, z))
    e = mpmath.exp
    return 2 * mpmath.log((e(x / 2) + e((y + z) / 2)) / (e(-x / 2) + e((y + z) / 2)))


def R_ref(x, y, z):
    x, y, z = map(mpmath.mpf, (x, y, z))
    c = mpmath.cosh
    return x - mpmath.log((c(y / 2) + c((x + z) / 2)) / (c(y / 2) + c((x - z) / 2)))


def test_figure_eight_at_zero():
    assert abs(hg.figure_eight_length(0, 0, 0) - 2 * math.acosh(3)) <= 1e-12
    assert hg.F8_MIN == 2 * math.acosh(3)


@settings(max_examples=200, deadline=None)
@given(length, length, length)
def test_closed_forms_match_reference(x, y, z):
    assert hg.figure_eight_length(x, y, z) == pytest.approx(float(f8_ref(x, y, z)), rel=1e-13)
    assert hg.mcshane_D(x, y, z) == pytest.approx(float(D_ref(x, y, z)), rel=1e-11, abs=1e-300)
    assert hg.mcshane_R(x, y, z) == pytest.approx(float(R_ref(x, y, z)), rel=1e-11, abs=1e-300)


@settings(max_examples=200, deadline=None)
@given(length, length, length, st.floats(0.01, 5))
def test_monotonicity(x, y, z, d):
    f = hg.figure_eight_length
    assert f(x + d, y, z) >= f(x, y, z) and f(x, y + d, z) >= f(x, y, z) and f(x, y, z + d) >= f(x, y, z)
    D, R = hg.mcshane_D, hg.mcshane_R
    up, down = 1 + 1e-12, 1 - 1e-12
    assert D(x + d, y, z) >= D(x, y, z) * down
    assert D(x, y + d, z) <= D(x, y, z) * up and D(x, y, z + d) <= D(x, y, z) * up
    assert R(x, y, z + d) <= R(x, y, z) * up and R(x, y + d, z) >= R(x, y, z) * down


@settings(max_examples=200, deadline=None)
@given(st.floats(1e-3, 20), st.floats(1e-3, 20), st.floats(1e-3, 20))
def test_kernel_inequalities(x, y, z):
    assert hg.figure_eight_length(x, y, z) > (x + y + z) / 2
    assert hg.figure_eight_length(x, y, z) > hg.F8_MIN
    assert hg.mcshane_D(x, y, z) > 0 and hg.mcshane_R(x, y, z) > 0
    assert x / hg.mcshane_D(x, y, z) <= hg.mcshane_bound_D(x, y + z)
    assert x / hg.mcshane_R(x, y, z) <= hg.mcshane_bound_R(x, y, z)


def test_large_arguments_stay_finite():
    for args in [(800.0, 10.0, 5.0), (5.0, 800.0, 900.0), (1000.0, 1000.0, 1000.0)]:
        for fn in (hg.figure_eight_length, hg.mcshane_D, hg.mcshane_R):
            v = fn(*args)
            assert np.isfinite(v) and v >= 0
    # a tiny R with a long third boundary is not lost to cancellation
    assert hg.mcshane_R(1.0, 0.0, 700.0) == pytest.approx(float(R_ref(1.0, 0.0, 700.0)), rel=1e-10)
    assert hg.figure_eight_length(800.0, 0.0, 0.0) == pytest.approx(float(f8_ref(800, 0, 0)), rel=1e-14)


def test_vectorized():
    x = np.linspace(0, 10, 7)
    out = hg.figure_eight_length(x, x, x)
    assert out.shape == (7,)
    assert np.allclose(out, [float(f8_ref(v, v, v)) for v in x], rtol=1e-13)


def test_slack_and_inverse():
    for L in (0.0, 1.0, 7.5, 40.0):
        s = hg.f8_slack(L)
        assert s == pytest.approx(hg.figure_eight_length(L, 0.0, L), rel=1e-13)
        assert s >= hg.figure_eight_length(L / 2, L / 2, L)
        # arccosh is square-root conditioned at 1, hence the looser tolerance at L = 0
        assert hg.f8_slack_inverse(s) == pytest.approx(L, abs=1e-9 if L else 1e-6)
    assert math.isnan(hg.f8_slack_inverse(1.0))


def test_domain_errors():
    with pytest.raises(DomainError):
        hg.figure_eight_length(-1.0, 0, 0)
    with pytest.raises(DomainError):
        hg.mcshane_D(np.nan, 0, 0)
    with pytest.raises(DomainError):
        hg.count_bound_primitive(1, 3.0)
    with pytest.raises(ContractViolation):
        hg.count_bound_filling(2, 0.6, 1, 3.0, 1.0)


def test_counting_bounds():
    assert hg.count_bound_primitive(3, 1.0) == pytest.approx(2 * math.exp(8))
    v = hg.count_bound_filling(3, 0.1, 2, 4.0, 2.0, c_const=2.0)
    assert v == pytest.approx(2.0 * 25 * math.exp(4.0 - 0.9))
    a = hg.count_bound_S12_single(2.0, 3.0, 5.0)
    assert a == pytest.approx(min(2 / hg.mcshane_R(2, 3, 5), 3 / hg.mcshane_R(3, 2, 5)))
    assert hg.count_bound_S04(1.0, 2.0, 3.0, 4.0, 6.0) > 0
    assert hg.count_bound_S12_pairs(1.0, 2.0, 6.0) > 0


@pytest.mark.parametrize("b", [0.5, 1.0, 2.0, 5.0])
def test_torus_mcshane_matches_volume(b):
    V11 = VolumeTable().volume_polynomial(1, 1)
    lhs = b * float(V11.evaluate_numeric([b]))
    rhs, err = hg.torus_mcshane_integral(b)
    assert abs(lhs - rhs) / lhs <= 1e-8
    assert err < 1e-8 * lhs


def test_slack_asymptotics_and_maximality():
    for L in (30.0, 50.0):
        assert hg.f8_slack(L) - L == pytest.approx(2 * math.log(3), abs=1e-9)
    Ls = np.linspace(1.0, 200.0, 2000)
    assert np.all(hg.f8_slack(Ls) - Ls <= 2 * math.log(3) + 1)
    assert hg.f8_slack(0.0) == pytest.approx(hg.F8_MIN, abs=1e-15)
    for L in (4.0, 9.0, 15.0):
        a = np.linspace(0, L, 41)
        assert np.all(hg.f8_slack(L) >= hg.figure_eight_length(a, L - a, L) - 1e-12)
        assert np.all(hg.f8_slack(L) >= hg.figure_eight_length(a, L - a, a) - 1e-12)
