import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from subbessel.bessel_kernel import KernelParams
from subbessel.errors import DomainError, HypothesisError
from subbessel.envelopes import (
    comparability_check,
    regime_envelope,
    regime_index,
    sharp_envelope,
    three_g_ratio,
    weight_f,
)
from subbessel.subordinated import p_alpha1_closed

P11 = KernelParams(1.0, 1.0)
pos = st.floats(1e-3, 1e3)


def test_sharp_examples():
    for r in [1e-3, 0.5, 7.0]:
        assert sharp_envelope(KernelParams(0.0, 1.0), 1.0, r, r) == 1.0
    assert sharp_envelope(P11, 1.0, 1.0, 3.0) == pytest.approx(1 / 89, rel=1e-15)
    ratio = p_alpha1_closed(1.0, 1.0, 1.0, 1.0) / sharp_envelope(P11, 1.0, 1.0, 1.0)
    assert 0 < ratio < np.inf


def test_sharp_rejects_alpha2():
    with pytest.raises(DomainError):
        sharp_envelope(KernelParams(1.0, 2.0), 1.0, 1.0, 1.0)


@given(st.floats(-0.45, 3.0), st.floats(0.1, 1.9), pos, pos, pos)
def test_sharp_positive_finite(zeta, alpha, t, r, s):
    v = sharp_envelope(KernelParams(zeta, alpha), t, r, s)
    assert 0 < v < np.inf


def test_regime_examples():
    e = regime_envelope(P11, 0.5, 0.6)
    assert (e.value, e.regime_tag) == (1.0, "near-diag-small")
    e = regime_envelope(P11, 10.0, 10.5)
    assert e.value == pytest.approx(1 / 105, rel=1e-14) and e.regime_tag == "near-diag-large"
    e = regime_envelope(P11, 0.1, 5.0)
    assert e.value == pytest.approx(4.9**-4, rel=1e-14) and e.regime_tag == "off-diag-small"


def test_regime_tie_breaks():
    # on rs = 1 and (r-s)^2 = 1 the lower-indexed closure wins
    assert regime_index(0.5, 1.5) == 0    # (r-s)^2 = 1, rs < 1
    assert regime_index(1.0, 2.0) == 1    # (r-s)^2 = 1, rs > 1
    assert regime_index(0.25, 4.0) == 2   # rs = 1, (r-s)^2 > 1
    assert regime_index(1.0, 1.0) == 0
    assert regime_index(2.0, 2.0) == 1
    assert regime_index(0.1, 5.0) == 2
    assert regime_index(1.5, 10.0) == 3
    assert regime_index(4.0, 6.0) == 4


def test_weight_examples():
    assert weight_f(0.0, 4.0, 1.0, 1.0) == 1.0
    assert weight_f(1.0, 4.0, 1.0, 1.0) == pytest.approx((2 / 5) ** 2, rel=1e-15)
    assert weight_f(1.0, 1.0, 4.0, 1.0) == 1.0
    assert weight_f(1.0, 2.0, 2.0, 1.0) == 1.0   # tie takes the indicator branch
    with pytest.raises(HypothesisError):
        weight_f(-0.1, 1.0, 1.0, 1.0)


@given(st.floats(0.0, 3.0), pos, pos, pos)
def test_weight_smooth_comparable(zeta, r, s, z):
    q = weight_f(zeta, r, s, z, smooth=True) / weight_f(zeta, r, s, z)
    assert 2.0 ** (-2 * zeta) * (1 - 1e-12) <= q <= 1 + 1e-12


def test_three_g_examples():
    p0 = KernelParams(0.0, 1.0)
    assert p_alpha1_closed(0.0, 2.0, 1.0, 1.0) == pytest.approx(3 / (4 * math.pi), rel=1e-14)
    m, _ = three_g_ratio(p0, 1.0, 1.0, 1.0, 1.0, 1.0)
    assert m == pytest.approx(1.6, rel=1e-12)
    # zeta = 0: weights collapse, min_form is min of two kernels over a third
    r, s, z, t, tau = 0.3, 2.0, 1.1, 0.7, 1.9
    m, _ = three_g_ratio(p0, r, s, z, t, tau)
    want = min(p_alpha1_closed(0.0, t, r, z), p_alpha1_closed(0.0, tau, z, s)) / p_alpha1_closed(0.0, t + tau, r, s)
    assert m == pytest.approx(want, rel=1e-12)
    m, q = three_g_ratio(P11, 1.0, 1.0, 1.0, 1.0, 1.0)
    k1, k2 = p_alpha1_closed(1.0, 1.0, 1.0, 1.0), p_alpha1_closed(1.0, 2.0, 1.0, 1.0)
    assert m == pytest.approx((2 / 3) ** 2 * k1 / k2, rel=1e-12)
    assert 0 < q < np.inf


def test_three_g_needs_zeta_nonneg():
    with pytest.raises(HypothesisError):
        three_g_ratio(KernelParams(-0.2, 1.0), 1.0, 1.0, 1.0, 1.0, 1.0)


def test_comparability_examples():
    assert comparability_check("1-upper", KernelParams(0.5, 1.0), (1.0, 0.3, 2.0)) == pytest.approx(1.0, rel=1e-14)
    v = comparability_check("2c", P11, (1.0, 0.1, 10.0))
    assert v == pytest.approx(p_alpha1_closed(1.0, 1.0, 0.1, 10.0) * 1e3, rel=1e-12)
    v = comparability_check("5", P11, (1.0, 1.0, 1.2, 3.0))
    assert v == pytest.approx(p_alpha1_closed(1.0, 1.0, 3.0, 1.2) / p_alpha1_closed(1.0, 1.0, 1.0, 1.2), rel=1e-12)


@pytest.mark.parametrize(
    "item,point,needle",
    [("2c", (1.0, 6.0, 10.0), "z <= s/2"), ("5", (1.0, 1.0, 1.2, 1.25), "|z - s|"), ("4", (2.0, 1.0), "r <= s"), ("3", (2.0, 0.1, 1.0), "tau <= 1")],
)
def test_comparability_hypothesis_errors(item, point, needle):
    with pytest.raises(HypothesisError, match=None) as e:
        comparability_check(item, P11, point)
    assert needle in str(e.value)


def test_comparability_unknown_item():
    with pytest.raises(DomainError):
        comparability_check("9", P11, (1.0, 1.0, 1.0))
