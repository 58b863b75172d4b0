import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, strategies as st

from oracles import p2_mp
from subbessel.bessel_kernel import (
    KernelParams,
    chapman_residual,
    fit_gaussian_envelope,
    log_p2,
    log_p2_fast,
    normalization_residual,
    p2,
    p2_closed_zeta1,
    p2_gaussian_envelope,
)
from subbessel.errors import DomainError

mp.mp.dps = 30
pos = st.floats(1e-3, 1e3)


def test_zeta1_closed_examples():
    # (rs)^-1 (4 pi t)^-1/2 (exp(-(r-s)^2/4t) - exp(-(r+s)^2/4t)) at (1, 1, 1)
    assert p2(1.0, 1.0, 1.0, 1.0) == pytest.approx((1 - math.exp(-1)) / (2 * math.sqrt(math.pi)), rel=1e-14)
    assert p2(1.0, 1.0, 1.0, 1.0) == pytest.approx(0.1783179, rel=1e-7)
    want = (2 * math.pi) ** -0.5 / 6 * (math.exp(-0.5) - math.exp(-12.5))
    assert p2(1.0, 0.5, 2.0, 3.0) == pytest.approx(want, rel=1e-14)
    assert p2_closed_zeta1(0.5, 2.0, 3.0) == pytest.approx(want, rel=1e-14)


def test_vs_mpmath_example():
    assert p2(0.3, 1.0, 1.0, 2.0) == pytest.approx(float(p2_mp(0.3, 1, 1, 2)), rel=1e-13)


@pytest.mark.parametrize("zeta", [-0.4, 0.0, 0.3, 1.0, 2.5])
def test_vs_mpmath_grid(zeta):
    for t in [1e-2, 1.0, 1e2]:
        for r in [1e-3, 0.5, 3.0, 1e2]:
            for s in [2e-3, 0.7, 3.0]:
                want = mp.log(p2_mp(zeta, t, r, s))
                got = log_p2(zeta, t, r, s)
                assert abs(got - float(want)) <= 1e-13 * max(1.0, abs(float(want)))


@given(st.floats(-0.45, 5.0), pos, pos, pos)
def test_symmetry_exact(zeta, t, r, s):
    assert log_p2(zeta, t, r, s) == log_p2(zeta, t, s, r)


@given(st.floats(-0.45, 5.0), st.floats(1e-2, 1e2), pos, pos)
def test_fast_path_agrees(zeta, t, r, s):
    a = log_p2(zeta, t, r, s)
    b = float(log_p2_fast(zeta, t, r, s))
    assert b == pytest.approx(a, rel=1e-12, abs=1e-12)


def test_validation():
    with pytest.raises(DomainError):
        KernelParams(-0.5)
    with pytest.raises(DomainError):
        KernelParams(0.0, 2.5)
    with pytest.raises(DomainError):
        p2(-0.6, 1.0, 1.0, 1.0)
    with pytest.raises(DomainError):
        p2(0.0, 0.0, 1.0, 1.0)


def test_gaussian_envelope_examples():
    assert p2_gaussian_envelope(0.0, 1.0, 2.0, 2.0, c_exp=7.0) == 1.0
    assert p2_gaussian_envelope(1.0, 1.0, 1.0, 1.0) == pytest.approx(0.5)
    assert p2_gaussian_envelope(1.0, 4.0, 1.0, 1.0, form="factored-rate") == pytest.approx(1 / 8)
    with pytest.raises(DomainError):
        p2_gaussian_envelope(1.0, 1.0, 1.0, 1.0, form="other")


@pytest.mark.parametrize("form", ["product-rate", "factored-rate"])
@pytest.mark.parametrize("zeta", [-0.4, 0.0, 0.5, 1.0, 3.0])
def test_envelope_fit_sandwich(zeta, form):
    g = np.logspace(-3, 3, 17)
    t, r, s = (x.ravel() for x in np.meshgrid(np.logspace(-2, 2, 9), g, g, indexing="ij"))
    fit = fit_gaussian_envelope(zeta, t, r, s, form)
    lo, hi = fit.bounds(t, r, s)
    val = p2(zeta, t, r, s)
    assert np.all(lo <= val * (1 + 1e-12)) and np.all(val <= hi * (1 + 1e-12))
    assert 0 < fit.A_lo and np.isfinite(fit.A_hi)


def test_normalization_examples():
    assert normalization_residual(1.0, 1.0, 1.0) <= 1e-10
    assert normalization_residual(0.2, 0.01, 5.0) <= 1e-7
    assert normalization_residual(3.0, 10.0, 0.001) <= 1e-7


def test_chapman_examples():
    assert chapman_residual(1.0, 0.5, 0.5, 1.0, 1.0) <= 1e-8
    assert chapman_residual(0.7, 1.0, 2.0, 0.5, 3.0) <= 1e-6
    assert chapman_residual(0.0, 1.0, 1.0, 0.1, 0.1) <= 1e-6


@given(st.floats(-0.45, 4.0), st.floats(1e-2, 1e2), st.floats(1e-2, 1e2))
def test_normalization_property(zeta, t, r):
    assert normalization_residual(zeta, t, r) <= 1e-9
