import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from subbessel.bessel_kernel import KernelParams
from subbessel.errors import DomainError
from subbessel.mc import CHUNK, mc_kernel, mc_laplace, merge_stats, sample_positive_stable
from subbessel.subordinated import p_alpha

N = 10**6


def test_laplace_example():
    est = mc_laplace(0.5, 1.0, N, 7)
    assert abs(est.z_score(math.exp(-1.0))) <= 3


@pytest.mark.parametrize("beta,lam", [(0.25, 2.0), (0.75, 0.5), (0.9, 3.0)])
def test_laplace_other_indices(beta, lam):
    est = mc_laplace(beta, lam, 2 * 10**5, 3)
    assert abs(est.z_score(math.exp(-lam**beta))) <= 4


@pytest.mark.parametrize("zeta,want", [(0.0, 6 / (5 * math.pi)), (1.0, 4 / (5 * math.pi))])
def test_kernel_closed_form_examples(zeta, want):
    est = mc_kernel(KernelParams(zeta, 1.0), 1.0, 1.0, 1.0, N, 7)
    assert est.status == "ok"
    assert abs(est.z_score(want)) <= 3


def test_kernel_quadrature_example():
    p = KernelParams(1.0, 1.5)
    est = mc_kernel(p, 1.0, 2.0, 0.3, N, 7)
    assert abs(est.z_score(p_alpha(p, 1.0, 2.0, 0.3))) <= 3


def test_deterministic():
    a = mc_kernel(KernelParams(0.5, 1.2), 0.7, 1.0, 2.0, 5000, 11)
    b = mc_kernel(KernelParams(0.5, 1.2), 0.7, 1.0, 2.0, 5000, 11)
    assert a == b


def test_chunks_independent_of_n():
    a = sample_positive_stable(0.6, CHUNK, 5)
    b = sample_positive_stable(0.6, 2 * CHUNK + 17, 5)
    assert np.array_equal(a, b[:CHUNK])
    assert np.all(b > 0)


def test_single_sample():
    est = mc_kernel(KernelParams(0.0, 1.0), 1.0, 1.0, 1.0, 1, 7)
    assert est.n == 1 and est.std_error == 0.0
    assert est.status == "insufficient-precision"
    with pytest.raises(DomainError):
        sample_positive_stable(0.5, 0, 1)


@given(st.lists(st.floats(-1e3, 1e3), min_size=1, max_size=40), st.integers(0, 40))
def test_merge_stats_exact(xs, cut):
    x = np.array(xs)
    cut = min(cut, x.size)

    def stats(v):
        if v.size == 0:
            return 0, 0.0, 0.0
        m = float(v.mean())
        return v.size, m, float(((v - m) ** 2).sum())

    n, m, q = merge_stats(stats(x[:cut]), stats(x[cut:]))
    assert n == x.size
    assert m == pytest.approx(x.mean(), rel=1e-12, abs=1e-9)
    assert q == pytest.approx(((x - x.mean()) ** 2).sum(), rel=1e-9, abs=1e-6)
