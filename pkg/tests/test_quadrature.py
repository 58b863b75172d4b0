import math

import numpy as np
import pytest

from subbessel.errors import QuadratureError
from subbessel.quadrature import QuadratureConfig, adaptive_gk, tanh_sinh_levels, tanh_sinh_nodes


def test_gk_polynomial_exact():
    res = adaptive_gk(lambda x: x**5 - 3 * x**2, [0.0, 2.0])
    assert res.value == pytest.approx(64 / 6 - 8, rel=1e-14)


def test_gk_peaked():
    res = adaptive_gk(lambda x: 1.0 / (1e-4 + x * x), [-1.0, 0.0, 1.0], rel_tol=1e-12)
    assert res.value == pytest.approx(2 * math.atan(1 / 1e-2) / 1e-2, rel=1e-11)


def test_gk_nonfinite_raises():
    with pytest.raises(QuadratureError):
        adaptive_gk(lambda x: np.full_like(x, np.nan), [0.0, 1.0])


def test_gk_budget():
    with pytest.raises(QuadratureError):
        adaptive_gk(lambda x: np.sin(1.0 / (x + 1e-9)), [0.0, 1.0], rel_tol=1e-14, max_panels=8)


def test_config_validation():
    with pytest.raises(ValueError):
        QuadratureConfig(rel_tol=0.0)


def test_tanh_sinh_nodes():
    for level in range(0, 5):
        left, right, w = tanh_sinh_nodes(level)
        assert np.allclose(left + right, 1.0, atol=1e-15)
        assert np.all(w > 0)
        assert not left.flags.writeable and not w.flags.writeable
    assert tanh_sinh_nodes(3) is tanh_sinh_nodes(3)
    assert tanh_sinh_levels(4096) >= 1
