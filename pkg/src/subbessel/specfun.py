"""Scaled special functions: log-Gamma, e^{-z} I_nu(z) and the regularized 2F1.

Everything here works on numpy arrays. The Bessel function is only ever
produced in exponentially scaled form (optionally as its logarithm), so the
heat-kernel formulas never see an overflowing intermediate.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import digamma, gammaln, rgamma

from .errors import DomainError

# Hankel expansion is used for z >= _hankel_threshold(nu); below it the power
# series. The threshold keeps the smallest Hankel term under 1e-17.
_HANKEL_BASE = 25.0
_HANKEL_NU2 = 1.5
_SERIES_EPS = 1e-17
_RESCALE = 1e250
_LOG_RESCALE = math.log(_RESCALE)


@dataclass(frozen=True)
class BesselOrder:
    """Order nu of I_nu; the kernels use nu = zeta - 1/2 > -1."""

    nu: float

    def __post_init__(self):
        if not self.nu > -1.0:
            raise DomainError(f"Bessel order must be > -1, got {self.nu}")


def _order(nu):
    return nu.nu if isinstance(nu, BesselOrder) else BesselOrder(float(nu)).nu


def log_gamma(x):
    """ln Gamma(x) for x > 0 (scalar or array)."""
    x_arr = np.asarray(x, dtype=float)
    if np.any(~(x_arr > 0)):
        raise DomainError("log_gamma requires x > 0")
    if x_arr.ndim == 0:
        return math.lgamma(float(x_arr))
    return gammaln(x_arr)


def _hankel_threshold(nu):
    return _HANKEL_BASE + _HANKEL_NU2 * nu * nu


def _log_ive_series(nu, z):
    """log(e^{-z} I_nu(z)) from the ascending series, z > 0."""
    q = 0.25 * z * z
    term = np.ones_like(z)
    total = np.ones_like(z)
    shift = np.zeros_like(z)
    idx = np.arange(z.size)
    k = 0
    while idx.size:
        term[idx] *= q[idx] / ((k + 1.0) * (k + 1.0 + nu))
        total[idx] += term[idx]
        k += 1
        big = total[idx] > _RESCALE
        if np.any(big):
            j = idx[big]
            total[j] /= _RESCALE
            term[j] /= _RESCALE
            shift[j] += _LOG_RESCALE
        # past the peak (k > z/2) terms decay monotonically
        done = (term[idx] < _SERIES_EPS * total[idx]) & (k > 0.5 * z[idx])
        idx = idx[~done]
    return nu * np.log(0.5 * z) - math.lgamma(nu + 1.0) - z + np.log(total) + shift


def _log_ive_hankel(nu, z):
    """log(e^{-z} I_nu(z)) from the large-argument expansion."""
    mu = 4.0 * nu * nu
    term = np.ones_like(z)
    total = np.ones_like(z)
    prev = np.full_like(z, np.inf)
    active = np.ones(z.shape, dtype=bool)
    for k in range(1, 80):
        term = term * -(mu - (2 * k - 1) ** 2) / (8.0 * k * z)
        # stop each element at its smallest term (asymptotic, not convergent)
        grow = np.abs(term) > prev
        active &= ~grow
        total = np.where(active, total + term, total)
        prev = np.abs(term)
        active &= prev > _SERIES_EPS * np.abs(total)
        if not active.any():
            break
    return -0.5 * np.log(2.0 * np.pi * z) + np.log(total)


def log_bessel_i_scaled(nu, z):
    """log(e^{-z} I_nu(z)) for nu > -1, z >= 0."""
    nu = _order(nu)
    z_arr = np.asarray(z, dtype=float)
    if np.any(~(z_arr >= 0)):
        raise DomainError("bessel_i_scaled requires z >= 0")
    flat = z_arr.ravel()
    out = np.empty_like(flat)
    zero = flat == 0
    if nu == 0:
        out[zero] = 0.0
    else:
        out[zero] = -np.inf if nu > 0 else np.inf
    large = (~zero) & (flat >= _hankel_threshold(nu))
    small = (~zero) & ~large
    if small.any():
        out[small] = _log_ive_series(nu, flat[small])
    if large.any():
        out[large] = _log_ive_hankel(nu, flat[large])
    out = out.reshape(z_arr.shape)
    return float(out) if out.ndim == 0 else out


def bessel_i_scaled(nu, z):
    """e^{-z} I_nu(z); finite for every z > 0."""
    return np.exp(log_bessel_i_scaled(nu, z))


def _branch(nu, z, which):
    # exposed for the branch-overlap tests
    nu = _order(nu)
    z = np.atleast_1d(np.asarray(z, dtype=float))
    return _log_ive_series(nu, z) if which == "series" else _log_ive_hankel(nu, z)


# --- regularized Gauss hypergeometric ----------------------------------------

_TRANSFORM_AT = 0.75
_INT_TOL = 1e-9
_MAX_TERMS = 5000


def _is_nonpos_int(x):
    return x <= 0 and abs(x - round(x)) < 1e-14


def _series_reg(a, b, c, x):
    """sum_k (a)_k (b)_k / k! * x^k / Gamma(c+k), x an array with |x| < 1."""
    x = np.asarray(x, dtype=float)
    total = np.zeros_like(x)
    xk = np.ones_like(x)
    u = 1.0
    small_run = 0
    for k in range(_MAX_TERMS):
        term = u * float(rgamma(c + k)) * xk
        total = total + term
        if u == 0.0:
            break
        mag = np.abs(term)
        if k > 2 and np.all(mag <= _SERIES_EPS * np.maximum(np.abs(total), 1e-300)):
            small_run += 1
            if small_run >= 2:
                break
        else:
            small_run = 0
        u *= (a + k) * (b + k) / (k + 1.0)
        xk = xk * x
    return total


def _log_case(a, b, m, w):
    """Regularized F(a, b; a+b+m; 1-w) for integer m >= 0 (logarithmic case)."""
    lw = np.log(w)
    head = np.zeros_like(w)
    if m > 0:
        coef = 1.0
        wk = np.ones_like(w)
        for k in range(m):
            head = head + coef * math.factorial(m - k - 1) * wk
            coef *= (a + k) * (b + k) / (k + 1.0)
            wk = wk * (-w)
        head = head * float(rgamma(a + m) * rgamma(b + m))
    tail = np.zeros_like(w)
    wk = np.ones_like(w)
    coef = 1.0 / math.factorial(m)
    small_run = 0
    for k in range(_MAX_TERMS):
        psi = digamma(a + k + m) + digamma(b + k + m) - digamma(k + 1.0) - digamma(k + m + 1.0)
        term = coef * wk * (lw + psi)
        tail = tail + term
        if k > 2 and np.all(np.abs(term) <= _SERIES_EPS * np.maximum(np.abs(tail), 1e-300)):
            small_run += 1
            if small_run >= 2:
                break
        else:
            small_run = 0
        coef *= (a + m + k) * (b + m + k) / ((k + 1.0) * (k + m + 1.0))
        wk = wk * w
    return head - (-w) ** m * float(rgamma(a) * rgamma(b)) * tail


def _near_one(a, b, c, w):
    m = c - a - b
    if abs(m - round(m)) > _INT_TOL:
        s = math.pi / math.sin(math.pi * m)
        left = float(rgamma(c - a) * rgamma(c - b)) * _series_reg(a, b, 1.0 - m, w)
        right = float(rgamma(a) * rgamma(b)) * w**m * _series_reg(c - a, c - b, 1.0 + m, w)
        return s * (left - right)
    m = int(round(m))
    if m < 0:
        # Euler transformation makes the exponent positive
        a2, b2 = c - a, c - b
        if _is_nonpos_int(a2) or _is_nonpos_int(b2):
            return w**m * _series_reg(a2, b2, c, 1.0 - w)
        return w**m * _log_case(a2, b2, -m, w)
    return _log_case(a, b, m, w)


def gauss_2f1_reg(a, b, c, z, one_minus_z=None):
    """2F1(a, b; c; z) / Gamma(c) for 0 <= z < 1.

    ``one_minus_z`` may be passed when 1 - z is known more accurately than
    the rounded z (the kernel arguments approach 1 as t -> 0).
    """
    z_arr = np.asarray(z, dtype=float)
    if np.any(~((z_arr >= 0) & (z_arr < 1))):
        raise DomainError("gauss_2f1_reg requires 0 <= z < 1")
    w_arr = 1.0 - z_arr if one_minus_z is None else np.asarray(one_minus_z, dtype=float)
    z_flat = np.atleast_1d(z_arr).ravel()
    w_flat = np.broadcast_to(w_arr, z_arr.shape).ravel() if w_arr.ndim else np.full(z_flat.shape, float(w_arr))
    out = np.empty_like(z_flat)
    if _is_nonpos_int(a) or _is_nonpos_int(b):
        out[:] = _series_reg(a, b, c, z_flat)
    else:
        near = z_flat > _TRANSFORM_AT
        if (~near).any():
            out[~near] = _series_reg(a, b, c, z_flat[~near])
        if near.any():
            out[near] = _near_one(a, b, c, w_flat[near])
    out = out.reshape(z_arr.shape)
    return float(out) if out.ndim == 0 else out
