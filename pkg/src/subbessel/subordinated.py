"""Subordinated Bessel heat kernels p^(alpha), alpha in (0, 2).

    p^(alpha)(t, r, s) = int_0^inf p2(tau, r, s) sigma_t^(alpha/2)(tau) dtau

Two quadrature paths are provided:

``p_alpha``
    one point at a time, adaptive Gauss-Kronrod in u = ln tau after scaling
    to t = 1, with the tail beyond T_tail integrated analytically.

``GridKernel``
    a batched evaluator for sweeps: trapezoid sums in u on a fixed lattice
    with precomputed subordinator weights. The far field tau >= 16(r^2+s^2)
    uses the expansion of p2 in powers of 1/tau against suffix moments of
    the lattice weights, continued beyond the lattice by the geometric sums
    that the tail series of sigma_1 produces.

The alpha = 1 kernel also has a closed form through the regularized 2F1.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln, rgamma

from .bessel_kernel import KernelParams, check_zeta, log_p2, log_p2_fast, positive
from .errors import DomainError, QuadratureError
from .quadrature import QuadratureConfig, adaptive_gk
from .specfun import gauss_2f1_reg
from .stable import log_stable_density_unit, series_threshold, zolotarev_k0

_FAR = 16.0         # far field starts at tau = _FAR (r^2 + s^2)
_FAR_TERMS = 12
_WINDOW = 50.0      # log-margin below the peak kept by GridKernel windows


def _scalar(x):
    return float(x) if np.ndim(x) == 0 else x


def _params(params):
    if not isinstance(params, KernelParams):
        params = KernelParams(*params)
    return params


def scaling_reduce(params, t, r, s):
    """(r t^(-1/alpha), s t^(-1/alpha), t^(-(2 zeta + 1)/alpha))."""
    params = _params(params)
    t, r, s = positive(t=t, r=r, s=s)
    f = t ** (-1.0 / params.alpha)
    pref = t ** (-(2.0 * params.zeta + 1.0) / params.alpha)
    return _scalar(r * f), _scalar(s * f), _scalar(pref)


# --- alpha = 1 closed form --------------------------------------------------------


def log_p_alpha1_closed(zeta, t, r, s):
    """log of 2 Gamma(z+1)/sqrt(pi) * t / R^(z+1) * 2F1~((z+1)/2, (z+2)/2; z+1/2; 4r^2s^2/R^2)."""
    zeta = check_zeta(zeta)
    t, r, s = positive(t=t, r=r, s=s)
    t, r, s = np.broadcast_arrays(t, r, s)
    lo, hi = np.minimum(r, s), np.maximum(r, s)
    t2 = t * t
    big_r = lo * lo + hi * hi + t2
    w = 4.0 * (lo * hi) ** 2 / big_r**2
    d = hi - lo
    one_minus_w = (d * d + t2) * ((lo + hi) ** 2 + t2) / big_r**2
    f = gauss_2f1_reg(0.5 * (zeta + 1.0), 0.5 * (zeta + 2.0), zeta + 0.5, w, one_minus_w)
    out = (
        math.log(2.0 / math.sqrt(math.pi))
        + math.lgamma(zeta + 1.0)
        + np.log(t)
        - (zeta + 1.0) * np.log(big_r)
        + np.log(f)
    )
    return _scalar(out)


def p_alpha1_closed(zeta, t, r, s):
    with np.errstate(under="ignore"):
        return _scalar(np.exp(log_p_alpha1_closed(zeta, t, r, s)))


def p_alpha1_zeta0(t, r, s):
    """2t / (pi R (1 - 4 r^2 s^2 / R^2)), R = r^2 + s^2 + t^2."""
    t, r, s = positive(t=t, r=r, s=s)
    big_r = r * r + s * s + t * t
    return _scalar(2.0 * t * big_r / (math.pi * ((r - s) ** 2 + t * t) * ((r + s) ** 2 + t * t)))


def p_alpha1_zeta1(t, r, s):
    """4t / (pi ((r^2 - s^2)^2 + t^2 (t^2 + 2r^2 + 2s^2)))."""
    t, r, s = positive(t=t, r=r, s=s)
    return _scalar(4.0 * t / (math.pi * ((r * r - s * s) ** 2 + t * t * (t * t + 2.0 * r * r + 2.0 * s * s))))


# --- far field and tail constants ---------------------------------------------------


def sigma_tail_coeffs(beta, n=40):
    """a_j with sigma_1(tau) = sum_j a_j tau^(-j beta - 1) for large tau."""
    j = np.arange(1, n + 1)
    sign = np.where(j % 2 == 1, 1.0, -1.0)
    return sign * np.exp(gammaln(j * beta + 1.0) - gammaln(j + 1.0)) * np.sin(j * math.pi * beta) / math.pi


def far_field_coeffs(zeta, r, s, terms=_FAR_TERMS, scaled=False):
    """d_m with p2(tau, r, s) = (1/2) 4^-nu tau^(-1-nu) sum_m d_m tau^-m (arrays over points).

    With scaled=True returns d_m (r^2 + s^2)^-m, which stays bounded for any r, s.
    """
    nu = zeta - 0.5
    r = np.asarray(r, dtype=float)
    s = np.asarray(s, dtype=float)
    a = 0.25 * (r * r + s * s)
    b = 0.25 * r * s
    if scaled:
        q = r * r + s * s
        a, b = a / q, b / q
    d = np.zeros((terms,) + a.shape)
    for k in range(terms // 2 + 1):
        bk = b ** (2 * k) * math.exp(-math.lgamma(k + 1.0)) * float(rgamma(k + nu + 1.0))
        for i in range(terms - 2 * k):
            d[i + 2 * k] += (-a) ** i / math.factorial(i) * bk
    return d


def kernel_tail_constant(zeta, alpha):
    """C with P(X > S) ~ C t S^-alpha, X distributed as p(t, r, .) s^(2 zeta) ds."""
    return math.exp(
        alpha * math.log(2.0)
        + math.lgamma(zeta + 0.5 * (1.0 + alpha))
        - math.lgamma(1.0 - 0.5 * alpha)
        - math.lgamma(zeta + 0.5)
    )


def _far_tail_analytic(zeta, beta, r, s, big_t):
    """int_T^inf p2(tau, r, s) sigma_1(tau) dtau from both expansions (T large)."""
    nu = zeta - 0.5
    d = far_field_coeffs(zeta, r, s, scaled=True)
    lq = math.log(r * r + s * s)
    aj = sigma_tail_coeffs(beta)
    jb = beta * np.arange(1, aj.size + 1)
    lt = math.log(big_t)
    total = 0.0
    for m in range(d.shape[0]):
        g = jb + nu + m + 1.0
        total += float(d[m]) * float(np.sum(aj * np.exp(m * lq - g * lt) / g))
    return 0.5 * 4.0 ** (-nu) * total


# --- adaptive single-point path -------------------------------------------------


def _log_integrand(zeta, beta, r, s, u):
    tau = np.exp(u)
    return u + log_p2(zeta, tau, r, s) + log_stable_density_unit(beta, tau)


def _p_alpha_unit(zeta, beta, r, s, cfg):
    c1 = beta / (1.0 - beta)
    big_t = max(_FAR * (r * r + s * s), series_threshold(beta), 1.0)
    char = [r * s, (r - s) ** 2, 1.0]
    big_t = max(big_t, math.e**2 * max(char))
    u_hi = math.log(big_t)
    u_lo = math.log(zolotarev_k0(beta) / 1000.0) / c1
    # coarse scan for the peak and the starting point of the first panel
    coarse = np.arange(u_lo, u_hi + 0.5, 0.5)
    lf = _log_integrand(zeta, beta, r, s, coarse)
    peak = int(np.argmax(lf))
    est = math.log(0.5) + lf[peak] + math.log(np.sum(np.exp(lf - lf[peak])))
    cut = math.log(cfg.rel_tol) + est - 40.0
    below = np.nonzero(lf[:peak] < cut)[0]
    eps = coarse[below[-1]] if below.size else u_lo
    splits = {math.log(c) for c in char if c > 0} | {math.log(p) for p in cfg.split_points}
    pts = [eps] + sorted(p for p in splits if eps < p < u_hi) + [u_hi]
    shift = lf[peak]

    def f(u):
        with np.errstate(under="ignore"):
            return np.exp(_log_integrand(zeta, beta, r, s, u) - shift)

    res = adaptive_gk(f, pts, cfg.rel_tol, cfg.abs_floor, cfg.max_panels)
    tail = _far_tail_analytic(zeta, beta, r, s, big_t)
    return res.value * math.exp(shift) + tail


def p_alpha(params, t, r, s, cfg=None):
    """p^(alpha)(t, r, s) for alpha in (0, 2) by subordination quadrature (scalar)."""
    params = _params(params)
    if params.alpha >= 2.0:
        raise DomainError("p_alpha requires alpha < 2; use bessel_kernel.p2")
    cfg = cfg or QuadratureConfig()
    r1, s1, pref = scaling_reduce(params, float(t), float(r), float(s))
    lo, hi = min(r1, s1), max(r1, s1)
    try:
        val = _p_alpha_unit(params.zeta, params.beta, lo, hi, cfg)
    except QuadratureError as exc:
        raise QuadratureError(str(exc), point=(params.zeta, params.alpha, t, r, s)) from exc
    return pref * val


def kernel(params, t, r, s, cfg=None):
    """Route to p2 (alpha = 2, after scaling to t = 1) or the subordination quadrature."""
    params = _params(params)
    if params.alpha == 2.0:
        r1, s1, pref = scaling_reduce(params, float(t), float(r), float(s))
        return pref * float(np.exp(log_p2(params.zeta, 1.0, r1, s1)))
    return p_alpha(params, t, r, s, cfg)


# --- batched lattice evaluator ---------------------------------------------------------


@dataclass
class GridResult:
    value: np.ndarray
    error: np.ndarray


class GridKernel:
    """Batched p^(alpha) on a fixed log-tau lattice; one instance per (zeta, alpha)."""

    def __init__(self, params, h=None, chunk=4096):
        params = _params(params)
        if params.alpha >= 2.0:
            raise DomainError("GridKernel requires alpha < 2")
        self.params = params
        self.zeta = params.zeta
        self.beta = params.beta
        self.nu = params.zeta - 0.5
        c1 = self.beta / (1.0 - self.beta)
        self.h = h or min(0.2, math.pi / (10.0 * c1))
        self.chunk = chunk
        self.u0 = math.floor(math.log(zolotarev_k0(self.beta) / 1000.0) / c1 / self.h) * self.h
        self.aj = sigma_tail_coeffs(self.beta)
        self._jb = self.beta * np.arange(1, self.aj.size + 1)
        self.n = 0
        self._grow(math.log(series_threshold(self.beta)) + 2.0)

    # lattice bookkeeping
    def _u(self, k):
        return self.u0 + self.h * k

    def _grow(self, u_max):
        n = int(math.ceil((u_max - self.u0) / self.h)) + 1
        if n <= self.n:
            return
        k = np.arange(n)
        u = self._u(k)
        self.u = u
        self.logw = math.log(self.h) + u + log_stable_density_unit(self.beta, np.exp(u))
        # suffix sums S_m[k] = sum_{j>=k} w_j tau_j^-(1+nu+m), including the
        # geometric continuation past the last node
        m = np.arange(_FAR_TERMS)[:, None]
        g = self._jb[None, :] + self.nu + m + 1.0            # (M, J)
        last = u[-1]
        geo = np.exp(-g * (last + self.h)) * self.h / -np.expm1(-g * self.h)
        tail = np.sum(self.aj[None, :] * geo, axis=1)        # (M,)
        lt = self.logw[None, :] - (1.0 + self.nu + m) * u[None, :]
        cum = np.logaddexp.accumulate(lt[:, ::-1], axis=1)[:, ::-1]
        with np.errstate(divide="ignore"):
            self.log_suffix = np.logaddexp(cum, np.log(tail)[:, None])   # (M, n)
        self.n = n

    def _suffix(self, k, lq):
        """q^m S_m at lattice index k (k may lie beyond the stored lattice), q = e^lq."""
        inside = k < self.n
        out = np.empty((_FAR_TERMS, k.size))
        m = np.arange(_FAR_TERMS)[:, None]
        with np.errstate(over="ignore", under="ignore"):
            out[:, inside] = np.exp(self.log_suffix[:, k[inside]] + m * lq[None, inside])
        if (~inside).any():
            uk = self._u(k[~inside])
            m = m[:, :, None]
            g = self._jb[None, :, None] + self.nu + m + 1.0
            with np.errstate(over="ignore", under="ignore"):
                geo = np.exp(m * lq[None, None, ~inside] - g * uk[None, None, :]) * self.h / -np.expm1(-g * self.h)
            out[:, ~inside] = np.sum(self.aj[None, :, None] * geo, axis=1)
        return out

    def unit(self, r, s):
        """p^(alpha)(1, r, s) for arrays r, s."""
        r, s = positive(r=r, s=s)
        r, s = np.broadcast_arrays(r, s)
        shape = r.shape
        lo = np.minimum(r, s).ravel()
        hi = np.maximum(r, s).ravel()
        k_far = np.ceil((np.log(_FAR * (lo * lo + hi * hi)) - self.u0) / self.h).astype(int)
        k_far = np.maximum(k_far, 1)
        if lo.size:
            self._grow(self._u(int(k_far.max())) + self.h)
        k_lo = np.empty_like(k_far)
        k_hi = np.empty_like(k_far)
        for a in range(0, lo.size, self.chunk):
            sl = slice(a, a + self.chunk)
            k_lo[sl], k_hi[sl] = self._windows(lo[sl], hi[sl], k_far[sl])
        # chunks of similar window width keep the padding small
        order = np.argsort(k_hi - k_lo, kind="stable")
        val = np.empty(lo.size)
        err = np.empty(lo.size)
        for a in range(0, lo.size, self.chunk):
            idx = order[a:a + self.chunk]
            val[idx], err[idx] = self._unit_chunk(lo[idx], hi[idx], k_far[idx], k_lo[idx], k_hi[idx])
        return GridResult(val.reshape(shape), err.reshape(shape))

    def _windows(self, r, s, k_far):
        # cheap log-bound of the integrand on a stride-4 sublattice
        stride = 4
        kmax = int(k_far.max())
        ks = np.arange(0, max(kmax, 1) + stride, stride)
        ks = ks[ks < self.n]
        u = self.u[ks][None, :]
        lrs = np.log(r * s)[:, None]
        d2 = ((s - r) ** 2)[:, None]
        with np.errstate(over="ignore"):
            bound = (
                self.logw[ks][None, :]
                + np.minimum(-(0.5 + self.zeta) * u, -self.zeta * lrs - 0.5 * u)
                - d2 * np.exp(-u) / 4.0
            )
        bound = np.where(ks[None, :] < k_far[:, None], bound, -np.inf)
        top = bound.max(axis=1, keepdims=True)
        keep = bound >= top - _WINDOW
        first = np.argmax(keep, axis=1)
        last = keep.shape[1] - 1 - np.argmax(keep[:, ::-1], axis=1)
        k_lo = np.maximum(ks[first] - stride, 0)
        k_hi = np.minimum(ks[last] + stride, k_far - 1)
        return k_lo, np.maximum(k_hi, k_lo)

    def _unit_chunk(self, r, s, k_far, k_lo, k_hi):
        width = int((k_hi - k_lo).max()) + 1
        kk = k_lo[:, None] + np.arange(width)[None, :]
        mask = kk <= k_hi[:, None]
        kk = np.minimum(kk, self.n - 1)
        u = self.u[kk]
        lf = self.logw[kk] + log_p2_fast(self.zeta, np.exp(u), r[:, None], s[:, None])
        lf = np.where(mask, lf, -np.inf)
        top = lf.max(axis=1)
        e = np.exp(lf - top[:, None])
        near = e.sum(axis=1)
        # same sum on the even sublattice (step 2h) for the error estimate
        even = (kk % 2 == 0) & mask
        near2 = 2.0 * np.where(even, e, 0.0).sum(axis=1)
        # far field
        d = far_field_coeffs(self.zeta, r, s, scaled=True)
        sfx = self._suffix(k_far, np.log(r * r + s * s))
        far = 0.5 * 4.0 ** (-self.nu) * np.sum(d * sfx, axis=0)
        scale = np.exp(top)
        val = near * scale + far
        err = np.abs(near - near2) * scale
        return val, err

    def __call__(self, t, r, s):
        """p^(alpha)(t, r, s), broadcasting over the arguments."""
        t, r, s = positive(t=t, r=r, s=s)
        t, r, s = np.broadcast_arrays(t, r, s)
        r1, s1, pref = scaling_reduce(self.params, t, r, s)
        return pref * self.unit(r1, s1).value

    def log(self, t, r, s):
        t, r, s = positive(t=t, r=r, s=s)
        t, r, s = np.broadcast_arrays(t, r, s)
        r1, s1, pref = scaling_reduce(self.params, t, r, s)
        return np.log(pref) + np.log(self.unit(r1, s1).value)


class BatchedKernel:
    """Vectorized log p^(alpha): p2 for alpha = 2, the closed form for alpha = 1,
    GridKernel otherwise. ``method`` names the path used."""

    def __init__(self, params):
        self.params = _params(params)
        a = self.params.alpha
        if a == 2.0:
            self.method = "alpha2"
        elif a == 1.0:
            self.method = "closed-form"
        else:
            self.method = "quadrature"
            self._grid = GridKernel(self.params)

    def log_unit(self, r, s):
        z = self.params.zeta
        if self.method == "alpha2":
            return np.asarray(log_p2(z, 1.0, r, s))
        if self.method == "closed-form":
            return np.asarray(log_p_alpha1_closed(z, 1.0, r, s))
        return np.log(self._grid.unit(r, s).value)

    def log(self, t, r, s):
        # every path goes through the scaling to t = 1
        t, r, s = positive(t=t, r=r, s=s)
        t, r, s = np.broadcast_arrays(t, r, s)
        r1, s1, pref = scaling_reduce(self.params, t, r, s)
        return np.log(pref) + self.log_unit(r1, s1)

    def __call__(self, t, r, s):
        with np.errstate(under="ignore"):
            return np.exp(self.log(t, r, s))


# --- semigroup identities for alpha < 2 ---------------------------------------------


def _log_grid(lo, hi, pts):
    pts = sorted(p for p in set(pts) if lo < p < hi)
    return [math.log(lo)] + [math.log(p) for p in pts] + [math.log(hi)]


def normalization_integral(gk, t, r, rel_tol=1e-10):
    """int_0^inf p(t, r, s) s^(2 zeta) ds with an analytic tail beyond S."""
    r1, _, _ = scaling_reduce(gk.params, t, r, r)   # the integral is scale invariant
    z, a = gk.zeta, gk.params.alpha
    s_lo = 1e-6 * min(r1, 1.0)
    s_hi = 1e12 * max(r1, 1.0)
    pts = [r1 + d for d in (-100.0, -10.0, -1.0, 0.0, 1.0, 10.0, 100.0)] + [1.0, 2.0 * s_lo]

    def f(v):
        s = np.exp(v)
        return gk.unit(np.full_like(s, r1), s).value * np.exp((2.0 * z + 1.0) * v)

    res = adaptive_gk(f, _log_grid(s_lo, s_hi, pts), rel_tol, 1e-300, 8192)
    head = float(f(np.array([math.log(s_lo)]))[0]) / (2.0 * z + 1.0)
    tail = kernel_tail_constant(z, a) * s_hi ** (-a)
    return res.value + head + tail


def chapman_ratio(gk, t, t2, r, s, rel_tol=1e-10):
    """int p(t, r, z) p(t2, z, s) z^(2 zeta) dz / p(t + t2, r, s)."""
    z2, a = gk.zeta, gk.params.alpha
    w1, w2 = t ** (1.0 / a), t2 ** (1.0 / a)
    target = float(gk.log(t + t2, r, s))
    z_lo = 1e-6 * min(r, s, w1, w2)
    z_hi = 1e6 * max(r, s, w1, w2)
    pts = [2.0 * z_lo]
    for c, w in ((r, w1), (s, w2)):
        pts += [c + k * w for k in (-10.0, -1.0, 0.0, 1.0, 10.0)]

    def f(v):
        zz = np.exp(v)
        lg = gk.log(t, r, zz) + gk.log(t2, zz, s) + (2.0 * z2 + 1.0) * v - target
        with np.errstate(under="ignore"):
            return np.exp(lg)

    res = adaptive_gk(f, _log_grid(z_lo, z_hi, pts), rel_tol, 1e-300, 8192)
    head = float(f(np.array([math.log(z_lo)]))[0]) / (2.0 * z2 + 1.0)
    ct = kernel_tail_constant(z2, a)
    ex = 1.0 + 2.0 * a + 2.0 * z2
    tail = (a * ct) ** 2 * t * t2 * z_hi ** (-ex) / ex * math.exp(-target)
    return res.value + head + tail
