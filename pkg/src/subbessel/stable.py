"""One-sided stable densities sigma_t^(beta), beta in (0, 1).

The density is defined only through its Laplace transform exp(-t lam^beta).
For general beta it is evaluated from Zolotarev's single-integral form

    sigma_1(x) = beta / ((1 - beta) pi) * x^(-1/(1-beta))
                 * int_0^pi K(u) exp(-K(u) x^(-beta/(1-beta))) du,

    K(u) = sin(beta u)^(beta/(1-beta)) sin((1-beta) u) / sin(u)^(1/(1-beta)),

and, for large x, from the convergent series in x^(-beta). Both are checked
against the Levy closed form (beta = 1/2), the Laplace identity and
normalization in the test-suite.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import erfc, gammaln

from .errors import DomainError
from .quadrature import QuadratureConfig, adaptive_gk, tanh_sinh_levels, tanh_sinh_nodes

LOG_UNDERFLOW = -745.0
_CUTOFF = 40.0          # integrand dropped below exp(-40) of its peak
_SERIES_SWITCH = 0.05   # use the tail series once x^(-beta) <= this
_TS_TOL = 1e-13
_TS_MAX_POINTS = 4096


@dataclass(frozen=True)
class StableIndex:
    beta: float

    def __post_init__(self):
        if not 0 < self.beta < 1:
            raise DomainError(f"stable index must lie in (0, 1), got {self.beta}")

    @classmethod
    def from_alpha(cls, alpha):
        return cls(0.5 * alpha)


def _beta(beta):
    return beta.beta if isinstance(beta, StableIndex) else StableIndex(float(beta)).beta


def _positive(name, x):
    arr = np.asarray(x, dtype=float)
    if np.any(~(arr > 0)):
        raise DomainError(f"{name} must be positive")
    return arr


def log_levy_density_half(t, tau):
    t = _positive("t", t)
    tau = _positive("tau", tau)
    out = np.log(0.5 * t / math.sqrt(math.pi)) - 1.5 * np.log(tau) - t * t / (4.0 * tau)
    return float(out) if np.ndim(out) == 0 else out


def levy_density_half(t, tau):
    """Closed-form density for beta = 1/2."""
    with np.errstate(under="ignore"):
        out = np.exp(log_levy_density_half(t, tau))
    return float(out) if np.ndim(out) == 0 else out


def zolotarev_k0(beta):
    """K(0+) = (1-beta) beta^(beta/(1-beta)), the exact small-x rate constant."""
    beta = _beta(beta)
    return (1.0 - beta) * beta ** (beta / (1.0 - beta))


# --- Zolotarev integrand --------------------------------------------------------

_LSINC = np.array([-1.0 / 6, -1.0 / 180, -1.0 / 2835, -1.0 / 37800, -1.0 / 467775])


def _log_sinc(x):
    """log(sin(x)/x) without cancellation at small x; 0 <= x < pi."""
    x = np.asarray(x, dtype=float)
    small = x < 0.1
    out = np.empty_like(x)
    xs = x[small] ** 2
    out[small] = xs * (_LSINC[0] + xs * (_LSINC[1] + xs * (_LSINC[2] + xs * (_LSINC[3] + xs * _LSINC[4]))))
    xl = x[~small]
    out[~small] = np.log(np.sin(xl) / xl)
    return out


def _log_k_rel(beta, u, v):
    """log K(u) - log K(0+) given u and v = pi - u (both accurate)."""
    p = beta / (1.0 - beta)
    q = 1.0 / (1.0 - beta)
    # log(sin u / u): near pi use sin(v)
    near0 = ~(v < u)
    ls_u = np.log(np.sin(np.where(near0, 1.0, v))) - np.log(np.where(near0, 1.0, u))
    if near0.any():
        ls_u = np.where(near0, _log_sinc(np.where(near0, u, 0.1)), ls_u)
    return p * _log_sinc(beta * u) + _log_sinc((1.0 - beta) * u) - q * ls_u


def _uv(w):
    # u = pi * expit(w), v = pi * expit(-w), both to full relative accuracy
    return math.pi / (1.0 + np.exp(-w)), math.pi / (1.0 + np.exp(w))


def _bisect(func, lo, hi, iters=34):
    """Vectorized bisection for func(w) changing sign from + at lo to - at hi.

    The roots only place panel breakpoints, so ~1e-8 in w is plenty.
    """
    lo = lo.copy()
    hi = hi.copy()
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        pos = func(mid) > 0
        lo = np.where(pos, mid, lo)
        hi = np.where(pos, hi, mid)
    return 0.5 * (lo + hi)


_W_SPAN = 200.0


def _log_zolotarev(beta, logx):
    """log sigma_1^(beta)(x) via the Zolotarev integral, logx an array."""
    q = 1.0 / (1.0 - beta)
    log_k0 = math.log(zolotarev_k0(beta))
    log_rho = -beta * q * logx + log_k0     # rho = c K(0+), c = x^(-beta/(1-beta))
    rho = np.exp(np.minimum(log_rho, 700.0))
    n = logx.size
    interior = log_rho < 0.0

    def rel(w):
        u, v = _uv(w)
        return _log_k_rel(beta, u, v)

    # peak location: D(u*) = -log rho when rho < 1, else u* = 0
    w_star = np.full(n, -np.inf)
    if interior.any():
        target = -log_rho[interior]
        w_star[interior] = _bisect(
            lambda w: target - rel(w), np.full(target.size, -_W_SPAN), np.full(target.size, _W_SPAN)
        )
    u_star, v_star = _uv(w_star)
    d_star = np.where(interior, -log_rho, 0.0)
    # g* = log K0 + D* - 1 for interior peaks, log K0 - rho at u = 0
    g_star = np.where(interior, log_k0 + d_star - 1.0, log_k0 - rho)

    def drop(w, rows):
        # (g - g*) at w, for the selected rows
        d = rel(w)
        dd = d - d_star[rows]
        r = rho[rows]
        with np.errstate(over="ignore"):
            return np.where(interior[rows], dd - np.expm1(dd), d - r * np.expm1(d))

    # left cutoff (only for interior peaks)
    w_lo = np.full(n, -np.inf)
    if interior.any():
        idx = np.nonzero(interior)[0]
        lo0 = np.full(idx.size, -_W_SPAN)
        at_zero = drop(lo0, idx) >= -_CUTOFF
        need = idx[~at_zero]
        if need.size:
            w_lo[need] = _bisect(
                lambda w: -_CUTOFF - drop(w, need), np.full(need.size, -_W_SPAN), w_star[need]
            )
    # right cutoff
    start = np.where(interior, w_star, -_W_SPAN)
    all_rows = np.arange(n)
    w_hi = _bisect(lambda w: drop(w, all_rows) + _CUTOFF, start, np.full(n, _W_SPAN))

    u_lo, v_lo = _uv(w_lo)
    u_hi, v_hi = _uv(w_hi)
    use_v = u_star > 0.5 * math.pi
    panels = [(u_lo, v_lo, u_star, v_star), (u_star, v_star, u_hi, v_hi)]

    def panel_sum(level_nodes, ua, va, ub, vb):
        dl, dr, wts = level_nodes
        length = np.where(use_v, va - vb, ub - ua)
        length = np.maximum(length, 0.0)
        u_l = ua[:, None] + dl[None, :] * length[:, None]
        v_r = vb[:, None] + dr[None, :] * length[:, None]
        u = np.where(use_v[:, None], math.pi - v_r, u_l)
        v = np.where(use_v[:, None], v_r, math.pi - u_l)
        d = _log_k_rel(beta, u.ravel(), v.ravel()).reshape(u.shape)
        with np.errstate(over="ignore", under="ignore"):
            rel_drop = np.where(
                interior[:, None],
                (d - d_star[:, None]) - np.expm1(d - d_star[:, None]),
                d - rho[:, None] * np.expm1(d),
            )
            return length * (np.exp(rel_drop) @ wts)

    max_level = tanh_sinh_levels(_TS_MAX_POINTS)
    total = None
    level = 2
    nodes0 = tanh_sinh_nodes(0)
    # level-0 lattice then refine by halving
    sums = [panel_sum(nodes0, *p) for p in panels]
    h = 1.0
    for lev in range(1, max_level + 1):
        new = tanh_sinh_nodes(lev)
        h *= 0.5
        sums = [0.5 * s + h * panel_sum(new, *p) for s, p in zip(sums, panels)]
        cur = sums[0] + sums[1]
        if total is not None and lev >= level and np.all(np.abs(cur - total) <= _TS_TOL * cur):
            total = cur
            break
        total = cur
    return math.log(beta * q / math.pi) - q * logx + g_star + np.log(total)


def _log_tail_series(beta, logx):
    """log sigma_1 from sum_k (-1)^(k+1) Gamma(k beta + 1) sin(k pi beta) / (pi k!) x^(-k beta - 1)."""
    y = np.exp(-beta * logx)
    total = np.zeros_like(y)
    for k in range(1, 80):
        lg = gammaln(k * beta + 1.0) - gammaln(k + 1.0)
        mag = np.exp(lg) * y**k
        total = total + (-1) ** (k + 1) * math.sin(k * math.pi * beta) * mag
        if k > 2 and np.all(mag <= 1e-18 * np.abs(total)):
            break
    return np.log(total / math.pi) - logx


def log_stable_density_unit(beta, tau):
    """log sigma_1^(beta)(tau), vectorized; tau > 0."""
    beta = _beta(beta)
    tau = _positive("tau", tau)
    logx = np.log(np.atleast_1d(tau).astype(float)).ravel()
    out = np.empty_like(logx)
    far = -beta * logx <= math.log(_SERIES_SWITCH)
    if far.any():
        out[far] = _log_tail_series(beta, logx[far])
    if (~far).any():
        out[~far] = _log_zolotarev(beta, logx[~far])
    out = out.reshape(np.shape(tau))
    return float(out) if out.ndim == 0 else out


def stable_scaling(beta, t, tau):
    """Reduce sigma_t(tau) to sigma_1: returns (1, tau t^(-1/beta), t^(-1/beta))."""
    beta = _beta(beta)
    _positive("t", t)
    _positive("tau", tau)
    factor = t ** (-1.0 / beta)
    return 1.0, tau * factor, factor


def log_stable_density(beta, t, tau):
    beta = _beta(beta)
    _, tau1, factor = stable_scaling(beta, np.asarray(t, dtype=float), np.asarray(tau, dtype=float))
    return np.log(factor) + log_stable_density_unit(beta, tau1)


def stable_density(beta, t, tau):
    """sigma_t^(beta)(tau); exact 0 where the value is below exp(-745)."""
    lv = np.asarray(log_stable_density(beta, t, tau))
    out = np.where(lv < LOG_UNDERFLOW, 0.0, np.exp(np.maximum(lv, LOG_UNDERFLOW)))
    return float(out) if out.ndim == 0 else out


def stable_survival_tail(beta, tau):
    """P(S > tau) for S ~ sigma_1, from the large-tau series (tau^-beta small)."""
    beta = _beta(beta)
    y = np.asarray(tau, dtype=float) ** -beta
    total = np.zeros_like(y)
    for k in range(1, 80):
        mag = np.exp(gammaln(k * beta) - gammaln(k + 1.0)) * y**k
        total = total + (-1) ** (k + 1) * math.sin(k * math.pi * beta) * mag
        if k > 2 and np.all(mag <= 1e-18 * np.abs(total)):
            break
    return total / math.pi


def levy_cdf_half(tau):
    """P(S <= tau) for the beta = 1/2 law."""
    return erfc(0.5 / np.sqrt(np.asarray(tau, dtype=float)))


def series_threshold(beta):
    """Smallest tau served by the tail series."""
    return _SERIES_SWITCH ** (-1.0 / _beta(beta))


# --- envelope -----------------------------------------------------------------


@dataclass(frozen=True)
class SubordinatorEnvelopeParams:
    """Shape exp(-C tau^(-c1)) / tau^(1+beta) with two exponential rates.

    ``C_lo >= C_hi``: the larger rate gives the smaller (lower) envelope.
    ``A_lo``/``A_hi`` are the fitted prefactors (1 when not fitted).
    """

    beta: float
    C_lo: float
    C_hi: float
    A_lo: float = 1.0
    A_hi: float = 1.0

    def __post_init__(self):
        _beta(self.beta)
        if not (self.C_lo >= self.C_hi > 0):
            raise DomainError("need C_lo >= C_hi > 0")

    @property
    def alpha(self):
        return 2.0 * self.beta

    @property
    def c1(self):
        return self.alpha / (2.0 - self.alpha)

    @property
    def c2(self):
        return (2.0 - self.alpha / 2.0) / (2.0 - self.alpha)


def log_envelope_shape(params, rate, tau):
    tau = np.asarray(tau, dtype=float)
    return -rate * tau ** (-params.c1) - (1.0 + params.beta) * np.log(tau)


def subordinator_envelope(params, tau):
    """(lower, upper) envelope values at tau."""
    tau = _positive("tau", tau)
    with np.errstate(under="ignore"):
        lower = params.A_lo * np.exp(log_envelope_shape(params, params.C_lo, tau))
        upper = params.A_hi * np.exp(log_envelope_shape(params, params.C_hi, tau))
    if np.ndim(lower) == 0:
        return float(lower), float(upper)
    return lower, upper


def fit_subordinator_envelope(beta, tau_min=1e-4, tau_max=1e4, count=81, margin=0.2):
    """Fit rates and prefactors of the two-sided envelope on a log grid.

    The rate is estimated by least squares of log(sigma tau^c2) against
    tau^(-c1) on the small-tau half of the grid, then widened by ``margin``
    in both directions; prefactors are the grid inf/sup of the ratios.
    """
    beta = _beta(beta)
    tau = np.logspace(math.log10(tau_min), math.log10(tau_max), count)
    lsig = log_stable_density_unit(beta, tau)
    probe = SubordinatorEnvelopeParams(beta, 1.0, 1.0)
    x = tau ** (-probe.c1)
    y = lsig + probe.c2 * np.log(tau)
    sel = (tau < 1.0) & np.isfinite(y) & (y > -700.0)
    if sel.sum() < 3:
        sel = tau < 1.0
    slope = np.polyfit(x[sel], y[sel], 1)[0]
    rate = -slope
    shell = SubordinatorEnvelopeParams(beta, rate * (1 + margin), rate * (1 - margin))
    lo_ratio = lsig - log_envelope_shape(shell, shell.C_lo, tau)
    hi_ratio = lsig - log_envelope_shape(shell, shell.C_hi, tau)
    return SubordinatorEnvelopeParams(
        beta, shell.C_lo, shell.C_hi, float(np.exp(lo_ratio.min())), float(np.exp(hi_ratio.max()))
    )


# --- Laplace identity ---------------------------------------------------------


def laplace_transform(beta, lam, cfg=None):
    """int_0^inf exp(-lam tau) sigma_1(tau) dtau by adaptive quadrature in log tau."""
    beta = _beta(beta)
    cfg = cfg or QuadratureConfig(rel_tol=1e-11, abs_floor=1e-300)
    if lam < 0:
        raise DomainError("lambda must be >= 0")
    c1 = beta / (1.0 - beta)
    u_lo = math.log(zolotarev_k0(beta) / 800.0) / c1
    t_far = series_threshold(beta)
    if lam > 0:
        u_hi, tail = math.log(60.0 / lam) + 1.0, 0.0
    else:
        u_hi, tail = math.log(t_far), float(stable_survival_tail(beta, t_far))
    pts = [u_lo, 0.0, u_hi]
    if lam > 0:
        pts.append(-math.log(lam))
    pts = sorted(p for p in set(pts) if u_lo <= p <= u_hi)

    def f(u):
        with np.errstate(under="ignore"):
            return np.exp(u - lam * np.exp(u) + log_stable_density_unit(beta, np.exp(u)))

    res = adaptive_gk(f, pts, cfg.rel_tol, cfg.abs_floor, cfg.max_panels)
    return res.value + tail


def laplace_check(beta, lam, cfg=None):
    """|int exp(-lam tau) sigma_1 - exp(-lam^beta)|."""
    beta = _beta(beta)
    return abs(laplace_transform(beta, lam, cfg) - math.exp(-(lam**beta)))
