"""Comparison functions for the two-sided kernel estimates.

Everything returns plain ratios or envelope values; the constants hidden in
the estimates are never asserted, only measured (see ``verify``).
"""

import math
from dataclasses import dataclass

import numpy as np

from .bessel_kernel import KernelParams, positive
from .errors import DomainError, HypothesisError
from .subordinated import BatchedKernel

REGIMES = ("near-diag-small", "near-diag-large", "off-diag-small", "off-diag-large-a", "off-diag-large-b")


def _params(params):
    return params if isinstance(params, KernelParams) else KernelParams(*params)


def _sub(params):
    params = _params(params)
    if params.alpha >= 2.0:
        raise DomainError("this envelope is stated for alpha in (0, 2)")
    return params


def _scalar(x):
    return float(x) if np.ndim(x) == 0 else x


def log_sharp_envelope(params, t, r, s):
    p = _sub(params)
    t, r, s = positive(t=t, r=r, s=s)
    a, z = p.alpha, p.zeta
    d = np.abs(r - s)
    with np.errstate(divide="ignore"):
        first = (1.0 + a) * np.log(d) + 2.0 * z * np.log(r + s)
    second = (1.0 + a) / a * np.log(t) + 2.0 * z * np.log(t ** (1.0 / a) + r + s)
    return _scalar(np.log(t) - np.logaddexp(first, second))


def sharp_envelope(params, t, r, s):
    """t / (|r-s|^(1+a) (r+s)^(2z) + t^((1+a)/a) (t^(1/a) + r + s)^(2z))."""
    return _scalar(np.exp(log_sharp_envelope(params, t, r, s)))


@dataclass(frozen=True)
class EnvelopeValue:
    value: float
    regime_tag: str


def regime_index(r, s):
    """0-based regime; equalities fall to the lowest-indexed regime whose closure holds."""
    r, s = positive(r=r, s=s)
    rs = r * s
    d2 = (r - s) ** 2
    return np.select(
        [(rs <= 1) & (d2 <= 1), (d2 <= 1) & (rs >= 1), (rs <= 1) & (d2 >= 1), rs <= d2],
        [0, 1, 2, 3],
        default=4,
    )


def log_regime_value(params, r, s):
    p = _sub(params)
    r, s = positive(r=r, s=s)
    a, z = p.alpha, p.zeta
    idx = regime_index(r, s)
    with np.errstate(divide="ignore"):
        ld = np.log(np.abs(r - s))
    lrs = np.log(r * s)
    out = np.select(
        [idx == 0, idx == 1, (idx == 2) | (idx == 3)],
        [np.zeros_like(lrs), -z * lrs, -(2.0 * z + 1.0 + a) * ld],
        default=-z * lrs - (1.0 + a) * ld,
    )
    return out, idx


def regime_envelope(params, r, s):
    """Regime-selected bound at t = 1 with its tag (scalars)."""
    lv, idx = log_regime_value(params, float(r), float(s))
    return EnvelopeValue(float(np.exp(lv)), REGIMES[int(idx)])


def weight_f(zeta, r, s, z, smooth=False):
    """((s+z)/(r+s))^(2 zeta) [r > s v z] + [r < s v z]; ties take the second branch.

    ``smooth`` gives the comparable ((s+z)/(r+s+z))^(2 zeta).
    """
    if not zeta >= 0:
        raise HypothesisError("weight_f requires zeta >= 0")
    r, s, z = positive(r=r, s=s, z=z)
    if smooth:
        return _scalar(((s + z) / (r + s + z)) ** (2.0 * zeta))
    top = r > np.maximum(s, z)
    return _scalar(np.where(top, ((s + z) / (r + s)) ** (2.0 * zeta), 1.0))


def three_g_log_ratios(params, r, s, z, t, tau, kernel=None):
    """log of (min_form, product_form) for the two 3G inequalities (arrays)."""
    p = _sub(params)
    if not p.zeta >= 0:
        raise HypothesisError("the 3G inequality is stated for zeta >= 0")
    r, s, z, t, tau = positive(r=r, s=s, z=z, t=t, tau=tau)
    k = kernel or BatchedKernel(p)
    two_z = 2.0 * p.zeta
    a = k.log(t, r, z)
    b = k.log(tau, z, s)
    c = k.log(t + tau, r, s)
    tot = np.log(r + s + z)
    lw_a = two_z * (np.log(r + z) - tot)
    lw_b = two_z * (np.log(s + z) - tot)
    min_form = np.minimum(lw_a + a, lw_b + b) - c
    product_form = a + b - c - np.logaddexp(a - lw_b, b - lw_a)
    return min_form, product_form


def three_g_ratio(params, r, s, z, t, tau, kernel=None):
    m, q = three_g_log_ratios(params, r, s, z, t, tau, kernel)
    return _scalar(np.exp(m)), _scalar(np.exp(q))


# --- comparability items ------------------------------------------------------------

# c in the displaced arguments. For alpha < 2 the envelope is homogeneous and
# c = 1 is used throughout; alpha = 2 needs c < 1 wherever the Gaussian of
# the right-hand side must decay more slowly than that of the left.
ALPHA2_C = {"1-upper": math.sqrt(0.5), "1-lower": math.sqrt(2.0), "2a": 0.5, "2b": 1.0 / 32.0, "3": 0.5, "4": 0.5, "5": 0.25}
ITEM1_C = 0.5      # tau ranges over [C, 1/C]
ITEM2_C = 1.0
ITEM3_C = 0.5
ITEMS = ("1-upper", "1-lower", "2a", "2b", "2c", "3", "4", "5")


def default_c(item, params):
    p = _params(params)
    if p.alpha < 2.0:
        return 1.0
    if item == "1-upper":
        return math.sqrt(ITEM1_C)
    if item == "1-lower":
        return 1.0 / math.sqrt(ITEM1_C)
    return ALPHA2_C.get(item, 1.0)


def _require(cond, what):
    if not np.all(cond):
        raise HypothesisError(f"hypothesis violated: {what}")


def hypothesis_mask(item, point):
    """Boolean mask of points satisfying the item's hypothesis."""
    item = str(item)
    if item.startswith("1"):
        tau, _, _ = point
        return (tau >= ITEM1_C) & (tau <= 1.0 / ITEM1_C)
    if item.startswith("2"):
        _, z, s = point
        return z <= 0.5 * s
    if item == "3":
        tau, z, s = point
        return (tau <= 1.0) & (z <= 0.5 * s) & (s >= ITEM3_C)
    if item == "4":
        r, s = point
        return r <= s
    if item == "5":
        _, r, s, z = point
        return np.abs(z - s) > 0.5 * np.abs(r - s)
    raise DomainError(f"unknown comparability item {item!r}")


_HYP_TEXT = {
    "1": f"tau in [C, 1/C] with C = {ITEM1_C}",
    "2": "0 < z <= s/2",
    "3": f"0 < tau <= 1, 0 < z <= s/2, s >= C = {ITEM3_C}",
    "4": "0 < r <= s",
    "5": "|z - s| > |r - s|/2",
}


def comparability_log_ratio(item, params, point, c=None, kernel=None):
    """log(LHS/RHS) of a comparability item with its constant set to 1.

    ``point`` is (tau, z, s) for items 1-3, (r, s) for item 4 and
    (t, r, s, z) for item 5. Item 1 and the alpha < 2 case of items 1 are
    two-sided; "1-lower" is the reversed inequality.
    """
    p = _params(params)
    item = str(item)
    if item == "1":
        item = "1-upper"
    if item == "2":
        item = "2c"
    if item not in ITEMS:
        raise DomainError(f"unknown comparability item {item!r}")
    point = tuple(np.asarray(x, dtype=float) for x in point)
    positive(**{f"x{i}": x for i, x in enumerate(point)})
    _require(hypothesis_mask(item, point), _HYP_TEXT[item[0]])
    c = default_c(item, p) if c is None else c
    k = kernel or BatchedKernel(p)
    a, z2 = p.alpha, p.zeta
    one = np.ones_like(point[0])
    if item == "1-upper":
        tau, z, s = point
        return k.log(tau, z, s) - k.log(one, c * z, c * s)
    if item == "1-lower":
        tau, z, s = point
        return k.log(one, c * z, c * s) - k.log(tau, z, s)
    if item in ("2a", "2b", "2c"):
        tau, z, s = point
        lhs = k.log(tau, z, s)
        if item == "2c":
            return lhs + (2.0 * z2 + 1.0) * np.log(s)
        if a == 2.0:
            # the Gaussian term keeps the 2b constant also inside 2a
            ce = c if item == "2b" else ALPHA2_C["2b"]
            env = -0.5 * np.log(tau) - ce * s * s / tau - z2 * np.log(tau + s * s)
        else:
            ex = 2.0 * z2 + 1.0 + a
            env = np.log(tau) - np.logaddexp(ex * np.log(s), ex / a * np.log(tau))
        if item == "2b":
            return lhs - env
        # 2a: kernel at displaced arguments for tau >= C, envelope below C
        big = tau >= ITEM2_C
        rhs = np.where(big, k.log(tau, c * one, c * s), env)
        return lhs - rhs
    if item == "3":
        tau, z, s = point
        return k.log(tau, z, s) - k.log(one, c * one, c * s)
    if item == "4":
        r, s = point
        return k.log(one, one, s) - k.log(one, c * r, c * s)
    t, r, s, z = point
    return k.log(t, z, s) - k.log(t, c * r, c * s)


def comparability_check(item, params, point, c=None, kernel=None):
    """LHS/RHS ratio of comparability item ``item`` at ``point`` (HypothesisError if outside)."""
    return _scalar(np.exp(comparability_log_ratio(item, params, point, c, kernel)))
