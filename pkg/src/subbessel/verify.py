"""Grid and sample sweeps of kernel/envelope ratios, and the verification suites.

A check is a numerator/denominator pair of log-valued functions over named
axes, with an optional admissibility mask. ``sweep_ratio`` evaluates it on a
nested grid and reports the empirical constants (sup and inf of the ratio),
their extremizing points and the drift against the next-coarser grid.
``run_suite`` executes a JSON config of such checks and assembles a report.
"""

import csv
import io
import json
import math
import time
from dataclasses import asdict, dataclass, field
from typing import Callable, Optional

import jsonschema
import numpy as np
from scipy.stats import qmc

from . import __version__
from .bessel_kernel import (
    DEFAULT_RATES,
    FORMS,
    KernelParams,
    chapman_ratio as chapman_ratio_2,
    fit_gaussian_envelope,
    log_p2,
    log_p2_closed_zeta1,
    log_p2_gaussian_envelope,
    normalization_integral as normalization_integral_2,
)
from .envelopes import (
    ITEM1_C,
    ITEM3_C,
    ITEMS,
    comparability_log_ratio,
    hypothesis_mask,
    log_regime_value,
    log_sharp_envelope,
    three_g_log_ratios,
    weight_f,
)
from .errors import ConfigError, DomainError
from .mc import mc_kernel
from .quadrature import QuadratureConfig
from .stable import (
    fit_subordinator_envelope,
    laplace_transform,
    log_levy_density_half,
    log_envelope_shape,
    log_stable_density_unit,
)
from .subordinated import (
    BatchedKernel,
    GridKernel,
    chapman_ratio,
    log_p_alpha1_closed,
    normalization_integral,
    p_alpha,
    scaling_reduce,
)

MAX_DRIFT = 0.1
INSUFFICIENT_LIMIT = 0.01     # suite-wide fraction of insufficient-precision points
MC_EXCLUDE_LIMIT = 0.1        # per MC check
Z_LIMIT = 3.0

# --- grids ------------------------------------------------------------------


@dataclass(frozen=True)
class Axis:
    name: str
    min: float
    max: float
    count: int
    spacing: str = "log"

    def __post_init__(self):
        if not self.min < self.max:
            raise DomainError(f"axis {self.name}: need min < max")
        if self.count < 2:
            raise DomainError(f"axis {self.name}: need count >= 2")
        if self.spacing not in ("log", "linear"):
            raise DomainError(f"axis {self.name}: spacing must be log or linear")
        if self.spacing == "log" and not self.min > 0:
            raise DomainError(f"axis {self.name}: log spacing needs min > 0")

    def values(self, level=0):
        n = (self.count - 1) * 2**level
        # q = i/n is the same double for a point on every level that contains it,
        # so coarser grids are exact subsets of finer ones
        q = np.arange(n + 1) / n
        if self.spacing == "log":
            lo, hi = math.log(self.min), math.log(self.max)
            v = np.exp(lo + (hi - lo) * q)
        else:
            v = self.min + (self.max - self.min) * q
        v[0], v[-1] = self.min, self.max
        return v


@dataclass(frozen=True)
class GridSpec:
    axes: tuple
    refinement_level: int = 0

    def __post_init__(self):
        object.__setattr__(self, "axes", tuple(self.axes))
        if self.refinement_level < 0:
            raise DomainError("refinement_level must be >= 0")
        names = [a.name for a in self.axes]
        if len(set(names)) != len(names):
            raise DomainError("axis names must be distinct")

    @property
    def names(self):
        return tuple(a.name for a in self.axes)

    def shape(self, level=None):
        level = self.refinement_level if level is None else level
        return tuple((a.count - 1) * 2**level + 1 for a in self.axes)

    @property
    def size(self):
        return int(np.prod(self.shape()))

    def points(self, level=None):
        """Flattened coordinates (C order, first axis slowest) as a dict of arrays."""
        level = self.refinement_level if level is None else level
        mesh = np.meshgrid(*(a.values(level) for a in self.axes), indexing="ij")
        return {a.name: m.ravel() for a, m in zip(self.axes, mesh)}

    def coarse_index(self):
        """Flat indices of the level L-1 grid inside the level L grid."""
        if self.refinement_level == 0:
            return None
        idx = np.arange(self.size).reshape(self.shape())
        return idx[tuple(slice(None, None, 2) for _ in self.axes)].ravel()

    def with_level(self, level):
        return GridSpec(self.axes, level)


def make_grid(ranges, count, level=0, spacing="log"):
    """GridSpec from an ordered {name: (min, max)} mapping."""
    return GridSpec(tuple(Axis(k, float(lo), float(hi), int(count), spacing) for k, (lo, hi) in ranges.items()), level)


# --- reports ----------------------------------------------------------------


@dataclass
class RatioReport:
    check_id: str
    sup_ratio: float
    inf_ratio: float
    argmax_point: tuple
    argmin_point: tuple
    n_points: int
    refinement_drift: Optional[float]
    status: str
    axes: tuple = ()
    n_skipped: int = 0
    n_insufficient: int = 0
    detail: dict = field(default_factory=dict)

    def to_dict(self):
        return _clean(asdict(self))


def _clean(x):
    """JSON-safe copy: tuples to lists, numpy scalars to floats, non-finite to strings."""
    if isinstance(x, dict):
        return {k: _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    return x


@dataclass
class Check:
    """Numerator/denominator pair over named axes; both callables return logs.

    ``admissible`` returns the hypothesis mask. With ``tol`` set the check is
    an identity: it passes iff every ratio lies within tol of 1. ``one_sided``
    checks only bound the ratio from above.
    """

    check_id: str
    axes: tuple
    log_num: Callable
    log_den: Callable
    admissible: Optional[Callable] = None
    tol: Optional[float] = None
    one_sided: bool = False
    sup_ceiling: float = math.inf
    inf_floor: float = 0.0
    max_drift: float = MAX_DRIFT

    def log_ratio(self, pts, cfg=None):
        return self.log_num(pts, cfg) - self.log_den(pts, cfg)


def _extremes(lr, pts, names, sel=None):
    sel = np.flatnonzero(np.isfinite(lr) | np.isinf(lr)) if sel is None else sel
    sub = lr[sel]
    if sub.size == 0:
        return math.nan, math.nan, (), ()
    # NaN (a failed evaluation) must not hide: treat it as an unbounded ratio
    hi_key = np.where(np.isnan(sub), np.inf, sub)
    lo_key = np.where(np.isnan(sub), -np.inf, sub)
    imax = sel[int(np.argmax(hi_key))]
    imin = sel[int(np.argmin(lo_key))]
    with np.errstate(over="ignore", under="ignore"):
        sup = float(np.exp(hi_key.max()))
        inf = float(np.exp(lo_key.min()))
    at = lambda i: tuple(float(pts[n][i]) for n in names)  # noqa: E731
    return sup, inf, at(imax), at(imin)


def _drift(sup, inf, sup0, inf0, one_sided=False):
    parts = [abs(sup - sup0) / sup0 if sup0 > 0 and math.isfinite(sup0) else math.inf]
    if not one_sided:
        parts.append(abs(inf - inf0) / inf0 if inf0 > 0 and math.isfinite(inf0) else math.inf)
    if any(math.isnan(p) for p in parts):
        return math.inf
    return max(parts)


def _status(check, sup, inf, drift):
    if check.tol is not None:
        ok = math.isfinite(sup) and math.isfinite(inf) and max(sup - 1.0, 1.0 - inf) <= check.tol
        return "pass" if ok else "fail"
    ok = math.isfinite(sup) and sup <= check.sup_ceiling
    if not check.one_sided:
        ok = ok and inf > 0 and inf >= check.inf_floor
    if drift is not None:
        ok = ok and drift < check.max_drift
    return "pass" if ok else "fail"


def report_from_log_ratio(check, pts, lr, n_skipped=0, coarse=None, detail=None):
    """Build a RatioReport from per-point log ratios (NaN where inadmissible)."""
    names = tuple(check.axes)
    admissible = ~np.isnan(lr) if lr.size else np.zeros(0, bool)
    sel = np.flatnonzero(admissible)
    sup, inf, amax, amin = _extremes(lr, pts, names, sel)
    drift = None
    if coarse is not None:
        csel = coarse[admissible[coarse]]
        sup0, inf0, _, _ = _extremes(lr, pts, names, csel)
        drift = _drift(sup, inf, sup0, inf0, check.one_sided)
    status = _status(check, sup, inf, drift) if sel.size else "pass"
    return RatioReport(
        check.check_id, sup, inf, amax, amin, int(sel.size), drift, status, names, int(n_skipped), 0, detail or {}
    )


def evaluate(check, pts, cfg=None):
    """(log numerator, log denominator, mask) at the admissible points; NaN elsewhere."""
    n = len(next(iter(pts.values()))) if pts else 0
    mask = np.ones(n, bool) if check.admissible is None else np.asarray(check.admissible(pts), bool)
    num = np.full(n, np.nan)
    den = np.full(n, np.nan)
    if mask.any():
        sub = {k: v[mask] for k, v in pts.items()}
        num[mask] = check.log_num(sub, cfg)
        den[mask] = check.log_den(sub, cfg)
    return num, den, mask


def _sweep_points(check, pts, coarse, cfg=None):
    num, den, mask = evaluate(check, pts, cfg)
    lr = np.where(mask, num - den, np.nan)
    # a ratio that itself is NaN at an admissible point is an evaluation failure;
    # keep it visible as an unbounded ratio
    bad = mask & np.isnan(lr)
    lr[bad] = np.inf
    return report_from_log_ratio(check, pts, lr, int((~mask).sum()), coarse)


def sweep_ratio(check, grid, cfg=None, extra=None):
    """Evaluate ``check`` at every admissible point of ``grid``; skipped points are counted.

    ``extra`` is an optional (points, coarse index) pair swept together with
    the grid, e.g. from ``band_points``.
    """
    pts = grid.points()
    coarse = grid.coarse_index()
    if extra is not None:
        xpts, xcoarse = extra
        n = grid.size
        pts = {k: np.concatenate([v, xpts[k]]) for k, v in pts.items()}
        if coarse is not None:
            coarse = np.concatenate([coarse, n + xcoarse])
    rep = _sweep_points(check, pts, coarse, cfg)
    rep.detail["grid_shape"] = list(grid.shape())
    rep.detail["refinement_level"] = grid.refinement_level
    if extra is not None:
        rep.detail["band_points"] = int(len(extra[0]["t"]))
    return rep


BAND_D = (0.05, 1e3)    # d = (r - s)/t^(1/alpha): scale of the finest step near 0, largest |d|


def band_points(grid, alpha, level=None):
    """Near-diagonal companion of a (t, r, s) grid.

    Axes (t, s, d) with r = s + d t^(1/alpha); t and s are the grid's own axes
    and d is sinh-spaced on [-D, D], so the band |r - s| ~ t^(1/alpha), which
    is far thinner than a log-r step when s >> t^(1/alpha), is resolved.
    Points whose r leaves the grid's r range are dropped. Levels nest like the
    grid's. Returns (points, coarse index or None).
    """
    level = grid.refinement_level if level is None else level
    ax = {a.name: a for a in grid.axes}
    n = (ax["t"].count - 1) * 2**level
    q = np.arange(-n, n + 1) / n
    c, big = BAND_D
    d = c * np.sinh(math.asinh(big / c) * q)
    t, s, dd = np.meshgrid(ax["t"].values(level), ax["s"].values(level), d, indexing="ij")
    r = s + dd * t ** (1.0 / alpha)
    keep = (r >= ax["r"].min) & (r <= ax["r"].max)
    pts = {"t": t[keep], "r": r[keep], "s": s[keep]}
    coarse = None
    if level > 0:
        pos = np.cumsum(keep.ravel()) - 1
        sub = np.zeros(keep.shape, bool)
        sub[::2, ::2, ::2] = True
        coarse = pos[(sub & keep).ravel()]
    return pts, coarse


def sample_report(check_id, names, pts, lr, check, lr_half=None, detail=None):
    """Report for sampled (not gridded) checks; drift compares to the first half of the samples."""
    chk = Check(check_id, names, None, None, tol=check.tol, one_sided=check.one_sided, max_drift=check.max_drift)
    rep = report_from_log_ratio(chk, pts, lr, detail=detail)
    if lr_half is not None:
        sup0, inf0, _, _ = _extremes(lr_half, pts, names, np.flatnonzero(~np.isnan(lr_half)))
        rep.refinement_drift = _drift(rep.sup_ratio, rep.inf_ratio, sup0, inf0, check.one_sided)
        rep.status = _status(chk, rep.sup_ratio, rep.inf_ratio, rep.refinement_drift)
    return rep


# --- check catalogue ----------------------------------------------------------

TRG = {"t": (1e-2, 1e2), "r": (1e-3, 1e3), "s": (1e-3, 1e3)}
UNIT = {"t": (1e-2, 1e2), "r": (1e-2, 1e2), "s": (1e-2, 1e2)}
RS = {"r": (1e-3, 1e3), "s": (1e-3, 1e3)}


def _p(pts, *names):
    return tuple(pts[n] for n in names)


def _kernel_log(params, kernel=None):
    k = kernel or BatchedKernel(params)
    return lambda pts, cfg: k.log(*_p(pts, "t", "r", "s"))


def _adaptive_log(params):
    def f(pts, cfg):
        t, r, s = _p(pts, "t", "r", "s")
        return np.log([p_alpha(params, a, b, c, cfg) for a, b, c in zip(t, r, s)])

    return f


# Item grids are laid out in ratio coordinates so that the hypothesis
# boundary (where the suprema sit) is itself a grid plane on every level:
# q = z/s in (0, 1/2] for items 2-3, q = r/s in (0, 1] for item 4 and
# m = |z - s|/|r - s| > 1/2 for item 5, on both sides of s.
M5_MIN = 0.5 * (1.0 + 1e-9)


def item_ranges(item):
    if item.startswith("1"):
        return {"tau": (ITEM1_C, 1.0 / ITEM1_C), "z": (1e-3, 1e3), "s": (1e-3, 1e3)}
    if item.startswith("2"):
        return {"tau": (1e-2, 1e2), "s": (1e-3, 1e3), "q": (1e-4, 0.5)}
    if item == "3":
        return {"tau": (1e-2, 1.0), "s": (ITEM3_C, 1e3), "q": (1e-4, 0.5)}
    if item == "4":
        return {"s": (1e-3, 1e3), "q": (1e-4, 1.0)}
    return {"t": (1e-2, 1e2), "r": (1e-3, 1e3), "s": (1e-3, 1e3), "m": (M5_MIN, 1e3)}


def item_points(item, pts):
    """Candidate comparability points (in the item's own argument order) for grid coordinates."""
    if item.startswith("1"):
        return [_p(pts, "tau", "z", "s")]
    if item == "4":
        s = pts["s"]
        return [(pts["q"] * s, s)]
    if item != "5":
        s = pts["s"]
        return [(pts["tau"], pts["q"] * s, s)]
    t, r, s, m = _p(pts, "t", "r", "s", "m")
    w = m * np.abs(r - s)
    return [(t, r, s, s + w), (t, r, s, s - w)]


def _item_log_ratio(item, params, kernel, pts):
    out = None
    for pt in item_points(item, pts):
        ok = np.all([x > 0 for x in pt], axis=0) & hypothesis_mask(item, pt)
        lr = np.full(ok.shape, -np.inf)
        if ok.any():
            lr[ok] = comparability_log_ratio(item, params, tuple(x[ok] for x in pt), kernel=kernel)
        out = lr if out is None else np.maximum(out, lr)
    return out


def _item_admissible(item, pts):
    ok = None
    for pt in item_points(item, pts):
        m = np.all([x > 0 for x in pt], axis=0) & hypothesis_mask(item, pt)
        ok = m if ok is None else ok | m
    return ok


def make_check(kind, zeta=1.0, alpha=1.0, item=None, check_id=None):
    """Sweepable check descriptor with its default axis ranges.

    kinds: identity, closed-form, alpha2-closed, envelope, consolidation,
    comparability (needs ``item``).
    """
    params = KernelParams(zeta, alpha)
    tag = check_id or f"{kind}[zeta={zeta:g},alpha={alpha:g}]"
    if kind == "identity":
        f = lambda pts, cfg: log_p2(zeta, *_p(pts, "t", "r", "s"))  # noqa: E731
        return Check(tag, ("t", "r", "s"), f, f, tol=0.0), dict(UNIT)
    if kind == "closed-form":
        den = lambda pts, cfg: log_p_alpha1_closed(zeta, *_p(pts, "t", "r", "s"))  # noqa: E731
        return Check(tag, ("t", "r", "s"), _adaptive_log(KernelParams(zeta, 1.0)), den, tol=1e-6), dict(UNIT)
    if kind == "alpha2-closed":
        num = lambda pts, cfg: log_p2(1.0, *_p(pts, "t", "r", "s"))  # noqa: E731
        den = lambda pts, cfg: log_p2_closed_zeta1(*_p(pts, "t", "r", "s"))  # noqa: E731
        # relative error is only meaningful where the value is a normal double
        adm = lambda pts: log_p2_closed_zeta1(*_p(pts, "t", "r", "s")) > math.log(np.finfo(float).tiny)  # noqa: E731
        return Check(tag, ("t", "r", "s"), num, den, admissible=adm, tol=1e-11), dict(UNIT)
    if kind == "envelope":
        den = lambda pts, cfg: log_sharp_envelope(params, *_p(pts, "t", "r", "s"))  # noqa: E731
        return Check(tag, ("t", "r", "s"), _kernel_log(params), den), dict(TRG)
    if kind == "consolidation":
        num = lambda pts, cfg: log_sharp_envelope(params, 1.0, *_p(pts, "r", "s"))  # noqa: E731
        den = lambda pts, cfg: log_regime_value(params, *_p(pts, "r", "s"))[0]  # noqa: E731
        return Check(tag, ("r", "s"), num, den), dict(RS)
    if kind == "comparability":
        if item not in ITEMS:
            raise DomainError(f"unknown comparability item {item!r}")
        ranges = item_ranges(item)
        names = tuple(ranges)
        k = BatchedKernel(params)
        num = lambda pts, cfg: _item_log_ratio(item, params, k, pts)  # noqa: E731
        den = lambda pts, cfg: np.zeros(len(pts[names[0]]))  # noqa: E731
        adm = lambda pts: _item_admissible(item, pts)  # noqa: E731
        tag = check_id or f"comparability-{item}[zeta={zeta:g},alpha={alpha:g}]"
        return Check(tag, names, num, den, admissible=adm, one_sided=True), ranges
    raise DomainError(f"unknown check kind {kind!r}")


SWEEP_KINDS = ("identity", "closed-form", "alpha2-closed", "envelope", "consolidation", "comparability")


# --- suite config ---------------------------------------------------------------

TYPES = (
    "identity",
    "closed-form",
    "alpha2-closed",
    "semigroup",
    "scaling",
    "laplace",
    "levy",
    "subordinator-envelope",
    "alpha2-envelope",
    "envelope",
    "consolidation",
    "3g",
    "weight",
    "comparability",
    "mc",
)
# constant fitting (the two *-envelope types) runs before the sweeps that
# compare against envelopes
_RANK = {t: i for i, t in enumerate(TYPES)}
_RANK.update({"subordinator-envelope": -2, "alpha2-envelope": -1})

_num = {"type": "number"}
_nums = {"oneOf": [_num, {"type": "array", "items": _num, "minItems": 1}]}
SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["checks"],
    "additionalProperties": False,
    "properties": {
        "name": {"type": "string"},
        "seed": {"type": "integer", "minimum": 0},
        "max_drift": {"type": "number", "exclusiveMinimum": 0},
        "quadrature": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "rel_tol": {"type": "number", "exclusiveMinimum": 0},
                "max_panels": {"type": "integer", "minimum": 1},
            },
        },
        "checks": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["type"],
                "additionalProperties": False,
                "properties": {
                    "type": {"enum": list(TYPES)},
                    "id": {"type": "string"},
                    "zeta": _nums,
                    "alpha": _nums,
                    "beta": _nums,
                    "items": {"type": "array", "items": {"enum": list(ITEMS)}, "minItems": 1},
                    "forms": {"type": "array", "items": {"enum": list(FORMS)}, "minItems": 1},
                    "grid": {
                        "type": "object",
                        "additionalProperties": False,
                        "properties": {
                            "count": {"type": "integer", "minimum": 2},
                            "refinement_level": {"type": "integer", "minimum": 0},
                            "ranges": {
                                "type": "object",
                                "additionalProperties": {
                                    "type": "array",
                                    "items": {"type": "number"},
                                    "minItems": 2,
                                    "maxItems": 2,
                                },
                            },
                        },
                    },
                    "samples": {"type": "integer", "minimum": 1},
                    "points": {"type": "integer", "minimum": 1},
                    "n": {"type": "integer", "minimum": 1},
                    "envelope_scale": {"type": "number", "exclusiveMinimum": 0},
                    "tol": {"type": "number", "minimum": 0},
                },
            },
        },
    },
}


def validate_config(config):
    """Raise ConfigError naming the first offending field."""
    v = jsonschema.Draft202012Validator(SCHEMA)
    errs = sorted(v.iter_errors(config), key=lambda e: list(e.absolute_path))
    if errs:
        e = errs[0]
        raise ConfigError(e.message, "/".join(str(p) for p in e.absolute_path) or "<root>")
    for i, chk in enumerate(config["checks"]):
        for key in ("zeta", "alpha", "beta"):
            for x in _as_list(chk.get(key, [])):
                ok = {"zeta": x > -0.5, "alpha": 0 < x <= 2, "beta": 0 < x < 1}[key]
                if not ok:
                    raise ConfigError(f"{x} is outside the allowed range", f"checks/{i}/{key}")
        for name, (lo, hi) in chk.get("grid", {}).get("ranges", {}).items():
            if not 0 < lo < hi:
                raise ConfigError("need 0 < min < max", f"checks/{i}/grid/ranges/{name}")


def _as_list(x):
    return list(x) if isinstance(x, (list, tuple)) else [x]


@dataclass
class Context:
    seed: int
    cfg: QuadratureConfig
    max_drift: float


def _rng(ctx, *key):
    return np.random.default_rng([ctx.seed, *key])


def _loguniform(rng, lo, hi, n):
    return np.exp(rng.uniform(math.log(lo), math.log(hi), n))


def _grid_of(spec, ranges, count=9, level=1):
    g = spec.get("grid", {})
    rng = dict(ranges)
    for k, v in g.get("ranges", {}).items():
        if k not in rng:
            raise ConfigError(f"unknown axis {k!r}", "grid/ranges")
        rng[k] = tuple(v)
    return make_grid(rng, g.get("count", count), g.get("refinement_level", level))


def _run_sweep(spec, ctx, check, ranges, count=9, level=1):
    check.max_drift = ctx.max_drift
    return sweep_ratio(check, _grid_of(spec, ranges, count, level), ctx.cfg)


def _combos(spec, zetas, alphas):
    return [(float(z), float(a)) for z in _as_list(spec.get("zeta", zetas)) for a in _as_list(spec.get("alpha", alphas))]


def _build_identity(spec, ctx):
    for z in _as_list(spec.get("zeta", [1.0])):
        chk, rg = make_check("identity", float(z), 2.0)
        yield _run_sweep(spec, ctx, chk, rg, 5, 1)


def _build_closed_form(spec, ctx):
    for z in _as_list(spec.get("zeta", [0.0, 0.5, 1.0, 2.5])):
        chk, rg = make_check("closed-form", float(z), 1.0)
        chk.tol = spec.get("tol", chk.tol)
        yield _run_sweep(spec, ctx, chk, rg, 10, 0)


def _build_alpha2_closed(spec, ctx):
    chk, rg = make_check("alpha2-closed", 1.0, 2.0)
    chk.tol = spec.get("tol", chk.tol)
    yield _run_sweep(spec, ctx, chk, rg, 10, 0)


def _build_semigroup(spec, ctx):
    n = spec.get("points", 50)
    names = ("t", "t2", "r", "s")
    for i, (z, a) in enumerate(_combos(spec, [-0.4, 0.0, 1.0, 3.0], [0.5, 1.0, 1.5, 2.0])):
        rng = _rng(ctx, 3, i)
        pts = {k: _loguniform(rng, 1e-2, 1e2, n) for k in names}
        if a == 2.0:
            norm = [normalization_integral_2(z, t, r) for t, r in zip(pts["t"], pts["r"])]
            chap = [chapman_ratio_2(z, *x) for x in zip(*_p(pts, *names))]
            ntol = 1e-7
        else:
            gk = GridKernel(KernelParams(z, a))
            norm = [normalization_integral(gk, t, r) for t, r in zip(pts["t"], pts["r"])]
            chap = [chapman_ratio(gk, *x) for x in zip(*_p(pts, *names))]
            ntol = 1e-5
        tag = f"[zeta={z:g},alpha={a:g}]"
        yield sample_report(
            "normalization" + tag, names, pts, np.log(norm), Check("", names, None, None, tol=spec.get("tol", ntol))
        )
        yield sample_report("chapman" + tag, names, pts, np.log(chap), Check("", names, None, None, tol=spec.get("tol", 1e-5)))


def _build_scaling(spec, ctx):
    n = spec.get("points", 1000)
    names = ("t", "r", "s")
    for i, (z, a) in enumerate(_combos(spec, [-0.4, 0.0, 0.5, 1.0, 3.0], [0.5, 1.0, 1.5, 2.0])):
        p = KernelParams(z, a)
        k = BatchedKernel(p)
        rng = _rng(ctx, 4, i)
        pts = {"t": _loguniform(rng, 1e-2, 1e2, n), "r": _loguniform(rng, 1e-3, 1e3, n), "s": _loguniform(rng, 1e-3, 1e3, n)}
        r1, s1, pref = scaling_reduce(p, *_p(pts, *names))
        lr = k.log(*_p(pts, *names)) - (np.log(pref) + k.log(np.ones(n), r1, s1))
        yield sample_report(
            f"scaling[zeta={z:g},alpha={a:g}]", names, pts, lr, Check("", names, None, None, tol=spec.get("tol", 1e-14))
        )


def _build_laplace(spec, ctx):
    g = spec.get("grid", {})
    lam = make_grid({"lam": (1e-2, 1e2)}, g.get("count", 9), 0).points()["lam"]
    tol = spec.get("tol", 1e-6)
    for b in _as_list(spec.get("beta", [0.25, 0.5, 0.75, 0.9])):
        b = float(b)
        val = np.array([laplace_transform(b, x) for x in lam])
        target = np.exp(-(lam**b))
        res = np.abs(val - target)
        with np.errstate(divide="ignore"):
            lr = np.log(val) - np.log(target)
        rep = sample_report(f"laplace[beta={b:g}]", ("lam",), {"lam": lam}, lr, Check("", ("lam",), None, None))
        rep.detail["max_abs_residual"] = float(res.max())
        rep.detail["tol"] = tol
        rep.status = "pass" if res.max() <= tol else "fail"
        yield rep


def _build_levy(spec, ctx):
    g = spec.get("grid", {})
    tau = make_grid({"tau": (1e-4, 1e4)}, g.get("count", 81), 0).points()["tau"]
    lr = log_stable_density_unit(0.5, tau) - log_levy_density_half(1.0, tau)
    yield sample_report("levy[beta=0.5]", ("tau",), {"tau": tau}, lr, Check("", ("tau",), None, None, tol=spec.get("tol", 1e-10)))


def _sandwich_report(check_id, names, pts, lr_lo, lr_hi, detail):
    """sup of value/upper must be <= 1 and inf of value/lower >= 1."""
    eps = 1e-12
    sup, _, amax, _ = _extremes(lr_hi, pts, names)
    _, inf, _, amin = _extremes(lr_lo, pts, names)
    ok = math.isfinite(sup) and sup <= 1.0 + eps and inf >= 1.0 - eps
    return RatioReport(
        check_id, sup, inf, amax, amin, int(lr_hi.size), None, "pass" if ok else "fail", names, detail=detail
    )


def _build_subordinator_envelope(spec, ctx):
    g = spec.get("grid", {})
    count = g.get("count", 81)
    scale = spec.get("envelope_scale", 1.0)
    for b in _as_list(spec.get("beta", [0.25, 0.5, 0.75, 0.9])):
        b = float(b)
        # fits are redone on every run, never cached
        coarse = fit_subordinator_envelope(b, count=count)
        fine = fit_subordinator_envelope(b, count=2 * count - 1)
        tag = f"[beta={b:g}]"
        drift = max(abs(fine.A_hi / coarse.A_hi - 1.0), abs(fine.A_lo / coarse.A_lo - 1.0))
        fit = RatioReport(
            "subordinator-fit" + tag, fine.A_hi, fine.A_lo, (), (), 2 * count - 1, drift,
            "pass" if (math.isfinite(fine.A_hi) and fine.A_lo > 0 and drift < ctx.max_drift) else "fail",
            detail={"C_lo": fine.C_lo, "C_hi": fine.C_hi},
        )
        yield fit
        tau = make_grid({"tau": (1e-4, 1e4)}, 2 * count - 1, 0).points()["tau"]
        ls = log_stable_density_unit(b, tau)
        lr_lo = ls - (math.log(fine.A_lo) + log_envelope_shape(fine, fine.C_lo, tau))
        lr_hi = ls - (math.log(scale * fine.A_hi) + log_envelope_shape(fine, fine.C_hi, tau))
        yield _sandwich_report("subordinator-sandwich" + tag, ("tau",), {"tau": tau}, lr_lo, lr_hi, {"envelope_scale": scale})


def _build_alpha2_envelope(spec, ctx):
    scale = spec.get("envelope_scale", 1.0)
    grid = _grid_of(spec, TRG, 9, 1)
    pts = grid.points()
    coarse = grid.coarse_index()
    names = grid.names
    t, r, s = _p(pts, "t", "r", "s")
    for z in _as_list(spec.get("zeta", [-0.4, 0.0, 0.5, 1.0, 3.0])):
        z = float(z)
        lp = log_p2(z, t, r, s)
        for form in spec.get("forms", list(FORMS)):
            tag = f"[zeta={z:g},form={form}]"
            fit = fit_gaussian_envelope(z, t, r, s, form)
            drift = None
            if coarse is not None:
                f0 = fit_gaussian_envelope(z, t[coarse], r[coarse], s[coarse], form)
                drift = max(abs(fit.A_hi / f0.A_hi - 1.0), abs(fit.A_lo / f0.A_lo - 1.0))
            ok = math.isfinite(fit.A_hi) and fit.A_lo > 0 and (drift is None or drift < ctx.max_drift)
            yield RatioReport(
                "alpha2-fit" + tag, fit.A_hi, fit.A_lo, (), (), grid.size, drift, "pass" if ok else "fail", names,
                detail={"rates": list(DEFAULT_RATES[form])},
            )
            lr_lo = lp - (math.log(fit.A_lo) + log_p2_gaussian_envelope(z, t, r, s, fit.c_lo, form))
            lr_hi = lp - (math.log(scale * fit.A_hi) + log_p2_gaussian_envelope(z, t, r, s, fit.c_hi, form))
            yield _sandwich_report("alpha2-sandwich" + tag, names, pts, lr_lo, lr_hi, {"envelope_scale": scale})


def _build_envelope(spec, ctx):
    for z, a in _combos(spec, [-0.4, 0.0, 0.5, 1.0, 3.0], [0.5, 1.0, 1.5]):
        chk, rg = make_check("envelope", z, a)
        chk.max_drift = ctx.max_drift
        grid = _grid_of(spec, rg, 9, 1)
        # the supremum sits in the near-diagonal band, so sweep it alongside the box
        yield sweep_ratio(chk, grid, ctx.cfg, band_points(grid, a))


def _build_consolidation(spec, ctx):
    for z, a in _combos(spec, [-0.4, 0.0, 0.5, 1.0, 3.0], [0.5, 1.0, 1.5]):
        chk, rg = make_check("consolidation", z, a)
        yield _run_sweep(spec, ctx, chk, rg, 33, 1)


def _halton(ctx, key, dim, n):
    eng = qmc.Halton(d=dim, scramble=True, seed=np.random.default_rng([ctx.seed, key]))
    return eng.random(n)


def _build_3g(spec, ctx):
    n = spec.get("samples", 100_000)
    names = ("r", "s", "z", "t", "tau")
    lo = np.log([1e-3, 1e-3, 1e-3, 1e-2, 1e-2])
    hi = np.log([1e3, 1e3, 1e3, 1e2, 1e2])
    u = _halton(ctx, 8, 5, 2 * n)           # first n samples, then the doubled set
    x = np.exp(lo + (hi - lo) * u)
    pts = {k: x[:, i] for i, k in enumerate(names)}
    first = np.arange(2 * n) < n
    for z, a in _combos(spec, [0.0, 0.5, 1.0], [0.5, 1.0, 1.5]):
        p = KernelParams(z, a)
        mf, pf = three_g_log_ratios(p, *_p(pts, *names), kernel=BatchedKernel(p))
        tag = f"[zeta={z:g},alpha={a:g}]"
        chk = Check("", names, None, None, one_sided=True, max_drift=ctx.max_drift)
        for label, lr in (("3g-min", mf), ("3g-product", pf)):
            yield sample_report(label + tag, names, pts, lr, chk, np.where(first, lr, np.nan), {"samples": [n, 2 * n]})


def _build_weight(spec, ctx):
    for z in _as_list(spec.get("zeta", [0.0, 0.5, 1.0, 3.0])):
        z = float(z)
        num = lambda pts, cfg, z=z: np.log(weight_f(z, *_p(pts, "r", "s", "z")))  # noqa: E731
        den = lambda pts, cfg, z=z: np.log(weight_f(z, *_p(pts, "r", "s", "z"), smooth=True))  # noqa: E731
        chk = Check(f"weight[zeta={z:g}]", ("r", "s", "z"), num, den)
        yield _run_sweep(spec, ctx, chk, {"r": (1e-3, 1e3), "s": (1e-3, 1e3), "z": (1e-3, 1e3)}, 9, 1)


_ITEM_COUNT = {"4": 33, "5": 7}   # default level-0 counts: 2-d item 4 is cheap, 4-d item 5 is not


def _build_comparability(spec, ctx):
    items = spec.get("items", list(ITEMS))
    for z, a in _combos(spec, [0.0, 0.5, 1.0], [0.5, 1.0, 1.5, 2.0]):
        for item in items:
            chk, rg = make_check("comparability", z, a, item)
            yield _run_sweep(spec, ctx, chk, rg, _ITEM_COUNT.get(item, 9), 1)


def _build_mc(spec, ctx):
    n = spec.get("n", 1_000_000)
    npts = spec.get("points", 20)
    names = ("t", "r", "s")
    for i, (z, a) in enumerate(_combos(spec, [0.0, 1.0], [0.5, 1.0, 1.5])):
        p = KernelParams(z, a)
        rng = _rng(ctx, 10, i)
        pts = {k: _loguniform(rng, 0.2, 5.0, npts) for k in names}
        seeds = rng.integers(0, 2**31, npts)
        zs, lr, bad = [], [], 0
        for j in range(npts):
            t, r, s = (float(pts[k][j]) for k in names)
            ref = math.exp(log_p_alpha1_closed(z, t, r, s)) if a == 1.0 else p_alpha(p, t, r, s, ctx.cfg)
            est = mc_kernel(p, t, r, s, n, int(seeds[j]))
            if est.status != "ok":
                bad += 1
                zs.append(math.nan)
                lr.append(math.nan)
                continue
            zs.append(est.z_score(ref))
            lr.append(math.log(est.mean / ref))
        zs = np.array(zs)
        rep = sample_report(f"mc[zeta={z:g},alpha={a:g}]", names, pts, np.array(lr), Check("", names, None, None))
        zmax = float(np.nanmax(np.abs(zs))) if np.isfinite(zs).any() else math.nan
        rep.n_insufficient = bad
        rep.detail.update({"n": n, "max_abs_z": zmax, "z_limit": Z_LIMIT})
        if bad > MC_EXCLUDE_LIMIT * npts:
            rep.status = "insufficient-precision"
        else:
            rep.status = "pass" if zmax <= Z_LIMIT else "fail"
        yield rep


BUILDERS = {
    "identity": _build_identity,
    "closed-form": _build_closed_form,
    "alpha2-closed": _build_alpha2_closed,
    "semigroup": _build_semigroup,
    "scaling": _build_scaling,
    "laplace": _build_laplace,
    "levy": _build_levy,
    "subordinator-envelope": _build_subordinator_envelope,
    "alpha2-envelope": _build_alpha2_envelope,
    "envelope": _build_envelope,
    "consolidation": _build_consolidation,
    "3g": _build_3g,
    "weight": _build_weight,
    "comparability": _build_comparability,
    "mc": _build_mc,
}


def _selected(spec, only):
    if not only:
        return True
    sid = spec.get("id", spec["type"])
    return any(sid == o or spec["type"] == o or sid.startswith(o) for o in only)


def run_suite(config, only=None):
    """Validate ``config``, run its checks in dependency order and return the report dict."""
    validate_config(config)
    ctx = Context(
        seed=int(config.get("seed", 0)),
        cfg=QuadratureConfig(**config.get("quadrature", {})),
        max_drift=float(config.get("max_drift", MAX_DRIFT)),
    )
    specs = [s for s in config["checks"] if _selected(s, only)]
    order = sorted(range(len(specs)), key=lambda i: (_RANK[specs[i]["type"]], i))
    records, timings = [], {}
    started = time.time()
    for i in order:
        spec = specs[i]
        t0 = time.perf_counter()
        for rep in BUILDERS[spec["type"]](spec, ctx):
            if "id" in spec:
                rep.check_id = f"{spec['id']}:{rep.check_id}"
            records.append(rep)
        timings[spec.get("id", f"{i}:{spec['type']}")] = time.perf_counter() - t0
    n_pts = sum(r.n_points + r.n_insufficient for r in records)
    n_bad = sum(r.n_insufficient for r in records)
    failed = [r.check_id for r in records if r.status == "fail"]
    frac = n_bad / n_pts if n_pts else 0.0
    status = "pass" if not failed and frac <= INSUFFICIENT_LIMIT else "fail"
    return {
        "suite": config.get("name", "custom"),
        "seed": ctx.seed,
        "status": status,
        "n_checks": len(records),
        "failed": failed,
        "insufficient_fraction": frac,
        "checks": [r.to_dict() for r in records],
        "meta": {
            "version": __version__,
            "started": time.strftime("%Y-%m-%dT%H:%M:%S", time.localtime(started)),
            "elapsed_seconds": time.time() - started,
            "timings": timings,
        },
    }


def dump_report(report):
    """JSON text of a report; strict JSON (non-finite numbers are strings)."""
    return json.dumps(_clean(report), indent=2, sort_keys=True, allow_nan=False) + "\n"


CSV_HEADER = ("check_id", "sup", "inf", "drift", "status")


def report_csv(report):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for c in report["checks"]:
        d = c["refinement_drift"]
        w.writerow([c["check_id"], repr_num(c["sup_ratio"]), repr_num(c["inf_ratio"]), "" if d is None else repr_num(d), c["status"]])
    return buf.getvalue()


def repr_num(x):
    return "%.17g" % x if isinstance(x, float) else str(x)


# --- built-in suites ----------------------------------------------------------------


def smoke_config(seed=0):
    """Small grids (at most 10 points per axis at the finest level) over every check type."""
    tiny = {"count": 5, "refinement_level": 1}
    return {
        "name": "smoke",
        "seed": seed,
        "checks": [
            {"type": "identity", "grid": {"count": 4, "refinement_level": 1}},
            {"type": "closed-form", "zeta": [0.0, 1.0], "grid": {"count": 3, "refinement_level": 0}},
            {"type": "alpha2-closed", "grid": {"count": 10, "refinement_level": 0}},
            {"type": "semigroup", "zeta": [0.0], "alpha": [1.5, 2.0], "points": 3},
            {"type": "scaling", "zeta": [0.5], "alpha": [0.5, 2.0], "points": 50},
            {"type": "laplace", "beta": [0.5, 0.75], "grid": {"count": 5}},
            {"type": "levy", "grid": {"count": 9}},
            {"type": "subordinator-envelope", "beta": [0.5], "grid": {"count": 5}},
            {"type": "alpha2-envelope", "zeta": [0.0, 1.0], "grid": tiny},
            {"type": "envelope", "zeta": [0.0, 1.0], "alpha": [0.5, 1.5], "grid": {"count": 9, "refinement_level": 0}},
            {"type": "consolidation", "zeta": [0.5], "alpha": [1.0], "grid": tiny},
            {"type": "3g", "zeta": [0.5], "alpha": [1.0, 1.5], "samples": 5000},
            {"type": "weight", "zeta": [1.0], "grid": tiny},
            {"type": "comparability", "zeta": [0.5], "alpha": [1.0, 2.0], "grid": {"count": 5, "refinement_level": 1}},
            {"type": "mc", "zeta": [0.0], "alpha": [1.0], "points": 3, "n": 20000},
        ],
    }


def full_config(seed=7):
    """The acceptance-scale suite."""
    return {
        "name": "full",
        "seed": seed,
        "checks": [
            {"type": "identity"},
            {"type": "closed-form"},
            {"type": "alpha2-closed"},
            {"type": "semigroup"},
            {"type": "scaling"},
            {"type": "laplace"},
            {"type": "levy"},
            {"type": "subordinator-envelope"},
            {"type": "alpha2-envelope", "grid": {"count": 13, "refinement_level": 1}},
            {"type": "envelope", "grid": {"count": 17, "refinement_level": 1}},
            {"type": "consolidation", "grid": {"count": 61, "refinement_level": 1}},
            {"type": "3g"},
            {"type": "weight"},
            {"type": "comparability"},
            {"type": "mc"},
        ],
    }


SUITES = {"smoke": smoke_config, "full": full_config}
