import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from subbessel.errors import ConfigError, DomainError
from subbessel.verify import (
    CSV_HEADER,
    Axis,
    dump_report,
    make_check,
    make_grid,
    report_csv,
    run_suite,
    smoke_config,
    sweep_ratio,
)


@pytest.fixture(scope="module")
def smoke():
    return run_suite(smoke_config())


# --- grids -----------------------------------------------------------------


@given(st.floats(1e-6, 1.0), st.floats(1.5, 1e6), st.integers(2, 9), st.integers(0, 3), st.sampled_from(["log", "linear"]))
def test_axis_nesting(lo, hi, count, level, spacing):
    a = Axis("x", lo, hi, count, spacing)
    fine = a.values(level + 1)
    coarse = a.values(level)
    assert fine.size == (count - 1) * 2 ** (level + 1) + 1
    assert np.array_equal(fine[::2], coarse)
    assert fine[0] == lo and fine[-1] == hi
    assert np.all(np.diff(fine) > 0)


def test_axis_validation():
    with pytest.raises(DomainError):
        Axis("x", 1.0, 1.0, 3)
    with pytest.raises(DomainError):
        Axis("x", 0.0, 1.0, 3, "log")
    with pytest.raises(DomainError):
        Axis("x", 0.1, 1.0, 1)


def test_grid_points_order_and_coarse_index():
    g = make_grid({"a": (1.0, 4.0), "b": (1.0, 9.0)}, 3, 1)
    pts = g.points()
    assert g.shape() == (5, 5) and g.size == 25
    assert pts["a"][0] == pts["a"][4] == 1.0 and pts["b"][1] > pts["b"][0]
    ci = g.coarse_index()
    c = g.with_level(0).points()
    assert np.array_equal(pts["a"][ci], c["a"]) and np.array_equal(pts["b"][ci], c["b"])


# --- sweeps ------------------------------------------------------------------


def test_identity_sweep():
    chk, rg = make_check("identity", 0.7, 2.0)
    rep = sweep_ratio(chk, make_grid(rg, 4, 1))
    assert rep.sup_ratio == rep.inf_ratio == 1.0
    assert rep.refinement_drift == 0.0
    assert rep.status == "pass"


@settings(max_examples=10, deadline=None)
@given(st.floats(-0.4, 3.0), st.integers(0, 2))
def test_refinement_extremes_monotone(zeta, level):
    # the fine grid contains the coarse one, so sup can only grow and inf only shrink
    chk, rg = make_check("envelope", zeta, 1.0)
    g = make_grid(rg, 3, level + 1)
    fine = sweep_ratio(chk, g)
    coarse = sweep_ratio(chk, g.with_level(level))
    assert fine.sup_ratio >= coarse.sup_ratio and fine.inf_ratio <= coarse.inf_ratio


@pytest.mark.parametrize("item", ["2c", "3", "5"])
def test_skip_accounting(item):
    chk, rg = make_check("comparability", 0.5, 1.0, item)
    g = make_grid(rg, 4, 0)
    rep = sweep_ratio(chk, g)
    assert rep.n_points + rep.n_skipped == g.size


def test_alpha2_closed_skips_unrepresentable():
    chk, rg = make_check("alpha2-closed", 1.0, 2.0)
    g = make_grid(rg, 10, 0)
    rep = sweep_ratio(chk, g)
    assert rep.n_skipped > 0 and rep.n_points + rep.n_skipped == g.size
    assert rep.status == "pass"


def test_sweep_closed_form_example():
    chk, rg = make_check("closed-form", 1.0, 1.0)
    rep = sweep_ratio(chk, make_grid(rg, 6, 0))
    assert math.isfinite(rep.sup_ratio) and rep.inf_ratio > 0
    assert rep.sup_ratio == pytest.approx(1.0, abs=1e-10)


# --- suites --------------------------------------------------------------------


def test_empty_suite_passes():
    rep = run_suite({"checks": []})
    assert rep["status"] == "pass" and rep["checks"] == [] and rep["n_checks"] == 0


def test_smoke_suite(smoke):
    assert smoke["status"] == "pass", smoke["failed"]
    types = {c["check_id"].split("[")[0] for c in smoke["checks"]}
    assert {"identity", "3g-min", "3g-product", "alpha2-fit", "subordinator-fit"} <= types
    text = dump_report(smoke)
    back = json.loads(text)
    assert back["suite"] == "smoke" and "meta" in back
    for c in back["checks"]:
        assert c["n_points"] >= 0 and c["status"] in ("pass", "fail", "insufficient-precision")


def test_smoke_deterministic(smoke):
    again = run_suite(smoke_config())
    strip = lambda r: {k: v for k, v in r.items() if k != "meta"}  # noqa: E731
    assert dump_report(strip(again)) == dump_report(strip(smoke))


def test_csv_shape(smoke):
    lines = report_csv(smoke).splitlines()
    assert lines[0] == ",".join(CSV_HEADER)
    assert len(lines) == 1 + smoke["n_checks"]


def test_violated_envelope_fails_with_argmax():
    cfg = {"checks": [{"type": "subordinator-envelope", "beta": [0.5], "grid": {"count": 9}, "envelope_scale": 0.5}]}
    rep = run_suite(cfg)
    assert rep["status"] == "fail"
    bad = [c for c in rep["checks"] if c["status"] == "fail"]
    assert bad and bad[0]["check_id"].startswith("subordinator-sandwich")
    assert bad[0]["sup_ratio"] > 1 and len(bad[0]["argmax_point"]) == 1


def test_violated_alpha2_envelope_fails():
    cfg = {"checks": [{"type": "alpha2-envelope", "zeta": [1.0], "forms": ["product-rate"],
                       "grid": {"count": 4, "refinement_level": 1}, "envelope_scale": 0.5}]}
    rep = run_suite(cfg)
    sand = [c for c in rep["checks"] if c["check_id"].startswith("alpha2-sandwich")]
    assert rep["status"] == "fail" and sand[0]["status"] == "fail"
    assert len(sand[0]["argmax_point"]) == 3


def test_only_filter():
    cfg = smoke_config()
    rep = run_suite(cfg, only=["identity", "levy"])
    ids = {c["check_id"].split("[")[0] for c in rep["checks"]}
    assert ids == {"identity", "levy"}


@pytest.mark.parametrize(
    "cfg,path",
    [
        ({"checks": [{"type": "nope"}]}, "checks/0/type"),
        ({"checks": [{"type": "identity", "grid": {"count": 1}}]}, "checks/0/grid/count"),
        ({"checks": [{"type": "envelope", "zeta": [-0.7]}]}, "checks/0/zeta"),
        ({"checks": [{"type": "envelope", "alpha": [2.5]}]}, "checks/0/alpha"),
        ({"seed": "x", "checks": []}, "seed"),
        ({}, ""),
    ],
)
def test_schema_errors_name_field(cfg, path):
    with pytest.raises(ConfigError) as e:
        run_suite(cfg)
    assert e.value.path == path or str(e.value).startswith(path)


@pytest.mark.parametrize("level", [1, 2])
def test_band_points_nest(level):
    from subbessel.verify import band_points

    g = make_grid({"t": (1e-2, 1e2), "r": (1e-3, 1e3), "s": (1e-3, 1e3)}, 3, level)
    fine, coarse = band_points(g, 1.5)
    lower, _ = band_points(g, 1.5, level - 1)
    for k in ("t", "r", "s"):
        assert np.array_equal(fine[k][coarse], lower[k])
    assert fine["r"].min() >= 1e-3 and fine["r"].max() <= 1e3
