import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import dcsplit.criterion as crit
from dcsplit.criterion import (c3_constant, c4_constant, criterion_records, dc_statistic,
                               turn_statistic, verdict_consistency, verify_constants)
from dcsplit.curves import FamilySpec, generate_family
from dcsplit.fields import ScalarField, make_field
from dcsplit.mesh import build_domain, triangulate
from dcsplit.plfunction import PLFunction, interpolate
from dcsplit.verdict import (BOUNDED, DIVERGING, INCONCLUSIVE, Thresholds, classify, grows,
                             stabilizes)
from oracles import c3_dense, c4_dense, pl_total_variation_1d

SQUARE = build_domain([[0, 0], [1, 0], [1, 1], [0, 1]])
SMALL = FamilySpec(count=4, seed=0)


def _run(field, levels, family=SMALL, domain=None):
    d = domain or field.default_domain()
    pre = criterion_records(field, d, family, levels)
    rv = dc_statistic(field, d, family, levels, precomputed=pre)
    rt = turn_statistic(field, d, family, levels, precomputed=pre)
    return rv, rt


# ---------------------------------------------------------------- constants

@given(st.floats(0.0, 20.0))
def test_constants_match_dense_oracles(L):
    assert c3_constant(L) == pytest.approx(c3_dense(L), abs=1e-8)
    assert c4_constant(L) == pytest.approx(c4_dense(L), rel=1e-4)


def test_constant_landmarks():
    assert c4_constant(0.0) == 1.0 and c3_constant(0.0) == 1.0
    assert c3_constant(100.0) == pytest.approx(1 + 2 / (3 * math.sqrt(3)))
    assert c4_constant(1.0) == pytest.approx(2 ** -1.5)


@pytest.mark.parametrize("L", [0.0, 0.3, 1 / math.sqrt(2), 1.0, 2.8, 10.0])
def test_verify_constants_passes(L):
    out = verify_constants(L)
    assert out["max_upper_ratio"] <= out["c3"] * (1 + 1e-12)
    assert out["min_lower_ratio"] >= out["c4"] * (1 - 1e-12)


def test_verify_constants_lower_ratio_is_tangent_speed():
    # |d/da (1, a) / sqrt(1 + a^2)| = 1 / (1 + a^2), least at |a| = L; c4 sits below it
    out = verify_constants(2.0, n_slopes=401, n_angles=3)
    assert out["min_lower_ratio"] == pytest.approx(1 / (1 + 2.0 ** 2), rel=1e-2)
    assert out["c4"] < out["min_lower_ratio"]


def test_verify_constants_detects_wrong_constant(monkeypatch):
    monkeypatch.setattr(crit, "c4_constant", lambda L: 1.0)
    with pytest.raises(ArithmeticError):
        verify_constants(1.5)
    monkeypatch.undo()
    monkeypatch.setattr(crit, "c3_constant", lambda L: 0.5)
    with pytest.raises(ArithmeticError):
        verify_constants(1.5)


# ---------------------------------------------------------------- verdict rules

def test_thresholds_validation():
    with pytest.raises(ValueError):
        Thresholds(stabilization=0)
    with pytest.raises(ValueError):
        Thresholds(growth=1.0)
    with pytest.raises(ValueError):
        Thresholds(window=0)


def test_verdict_rules():
    th = Thresholds()
    assert classify([1, 2, 4, 8], th) == DIVERGING
    assert classify([1, 1.2, 1.25, 1.26], th) == BOUNDED
    assert classify([1, 1.4, 2.0], th) == INCONCLUSIVE
    # growth must be sustained on every step of the window
    assert not grows([1, 4, 3.9, 8], th)
    # compounded growth below growth**window is not enough
    assert not grows([1, 1.3, 1.7, 2.2], th)
    assert grows([1, 1.4, 2.0, 3.4], th)
    assert stabilizes([5.0, 5.5], th) and not stabilizes([5.0, 5.6], th)
    assert not stabilizes([3.0], th)


# ---------------------------------------------------------------- statistics

def test_affine_bounds():
    f = make_field("affine")
    rv, rt = _run(f, [1, 2, 3])
    g = math.sqrt(5)
    for r in rv.records:
        assert r.V_phi <= g * r.V_r + 1e-9
        assert r.rho <= g
        assert r.sigma <= c3_constant(g) * (1 + g)
    assert rv.verdict == rt.verdict == BOUNDED
    assert verdict_consistency(rv, rt).consistent


def test_zero_field_sigma_at_most_one():
    f = make_field("affine", g=[0.0, 0.0], b=0.0)
    rv, rt = _run(f, [1, 2])
    assert all(r.V_phi == 0.0 for r in rv.records)
    assert all(r.sigma <= 1.0 for r in rt.records)
    assert all(r.turn == pytest.approx(r.V_r, rel=1e-12) for r in rt.records)
    assert verdict_consistency(rv, rt).consistent


def test_saddle_bounded():
    f = make_field("saddle")
    rv, rt = _run(f, [2, 3, 4, 5])
    assert rv.verdict == rt.verdict == BOUNDED
    assert not verdict_consistency(rv, rt).violations


def test_osc1d_diverges_and_matches_jump_sum():
    f = make_field("osc1d")
    d = f.default_domain()
    rv, rt = _run(f, range(1, 7), family=FamilySpec(count=3, seed=0), domain=d)
    assert rv.verdict == rt.verdict == DIVERGING
    # curve 0 is the whole interval, open: V_r = 0 and rho is the PL total variation
    deepest = max(rv.levels, key=lambda s: s.level).level
    m = triangulate(d, deepest)
    x = np.sort(m.vertices[:, 0])
    tv = pl_total_variation_1d(x, f(x[:, None]))
    rec = next(r for r in rv.records if r.level == deepest and r.curve == 0)
    assert rec.V_r == 0.0
    assert rec.rho == pytest.approx(tv, rel=1e-12)
    assert rv.series[-1] == pytest.approx(tv, rel=1e-12)
    assert rv.series[-1] >= 10 * rv.series[0]


def test_osc1d_planar_both_diverge():
    f = make_field("osc1d", dim=2)
    rv, rt = _run(f, range(1, 7), family=FamilySpec(count=4, seed=0))
    assert rv.verdict == rt.verdict == DIVERGING
    assert verdict_consistency(rv, rt).consistent


def _random_pl_field(seed):
    m = triangulate(SQUARE, 2)
    vals = np.random.default_rng(seed).normal(size=len(m.vertices))
    plf = PLFunction.from_values(m, vals)
    return ScalarField(f"pl{seed}", 2, plf, None, {}, SQUARE.vertices.tolist()), plf


def test_sandwich_on_random_pl_fields():
    fam = generate_family(SQUARE, count=4, seed=0)
    for seed in range(100):
        f, plf = _random_pl_field(seed)
        pre = criterion_records(f, SQUARE, fam, [2])
        rv = dc_statistic(f, SQUARE, fam, [2], precomputed=pre)
        rt = turn_statistic(f, SQUARE, fam, [2], precomputed=pre)
        assert verdict_consistency(rv, rt).violations == []
        # interpolation at the generating level reproduces the field
        assert rv.levels[0].lipschitz == pytest.approx(plf.lipschitz(), rel=1e-12)


def test_aggregates_are_maxima_and_finite():
    f = make_field("gaussian_bump")
    rv, rt = _run(f, [1, 2, 3])
    for s in rv.levels:
        recs = [r for r in rv.records if r.level == s.level]
        assert s.max_rho == max(r.rho for r in recs)
        assert s.max_sigma == max(r.sigma for r in recs)
        assert all(math.isfinite(r.rho) and math.isfinite(r.sigma) for r in recs)
    assert rv.series == [s.max_rho for s in rv.levels]
    assert rt.series == [s.max_sigma for s in rt.levels]


def test_variation_bounded_by_interval_count():
    # every slope jump along a curve is at most 2L
    f = make_field("saddle")
    d = f.default_domain()
    from dcsplit.curves import trace
    plf = interpolate(f, triangulate(d, 3))
    for c in generate_family(d, count=4, seed=2):
        tr = trace(plf, c)
        n_jumps = len(tr.dphi) - 1 + (1 if c.closed else 0)
        from dcsplit.curves import derivative_variation
        assert derivative_variation(tr) <= 2 * plf.lipschitz() * n_jumps + 1e-9


def test_determinism_and_threads(monkeypatch):
    f = make_field("saddle")
    d = f.default_domain()
    a = dc_statistic(f, d, SMALL, [1, 2, 3]).to_json()
    monkeypatch.setenv("DCSPLIT_THREADS", "4")
    assert crit.thread_count() == 4
    b = dc_statistic(f, d, SMALL, [1, 2, 3]).to_json()
    assert a == b
    monkeypatch.setenv("DCSPLIT_THREADS", "lots")
    assert crit.thread_count() == 1


def test_csv_export():
    f = make_field("affine")
    rv, _ = _run(f, [1, 2])
    lines = rv.to_csv().splitlines()
    assert lines[0] == "level,curve,V_phi,V_r,rho,O_R,sigma"
    assert len(lines) == 1 + len(rv.records)
    first = lines[1].split(",")
    assert float(first[2]) == rv.records[0].V_phi


def test_input_validation():
    f = make_field("affine")
    d = f.default_domain()
    with pytest.raises(ValueError):
        criterion_records(f, d, SMALL, [2, 1])
    with pytest.raises(ValueError):
        criterion_records(f, d, SMALL, [1, 1])
    with pytest.raises(ValueError):
        criterion_records(f, d, [], [1])


def test_mismatched_verdicts_reported():
    f = make_field("saddle")
    rv, rt = _run(f, [1, 2])
    rt.verdict = DIVERGING if rv.verdict != DIVERGING else BOUNDED
    c = verdict_consistency(rv, rt)
    assert not c.verdicts_match and not c.consistent
