"""Variation and turn statistics over curve families, with verdicts.

For every curve ``r`` and refinement level the PL interpolant is traced
exactly and three numbers are recorded: the variation ``V_phi`` of the
derivative of ``f(r(t))``, the tangent variation ``V_r`` of the curve, and
the turn ``O_R`` of the lifted curve.  Bounded ratios

    rho = V_phi / (1 + V_r),    sigma = O_R / (1 + V_r)

across levels are evidence of a DC function; growth is evidence against.

The per-step sandwich between the turn and the variations uses the unit
tangent ``(u, a) / sqrt(1 + a^2)`` of the lifted curve, where ``a`` is the
slope along the curve and ``|a| <= L``:

    c4 * |da|  <=  |d(unit tangent)|  <=  c3 * (|du| + |da|)

with ``c4 = (1 + L^2)^(-3/2)`` (the least slope of ``a / sqrt(1 + a^2)`` on
``[-L, L]``) and ``c3 = 1 + max_{|a|<=L} |a| (1 + a^2)^(-3/2)`` (one plus the
Lipschitz constant of ``1 / sqrt(1 + a^2)``).
"""
from __future__ import annotations

import csv
import io
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .curves import (Curve, FamilySpec, derivative_variation, generate_family, lift,
                     tangent_variation, trace, turn)
from .fields import ScalarField
from .mesh import Domain, refinement_family
from .plfunction import interpolate
from .verdict import Thresholds, classify


def c3_constant(lipschitz: float) -> float:
    L = abs(lipschitz)
    peak = L * (1 + L * L) ** -1.5 if L <= 1 / math.sqrt(2) else 2 / (3 * math.sqrt(3))
    return 1.0 + peak


def c4_constant(lipschitz: float) -> float:
    return (1 + lipschitz * lipschitz) ** -1.5


def verify_constants(lipschitz: float, n_slopes: int = 41, n_angles: int = 25) -> dict:
    """Brute-force check of the sandwich constants over a slope/angle grid.

    Returns the extreme ratios seen; raises ``ArithmeticError`` if either
    constant is violated.
    """
    L = abs(lipschitz)
    slopes = np.linspace(-L, L, n_slopes)
    angles = np.linspace(0.0, math.pi, n_angles)
    a, b, phi = np.meshgrid(slopes, slopes, angles, indexing="ij")
    a, b, phi = a.ravel(), b.ravel(), phi.ravel()
    e0 = np.stack([np.ones_like(phi), np.zeros_like(phi)], axis=1)
    e1 = np.stack([np.cos(phi), np.sin(phi)], axis=1)
    u0 = np.hstack([e0, a[:, None]]) / np.sqrt(1 + a * a)[:, None]
    u1 = np.hstack([e1, b[:, None]]) / np.sqrt(1 + b * b)[:, None]
    gap = np.linalg.norm(u0 - u1, axis=1)
    du = np.linalg.norm(e0 - e1, axis=1)
    da = np.abs(a - b)
    mask = du + da > 0
    upper = float((gap[mask] / (du[mask] + da[mask])).max()) if mask.any() else 0.0
    mask = da > 0
    lower = float((gap[mask] / da[mask]).min()) if mask.any() else math.inf
    c3, c4 = c3_constant(L), c4_constant(L)
    if upper > c3 * (1 + 1e-12) or lower < c4 * (1 - 1e-12):
        raise ArithmeticError(f"sandwich constants fail at L={L}: "
                              f"upper {upper} vs c3 {c3}, lower {lower} vs c4 {c4}")
    return {"lipschitz": L, "c3": c3, "c4": c4, "max_upper_ratio": upper,
            "min_lower_ratio": lower}


@dataclass
class CurveRecord:
    level: int
    curve: int
    V_phi: float
    V_r: float
    rho: float
    turn: float
    sigma: float


@dataclass
class LevelSummary:
    level: int
    max_rho: float
    max_sigma: float
    lipschitz: float
    c3: float
    c4: float


@dataclass(eq=False)
class CriterionReport:
    """Per-curve records, per-level maxima and a verdict on ``statistic``."""

    statistic: str
    records: list[CurveRecord]
    levels: list[LevelSummary]
    verdict: str
    thresholds: Thresholds
    meta: dict = field(default_factory=dict)

    @property
    def series(self) -> list[float]:
        key = "max_rho" if self.statistic == "rho" else "max_sigma"
        return [getattr(s, key) for s in self.levels]

    def constants(self, level: int) -> LevelSummary:
        return next(s for s in self.levels if s.level == level)

    def to_dict(self) -> dict:
        return {
            "statistic": self.statistic,
            "verdict": self.verdict,
            "thresholds": self.thresholds.to_dict(),
            "levels": [asdict(s) for s in self.levels],
            "records": [asdict(r) for r in self.records],
            "meta": self.meta,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["level", "curve", "V_phi", "V_r", "rho", "O_R", "sigma"])
        for r in self.records:
            w.writerow([r.level, r.curve, repr(r.V_phi), repr(r.V_r), repr(r.rho),
                        repr(r.turn), repr(r.sigma)])
        return buf.getvalue()


def thread_count() -> int:
    """Worker cap from ``DCSPLIT_THREADS`` (default 1)."""
    try:
        return max(1, int(os.environ.get("DCSPLIT_THREADS", "1")))
    except ValueError:
        return 1


def _as_curves(domain: Domain, family) -> list[Curve]:
    if isinstance(family, FamilySpec):
        return generate_family(domain, **family.to_dict())
    curves = list(family)
    if not curves:
        raise ValueError("curve family is empty")
    return curves


def criterion_records(field: ScalarField, domain: Domain, family, mesh_levels):
    """Trace the interpolant at every level along every curve."""
    levels = [int(k) for k in mesh_levels]
    if levels != sorted(levels) or len(set(levels)) != len(levels):
        raise ValueError("mesh_levels must be strictly ascending")
    curves = _as_curves(domain, family)
    tvar = [tangent_variation(c) for c in curves]
    records, summaries = [], []
    meshes = refinement_family(domain, levels)
    with ThreadPoolExecutor(max_workers=thread_count()) as pool:
        for lvl in levels:
            plf = interpolate(field, meshes[lvl])
            L = plf.lipschitz()
            verify_constants(L, n_slopes=21, n_angles=13)

            def one(i, plf=plf):
                tr = trace(plf, curves[i])
                return derivative_variation(tr), turn(lift(tr))

            results = list(pool.map(one, range(len(curves))))
            level_recs = []
            for i, (v_phi, o_r) in enumerate(results):
                level_recs.append(CurveRecord(level=lvl, curve=i, V_phi=v_phi, V_r=tvar[i],
                                              rho=v_phi / (1 + tvar[i]), turn=o_r,
                                              sigma=o_r / (1 + tvar[i])))
            records.extend(level_recs)
            summaries.append(LevelSummary(level=lvl,
                                          max_rho=max(r.rho for r in level_recs),
                                          max_sigma=max(r.sigma for r in level_recs),
                                          lipschitz=L, c3=c3_constant(L), c4=c4_constant(L)))
    return records, summaries


def _report(statistic, field, family, records, summaries, thresholds) -> CriterionReport:
    th = thresholds or Thresholds()
    key = "max_rho" if statistic == "rho" else "max_sigma"
    series = [getattr(s, key) for s in summaries]
    meta = {"field": field.descriptor()}
    if isinstance(family, FamilySpec):
        meta["family"] = family.to_dict()
    return CriterionReport(statistic=statistic, records=records, levels=summaries,
                           verdict=classify(series, th), thresholds=th, meta=meta)


def dc_statistic(field: ScalarField, domain: Domain, family, mesh_levels,
                 thresholds: Thresholds | None = None, precomputed=None) -> CriterionReport:
    """Verdict on ``max rho`` across levels."""
    records, summaries = precomputed or criterion_records(field, domain, family, mesh_levels)
    return _report("rho", field, family, records, summaries, thresholds)


def turn_statistic(field: ScalarField, domain: Domain, family, mesh_levels,
                   thresholds: Thresholds | None = None, precomputed=None) -> CriterionReport:
    """Verdict on ``max sigma`` across levels."""
    records, summaries = precomputed or criterion_records(field, domain, family, mesh_levels)
    return _report("sigma", field, family, records, summaries, thresholds)


@dataclass
class Consistency:
    consistent: bool
    verdicts_match: bool
    violations: list[dict]

    def to_dict(self) -> dict:
        return asdict(self)


def verdict_consistency(report_v: CriterionReport, report_t: CriterionReport,
                        rel_tol: float = 1e-6) -> Consistency:
    """Check the turn/variation sandwich on every record and compare verdicts.

    Upper: ``O_R <= c3 (V_r + V_phi)``.  Lower: ``c4 V_phi <= O_R`` (which
    implies the weaker ``c4 V_phi - c3 V_r <= O_R``).
    """
    turns = {(r.level, r.curve): r.turn for r in report_t.records}
    violations = []
    for r in report_v.records:
        o_r = turns[(r.level, r.curve)]
        k = report_v.constants(r.level)
        upper = k.c3 * (r.V_r + r.V_phi)
        lower = k.c4 * r.V_phi
        if o_r - upper > rel_tol * max(1.0, upper):
            violations.append({"level": r.level, "curve": r.curve, "bound": "upper",
                               "turn": o_r, "limit": upper})
        if lower - o_r > rel_tol * max(1.0, lower):
            violations.append({"level": r.level, "curve": r.curve, "bound": "lower",
                               "turn": o_r, "limit": lower})
    match = report_v.verdict == report_t.verdict
    return Consistency(consistent=match and not violations, verdicts_match=match,
                       violations=violations)
