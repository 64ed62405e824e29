"""Difference-of-convex splitting of PL functions by summing convex hinges.

Every convex hinge of ``f_N`` is extended to a wedge on the whole domain.
Their sum ``f1`` is convex, and ``f2 = f1 - f_N`` is convex as well because
at every facet of ``f_N`` the kink of ``f1`` is at least the kink of
``f_N``.  Both are normalized to vanish at the anchor.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NotConvexHinge
from .fields import ScalarField
from .mesh import Domain, refinement_family
from .plfunction import CONVEX, Hinge, PLFunction, interpolate
from .verdict import CONVERGING, DIVERGING, INCONCLUSIVE, Thresholds, grows

_EVAL_CHUNK = 1 << 22


@dataclass(frozen=True)
class WedgeFunction:
    """Convex hinge extended to all of R^n.

    The value is ``max(p_k, p_l) - (p_k + p_l) / 2 = |p_l - p_k| / 2`` for the
    affine pieces ``p_k``, ``p_l``: the dihedral angle with its mean affine
    part removed, so a sum of many wedges carries no accumulated tilt.
    """

    g_k: np.ndarray
    b_k: float
    g_l: np.ndarray
    b_l: float

    def _split(self, x):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        pk = x @ self.g_k + self.b_k
        pl = x @ self.g_l + self.b_l
        return pk, pl

    def dihedral(self, x) -> np.ndarray:
        """Maximum of the two affine pieces."""
        pk, pl = self._split(x)
        return np.maximum(pk, pl)

    def __call__(self, x) -> np.ndarray:
        pk, pl = self._split(x)
        return 0.5 * np.abs(pl - pk)

    def directional(self, x, d) -> float:
        """One-sided derivative at ``x`` along ``d``."""
        dg = 0.5 * (np.asarray(self.g_l) - np.asarray(self.g_k))
        s = float(np.dot(dg, x) + 0.5 * (self.b_l - self.b_k))
        dd = float(np.dot(dg, d))
        return abs(dd) if abs(s) <= 1e-12 * (1 + abs(dd)) else np.sign(s) * dd


def wedge(hinge: Hinge) -> WedgeFunction:
    if hinge.kind != CONVEX:
        raise NotConvexHinge(f"hinge on facet {hinge.facet} is {hinge.kind}")
    return WedgeFunction(np.asarray(hinge.g_k), hinge.b_k, np.asarray(hinge.g_l), hinge.b_l)


@dataclass(eq=False)
class ConvexSum:
    """``sum_h |<a_h, x> + c_h| - shift`` with ``a_h, c_h`` half the piece differences."""

    g_k: np.ndarray
    b_k: np.ndarray
    g_l: np.ndarray
    b_l: np.ndarray
    facets: np.ndarray
    shift: float = 0.0

    def __post_init__(self):
        self._a = 0.5 * (self.g_l - self.g_k)
        self._c = 0.5 * (self.b_l - self.b_k)

    def __len__(self) -> int:
        return len(self.b_k)

    def raw(self, points) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if len(self) == 0:
            return np.zeros(len(pts))
        out = np.empty(len(pts))
        chunk = max(1, _EVAL_CHUNK // len(self))
        for i in range(0, len(pts), chunk):
            out[i:i + chunk] = np.abs(pts[i:i + chunk] @ self._a.T + self._c).sum(axis=1)
        return out

    def __call__(self, points) -> np.ndarray:
        return self.raw(points) - self.shift

    def directional(self, x, d) -> float:
        """Exact one-sided derivative at ``x`` along ``d``."""
        if len(self) == 0:
            return 0.0
        s = self._a @ np.asarray(x, dtype=float) + self._c
        dd = self._a @ np.asarray(d, dtype=float)
        on = np.abs(s) <= 1e-12 * (1.0 + np.abs(dd))
        return float(np.where(on, np.abs(dd), np.sign(s) * dd).sum())

    def wedges(self) -> list[WedgeFunction]:
        return [WedgeFunction(self.g_k[i], float(self.b_k[i]), self.g_l[i], float(self.b_l[i]))
                for i in range(len(self))]


@dataclass(eq=False)
class DCPair:
    """``f1 - f2 = f_N - f_N(anchor)`` with ``f1(anchor) = f2(anchor) = 0``."""

    f1: ConvexSum
    source: PLFunction
    anchor: np.ndarray
    source_at_anchor: float

    @property
    def shift(self) -> float:
        return self.f1.shift

    def fN(self, points) -> np.ndarray:
        return self.source.evaluate(points)

    def f2(self, points) -> np.ndarray:
        return self.f1(points) - (self.source.evaluate(points) - self.source_at_anchor)

    def residual(self, points) -> np.ndarray:
        """``|f1 - f2 - (f_N - f_N(a))|`` pointwise."""
        pts = np.atleast_2d(points)
        fn = self.source.evaluate(pts)
        return np.abs(self.f1(pts) - self.f2(pts) - (fn - self.source_at_anchor))

    def flatten_1d(self) -> tuple[PLFunction, PLFunction]:
        """Exact PL forms of f1 and f2 on the source mesh (1-D only).

        All wedge breakpoints are mesh vertices, so vertex values determine
        both components.
        """
        mesh = self.source.mesh
        if mesh.dim != 1:
            raise ValueError("exact flattening is implemented for 1-D meshes only")
        v1 = self.f1(mesh.vertices)
        v2 = v1 - (self.source.vertex_values - self.source_at_anchor)
        return PLFunction.from_values(mesh, v1), PLFunction.from_values(mesh, v2)

    def to_dict(self, probe_points=None) -> dict:
        f1 = self.f1
        out = {
            "anchor": self.anchor.tolist(),
            "shift": float(self.shift),
            "wedges": [
                {"facet": int(f1.facets[i]), "g_k": f1.g_k[i].tolist(), "b_k": float(f1.b_k[i]),
                 "g_l": f1.g_l[i].tolist(), "b_l": float(f1.b_l[i])}
                for i in range(len(f1))
            ],
        }
        if probe_points is not None:
            pts = np.atleast_2d(np.asarray(probe_points, dtype=float))
            out["probe_values"] = {
                "points": pts.tolist(),
                "f1": self.f1(pts).tolist(),
                "f2": self.f2(pts).tolist(),
                "fN": self.fN(pts).tolist(),
            }
        return out


def decompose(plf: PLFunction, anchor) -> DCPair:
    """Sum the wedges of all convex hinges of ``plf`` (ordered by facet id)."""
    a = np.asarray(anchor, dtype=float).reshape(-1)
    t = plf.hinge_table
    sel = np.flatnonzero(t.mask(CONVEX))
    k, l = t.k[sel], t.l[sel]
    f1 = ConvexSum(g_k=plf.gradients[k], b_k=plf.offsets[k],
                   g_l=plf.gradients[l], b_l=plf.offsets[l], facets=t.facet[sel])
    f1.shift = float(f1.raw(a[None])[0])
    return DCPair(f1=f1, source=plf, anchor=a,
                  source_at_anchor=float(plf.evaluate(a[None])[0]))


@dataclass
class ConvexityReport:
    max_violation: float
    witness: tuple[list, list] | None
    samples: int
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.max_violation <= self.tolerance

    def to_dict(self) -> dict:
        return {"max_violation": self.max_violation, "witness": self.witness,
                "samples": self.samples, "tolerance": self.tolerance, "passed": self.passed}


def midpoint_violations(fn, x, y) -> np.ndarray:
    """``fn((x+y)/2) - (fn(x)+fn(y))/2`` for paired rows of ``x`` and ``y``."""
    return fn(0.5 * (x + y)) - 0.5 * (fn(x) + fn(y))


def convexity_check(fn, domain: Domain, samples: int, seed: int = 0,
                    tolerance: float = 1e-9) -> ConvexityReport:
    """Largest midpoint-convexity violation over random pairs in ``domain``."""
    if samples < 1:
        raise ValueError("samples must be at least 1")
    rng = np.random.default_rng(seed)
    x = domain.sample(samples, rng)
    y = domain.sample(samples, rng)
    viol = midpoint_violations(fn, x, y)
    i = int(np.argmax(viol))
    return ConvexityReport(max_violation=float(viol[i]),
                           witness=(x[i].tolist(), y[i].tolist()),
                           samples=samples, tolerance=tolerance)


@dataclass(eq=False)
class ConvergenceReport:
    levels: list[int]
    sup_deltas: list[float]
    sup_norms: list[float]
    verdict: str
    field_range: float
    residual: float
    final_pair: DCPair = field(repr=False)
    probe_points: np.ndarray = field(repr=False)

    def to_dict(self) -> dict:
        return {
            "levels": self.levels,
            "sup_deltas": self.sup_deltas,
            "sup_norms": self.sup_norms,
            "verdict": self.verdict,
            "field_range": self.field_range,
            "residual": self.residual,
            "final_wedges": len(self.final_pair.f1),
        }


def converge(field: ScalarField, domain: Domain, min_level: int, max_level: int,
             probe_count: int = 400, seed: int = 0,
             thresholds: Thresholds | None = None) -> ConvergenceReport:
    """Track normalized ``f1`` across refinement levels on a fixed probe set.

    Verdict: ``diverging`` when the sup-norm of ``f1`` grows by the growth
    rule; ``converging`` when the last sup-deltas are non-increasing and the
    final one is at most 1e-2 of the field range; else ``inconclusive``.
    """
    if not min_level < max_level:
        raise ValueError("min_level must be smaller than max_level")
    th = thresholds or Thresholds()
    probes = domain.sample(probe_count, np.random.default_rng(seed))
    meshes = refinement_family(domain, range(min_level, max_level + 1))
    levels, values, pair = [], [], None
    for lvl, mesh in meshes.items():
        pair = decompose(interpolate(field, mesh), domain.anchor)
        levels.append(lvl)
        values.append(pair.f1(probes))
    values = np.array(values)
    deltas = np.abs(np.diff(values, axis=0)).max(axis=1).tolist()
    norms = np.abs(values).max(axis=1).tolist()
    fvals = field(probes)
    frange = float(fvals.max() - fvals.min())

    tail = deltas[-2:]
    if grows(norms, th):
        verdict = DIVERGING
    elif all(b <= a for a, b in zip(tail, tail[1:])) and deltas[-1] <= 1e-2 * frange:
        verdict = CONVERGING
    else:
        verdict = INCONCLUSIVE
    return ConvergenceReport(levels=levels, sup_deltas=deltas, sup_norms=norms, verdict=verdict,
                             field_range=frange, residual=float(pair.residual(probes).max()),
                             final_pair=pair, probe_points=probes)
