"""Polyline curves, traces of fields along them, and their variation functionals.

A :class:`Curve` is an arc-length parametrized polyline.  :func:`trace`
restricts a PL function to a curve exactly: the composite ``Phi(t) = f(r(t))``
is piecewise affine, with breakpoints at curve vertices and facet crossings.

Functionals
-----------
derivative_variation
    total variation of ``Phi'`` (sum of jumps between consecutive pieces)
tangent_variation
    sum of ``|u_{j+1} - u_j|`` over consecutive unit segment directions
turn
    the same sum for the unit tangents of the lifted curve ``(r, Phi)``

All three include the wrap-around term on closed curves, which makes them
independent of the starting point.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np
from scipy.spatial import ConvexHull

from .errors import DegenerateCurve
from .mesh import Domain, build_domain
from .plfunction import PLFunction

PLANES = ((0, 1), (0, 2), (1, 2))


@dataclass(eq=False)
class Curve:
    """Polyline ``points[0..m]``; closed curves repeat the first point at the end."""

    points: np.ndarray
    t: np.ndarray
    closed: bool
    projection_plane: tuple[int, int] | None = None

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def length(self) -> float:
        return float(self.t[-1])

    @property
    def n_segments(self) -> int:
        return len(self.points) - 1

    @property
    def seg_lengths(self) -> np.ndarray:
        return np.diff(self.t)

    @property
    def directions(self) -> np.ndarray:
        """Unit direction of every segment, shape (m, n)."""
        d = np.diff(self.points, axis=0)
        return d / np.linalg.norm(d, axis=1, keepdims=True)

    def at(self, s) -> np.ndarray:
        """Points at arc-length parameters ``s``."""
        s = np.clip(np.atleast_1d(np.asarray(s, dtype=float)), 0.0, self.length)
        j = np.clip(np.searchsorted(self.t, s, side="right") - 1, 0, self.n_segments - 1)
        return self.points[j] + (s - self.t[j])[:, None] * self.directions[j]


def arclength_parametrize(points, closed: bool = False,
                          projection_plane: tuple[int, int] | None = None) -> Curve:
    """Natural parametrization of a polyline.

    Consecutive duplicate points are dropped; a closed curve gets its first
    point appended when it is not already repeated at the end.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    keep = np.ones(len(pts), dtype=bool)
    keep[1:] = np.any(pts[1:] != pts[:-1], axis=1)
    pts = pts[keep]
    if closed and len(pts) > 1 and np.any(pts[0] != pts[-1]):
        pts = np.vstack([pts, pts[:1]])
    if len(pts) < 2:
        raise DegenerateCurve("a curve needs at least two distinct points")
    seg = np.linalg.norm(np.diff(pts, axis=0), axis=1)
    t = np.concatenate([[0.0], np.cumsum(seg)])
    if t[-1] <= 0:
        raise DegenerateCurve("curve has zero length")
    return Curve(points=pts, t=t, closed=closed, projection_plane=projection_plane)


def _chord_sum(units: np.ndarray, closed: bool) -> float:
    if len(units) < 2:
        return 0.0
    total = np.linalg.norm(np.diff(units, axis=0), axis=1).sum()
    if closed:
        total += np.linalg.norm(units[0] - units[-1])
    return float(total)


def tangent_variation(curve: Curve) -> float:
    return _chord_sum(curve.directions, curve.closed)


# --------------------------------------------------------------------------
# traces


@dataclass(eq=False)
class Trace:
    """``Phi = f o r`` along a curve.

    For ``kind == "pl"`` ``dphi[j]`` is the exact constant slope on
    ``[s[j], s[j+1]]``.  For ``kind == "sampled"`` ``dphi`` holds central
    difference samples at the positions ``s`` and ``step`` is the spacing.
    """

    s: np.ndarray
    values: np.ndarray
    dphi: np.ndarray
    directions: np.ndarray
    closed: bool
    kind: str = "pl"
    simplices: np.ndarray | None = None
    crossings: np.ndarray | None = None
    crossing_facets: np.ndarray | None = None
    step: float | None = None
    positions: np.ndarray | None = None

    @property
    def length(self) -> float:
        return float(self.s[-1]) if self.kind == "pl" else float("nan")


@dataclass(eq=False)
class _FacetGeometry:
    ids: np.ndarray
    base: np.ndarray
    normal: np.ndarray
    offset: np.ndarray
    coords: np.ndarray  # (F, n-1, n) maps x - base to in-facet coordinates
    lo: np.ndarray
    hi: np.ndarray


def _facet_geometry(mesh) -> _FacetGeometry:
    cached = getattr(mesh, "_dcsplit_facet_geometry", None)
    if cached is not None:
        return cached
    fid = mesh.interior_facets
    pts = mesh.vertices[mesh.facets[fid]]  # (F, n, n)
    n = mesh.dim
    base = pts[:, 0]
    if n == 1:
        normal = np.ones((len(fid), 1))
        coords = np.zeros((len(fid), 0, 1))
    else:
        edges = pts[:, 1:] - base[:, None]  # (F, n-1, n)
        if n == 2:
            d = edges[:, 0]
            normal = np.stack([-d[:, 1], d[:, 0]], axis=1)
        else:
            normal = np.cross(edges[:, 0], edges[:, 1])
        normal /= np.linalg.norm(normal, axis=1, keepdims=True)
        coords = np.linalg.pinv(np.transpose(edges, (0, 2, 1)))
    geo = _FacetGeometry(ids=fid, base=base, normal=normal,
                         offset=np.einsum("fi,fi->f", normal, base), coords=coords,
                         lo=pts.min(axis=1), hi=pts.max(axis=1))
    mesh._dcsplit_facet_geometry = geo
    return geo


def _segment_crossings(geo: _FacetGeometry, p: np.ndarray, q: np.ndarray, slack: float):
    """Parameters in (0, 1) where segment p->q meets interior facets."""
    d = q - p
    lo, hi = np.minimum(p, q) - slack, np.maximum(p, q) + slack
    cand = np.flatnonzero(np.all(geo.hi >= lo, axis=1) & np.all(geo.lo <= hi, axis=1))
    if len(cand) == 0:
        return np.empty(0), np.empty(0, dtype=np.int64)
    nu = geo.normal[cand]
    denom = nu @ d
    ok = np.abs(denom) > 1e-14 * np.linalg.norm(d)
    cand, nu, denom = cand[ok], nu[ok], denom[ok]
    lam = (geo.offset[cand] - nu @ p) / denom
    ok = (lam > 1e-12) & (lam < 1.0 - 1e-12)
    cand, lam = cand[ok], lam[ok]
    if geo.coords.shape[1] > 0 and len(cand):
        x = p + lam[:, None] * d
        c = np.einsum("fij,fj->fi", geo.coords[cand], x - geo.base[cand])
        inside = (c.min(axis=1) >= -1e-9) & (c.sum(axis=1) <= 1.0 + 1e-9)
        cand, lam = cand[inside], lam[inside]
    return lam, geo.ids[cand]


def trace(plf: PLFunction, curve: Curve) -> Trace:
    """Exact restriction of a PL function to a polyline."""
    geo = _facet_geometry(plf.mesh)
    slack = 1e-9 * max(1.0, float(np.abs(curve.points).max()))
    dedupe = 1e-12 * curve.length
    seg_lengths = curve.seg_lengths
    dirs = curve.directions
    bps, seg_of, cross_s, cross_f = [], [], [], []
    for j in range(curve.n_segments):
        p, q = curve.points[j], curve.points[j + 1]
        lam, fids = _segment_crossings(geo, p, q, slack)
        order = np.argsort(lam, kind="stable")
        s_loc = lam[order] * seg_lengths[j]
        cross_s.append(curve.t[j] + s_loc)
        cross_f.append(fids[order])
        local = np.concatenate([[0.0], s_loc, [seg_lengths[j]]])
        keep = np.ones(len(local), dtype=bool)
        keep[1:] = np.diff(local) > dedupe
        keep[-1] = True
        local = local[keep]
        if len(local) > 2 and local[-1] - local[-2] <= dedupe:
            local = np.delete(local, -2)
        bps.append(curve.t[j] + local[:-1])
        seg_of.append(np.full(len(local) - 1, j))
    s = np.concatenate(bps + [[curve.length]])
    seg_of = np.concatenate(seg_of)
    mids = curve.points[seg_of] + (0.5 * (s[:-1] + s[1:]) - curve.t[seg_of])[:, None] * dirs[seg_of]
    simp = plf.mesh.locate_many(mids)
    idirs = dirs[seg_of]
    dphi = np.einsum("qi,qi->q", plf.gradients[simp], idirs)
    positions = curve.at(s)
    values = plf.evaluate(positions)
    cs = np.concatenate(cross_s)
    return Trace(s=s, values=values, dphi=dphi, directions=idirs, closed=curve.closed,
                 kind="pl", simplices=simp, crossings=curve.at(cs) if len(cs) else np.empty((0, curve.dim)),
                 crossing_facets=np.concatenate(cross_f), positions=positions)


def trace_sampled(field, curve: Curve, step: float = 1e-3) -> Trace:
    """Central-difference samples of ``Phi'`` for a smooth field.

    The variation of such a trace is a lower bound of the true variation.
    """
    s_all, d_all, dir_all = [], [], []
    dirs = curve.directions
    for j, ell in enumerate(curve.seg_lengths):
        k = max(1, math.ceil(ell / step))
        loc = (np.arange(k) + 0.5) * ell / k
        eps = min(1e-6, 0.25 * ell / k)
        x = curve.points[j] + loc[:, None] * dirs[j]
        d = (field(x + eps * dirs[j]) - field(x - eps * dirs[j])) / (2.0 * eps)
        s_all.append(curve.t[j] + loc)
        d_all.append(d)
        dir_all.append(np.repeat(dirs[j][None], k, axis=0))
    s = np.concatenate(s_all)
    positions = curve.at(s)
    return Trace(s=s, values=field(positions), dphi=np.concatenate(d_all),
                 directions=np.concatenate(dir_all), closed=curve.closed,
                 kind="sampled", step=step, positions=positions)


def derivative_variation(trace: Trace) -> float:
    d = trace.dphi
    total = np.abs(np.diff(d)).sum()
    if trace.closed and len(d) > 1:
        total += abs(d[0] - d[-1])
    return float(total)


# --------------------------------------------------------------------------
# lifted curves


@dataclass(eq=False)
class LiftedCurve:
    """``R(t) = (r(t), Phi(t))`` with the (unnormalized) tangent of each piece."""

    points: np.ndarray
    tangents: np.ndarray
    closed: bool

    @classmethod
    def from_points(cls, points, closed: bool = False) -> "LiftedCurve":
        pts = np.asarray(points, dtype=float)
        d = np.diff(pts, axis=0)
        d = d[np.linalg.norm(d, axis=1) > 0]
        return cls(points=pts, tangents=d, closed=closed)


def lift(tr: Trace) -> LiftedCurve:
    pts = None
    if tr.positions is not None:
        pts = np.hstack([tr.positions, tr.values[:, None]])
    tangents = np.hstack([tr.directions, tr.dphi[:, None]])
    return LiftedCurve(points=pts, tangents=tangents, closed=tr.closed)


def lift_flat(curve: Curve) -> LiftedCurve:
    """The curve itself embedded at height zero."""
    pts = np.hstack([curve.points, np.zeros((len(curve.points), 1))])
    return LiftedCurve(points=pts, tangents=np.diff(pts, axis=0), closed=curve.closed)


def turn(lifted: LiftedCurve) -> float:
    tau = lifted.tangents
    units = tau / np.linalg.norm(tau, axis=1, keepdims=True)
    return _chord_sum(units, lifted.closed)


# --------------------------------------------------------------------------
# curve families


@dataclass(frozen=True)
class FamilySpec:
    kind: str = "mixed"
    count: int = 12
    seed: int = 0
    angle_bound: float = math.pi / 4
    segments: int = 64

    def __post_init__(self):
        if self.kind not in ("ellipses", "random_convex", "mixed"):
            raise ValueError(f"unknown family kind {self.kind!r}")
        if self.count < 1:
            raise ValueError("count must be at least 1")
        if not 0 < self.angle_bound < math.pi / 2:
            raise ValueError("angle_bound must lie in (0, pi/2)")
        if self.segments < 3:
            raise ValueError("segments must be at least 3")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "FamilySpec":
        return cls(**data)


def _planar_curve(domain2: Domain, rng, kind: str, segments: int):
    """Convex closed polygon strictly inside a 2-D domain."""
    lo, hi = domain2.bounds
    size = float(np.linalg.norm(hi - lo))
    margin = 1e-6 * size
    if kind == "ellipses":
        centre = domain2.sample(1, rng, margin=0.05 * size)[0]
        axes = rng.uniform(0.15, 0.45, size=2) * size
        rot = rng.uniform(0, math.pi)
        phase = rng.uniform(0, 2 * math.pi)
        ang = phase + 2 * math.pi * np.arange(segments) / segments
        local = np.stack([axes[0] * np.cos(ang), axes[1] * np.sin(ang)], axis=1)
        rmat = np.array([[math.cos(rot), -math.sin(rot)], [math.sin(rot), math.cos(rot)]])
        local = local @ rmat.T
        while True:
            pts = centre + local
            if np.all(domain2.signed_distance(pts) <= -margin):
                return pts
            local *= 0.8
    while True:
        cloud = domain2.sample(12, rng, margin=margin)
        hull = ConvexHull(cloud)
        if len(hull.vertices) >= 3 and hull.volume > 1e-6 * size ** 2:
            return cloud[hull.vertices]


def _kind_for(kind: str, i: int) -> str:
    if kind == "mixed":
        return "ellipses" if i % 2 == 0 else "random_convex"
    return kind


def generate_family(domain: Domain, count: int = 12, seed: int = 0, kind: str = "mixed",
                    angle_bound: float = math.pi / 4, segments: int = 64) -> list[Curve]:
    """Seeded family of test curves inside ``domain``.

    2-D: closed convex polygons.  3-D: closed polygons whose projection on a
    coordinate plane is convex and whose segments make an angle at most
    ``angle_bound`` with that plane.  1-D: the whole interval followed by
    random sub-intervals.
    """
    spec = FamilySpec(kind=kind, count=count, seed=seed, angle_bound=angle_bound,
                      segments=segments)
    rng = np.random.default_rng(spec.seed)
    n = domain.dim
    curves = []
    if n == 1:
        lo, hi = domain.bounds[0][0], domain.bounds[1][0]
        curves.append(arclength_parametrize([[lo], [hi]]))
        while len(curves) < spec.count:
            a, b = np.sort(rng.uniform(lo, hi, size=2))
            if b - a >= 0.1 * (hi - lo):
                curves.append(arclength_parametrize([[a], [b]]))
        return curves
    if n == 2:
        for i in range(spec.count):
            pts = _planar_curve(domain, rng, _kind_for(spec.kind, i), spec.segments)
            curves.append(arclength_parametrize(pts, closed=True))
        return curves
    for i in range(spec.count):
        curves.append(_lifted_planar_curve(domain, rng, PLANES[i % 3],
                                           _kind_for(spec.kind, i), spec))
    return curves


def _lifted_planar_curve(domain: Domain, rng, plane, kind: str, spec: FamilySpec) -> Curve:
    axis = ({0, 1, 2} - set(plane)).pop()
    proj = build_domain(domain.vertices[:, list(plane)])
    a_plane = domain.equations[:, list(plane)]
    a_z = domain.equations[:, axis]
    b = domain.equations[:, -1]
    budget = 0.9 * math.tan(spec.angle_bound)
    while True:
        flat = _planar_curve(proj, rng, kind, spec.segments)
        centre = flat.mean(axis=0)
        slope = rng.uniform(0.2, 1.0) * budget
        w = rng.normal(size=2)
        w *= 0.5 * slope / np.linalg.norm(w)
        k = rng.normal(size=2)
        k *= 4.0 / np.linalg.norm(k)
        amp = 0.5 * slope / 4.0
        phase = rng.uniform(0, 2 * math.pi)
        for _ in range(30):
            h0 = (flat - centre) @ w + amp * np.sin(flat @ k + phase)
            # fibre of D above each planar point: a_z * z <= -b - a_plane @ p
            rhs = -b[None] - flat @ a_plane.T - 1e-9
            with np.errstate(divide="ignore", invalid="ignore"):
                bound = rhs / a_z[None]
            up = np.where(a_z[None] > 1e-15, bound, np.inf).min(axis=1)
            down = np.where(a_z[None] < -1e-15, bound, -np.inf).max(axis=1)
            c_lo, c_hi = (down - h0).max(), (up - h0).min()
            if c_lo <= c_hi:
                height = 0.5 * (c_lo + c_hi) + h0
                pts = np.empty((len(flat), 3))
                pts[:, list(plane)] = flat
                pts[:, axis] = height
                return arclength_parametrize(pts, closed=True, projection_plane=tuple(plane))
            flat = centre + 0.8 * (flat - centre)
            w *= 0.8
            amp *= 0.8


def in_tilde_class(curve: Curve, angle_bound: float = math.pi / 4, tol: float = 1e-12) -> bool:
    """Projection is convex-position and no segment is steeper than ``angle_bound``."""
    if curve.dim == 2:
        return _convex_position(curve.points[:-1] if curve.closed else curve.points)
    if curve.projection_plane is None:
        return False
    plane = list(curve.projection_plane)
    flat = curve.points[:-1, plane] if curve.closed else curve.points[:, plane]
    return _convex_position(flat) and max_plane_angle(curve) <= angle_bound + tol


def max_plane_angle(curve: Curve) -> float:
    """Largest angle between a segment and the projection plane."""
    plane = list(curve.projection_plane)
    axis = ({0, 1, 2} - set(plane)).pop()
    d = curve.directions
    return float(np.arctan2(np.abs(d[:, axis]), np.linalg.norm(d[:, plane], axis=1)).max())


def _convex_position(pts: np.ndarray) -> bool:
    if len(pts) < 3:
        return False
    hull = ConvexHull(pts)
    return len(hull.vertices) == len(np.unique(pts, axis=0))


# --------------------------------------------------------------------------
# I/O


def write_curve_csv(curve: Curve, path) -> None:
    np.savetxt(path, curve.points, delimiter=",", fmt="%.17g")


def read_curve_csv(path) -> Curve:
    pts = np.loadtxt(path, delimiter=",", ndmin=2)
    closed = len(pts) > 2 and np.all(pts[0] == pts[-1])
    return arclength_parametrize(pts, closed=closed)


def write_family_json(spec: FamilySpec, path) -> None:
    Path(path).write_text(json.dumps(spec.to_dict(), indent=2))


def read_family_json(path) -> FamilySpec:
    return FamilySpec.from_dict(json.loads(Path(path).read_text()))
