"""Convex domains and nested simplicial triangulations.

A :class:`Domain` is a convex polytope given by its extreme points plus an
interior anchor point.  :func:`triangulate` builds a quasi-uniform mesh of it
and :func:`refine` performs one step of uniform edge-midpoint (red)
refinement, so that the meshes of a refinement family are nested.

Examples
--------
>>> dom = build_domain([[0, 0], [1, 0], [1, 1], [0, 1]])
>>> mesh = triangulate(dom, 2)
>>> mesh.simplices.shape
(32, 3)
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.spatial import ConvexHull, Delaunay, cKDTree

from .errors import AnchorOutside, DegenerateDomain, OutsideDomain

#: absolute tolerance on barycentric coordinates for containment
BARY_TOL = 1e-12


@dataclass(eq=False)
class Domain:
    """Convex polytope in R^n, n in {1, 2, 3}.

    ``equations`` holds the facet inequalities ``A x + b <= 0`` as rows
    ``[A | b]`` with unit outward normals.
    """

    vertices: np.ndarray
    anchor: np.ndarray
    equations: np.ndarray

    @property
    def dim(self) -> int:
        return self.vertices.shape[1]

    @property
    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        return self.vertices.min(axis=0), self.vertices.max(axis=0)

    @cached_property
    def is_box(self) -> bool:
        lo, hi = self.bounds
        if len(self.vertices) != 2 ** self.dim:
            return False
        corners = {tuple(c) for c in itertools.product(*zip(lo, hi))}
        return corners == {tuple(v) for v in self.vertices}

    def signed_distance(self, points) -> np.ndarray:
        """Max facet residual; negative inside, positive outside."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        a, b = self.equations[:, :-1], self.equations[:, -1]
        return (pts @ a.T + b).max(axis=1)

    def contains(self, points, tol: float = 1e-12) -> np.ndarray:
        return self.signed_distance(points) <= tol

    def sample(self, count: int, rng: np.random.Generator,
               margin: float = 0.0) -> np.ndarray:
        """Uniform samples by rejection from the bounding box."""
        lo, hi = self.bounds
        out = []
        have = 0
        while have < count:
            batch = rng.uniform(lo, hi, size=(max(2 * (count - have), 16), self.dim))
            batch = batch[self.signed_distance(batch) <= -margin]
            out.append(batch)
            have += len(batch)
        return np.concatenate(out)[:count]

    def to_dict(self) -> dict:
        return {"vertices": self.vertices.tolist(), "anchor": self.anchor.tolist()}


def build_domain(points, anchor=None) -> Domain:
    """Convex hull of ``points`` with an interior anchor.

    The anchor defaults to the centroid of the hull vertices.

    Raises
    ------
    DegenerateDomain
        If the points do not span R^n.
    AnchorOutside
        If ``anchor`` is not strictly inside the hull.
    """
    try:
        pts = np.asarray(points, dtype=float)
    except ValueError as exc:
        raise DegenerateDomain(f"points have inconsistent dimensions: {exc}") from None
    if pts.ndim == 1:
        pts = pts[:, None]
    if pts.ndim != 2 or pts.shape[1] not in (1, 2, 3):
        raise DegenerateDomain("points must be an (m, n) array with n in {1, 2, 3}")
    n = pts.shape[1]
    if len(pts) < n + 1:
        raise DegenerateDomain(f"need at least {n + 1} points in {n}-D")
    span = pts - pts[0]
    scale = max(np.abs(span).max(), 1.0)
    if np.linalg.matrix_rank(span, tol=1e-12 * scale) < n:
        raise DegenerateDomain("points are affinely dependent")

    if n == 1:
        lo, hi = pts.min(), pts.max()
        verts = np.array([[lo], [hi]])
        eqs = np.array([[-1.0, lo], [1.0, -hi]])
    else:
        hull = ConvexHull(pts)
        idx = hull.vertices if n == 2 else np.sort(hull.vertices)
        verts = pts[idx]
        # merge coplanar facet rows produced by qhull triangulation
        eqs = np.unique(np.round(hull.equations, 14), axis=0)

    if anchor is None:
        a = verts.mean(axis=0)
    else:
        a = np.asarray(anchor, dtype=float).reshape(-1)
        if a.shape != (n,):
            raise DegenerateDomain(f"anchor must have dimension {n}")
    dom = Domain(vertices=verts, anchor=a, equations=eqs)
    if dom.signed_distance(a)[0] >= -1e-12 * scale:
        raise AnchorOutside(f"anchor {a.tolist()} is not strictly inside the domain")
    return dom


def box_domain(lo, hi, anchor=None) -> Domain:
    """Axis-aligned box ``[lo, hi]`` (componentwise)."""
    lo = np.atleast_1d(np.asarray(lo, dtype=float))
    hi = np.atleast_1d(np.asarray(hi, dtype=float))
    corners = np.array(list(itertools.product(*zip(lo, hi))))
    return build_domain(corners, anchor)


@dataclass(eq=False)
class SimplicialMesh:
    """Simplicial mesh with facet adjacency.

    ``parent[s]`` is the index of the simplex of the previous level that
    contains simplex ``s`` (``None`` for a base mesh).
    """

    level: int
    vertices: np.ndarray
    simplices: np.ndarray
    parent: np.ndarray | None = None
    domain: Domain | None = field(default=None, repr=False)

    @property
    def dim(self) -> int:
        return self.vertices.shape[1]

    @property
    def n_simplices(self) -> int:
        return len(self.simplices)

    @cached_property
    def _facet_table(self):
        n = self.dim
        s = self.simplices
        faces = []
        for i in range(n + 1):
            faces.append(np.delete(s, i, axis=1))
        faces = np.sort(np.stack(faces, axis=1), axis=2)  # (S, n+1, n)
        flat = faces.reshape(-1, n)
        owner = np.repeat(np.arange(len(s)), n + 1)
        uniq, inv = np.unique(flat, axis=0, return_inverse=True)
        inv = inv.reshape(-1)
        pair = np.full((len(uniq), 2), -1, dtype=np.int64)
        order = np.lexsort((owner, inv))
        inv_sorted, own_sorted = inv[order], owner[order]
        first = np.ones(len(order), dtype=bool)
        first[1:] = inv_sorted[1:] != inv_sorted[:-1]
        pair[inv_sorted[first], 0] = own_sorted[first]
        pair[inv_sorted[~first], 1] = own_sorted[~first]
        counts = np.bincount(inv, minlength=len(uniq))
        if counts.max() > 2:
            raise ValueError("non-manifold mesh: a facet has more than two simplices")
        return uniq, pair

    @property
    def facets(self) -> np.ndarray:
        """Sorted vertex indices of every facet, shape (F, n)."""
        return self._facet_table[0]

    @property
    def facet_simplices(self) -> np.ndarray:
        """Incident simplices per facet; second column is -1 on the boundary."""
        return self._facet_table[1]

    @property
    def interior_facets(self) -> np.ndarray:
        return np.flatnonzero(self.facet_simplices[:, 1] >= 0)

    @property
    def boundary_facets(self) -> np.ndarray:
        return np.flatnonzero(self.facet_simplices[:, 1] < 0)

    @cached_property
    def _affine(self):
        pts = self.vertices[self.simplices]  # (S, n+1, n)
        origin = pts[:, 0]
        edges = np.transpose(pts[:, 1:] - origin[:, None], (0, 2, 1))  # columns
        return origin, np.linalg.inv(edges)

    @cached_property
    def centroids(self) -> np.ndarray:
        return self.vertices[self.simplices].mean(axis=1)

    @cached_property
    def diameters(self) -> np.ndarray:
        pts = self.vertices[self.simplices]
        d = np.linalg.norm(pts[:, :, None] - pts[:, None, :], axis=-1)
        return d.reshape(len(pts), -1).max(axis=1)

    @cached_property
    def volumes(self) -> np.ndarray:
        pts = self.vertices[self.simplices]
        edges = pts[:, 1:] - pts[:, :1]
        return np.abs(np.linalg.det(edges)) / math.factorial(self.dim)

    @cached_property
    def shape_ratios(self) -> np.ndarray:
        """Circumradius over inradius for every simplex."""
        n = self.dim
        pts = self.vertices[self.simplices]
        if n == 1:
            return np.ones(len(pts))
        e = pts[:, 1:] - pts[:, :1]
        rhs = 0.5 * (e ** 2).sum(axis=2)
        centre = np.linalg.solve(e, rhs[..., None])[..., 0]
        circum = np.linalg.norm(centre, axis=1)
        areas = np.zeros(len(pts))
        for i in range(n + 1):
            face = np.delete(pts, i, axis=1)
            fe = face[:, 1:] - face[:, :1]
            gram = fe @ np.transpose(fe, (0, 2, 1))
            areas += np.sqrt(np.abs(np.linalg.det(gram))) / math.factorial(n - 1)
        inrad = n * self.volumes / areas
        return circum / inrad

    @property
    def shape_bound(self) -> float:
        return float(self.shape_ratios.max())

    @property
    def h(self) -> float:
        """Maximum simplex diameter."""
        return float(self.diameters.max())

    def barycentric(self, points, simplex_ids) -> np.ndarray:
        """Barycentric coordinates of ``points[i]`` in simplex ``simplex_ids[i]``."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        ids = np.asarray(simplex_ids)
        origin, inv = self._affine
        lam = np.einsum("pij,pj->pi", inv[ids], pts - origin[ids])
        return np.concatenate([1.0 - lam.sum(axis=1, keepdims=True), lam], axis=1)

    @cached_property
    def _centroid_tree(self):
        return cKDTree(self.centroids)

    def locate_many(self, points, tol: float = BARY_TOL) -> np.ndarray:
        """Containing simplex per point, lowest index on ties.

        Raises
        ------
        OutsideDomain
            If some point is not in any simplex.
        """
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if pts.shape[1] != self.dim:
            raise OutsideDomain(f"expected {self.dim}-D points, got {pts.shape[1]}-D")
        # a simplex containing p has its centroid within one diameter of p
        radius = self.h * (1.0 + 1e-9) + 1e-12
        cands = self._centroid_tree.query_ball_point(pts, radius)
        lens = np.fromiter((len(c) for c in cands), dtype=np.int64, count=len(pts))
        sid = np.fromiter((i for c in cands for i in c), dtype=np.int64, count=int(lens.sum()))
        pid = np.repeat(np.arange(len(pts)), lens)
        lam = self.barycentric(pts[pid], sid)
        inside = lam.min(axis=1) >= -tol
        n_s = self.n_simplices
        out = np.full(len(pts), n_s, dtype=np.int64)
        np.minimum.at(out, pid, np.where(inside, sid, n_s))
        if np.any(out == n_s):
            bad = pts[np.flatnonzero(out == n_s)[0]]
            raise OutsideDomain(f"point {bad.tolist()} is outside the mesh")
        return out

    def to_dict(self) -> dict:
        return {
            "level": int(self.level),
            "vertices": self.vertices.tolist(),
            "simplices": self.simplices.tolist(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict) -> "SimplicialMesh":
        verts = np.asarray(data["vertices"], dtype=float)
        if verts.ndim == 1:
            verts = verts[:, None]
        return cls(level=int(data.get("level", 0)), vertices=verts,
                   simplices=np.asarray(data["simplices"], dtype=np.int64))


def _base_mesh(domain: Domain) -> SimplicialMesh:
    n = domain.dim
    lo, hi = domain.bounds
    if n == 1:
        verts = np.array([[lo[0]], [0.5 * (lo[0] + hi[0])], [hi[0]]])
        simp = np.array([[0, 1], [1, 2]])
    elif domain.is_box and n == 2:
        verts = np.array([[lo[0], lo[1]], [hi[0], lo[1]], [hi[0], hi[1]], [lo[0], hi[1]]])
        # anti-diagonal split: (lo, lo) lies in the first triangle
        simp = np.array([[0, 1, 3], [1, 2, 3]])
    elif domain.is_box and n == 3:
        verts = np.array(list(itertools.product(*zip(lo, hi))))
        index = {tuple(v): i for i, v in enumerate(map(tuple, verts))}
        simp = []
        for perm in itertools.permutations(range(n)):
            x = lo.copy()
            path = [index[tuple(x)]]
            for axis in perm:
                x = x.copy()
                x[axis] = hi[axis]
                path.append(index[tuple(x)])
            simp.append(path)
        simp = np.array(simp)
    else:
        verts = domain.vertices.copy()
        simp = np.sort(Delaunay(verts).simplices, axis=1)
        simp = simp[np.lexsort(simp.T[::-1])]
    return SimplicialMesh(level=0, vertices=verts, simplices=np.asarray(simp, dtype=np.int64),
                          domain=domain)


# local child tables in terms of (vertex | edge-midpoint) slots
_EDGES = {
    1: [(0, 1)],
    2: [(0, 1), (1, 2), (0, 2)],
    3: [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)],
}
_CHILDREN = {
    1: [("x0", "m01"), ("m01", "x1")],
    2: [("x0", "m01", "m02"), ("m01", "x1", "m12"), ("m02", "m12", "x2"),
        ("m01", "m12", "m02")],
    # Bey's ordering keeps Kuhn simplices in a bounded number of similarity classes
    3: [("x0", "m01", "m02", "m03"), ("m01", "x1", "m12", "m13"),
        ("m02", "m12", "x2", "m23"), ("m03", "m13", "m23", "x3"),
        ("m01", "m02", "m03", "m13"), ("m01", "m02", "m12", "m13"),
        ("m02", "m03", "m13", "m23"), ("m02", "m12", "m13", "m23")],
}


def refine(mesh: SimplicialMesh) -> SimplicialMesh:
    """One level of uniform red refinement; parent vertices keep their indices."""
    n = mesh.dim
    s = mesh.simplices
    edges = _EDGES[n]
    pairs = np.stack([s[:, [a, b]] for a, b in edges], axis=1)  # (S, E, 2)
    keys = np.sort(pairs.reshape(-1, 2), axis=1)
    uniq, inv = np.unique(keys, axis=0, return_inverse=True)
    inv = inv.reshape(len(s), len(edges))
    mids = 0.5 * (mesh.vertices[uniq[:, 0]] + mesh.vertices[uniq[:, 1]])
    nv = len(mesh.vertices)
    slots = {f"x{i}": s[:, i] for i in range(n + 1)}
    for j, (a, b) in enumerate(edges):
        slots[f"m{a}{b}"] = nv + inv[:, j]
    children = np.stack([np.stack([slots[k] for k in child], axis=1)
                         for child in _CHILDREN[n]], axis=1)  # (S, C, n+1)
    n_child = children.shape[1]
    return SimplicialMesh(
        level=mesh.level + 1,
        vertices=np.concatenate([mesh.vertices, mids]),
        simplices=children.reshape(-1, n + 1),
        parent=np.repeat(np.arange(len(s)), n_child),
        domain=mesh.domain,
    )


def triangulate(domain: Domain, level: int) -> SimplicialMesh:
    """Quasi-uniform mesh of ``domain`` after ``level`` red refinements."""
    if level < 0:
        raise ValueError("level must be nonnegative")
    mesh = _base_mesh(domain)
    for _ in range(level):
        mesh = refine(mesh)
    return mesh


def refinement_family(domain: Domain, levels) -> dict[int, SimplicialMesh]:
    """Nested meshes for each requested level, built by successive refinement."""
    levels = sorted(set(int(k) for k in levels))
    out = {}
    mesh = _base_mesh(domain)
    for k in range(levels[-1] + 1):
        if k > 0:
            mesh = refine(mesh)
        if k in levels:
            out[k] = mesh
    return out


def mesh_from_simplices(vertices, simplices, level: int = 0) -> SimplicialMesh:
    verts = np.asarray(vertices, dtype=float)
    if verts.ndim == 1:
        verts = verts[:, None]
    return SimplicialMesh(level=level, vertices=verts,
                          simplices=np.asarray(simplices, dtype=np.int64))


def locate(mesh: SimplicialMesh, point) -> int:
    """Index of a simplex containing ``point`` (lowest index on shared facets)."""
    return int(mesh.locate_many(np.asarray(point, dtype=float).reshape(1, -1))[0])
