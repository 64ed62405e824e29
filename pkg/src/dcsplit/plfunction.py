"""Piecewise-linear interpolants on simplicial meshes and their hinges."""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .fields import ScalarField
from .mesh import SimplicialMesh

CONVEX, CONCAVE, FLAT = "convex", "concave", "flat"

#: relative tolerance for classifying a gradient jump as flat
HINGE_EPS = 1e-9


@dataclass(frozen=True)
class Hinge:
    """Two affine pieces meeting along an interior facet.

    ``normal`` is the unit facet normal oriented from simplex ``k`` into
    simplex ``l`` and ``jump`` the normal component of ``g_l - g_k``.
    """

    facet: int
    k: int
    l: int
    g_k: np.ndarray
    b_k: float
    g_l: np.ndarray
    b_l: float
    normal: np.ndarray
    point: np.ndarray
    jump: float
    kind: str


@dataclass(eq=False)
class HingeTable:
    """Column-oriented view of all hinges of a PL function."""

    facet: np.ndarray
    k: np.ndarray
    l: np.ndarray
    normal: np.ndarray
    point: np.ndarray
    jump: np.ndarray
    tangential: np.ndarray
    kind: np.ndarray

    def __len__(self) -> int:
        return len(self.facet)

    def mask(self, kind: str) -> np.ndarray:
        return self.kind == kind

    def counts(self) -> dict[str, int]:
        return {kk: int((self.kind == kk).sum()) for kk in (CONVEX, CONCAVE, FLAT)}


def _facet_normals(mesh: SimplicialMesh, facets: np.ndarray) -> np.ndarray:
    n = mesh.dim
    pts = mesh.vertices[mesh.facets[facets]]  # (F, n, n)
    if n == 1:
        return np.ones((len(facets), 1))
    if n == 2:
        d = pts[:, 1] - pts[:, 0]
        nu = np.stack([-d[:, 1], d[:, 0]], axis=1)
    else:
        nu = np.cross(pts[:, 1] - pts[:, 0], pts[:, 2] - pts[:, 0])
    return nu / np.linalg.norm(nu, axis=1, keepdims=True)


@dataclass(eq=False)
class PLFunction:
    """Continuous function that is affine on every simplex of ``mesh``.

    On simplex ``s`` the value is ``gradients[s] @ x + offsets[s]``.
    """

    mesh: SimplicialMesh
    vertex_values: np.ndarray
    gradients: np.ndarray
    offsets: np.ndarray

    @classmethod
    def from_values(cls, mesh: SimplicialMesh, values) -> "PLFunction":
        vals = np.asarray(values, dtype=float).reshape(-1)
        if len(vals) != len(mesh.vertices):
            raise ValueError("one value per mesh vertex is required")
        pts = mesh.vertices[mesh.simplices]
        v = vals[mesh.simplices]
        edges = pts[:, 1:] - pts[:, :1]  # rows are edge vectors
        grads = np.linalg.solve(edges, (v[:, 1:] - v[:, :1])[..., None])[..., 0]
        offs = v[:, 0] - np.einsum("si,si->s", grads, pts[:, 0])
        return cls(mesh=mesh, vertex_values=vals, gradients=grads, offsets=offs)

    @property
    def dim(self) -> int:
        return self.mesh.dim

    def piece(self, simplex: int) -> tuple[np.ndarray, float]:
        return self.gradients[simplex], float(self.offsets[simplex])

    def evaluate(self, points) -> np.ndarray:
        """Values at an array of points (shape (P, n))."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if self.dim == 1 and pts.shape[0] == 1 and pts.shape[1] != 1:
            pts = pts.T
        ids = self.mesh.locate_many(pts)
        return np.einsum("pi,pi->p", self.gradients[ids], pts) + self.offsets[ids]

    __call__ = evaluate

    def gradient_at(self, points) -> np.ndarray:
        ids = self.mesh.locate_many(points)
        return self.gradients[ids]

    def lipschitz(self) -> float:
        return float(np.linalg.norm(self.gradients, axis=1).max())

    @cached_property
    def hinge_table(self) -> HingeTable:
        mesh = self.mesh
        fid = mesh.interior_facets
        k, l = mesh.facet_simplices[fid, 0], mesh.facet_simplices[fid, 1]
        nu = _facet_normals(mesh, fid)
        flip = np.einsum("fi,fi->f", nu, mesh.centroids[l] - mesh.centroids[k]) < 0
        nu[flip] *= -1.0
        dg = self.gradients[l] - self.gradients[k]
        jump = np.einsum("fi,fi->f", dg, nu)
        tangential = np.linalg.norm(dg - jump[:, None] * nu, axis=1)
        eps = HINGE_EPS * (1.0 + np.linalg.norm(self.gradients[k], axis=1)
                           + np.linalg.norm(self.gradients[l], axis=1))
        kind = np.full(len(fid), FLAT, dtype=object)
        kind[jump > eps] = CONVEX
        kind[jump < -eps] = CONCAVE
        point = mesh.vertices[mesh.facets[fid]].mean(axis=1)
        return HingeTable(facet=fid, k=k, l=l, normal=nu, point=point, jump=jump,
                          tangential=tangential, kind=kind)

    def hinges(self) -> list[Hinge]:
        t = self.hinge_table
        return [
            Hinge(facet=int(t.facet[i]), k=int(t.k[i]), l=int(t.l[i]),
                  g_k=self.gradients[t.k[i]].copy(), b_k=float(self.offsets[t.k[i]]),
                  g_l=self.gradients[t.l[i]].copy(), b_l=float(self.offsets[t.l[i]]),
                  normal=t.normal[i].copy(), point=t.point[i].copy(),
                  jump=float(t.jump[i]), kind=str(t.kind[i]))
            for i in range(len(t))
        ]


def interpolate(field: ScalarField, mesh: SimplicialMesh) -> PLFunction:
    """Interpolant matching ``field`` at every mesh vertex."""
    if field.dim != mesh.dim:
        raise ValueError(f"field is {field.dim}-D but mesh is {mesh.dim}-D")
    return PLFunction.from_values(mesh, field(mesh.vertices))


def evaluate(plf: PLFunction, point) -> float:
    return float(plf.evaluate(np.asarray(point, dtype=float).reshape(1, -1))[0])


def hinges(plf: PLFunction) -> list[Hinge]:
    return plf.hinges()


def lipschitz_estimate(plf: PLFunction) -> float:
    """Exact Lipschitz constant of the interpolant: the largest piece gradient."""
    return plf.lipschitz()
