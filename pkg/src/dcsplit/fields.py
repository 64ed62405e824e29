"""Scalar fields: the built-in catalog and tabulated (CSV) data."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .errors import ConfigError, EvaluationFailure
from .mesh import Domain, box_domain, build_domain


@dataclass(eq=False)
class ScalarField:
    """A real function on R^n evaluated on arrays of shape (P, n)."""

    name: str
    dim: int
    func: Callable[[np.ndarray], np.ndarray]
    lipschitz_hint: float | None = None
    params: dict = field(default_factory=dict)
    domain_points: list | None = None
    dc_status: str = "unknown"

    def __call__(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        if pts.ndim == 1:
            pts = pts.reshape(-1, self.dim) if self.dim > 1 else pts[:, None]
        if pts.shape[1] != self.dim:
            raise EvaluationFailure(
                f"field {self.name!r} is {self.dim}-D, got points of dimension {pts.shape[1]}")
        try:
            vals = np.asarray(self.func(pts), dtype=float).reshape(-1)
        except Exception as exc:  # noqa: BLE001 - re-raised with context
            raise EvaluationFailure(f"field {self.name!r} failed: {exc}") from exc
        if vals.shape != (len(pts),) or not np.all(np.isfinite(vals)):
            raise EvaluationFailure(f"field {self.name!r} returned non-finite values")
        return vals

    def default_domain(self) -> Domain:
        if self.domain_points is None:
            raise ConfigError(f"field {self.name!r} has no default domain")
        return build_domain(self.domain_points)

    def descriptor(self) -> dict:
        return {"name": self.name, "params": dict(self.params)}


def _unit_box(dim: int) -> list:
    return box_domain(np.zeros(dim), np.ones(dim)).vertices.tolist()


def _affine(g=(1.0, -2.0), b=0.5):
    g = np.asarray(g, dtype=float)
    return ScalarField("affine", len(g), lambda x: x @ g + b, float(np.linalg.norm(g)),
                       {"g": g.tolist(), "b": b}, _unit_box(len(g)), "dc")


def _abs1d():
    return ScalarField("abs1d", 1, lambda x: np.abs(x[:, 0]), 1.0, {},
                       [[-1.0], [1.0]], "dc")


def _neg_abs1d():
    return ScalarField("neg_abs1d", 1, lambda x: -np.abs(x[:, 0]), 1.0, {},
                       [[-1.0], [1.0]], "dc")


def _quadratic(dim=2):
    return ScalarField("quadratic", dim, lambda x: (x ** 2).sum(axis=1), 2.0 * math.sqrt(dim),
                       {"dim": dim}, _unit_box(dim), "dc")


def _saddle():
    return ScalarField("saddle", 2, lambda x: x[:, 0] ** 2 - x[:, 1] ** 2, 2.0 * math.sqrt(2.0),
                       {}, _unit_box(2), "dc")


def _gaussian_bump(center=(0.5, 0.5), width=0.2, amplitude=1.0):
    c = np.asarray(center, dtype=float)

    def f(x):
        return amplitude * np.exp(-((x - c) ** 2).sum(axis=1) / (2.0 * width ** 2))

    lip = abs(amplitude) * math.exp(-0.5) / width
    return ScalarField("gaussian_bump", len(c), f, lip,
                       {"center": c.tolist(), "width": width, "amplitude": amplitude},
                       _unit_box(len(c)), "dc")


def osc1d_profile(x) -> np.ndarray:
    """x^2 sin(1/x^2), extended by 0 at the origin."""
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    nz = x != 0
    out[nz] = x[nz] ** 2 * np.sin(1.0 / x[nz] ** 2)
    return out


def _osc1d(dim=1):
    if dim not in (1, 2):
        raise ConfigError("osc1d supports dim 1 or 2")
    pts = [[-1.0], [1.0]] if dim == 1 else box_domain([-1, -1], [1, 1]).vertices.tolist()
    # derivative is unbounded near 0: no Lipschitz hint
    return ScalarField("osc1d", dim, lambda x: osc1d_profile(x[:, 0]), None,
                       {"dim": dim}, pts, "not dc")


def _segment_distance(x, a, b):
    d = b - a
    t = np.clip(((x - a) @ d) / (d @ d), 0.0, 1.0)
    return np.linalg.norm(x - (a + t[:, None] * d), axis=1)


# Edges and one diagonal of the medial axis lie on mesh lines of the dyadic box
# triangulation, which keeps interpolation artifacts at the kinks small.
def _dist_to_polygon(polygon=((0.25, 0.25), (0.75, 0.25), (0.75, 0.75), (0.25, 0.75))):
    poly = np.asarray(polygon, dtype=float)

    def f(x):
        dists = [_segment_distance(x, poly[i], poly[(i + 1) % len(poly)])
                 for i in range(len(poly))]
        return np.min(dists, axis=0)

    return ScalarField("dist_to_polygon", 2, f, 1.0, {"polygon": poly.tolist()},
                       _unit_box(2), "dc")


@dataclass(frozen=True)
class CatalogEntry:
    factory: Callable[..., ScalarField]
    formula: str
    dc_status: str


CATALOG: dict[str, CatalogEntry] = {
    "affine": CatalogEntry(_affine, "<g, x> + b  (g=(1,-2), b=0.5)", "DC (affine)"),
    "abs1d": CatalogEntry(_abs1d, "|x| on [-1, 1]", "DC (convex)"),
    "neg_abs1d": CatalogEntry(_neg_abs1d, "-|x| on [-1, 1]", "DC (concave)"),
    "quadratic": CatalogEntry(_quadratic, "|x|^2 on [0, 1]^dim  (dim=2)", "DC (convex)"),
    "saddle": CatalogEntry(_saddle, "x^2 - y^2 on [0, 1]^2", "DC (C^2)"),
    "gaussian_bump": CatalogEntry(_gaussian_bump,
                                  "amplitude*exp(-|x-center|^2/(2 width^2)) on [0, 1]^2",
                                  "DC (C^2)"),
    "osc1d": CatalogEntry(_osc1d, "x^2 sin(1/x^2), 0 at x=0, on [-1, 1]^dim  (dim=1)",
                          "not DC (derivative of unbounded variation)"),
    "dist_to_polygon": CatalogEntry(_dist_to_polygon,
                                    "distance to the boundary of [1/4, 3/4]^2 on [0, 1]^2",
                                    "DC (min of convex)"),
}


def make_field(name: str, **params) -> ScalarField:
    """Instantiate a catalog field."""
    try:
        entry = CATALOG[name]
    except KeyError:
        raise ConfigError(f"unknown field {name!r}; known: {', '.join(CATALOG)}") from None
    try:
        return entry.factory(**params)
    except TypeError as exc:
        raise ConfigError(f"bad parameters for field {name!r}: {exc}") from None


def field_from_descriptor(desc: dict) -> ScalarField:
    """Build a field from ``{"name": ..., "params": {...}}`` or ``{"csv": path}``."""
    if "csv" in desc:
        return read_csv_field(desc["csv"])
    if "name" not in desc:
        raise ConfigError("field descriptor needs 'name' or 'csv'")
    return make_field(desc["name"], **desc.get("params", {}))


def catalog_listing() -> list[str]:
    return [f"{name:16s} {entry.formula:60s} {entry.dc_status}"
            for name, entry in CATALOG.items()]


def tabulated_field(points, values, name: str = "tabulated") -> ScalarField:
    """PL interpolant of scattered samples over their Delaunay mesh."""
    from scipy.spatial import Delaunay

    from .mesh import mesh_from_simplices
    from .plfunction import PLFunction

    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    vals = np.asarray(values, dtype=float).reshape(-1)
    if len(pts) != len(vals):
        raise ConfigError("points and values differ in length")
    n = pts.shape[1]
    if n == 1:
        order = np.argsort(pts[:, 0], kind="stable")
        pts, vals = pts[order], vals[order]
        simp = np.stack([np.arange(len(pts) - 1), np.arange(1, len(pts))], axis=1)
    else:
        simp = Delaunay(pts).simplices
    plf = PLFunction.from_values(mesh_from_simplices(pts, simp), vals)
    return ScalarField(name, n, plf.evaluate, plf.lipschitz(), {}, build_domain(pts).vertices.tolist(),
                       "dc (piecewise linear)")


def read_csv_field(path) -> ScalarField:
    """Load ``x1,...,xn,value`` rows; a non-numeric first line is a header."""
    path = Path(path)
    try:
        with path.open() as fh:
            first = fh.readline()
        try:
            [float(tok) for tok in first.strip().split(",")]
            skip = 0
        except ValueError:
            skip = 1
        data = np.loadtxt(path, delimiter=",", skiprows=skip, ndmin=2)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None
    if data.shape[1] < 2:
        raise ConfigError("CSV field needs at least one coordinate column and one value column")
    return tabulated_field(data[:, :-1], data[:, -1], name=path.stem)
