"""Independent reference computations used by the tests.

Nothing here imports the algorithms under test; each oracle works from
first principles (sorted breakpoints, brute-force loops, closed forms).
"""
from __future__ import annotations

import math
from fractions import Fraction

import numpy as np


def jump_accumulation_1d(x, y, anchor):
    """Classical 1-D DC split of a PL function given by sorted nodes ``x``, values ``y``.

    ``f1' = -J/2 + (positive slope jumps to the left)`` where ``J`` is the sum of
    all positive jumps, so ``f1`` is the sum of ``jump^+ |t - x_j| / 2``;
    normalized to ``f1(anchor) = 0``.  Returns ``f1`` at the nodes.
    """
    x, y = np.asarray(x, float), np.asarray(y, float)
    slopes = np.diff(y) / np.diff(x)
    jumps = np.diff(slopes)  # at interior nodes x[1:-1]
    pos = np.maximum(jumps, 0.0)
    total = pos.sum()
    # integrate f1' piece by piece from the left end
    d1 = -0.5 * total + np.concatenate([[0.0], np.cumsum(pos)])  # slope on each cell
    f1 = np.concatenate([[0.0], np.cumsum(d1 * np.diff(x))])
    f1_at_anchor = np.interp(anchor, x, f1)
    return f1 - f1_at_anchor


def jump_accumulation_1d_exact(x, y, anchor):
    """Same split as :func:`jump_accumulation_1d` in rational arithmetic.

    Every float input is converted exactly, so the only rounding is the final
    conversion of each node value back to float.  ``anchor`` must be a node.
    """
    xs = [Fraction(float(v)) for v in x]
    ys = [Fraction(float(v)) for v in y]
    slopes = [(ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i]) for i in range(len(xs) - 1)]
    pos = [max(slopes[i + 1] - slopes[i], Fraction(0)) for i in range(len(slopes) - 1)]
    d1 = -sum(pos, Fraction(0)) / 2
    f1 = [Fraction(0)]
    for i in range(len(slopes)):
        if i:
            d1 += pos[i - 1]
        f1.append(f1[-1] + d1 * (xs[i + 1] - xs[i]))
    base = f1[xs.index(Fraction(float(anchor)))]
    return np.array([float(v - base) for v in f1])


def random_pl_1d(rng, n_cells, lo=-1.0, hi=1.0):
    """Node values of a random PL function with standard-normal cell slopes."""
    x = np.linspace(lo, hi, n_cells + 1)
    y = np.concatenate([[rng.normal()], rng.normal(size=n_cells) * np.diff(x)]).cumsum()
    return x, y


def pl_total_variation_1d(x, y):
    """Sum of absolute slope jumps of a 1-D PL function."""
    slopes = np.diff(np.asarray(y, float)) / np.diff(np.asarray(x, float))
    return float(np.abs(np.diff(slopes)).sum())


def quadratic_f1_raw(points, level):
    """Closed form of the un-normalized convex part for ``x^2 + y^2`` on the unit
    square at refinement ``level``: ``sum_i |x - i/m| + sum_j |y - j/m|``, ``m = 2^level``.

    Only the axis-parallel grid lines carry gradient jumps (``2/m`` each across
    every one of the ``m`` edges on a line); diagonals carry none.
    """
    m = 2 ** level
    p = np.atleast_2d(points)
    knots = np.arange(1, m) / m
    return (np.abs(p[:, :1] - knots[None]).sum(axis=1)
            + np.abs(p[:, 1:2] - knots[None]).sum(axis=1))


def barycentric_value(vertices, values, point):
    """Value at ``point`` of the affine function through the simplex
    ``vertices`` (shape (n+1, n)) with ``values``, via one dense solve."""
    v = np.asarray(vertices, float)
    n = v.shape[1]
    a = np.vstack([v.T, np.ones(n + 1)])
    lam = np.linalg.solve(a, np.append(np.asarray(point, float), 1.0))
    return float(lam @ np.asarray(values, float)), lam


def brute_locate(vertices, simplices, point, tol=1e-12):
    """Lowest-index simplex whose barycentric coordinates are all >= -tol."""
    for i, s in enumerate(simplices):
        _, lam = barycentric_value(vertices[s], np.zeros(len(s)), point)
        if lam.min() >= -tol:
            return i
    return None


def c3_dense(L, n=200_001):
    """``1 + max |d/da (1 + a^2)^(-1/2)|`` on ``[-L, L]`` by dense sampling."""
    a = np.linspace(-L, L, n)
    return 1.0 + float(np.abs(a * (1 + a * a) ** -1.5).max())


def c4_dense(L, n=200_001):
    """Least slope of ``a / sqrt(1 + a^2)`` on ``[-L, L]`` by finite differences."""
    if L == 0:
        return 1.0  # derivative of a / sqrt(1 + a^2) at 0
    a = np.linspace(-L, L, n)
    th = a / np.sqrt(1 + a * a)
    return float((np.diff(th) / np.diff(a)).min())


def chord_sum(units, closed):
    total = 0.0
    m = len(units)
    for i in range(1, m):
        total += math.dist(units[i], units[i - 1])
    if closed and m > 1:
        total += math.dist(units[0], units[-1])
    return total


def polygon_circle(n, radius=1.0, centre=(0.0, 0.0), phase=0.0):
    ang = phase + 2 * math.pi * np.arange(n) / n
    return np.stack([centre[0] + radius * np.cos(ang), centre[1] + radius * np.sin(ang)], axis=1)
