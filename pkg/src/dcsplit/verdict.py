"""Decision rules shared by the convergence and criterion reports."""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

BOUNDED, DIVERGING, INCONCLUSIVE = "bounded", "diverging", "inconclusive"
CONVERGING = "converging"


@dataclass(frozen=True)
class Thresholds:
    """``stabilization``: max relative change between the last two levels.
    ``growth``: per-level factor that signals divergence, compounded over
    ``window`` consecutive level steps.
    """

    stabilization: float = 0.10
    growth: float = 1.5
    window: int = 3

    def __post_init__(self):
        if not self.stabilization > 0:
            raise ValueError("stabilization threshold must be positive")
        if not self.growth > 1:
            raise ValueError("growth threshold must exceed 1")
        if self.window < 1:
            raise ValueError("window must be at least 1")

    def to_dict(self) -> dict:
        return asdict(self)


def grows(series, th: Thresholds) -> bool:
    """Every one of the last ``window`` steps increases and the compounded
    increase is at least ``growth ** window``."""
    s = np.asarray(series, dtype=float)
    if len(s) < th.window + 1:
        return False
    tail = s[-(th.window + 1):]
    if np.any(tail[:-1] <= 0):
        return False
    steps = tail[1:] / tail[:-1]
    return bool(np.all(steps > 1.0) and tail[-1] >= th.growth ** th.window * tail[0])


def stabilizes(series, th: Thresholds) -> bool:
    s = np.asarray(series, dtype=float)
    if len(s) < 2:
        return False
    prev, last = s[-2], s[-1]
    return bool(abs(last - prev) <= th.stabilization * max(abs(prev), 1e-300))


def classify(series, th: Thresholds) -> str:
    if grows(series, th):
        return DIVERGING
    if stabilizes(series, th):
        return BOUNDED
    return INCONCLUSIVE
