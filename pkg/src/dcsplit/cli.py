"""Command-line entry point: ``dcsplit {decompose,criterion,converge,catalog}``.

A run is described by a single JSON config; flags override its values.
Every command writes its reports plus a ``manifest.json`` into ``--out``.
Reports are byte-for-byte reproducible; the manifest also carries wall-clock
timings and therefore is not.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import platform
import sys
import time
from dataclasses import asdict, dataclass, fields, replace
from dataclasses import field as dc_field
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .criterion import criterion_records, dc_statistic, turn_statistic, verdict_consistency
from .curves import FamilySpec
from .decompose import converge, convexity_check, decompose
from .errors import ConfigError, DCSplitError
from .fields import catalog_listing, field_from_descriptor
from .mesh import Domain, box_domain, build_domain, triangulate
from .plfunction import CONCAVE, CONVEX, FLAT, interpolate
from .verdict import BOUNDED, CONVERGING, DIVERGING, INCONCLUSIVE, Thresholds

EXIT_OK, EXIT_ERROR, EXIT_DIVERGING, EXIT_INCONCLUSIVE = 0, 1, 2, 3
VERDICT_EXIT = {BOUNDED: EXIT_OK, CONVERGING: EXIT_OK, DIVERGING: EXIT_DIVERGING,
                INCONCLUSIVE: EXIT_INCONCLUSIVE}


@dataclass
class RunConfig:
    """Everything a command needs; round-trips through JSON unchanged."""

    field: dict = dc_field(default_factory=lambda: {"name": "saddle", "params": {}})
    domain: dict | None = None  # {"box": [lo, hi]} or {"points": [...]}, optional "anchor"
    level_min: int = 1
    level_max: int = 6
    family: dict = dc_field(default_factory=lambda: FamilySpec().to_dict())
    probe_count: int = 400
    seed: int = 0
    out: str = "dcsplit-out"
    format: str = "json"
    stabilization: float = 0.10
    growth: float = 1.5
    window: int = 3
    residual_tol: float = 1e-9
    convexity_tol: float = 1e-9
    convexity_samples: int = 10_000

    def validate(self) -> "RunConfig":
        if not isinstance(self.field, dict) or not ({"name", "csv"} & set(self.field)):
            raise ConfigError("field must be {'name': ..., 'params': {...}} or {'csv': path}")
        if self.level_min < 0 or self.level_max < self.level_min:
            raise ConfigError(f"levels must satisfy 0 <= level_min <= level_max, "
                              f"got {self.level_min}..{self.level_max}")
        if self.probe_count < 1 or self.convexity_samples < 1:
            raise ConfigError("probe_count and convexity_samples must be at least 1")
        if self.format not in ("json", "csv"):
            raise ConfigError(f"format must be 'json' or 'csv', got {self.format!r}")
        if not self.stabilization > 0:
            raise ConfigError(f"stabilization must be positive (e.g. 0.1), got {self.stabilization}")
        if not self.growth > 1:
            raise ConfigError(f"growth must exceed 1 (e.g. 1.5), got {self.growth}")
        if self.window < 1:
            raise ConfigError(f"window must be at least 1, got {self.window}")
        if not (self.residual_tol > 0 and self.convexity_tol >= 0):
            raise ConfigError("residual_tol must be positive and convexity_tol non-negative")
        if self.domain is not None and not ({"box", "points"} & set(self.domain)):
            raise ConfigError("domain must contain 'box': [lo, hi] or 'points': [[...], ...]")
        try:
            self.family_spec()
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad family spec: {exc}") from None
        return self

    def thresholds(self) -> Thresholds:
        return Thresholds(self.stabilization, self.growth, self.window)

    def family_spec(self) -> FamilySpec:
        return FamilySpec.from_dict(self.family)

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
        return cls(**data).validate()

    @classmethod
    def load(cls, path) -> "RunConfig":
        try:
            return cls.from_dict(json.loads(Path(path).read_text()))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None

    def digest(self) -> str:
        return hashlib.sha256(self.to_json().encode()).hexdigest()


def resolve_domain(cfg: RunConfig, fld) -> Domain:
    if cfg.domain is None:
        return fld.default_domain()
    anchor = cfg.domain.get("anchor")
    if "box" in cfg.domain:
        lo, hi = cfg.domain["box"]
        return box_domain(lo, hi, anchor)
    return build_domain(cfg.domain["points"], anchor)


def _dumps(data) -> str:
    return json.dumps(data, indent=2, sort_keys=True) + "\n"


class _Run:
    """Output directory, timings and the manifest for one command."""

    def __init__(self, command: str, cfg: RunConfig):
        self.command, self.cfg = command, cfg
        self.out = Path(cfg.out)
        self.timings: dict[str, float] = {}
        self.written: list[str] = []
        self._t0 = time.perf_counter()

    def mark(self, label: str) -> None:
        now = time.perf_counter()
        self.timings[label] = round(now - self._t0, 6)
        self._t0 = now

    def write(self, name: str, text: str) -> None:
        self.out.mkdir(parents=True, exist_ok=True)
        (self.out / name).write_text(text)
        self.written.append(name)

    def finish(self, exit_code: int) -> int:
        manifest = {
            "command": self.command,
            "config": self.cfg.to_dict(),
            "config_sha256": self.cfg.digest(),
            "versions": {"dcsplit": __version__, "numpy": np.__version__,
                         "scipy": scipy.__version__, "python": platform.python_version()},
            "threads": os.environ.get("DCSPLIT_THREADS", "1"),
            "timings_s": self.timings,
            "outputs": self.written,
            "exit_code": exit_code,
        }
        self.write("manifest.json", _dumps(manifest))
        return exit_code


def cmd_decompose(cfg: RunConfig) -> int:
    """Decompose the interpolant at ``level_max``; exit 3 if a check fails."""
    run = _Run("decompose", cfg)
    fld = field_from_descriptor(cfg.field)
    dom = resolve_domain(cfg, fld)
    plf = interpolate(fld, triangulate(dom, cfg.level_max))
    pair = decompose(plf, dom.anchor)
    run.mark("decompose")

    probes = dom.sample(cfg.probe_count, np.random.default_rng(cfg.seed))
    fn = plf.evaluate(probes)
    resid = pair.residual(probes)
    resid_ok = bool(np.all(resid <= cfg.residual_tol * (1 + np.abs(fn))))
    conv1 = convexity_check(pair.f1, dom, cfg.convexity_samples, cfg.seed, cfg.convexity_tol)
    conv2 = convexity_check(pair.f2, dom, cfg.convexity_samples, cfg.seed + 1, cfg.convexity_tol)
    run.mark("checks")

    counts = plf.hinge_table.counts()
    summary = {
        "field": fld.descriptor(),
        "level": cfg.level_max,
        "simplices": plf.mesh.n_simplices,
        "hinges": {k: counts.get(k, 0) for k in (CONVEX, CONCAVE, FLAT)},
        "residual_max": float(resid.max()),
        "residual_ok": resid_ok,
        "convexity_f1": conv1.to_dict(),
        "convexity_f2": conv2.to_dict(),
    }
    run.write("dcpair.json", _dumps(pair.to_dict(probes)))
    run.write("summary.json", _dumps(summary))
    if cfg.format == "json":
        print(_dumps(summary), end="")
    else:
        print("convex,concave,flat,residual_max,f1_convex,f2_convex")
        h = summary["hinges"]
        print(f"{h[CONVEX]},{h[CONCAVE]},{h[FLAT]},{summary['residual_max']!r},"
              f"{conv1.passed},{conv2.passed}")
    ok = resid_ok and conv1.passed and conv2.passed
    return run.finish(EXIT_OK if ok else EXIT_INCONCLUSIVE)


def cmd_criterion(cfg: RunConfig) -> int:
    """Both statistics from one pass; exit code encodes the agreed verdict."""
    run = _Run("criterion", cfg)
    fld = field_from_descriptor(cfg.field)
    dom = resolve_domain(cfg, fld)
    spec = cfg.family_spec()
    levels = range(cfg.level_min, cfg.level_max + 1)
    pre = criterion_records(fld, dom, spec, levels)
    run.mark("records")
    th = cfg.thresholds()
    rv = dc_statistic(fld, dom, spec, levels, th, precomputed=pre)
    rt = turn_statistic(fld, dom, spec, levels, th, precomputed=pre)
    cons = verdict_consistency(rv, rt)
    verdict = rv.verdict if cons.verdicts_match else INCONCLUSIVE

    run.write("criterion_rho.json", rv.to_json() + "\n")
    run.write("criterion_sigma.json", rt.to_json() + "\n")
    run.write("criterion.csv", rv.to_csv())
    summary = {"field": fld.descriptor(), "verdict": verdict, "verdict_rho": rv.verdict,
               "verdict_sigma": rt.verdict, "max_rho": rv.series, "max_sigma": rt.series,
               "levels": list(levels), "consistency": cons.to_dict()}
    run.write("summary.json", _dumps(summary))
    run.mark("reports")
    if cfg.format == "json":
        print(_dumps(summary), end="")
    else:
        print(rv.to_csv(), end="")
    return run.finish(VERDICT_EXIT[verdict])


def cmd_converge(cfg: RunConfig) -> int:
    """Exit 0 converging, 2 diverging, 3 inconclusive."""
    run = _Run("converge", cfg)
    fld = field_from_descriptor(cfg.field)
    dom = resolve_domain(cfg, fld)
    if cfg.level_min == cfg.level_max:
        raise ConfigError("converge needs level_min < level_max")
    rep = converge(fld, dom, cfg.level_min, cfg.level_max, cfg.probe_count, cfg.seed,
                   cfg.thresholds())
    run.mark("converge")
    out = {"field": fld.descriptor(), **rep.to_dict()}
    run.write("converge.json", _dumps(out))
    if cfg.format == "json":
        print(_dumps(out), end="")
    else:
        print("level,sup_norm,sup_delta")
        deltas = [math.nan] + rep.sup_deltas
        for lvl, norm, d in zip(rep.levels, rep.sup_norms, deltas):
            print(f"{lvl},{norm!r},{d!r}")
    return run.finish(VERDICT_EXIT[rep.verdict])


def cmd_catalog() -> int:
    for line in catalog_listing():
        print(line)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dcsplit",
                                description="DC decomposition of PL interpolants and "
                                            "curve-based DC criteria.")
    sub = p.add_subparsers(dest="command", required=True)
    for name, text in [("decompose", "split the interpolant into f1 - f2"),
                       ("criterion", "variation/turn statistics over a curve family"),
                       ("converge", "track f1 across refinement levels")]:
        s = sub.add_parser(name, help=text)
        s.add_argument("--config", type=Path, help="JSON run config")
        s.add_argument("--field", help="catalog field name (params come from --config)")
        s.add_argument("--level-min", type=int)
        s.add_argument("--level-max", type=int)
        s.add_argument("--seed", type=int, help="probe and family seed")
        s.add_argument("--out", help="output directory")
        s.add_argument("--angle-bound", type=float, help="curve angle bound in radians")
        s.add_argument("--format", choices=("json", "csv"), help="stdout format")
    sub.add_parser("catalog", help="list built-in fields")
    return p


def config_from_args(args) -> RunConfig:
    cfg = RunConfig.load(args.config) if args.config else RunConfig()
    over = {}
    if args.field is not None:
        over["field"] = {"name": args.field, "params": {}}
    for key in ("level_min", "level_max", "seed", "out", "format"):
        val = getattr(args, key)
        if val is not None:
            over[key] = val
    # a lone --level-max below the configured minimum means "just this level"
    if args.level_max is not None and args.level_min is None and args.level_max < cfg.level_min:
        over["level_min"] = args.level_max
    family = dict(cfg.family)
    if args.seed is not None:
        family["seed"] = args.seed
    if args.angle_bound is not None:
        family["angle_bound"] = args.angle_bound
    over["family"] = family
    return replace(cfg, **over).validate()


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "catalog":
        return cmd_catalog()
    try:
        cfg = config_from_args(args)
        cmd = {"decompose": cmd_decompose, "criterion": cmd_criterion,
               "converge": cmd_converge}[args.command]
        return cmd(cfg)
    except (DCSplitError, OSError, ValueError) as exc:
        print(f"dcsplit: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
