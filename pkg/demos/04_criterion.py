"""Tell DC fields from a non-DC one by the growth of the curve statistics.

    python demos/04_criterion.py
"""
from dcsplit import (FamilySpec, criterion_records, dc_statistic, make_field, turn_statistic,
                     verdict_consistency)

levels = range(1, 7)
family = FamilySpec(count=12, seed=0)
for name in ["affine", "saddle", "gaussian_bump", "dist_to_polygon", "osc1d"]:
    field = make_field(name)
    domain = field.default_domain()
    pre = criterion_records(field, domain, family, levels)
    rho = dc_statistic(field, domain, family, levels, precomputed=pre)
    sigma = turn_statistic(field, domain, family, levels, precomputed=pre)
    ok = verdict_consistency(rho, sigma)
    print(f"{name:16s} rho: {' '.join(f'{v:7.2f}' for v in rho.series)}  -> {rho.verdict}")
    print(f"{'':16s} sig: {' '.join(f'{v:7.2f}' for v in sigma.series)}  -> {sigma.verdict}"
          f"  (sandwich violations: {len(ok.violations)})")
