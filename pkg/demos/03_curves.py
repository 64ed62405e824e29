"""Trace a PL field along closed convex curves: derivative variation and turn.

    python demos/03_curves.py
"""
from dcsplit import (derivative_variation, generate_family, interpolate, lift, make_field,
                     tangent_variation, trace, triangulate, turn)

field = make_field("gaussian_bump")
domain = field.default_domain()
curves = generate_family(domain, count=4, seed=0)

print("curve  segments  V_r      " + "  ".join(f"V_phi@{k}  O_R@{k}" for k in (2, 4, 6)))
plfs = {k: interpolate(field, triangulate(domain, k)) for k in (2, 4, 6)}
for i, c in enumerate(curves):
    cells = []
    for k, plf in plfs.items():
        tr = trace(plf, c)
        cells.append(f"{derivative_variation(tr):7.3f}  {turn(lift(tr)):6.3f}")
    print(f"{i:5d}  {c.n_segments:8d}  {tangent_variation(c):6.3f}  " + "  ".join(cells))
