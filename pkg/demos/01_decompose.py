"""Split the PL interpolant of a saddle into a difference of convex functions.

    python demos/01_decompose.py
"""
import numpy as np

from dcsplit import convexity_check, decompose, interpolate, make_field, triangulate

field = make_field("saddle")
domain = field.default_domain()
rng = np.random.default_rng(0)

print("level  simplices  convex  concave  flat   residual   f1 viol    f2 viol")
for level in range(1, 6):
    plf = interpolate(field, triangulate(domain, level))
    pair = decompose(plf, domain.anchor)
    pts = domain.sample(5000, rng)
    counts = plf.hinge_table.counts()
    v1 = convexity_check(pair.f1, domain, 5000, seed=level).max_violation
    v2 = convexity_check(pair.f2, domain, 5000, seed=level + 100).max_violation
    print(f"{level:5d}  {plf.mesh.n_simplices:9d}  {counts.get('convex', 0):6d}  "
          f"{counts.get('concave', 0):7d}  {counts.get('flat', 0):4d}  "
          f"{pair.residual(pts).max():9.2e}  {v1:9.2e}  {v2:9.2e}")

print("\nf1 and f2 both vanish at the anchor", domain.anchor,
      "and f1 - f2 reproduces f_N - f_N(anchor).")
