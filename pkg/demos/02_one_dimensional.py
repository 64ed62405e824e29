"""In one dimension the split is the classical positive/negative slope-jump split.

    python demos/02_one_dimensional.py
"""
import numpy as np

from dcsplit import decompose, interpolate, make_field, triangulate

for name in ["abs1d", "neg_abs1d", "osc1d"]:
    field = make_field(name)
    domain = field.default_domain()
    plf = interpolate(field, triangulate(domain, 4))
    pair = decompose(plf, domain.anchor)
    f1, f2 = pair.flatten_1d()
    order = np.argsort(f1.mesh.vertices[:, 0])
    v1, v2 = f1.vertex_values[order], f2.vertex_values[order]
    second = lambda v: (v[:-2] - 2 * v[1:-1] + v[2:]).min()
    print(f"{name:10s} wedges={len(pair.f1):3d}  max|f1|={np.abs(v1).max():8.3f}  "
          f"max|f2|={np.abs(v2).max():8.3f}  min 2nd diff f1={second(v1):.2e}  "
          f"f2={second(v2):.2e}")
