"""Follow the normalized convex part f1 across refinement levels.

    python demos/05_convergence.py
"""
from dcsplit import converge, make_field

cases = [("affine", {}), ("quadratic", {"dim": 1}), ("quadratic", {}), ("osc1d", {})]
for name, params in cases:
    field = make_field(name, **params)
    rep = converge(field, field.default_domain(), 1, 7)
    tag = f"{name} ({field.dim}-D)"
    print(f"{tag:18s} sup|f1|: {' '.join(f'{v:9.3g}' for v in rep.sup_norms)}")
    print(f"{'':18s} deltas:  {' '.join(f'{v:9.3g}' for v in rep.sup_deltas)}  -> {rep.verdict}")

# In 2-D every grid line of the quadratic mesh carries one wedge per edge, so the
# un-normalized f1 is sum_i |x - i/m| + sum_j |y - j/m| and grows with m = 2^level.
