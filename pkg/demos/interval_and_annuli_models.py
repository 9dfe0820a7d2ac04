"""
Affine and round models
=======================

When the transition matrix of a branch pattern is subunit, intervals
(or round annuli) of length v with (I - D) v = 1 leave room for every
branch, and the construction can be read back exactly.
"""
from repelsys.cli import emit_plot_data
from repelsys.models import (
    Branch,
    ModelSpec,
    ObstructionError,
    extract_transition,
    nonescaping_depth,
    realize_affine,
    realize_annuli,
)

# tent maps with slopes 2 and d
for d in (2, 3):
    spec = ModelSpec(1, (Branch(0, 0, 2), Branch(0, 0, d, reverse=True)))
    try:
        m = realize_affine(spec)
    except ObstructionError as exc:
        print(f"slopes (2,{d}): refused, relation {exc.certificate.relation}")
        continue
    print(f"slopes (2,{d}): interval length {m.lengths[0]}, gaps {[str(g) for g in m.gaps]}")
    print("  read back:", extract_transition(m).to_strings())
    for n in range(4):
        comps = nonescaping_depth(m, n)
        print(f"  depth {n}: {len(comps)} pieces, total length {sum(c.length for c in comps)}")

# the same pattern as round annuli, z -> c z^e on each branch
m = realize_annuli(ModelSpec(1, (Branch(0, 0, 2), Branch(0, 0, 3))))
for pb in m.branches:
    print("exponent", m.exponent(pb), "log c", m.log_coefficient(pb), "radii", m.radii(pb))
print(emit_plot_data(m, 1))
