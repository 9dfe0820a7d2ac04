"""
Constant complexity and renormalization
=======================================

Each complex piece should contain one parallel sub-piece.  Following the
parallel pieces gives a map on complex pieces; its cycles are the
renormalizations, whose first return tables are checked separately.
"""
from repelsys.constant_complexity import (
    analytization_verdict,
    boundary_obstruction_check,
    check_constant_complexity,
    renormalizations,
    renormalized_obstruction_check,
    star_map,
)
from repelsys.document import load_document

doc = load_document("z2minus1.json")
print("parallel pieces:", dict(check_constant_complexity(doc.presentation).parallel))
print("cycles:", star_map(doc.presentation).cycles)

doc = load_document("example4.json")
bv = boundary_obstruction_check(doc.presentation, doc.table)
print("boundary check obstructed:", bv.obstructed, "witness:", [str(x) for x in bv.certificate.witness])
for d in renormalizations(doc.presentation, doc.table):
    print("cycle", d.cycle, "boundary curves", d.boundary_curves)
    print("  D_*:", d.d_star.matrix.to_strings())
    print("  composed table:", renormalized_obstruction_check(d).verdict)

print("with certificates:", analytization_verdict(doc.presentation, doc.table, doc.certificates).status)
print("without:", analytization_verdict(doc.presentation, doc.table, ()).status)

# two pieces swapped by the induced map give a period two renormalization
doc = load_document("period2.json")
(d,) = renormalizations(doc.presentation, doc.table)
print("period:", d.period, "status:", analytization_verdict(doc.presentation, doc.table, doc.certificates).status)
