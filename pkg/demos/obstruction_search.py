"""
Searching a pullback table for obstructions
===========================================

A pullback table lists, for every curve of a finite universe, the curves
its preimages are homotopic to and with what degree.  An obstruction is a
multicurve whose transition matrix has leading eigenvalue at least one.
"""
from repelsys.curve_dynamics import obstruction_verdict, stabilize, transition_matrix
from repelsys.document import load_document

for name in ("trousers-v1.json", "trousers-v2.json"):
    t = load_document(name).table
    w = transition_matrix(t.universe, t)
    print(name, "matrix:", w.matrix.to_strings())
    rep = obstruction_verdict(t)
    print("  verdict:", rep.verdict, "radius:", (rep.radius.lo, rep.radius.hi))
    if rep.obstructed:
        print("  obstructing curves:", rep.multicurve, "relation:", rep.certificate.relation)

# stabilizing a seed grows it until pullback adds nothing new
t = load_document("trousers-v1.json").table
s = stabilize(["gm1"], t)
print("stable set from gm1:", s.curves, "after", s.steps, "step(s)")
