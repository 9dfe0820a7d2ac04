"""
Curves, pieces and hole filling
===============================

A curve inside a piece is recorded by which boundary curves and marked
points it cuts off.  That is enough to tell essential curves from
peripheral ones and to see when two curves must cross.
"""
from repelsys.document import load_document
from repelsys.puzzle import (
    CurveClass,
    Piece,
    boundary_multicurve,
    classify_curve,
    classify_piece,
    essential_classes,
    filled_in,
    is_multicurve,
)

s = Piece("S", ("g1", "g2", "g3", "g4"))
print(classify_piece(s).name)
for side in ({"g1"}, {"g1", "g2"}, set()):
    print(sorted(side), "->", classify_curve(s, side).kind.value)

# on a four-holed sphere any two distinct essential curves cross
a, b = essential_classes(s)[:2]
print("crossing pair accepted:", bool(is_multicurve([a, b], {"S": s})))
print("single curve accepted:", bool(is_multicurve([CurveClass.of(s, {"g1", "g2"})], {"S": s})))

# a sphere with seven objects holds at most four disjoint essential curves
seven = Piece("P", ("b",), tuple(f"m{i}" for i in range(6)))
fam = []
for c in essential_classes(seven):
    if is_multicurve(fam + [c], {"P": seven}):
        fam.append(c)
print("greedy laminar family size:", len(fam))

# boundary multicurve of a bundled presentation
p = load_document("example4.json").presentation
print("boundary multicurve:", boundary_multicurve(p).ids)

# fill the holes that contain nothing we care about
e = load_document("trousers-v1.json").presentation.epieces[0]
f = filled_in(e, {"g0", "gm1", "gs"})
print("holes kept:", [r.curve for r in f.boundary])
