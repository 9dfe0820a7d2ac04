"""
Ring moduli and potentials
==========================

Two disjoint round discs bound a ring whose modulus is the arccosh of
their inversive distance.  Potentials turn a subunit witness into room
for gluing annuli of prescribed modulus.
"""
import math

from repelsys.constant_complexity import renormalizations
from repelsys.document import load_document
from repelsys.models import Disc, equipotential_ring_bounds, gluing_budget, prescribe_potentials, ring_modulus

print("concentric r=1/2:", ring_modulus(Disc(0, 0.5), Disc(0, 1, exterior=True)), -math.log(0.5))
print("two unit discs at distance 4:", ring_modulus(Disc(-2, 1), Disc(2, 1)))

for v in (0.5, 1.0, 2.0):
    b = equipotential_ring_bounds(Disc(0, 1), v, Disc(3, 1), v)
    print(f"levels {v}: {b.lower:.4f} <= {b.modulus:.4f} <= {b.upper:.4f}")

doc = load_document("trousers-v1.json")
(d,) = renormalizations(doc.presentation, doc.table)
budget = gluing_budget(d.d_star, doc.constant())
print("witness", [str(x) for x in budget.witness], "multiplier", budget.multiplier)
ledger = prescribe_potentials(d, d.d_star, doc.potential_vector, doc.constant())
print("M =", ledger.multiplier)
for g, r in ledger.rho.items():
    print(f"  {g}: u = {ledger.potentials[g]}, room = {r}")
