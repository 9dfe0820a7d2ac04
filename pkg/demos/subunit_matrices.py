"""
Subunit certificates for non-negative matrices
==============================================

A matrix has leading eigenvalue below one exactly when some positive
vector is strictly shrunk by it.  The library finds that vector with
exact rational arithmetic, or proves there is none.
"""
from fractions import Fraction as F

from repelsys.spectral import (
    block_split_check,
    nilpotency_index,
    project_blocks,
    spectral_radius,
    subunit_certificate,
)

# a swap with weights 1/2 and 1 plus an isolated 1/2
d = [[0, F(1, 2), 0], [1, 0, 0], [0, 0, F(1, 2)]]
cert = subunit_certificate(d)
print("subunit:", cert.is_subunit, "witness:", [str(x) for x in cert.witness])

enc = spectral_radius(d)
print("radius lies in", (enc.lo, enc.hi))

# raise one diagonal entry to 1 and the certificate flips
cert = subunit_certificate([[F(1, 2), 0, 0], [0, 1, 0], [0, 0, F(1, 2)]])
print("relation:", cert.relation, "exact witness:", [str(x) for x in cert.exact_witness])

# block decompositions with constant column sums keep the radius
a = [[1, 2, 1, 0], [1, 0, 3, 4], [0, 1, 0, 1], [2, 1, 1, 0]]
b = project_blocks(a, [[0, 1], [2, 3]])
print("block matrix:", b.to_strings())
print("radii:", spectral_radius(a).midpoint, spectral_radius(b).midpoint)

# strictly triangular parts die out
print("nilpotency of a 4x4 shift:", nilpotency_index([[int(j == i + 1) for j in range(4)] for i in range(4)]))
print("split check:", block_split_check([[F(1, 2), 0], [1, 0]], [0], [1]).passed)
