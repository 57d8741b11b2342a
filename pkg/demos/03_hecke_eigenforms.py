# # Hecke eigenforms
# T_2 acts on S_24 by an integer matrix; its eigenvectors give the two
# normalized eigenforms, computed numerically at 512 bits.

# +
import mpmath

from cuspbound.forms import miller_basis
from cuspbound.hecke import charpoly, decompose, deligne_check, eigenforms, hecke_matrix

M = hecke_matrix(24, 2)
print("T_2 on S_24:", M)
print("characteristic polynomial:", charpoly(M))
# -

gs = eigenforms(24, nmax=30)
for g in gs:
    print(mpmath.nstr(g.eigenvalue, 20), [mpmath.nstr(g.a(n), 12) for n in range(1, 6)])
    print("  Deligne bound holds to n = 30:", deligne_check(g, 30)["ok"])

# Writing F_{24,1} in the eigenbasis gives C(G) = sum |c_i|.

dec = decompose(miller_basis(24, 6).rows[1], 24, forms=gs)
print("c =", [mpmath.nstr(c, 15) for c in dec.c], " C =", mpmath.nstr(dec.C, 15))
