# # Explicit coefficient bounds
# |a(n)| <= B d(n) n^((k-1)/2) for a cusp form given by a(1..ell).

# +
import mpmath

from cuspbound.bounds import akmn_envelope, kernel_constants_verify, theorem1_B, theorem1_bound
from cuspbound.forms import delta, miller_basis

rep = theorem1_B(12, [1])
print("B for Delta:", mpmath.nstr(rep.B, 10), " (proof constants:", mpmath.nstr(rep.B_proof, 10), ")")
D = delta(200)
worst = max(abs(D[n]) / theorem1_bound(rep, n) for n in range(1, 200))
print("max |tau(n)| / bound for n < 200:", mpmath.nstr(worst, 6))
# -

# The envelope for A_k(m, n) against the exact values.

b = miller_basis(36, 40)
for n in (5, 20, 39):
    print(n, b.rows[1][n], mpmath.nstr(akmn_envelope(36, 1, n), 8))

# Recomputing the contour constants.  One check fails: the printed tail bound
# for the j(tau) side is smaller than its own first term.

for c in kernel_constants_verify()["checks"]:
    print(f"{'ok ' if c['ok'] else 'BAD'} {c['name']:32s} {c['recomputed']:>24s}  printed {c['printed']}")
