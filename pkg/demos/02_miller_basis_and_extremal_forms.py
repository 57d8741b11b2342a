# # The Miller basis and extremal forms
# F_{k,m} = q^m + O(q^(ell+1)); the row m = 0 is the extremal form, the
# candidate theta series of an extremal even unimodular lattice.

# +
from cuspbound.forms import dim_cusp, extremal_form, miller_basis, theta_e8, eisenstein

basis = miller_basis(24, 8)
for m, row in enumerate(basis.rows):
    print(f"F_24,{m} =", row.list(0, 8))
# -

# Weight 12 gives the theta series of the Leech lattice: 196560 minimal vectors.

print(extremal_form(12, 6).list(0, 6))

# The E8 lattice: counting vectors of the 8-variable form directly reproduces E4.

th = theta_e8(6)
print(th.list(0, 6), th == eisenstein(4, 6))

# The first coefficient after the gap is positive for every k divisible by 4.

for k in (48, 96, 200, 400):
    ell = dim_cusp(k)
    print(k, ell, extremal_form(k, ell + 2)[ell + 1] > 0)
