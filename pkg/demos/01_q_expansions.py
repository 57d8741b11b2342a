# # Exact q-expansions
# Eisenstein series, Delta and j as truncated series with rational
# coefficients.  Nothing here is approximate.

# +
from cuspbound.forms import delta, eisenstein, jfun
from cuspbound.series import bernoulli

E4 = eisenstein(4, 8)
print("E4    =", E4)
print("E6    =", eisenstein(6, 6))
print("Delta =", delta(8))
# -

# E_12 carries the denominator 691 from the Bernoulli number B_12.

print("B_12 =", bernoulli(12))
print("E12 q-coefficient =", eisenstein(12, 2)[1])

# j = E4^3 / Delta has a simple pole; inverting Delta costs two terms of precision.

j = jfun(4)
print("j =", j)
print("coefficients of q^-1 .. q^3:", j.list(-1, 4))
