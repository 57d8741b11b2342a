# # Where can an extremal lattice exist?
# The theta series of an extremal lattice must have nonnegative
# coefficients.  Beyond an explicit N(k) they are provably positive, so a
# finite scan decides each weight.

# +
import tempfile
from pathlib import Path

from cuspbound.scan import largest_nonneg_search, mos_values, summarize, theorem2_threshold

for k in (12, 96, 480):
    t, N = theorem2_threshold(k)
    print(f"k={k}: positive beyond n = {float(t):.2f}, scan to N = {N}")
# -

# a(ell+1) and a(ell+2) from the Burmann expansion, without linear algebra.

print(mos_values(48))

# A checkpointed scan; rerunning it skips finished weights.

cp = Path(tempfile.mkdtemp()) / "scan.jsonl"
recs = largest_nonneg_search((12, 600), 0, cp)
print(summarize(recs))
print(cp.read_text().splitlines()[0])
