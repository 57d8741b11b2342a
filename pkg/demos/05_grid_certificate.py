# # A certified lower bound for |j(tau) - j(z)|
# The main terms G(x, u) are sampled on a grid; a first-order Taylor slack
# plus global second-derivative bounds turn the samples into a lower bound
# valid on the whole square.

# +
import json

from cuspbound.bounds import G_value, grid_min_G

print("G(0, 0) =", G_value(0.0, 0.0)[0])
for step in (1e-3, 5e-4, 2.5e-4):
    cert = grid_min_G(step)
    print(f"step {step:g}: certified G >= {cert.certified_G:.4f}  ok={cert.ok}")
# -

print(json.dumps(cert.to_dict(), indent=1)[:600])
