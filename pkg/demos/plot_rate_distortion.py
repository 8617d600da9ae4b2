"""
Compressing an exponential source
=================================

Each level is compressed on its own.  Coding every level through a
Z-channel keeps the reconstruction below the source; successive coding
switches to the cheaper symmetric channel once a higher level already
differs.  Scalar quantizers are shown for comparison.
"""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from expansion_coding.source import (
    SourceSpec,
    compliant_range,
    quantizer_baseline,
    rd_function,
    scheme_one_sided,
    scheme_successive,
)

spec = SourceSpec(1.0)
targets = np.geomspace(1e-3, 1.0, 40)
one, two = [], []
for d in targets:
    rng = compliant_range(spec, d, margin=7)
    one.append(scheme_one_sided(spec, d, rng))
    two.append(scheme_successive(spec, d, rng))

print("gap to R(D) at D=1e-3: one-sided %.3f, successive %.3f" % (one[0].gap, two[0].gap))

quant = {kind: [quantizer_baseline(spec, k, kind) for k in 2 ** np.arange(0, 7)] for kind in ("linear", "nonlinear")}

plt.plot(targets, [rd_function(spec, d) for d in targets], "k", label="R(D)")
plt.plot([p.distortion for p in one], [p.rate for p in one], "--", label="one-sided")
plt.plot([p.distortion for p in two], [p.rate for p in two], ":", label="successive")
for kind, pts in quant.items():
    plt.plot([p.distortion for p in pts], [p.rate for p in pts], "o", label=f"{kind} quantizer")
plt.xscale("log")
plt.xlabel("distortion")
plt.ylabel("rate (bits)")
plt.legend()
plt.savefig("rate_distortion.png", dpi=120)
