"""
Binary expansion of an exponential variable
===========================================

An Exp(lambda) variable splits into independent bits, one per level 2**l.
Sampling those bits and adding them back up should give something that is
indistinguishable from the original distribution.
"""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from expansion_coding import LevelRange, binary_profile, sample_expanded

lam = 1.0
rng = LevelRange(-10, 10)

# level probabilities: 1/2 far below the mean, vanishing far above it
prof = binary_profile(lam, rng)
for l in (-10, -3, 0, 3, 6):
    print(f"b_{l:+d} = {prof.at(l):.6g}")

x = sample_expanded(lam, rng, 100_000, seed=2014)
print("sample mean", x.mean(), "vs", 1 / lam)

grid = np.linspace(0, 8, 400)
plt.hist(x, bins=120, density=True, alpha=0.6, label="reconstructed")
plt.plot(grid, lam * np.exp(-lam * grid), "k", label="Exp(1) density")
plt.legend()
plt.savefig("expansion_histogram.png", dpi=120)
