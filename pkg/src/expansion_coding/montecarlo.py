"""Seeded simulations that check the closed forms against sampled behaviour.

Each per-level comparison is a binomial z-test at 4 sigma.  With ~40 levels
this keeps the family-wise false-failure rate under 0.3% without a
multiple-testing correction.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .aen import CARRIES_AS_NOISE, DECODE_CARRIES, carry_profile, effective_noise, input_profile, noise_profile
from .errors import DomainError
from .expansion import binary_profile, level_prob, reconstruct, sample_levels
from .infotheory import bconv, binary_entropy, plugin_mutual_information

Z_THRESHOLD = 4.0
KS_COEFF = 1.63  # alpha = 0.01 asymptotic Kolmogorov critical value
MI_FLOOR = 0.01
BOOTSTRAP = 100

# independent seed streams for the input and noise expansions
_X_STREAM = 0
_Z_STREAM = 1


@dataclass(frozen=True)
class LevelStat:
    level: int
    quantity: str
    frequency: float
    analytic: float
    z: float

    @property
    def ok(self):
        return abs(self.z) <= Z_THRESHOLD


@dataclass(frozen=True)
class SimReport:
    n: int
    seed: int
    per_level_stats: tuple
    ks_statistic: float | None = None
    ks_threshold: float | None = None

    @property
    def failures(self):
        return [s for s in self.per_level_stats if not s.ok]

    @property
    def passed(self):
        if self.failures:
            return False
        if self.ks_statistic is not None and not self.ks_statistic < self.ks_threshold:
            return False
        return True

    def stats(self, quantity):
        return [s for s in self.per_level_stats if s.quantity == quantity]


def z_score(freq, analytic, n):
    """(freq - analytic) / sqrt(analytic (1 - analytic) / n).

    A degenerate analytic value (0 or 1) gives 0 when matched exactly and
    ``inf`` otherwise.
    """
    var = analytic * (1.0 - analytic) / n
    if var <= 0:
        return 0.0 if freq == analytic else math.inf
    return (freq - analytic) / math.sqrt(var)


def _stats(levels, quantity, freqs, analytic, n):
    return [
        LevelStat(int(l), quantity, float(f), float(a), z_score(float(f), float(a), n))
        for l, f, a in zip(levels, freqs, analytic)
    ]


def _sub_seed(seed, stream):
    # distinct non-negative seeds for independent expansions sharing one user seed
    return int(np.random.SeedSequence([seed, stream]).generate_state(1, np.uint64)[0] >> 1)


def validate_expansion(lam, rng, n, seed, profile=None):
    """Sample the expansion and test it level by level and as a whole.

    Levels are drawn from ``profile`` (default: the exact expansion of
    Exp(lam)); frequencies are compared with the exact level probabilities,
    and the reconstructed values with the Exp(lam) CDF by a KS test.
    Passing a perturbed ``profile`` gives a negative control.
    """
    if n < 1000:
        raise DomainError(f"need n >= 1000 samples, got {n}")
    if profile is None:
        profile = binary_profile(lam, rng)
    bits = sample_levels(profile, n, seed)
    freqs = bits.mean(axis=0)
    per_level = _stats(rng.levels, "b", freqs, level_prob(lam, rng.levels), n)
    values = reconstruct(bits, rng)
    ks = stats.kstest(values, "expon", args=(0.0, 1.0 / lam)).statistic
    return SimReport(n, seed, tuple(per_level), float(ks), KS_COEFF / math.sqrt(n))


def add_expansions(x_bits, z_bits):
    """Exact ripple-carry addition of two bit matrices (n, width), lowest
    level first.

    Returns ``(y_bits, carries_in, carry_out)``; ``carries_in[:, 0]`` is 0.
    """
    n, width = x_bits.shape
    y = np.empty_like(x_bits)
    carries = np.zeros_like(x_bits)
    c = np.zeros(n, dtype=np.uint8)
    for i in range(width):
        carries[:, i] = c
        s = x_bits[:, i] + z_bits[:, i] + c
        y[:, i] = s & 1
        c = s >> 1
    return y, carries, c


def grid_value(bits):
    """Integer value of a bit matrix in units of its lowest level weight."""
    width = bits.shape[-1]
    if width > 62:
        raise DomainError("level window too wide for exact int64 arithmetic")
    weights = np.left_shift(np.int64(1), np.arange(width, dtype=np.int64))
    return bits.astype(np.int64) @ weights


def simulate_carries(spec, rng, n, seed, carry_override=None, p_override=None):
    """Add sampled input and noise expansions exactly on the level grid and
    compare realised carries with the carry recursion and realised level
    flips (Y_l != X_l) with the effective noise q (x) c.

    ``carry_override`` replaces the analytic carry profile in the comparison
    (negative control); ``p_override`` replaces the input profile used for
    both sampling and prediction.
    """
    if n < 1000:
        raise DomainError(f"need n >= 1000 samples, got {n}")
    p = input_profile(spec, rng) if p_override is None else p_override
    q = noise_profile(spec, rng)
    c = carry_profile(p, q)
    qt = effective_noise(q, c)
    if carry_override is not None:
        c = carry_override
        qt = effective_noise(q, c)
    x = sample_levels(p, n, _sub_seed(seed, _X_STREAM))
    z = sample_levels(q, n, _sub_seed(seed, _Z_STREAM))
    y, carries, _ = add_expansions(x, z)
    per_level = _stats(rng.levels, "carry", carries.mean(axis=0), c.probs, n)
    per_level += _stats(rng.levels, "effective-noise", (y != x).mean(axis=0), qt.probs, n)
    return SimReport(n, seed, tuple(per_level))


@dataclass(frozen=True)
class MiEstimate:
    level: int
    empirical: float
    analytic: float
    bootstrap_std: float

    @property
    def tolerance(self):
        return max(Z_THRESHOLD * self.bootstrap_std, MI_FLOOR)

    @property
    def ok(self):
        return abs(self.empirical - self.analytic) <= self.tolerance


def empirical_level_mi(spec, rng, n, seed, p=None, q=None, model=DECODE_CARRIES):
    """Plug-in estimate of the per-level mutual information I(X_l; Y_l).

    With ``model="decode-carries"`` the level output is X_l xor Z_l and the
    analytic value is H(p_l (x) q_l) - H(q_l).  With
    ``model="carries-as-noise"`` Y_l is the level bit of the exact real sum
    and the analytic value uses the effective noise q~_l instead.

    The tolerance per level is max(4 bootstrap standard deviations, 0.01 bit),
    the bootstrap being 100 multinomial resamples of the 2x2 joint table.
    ``p`` and ``q`` override the input and noise profiles.
    """
    if n < 10000:
        raise DomainError(f"need n >= 10000 samples, got {n}")
    p = input_profile(spec, rng) if p is None else p
    q = noise_profile(spec, rng) if q is None else q
    x = sample_levels(p, n, _sub_seed(seed, _X_STREAM))
    z = sample_levels(q, n, _sub_seed(seed, _Z_STREAM))
    if model == DECODE_CARRIES:
        y = x ^ z
        noise = q.probs
    elif model == CARRIES_AS_NOISE:
        y, _, _ = add_expansions(x, z)
        noise = effective_noise(q, carry_profile(p, q)).probs
    else:
        raise DomainError(f"unknown model {model!r}")
    analytic = binary_entropy(bconv(p.probs, noise)) - binary_entropy(noise)
    boot_rng = np.random.default_rng(np.random.SeedSequence([seed, 2]))
    out = []
    for i, level in enumerate(rng):
        cell = 2 * x[:, i].astype(np.int64) + y[:, i]
        counts = np.bincount(cell, minlength=4).reshape(2, 2)
        mi = float(plugin_mutual_information(counts))
        boot = boot_rng.multinomial(n, counts.ravel() / n, size=BOOTSTRAP).reshape(BOOTSTRAP, 2, 2)
        std = float(np.std(plugin_mutual_information(boot), ddof=1))
        out.append(MiEstimate(int(level), mi, float(analytic[i]), std))
    return out
