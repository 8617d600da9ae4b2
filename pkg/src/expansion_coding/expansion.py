"""Binary and q-ary expansion of exponential random variables.

An exponential variable with rate ``lam`` is exactly the weighted sum
``sum_l 2**l * B_l`` of independent Bernoulli levels with
``P(B_l = 1) = 1 / (1 + exp(lam * 2**l))``.  Everything here works on a
finite window of levels ``[lo, hi]``.
"""

from collections.abc import Mapping
from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit

from .errors import DomainError, RangeMismatchError

# samples per RNG key; draws for sample i of level l come from chunk i // CHUNK
CHUNK = 1 << 16


@dataclass(frozen=True)
class LevelRange:
    """Closed window of level indices ``lo..hi`` (``lo = -L1``, ``hi = L2``)."""

    lo: int
    hi: int

    def __post_init__(self):
        if int(self.lo) != self.lo or int(self.hi) != self.hi:
            raise DomainError(f"level bounds must be integers, got [{self.lo}, {self.hi}]")
        object.__setattr__(self, "lo", int(self.lo))
        object.__setattr__(self, "hi", int(self.hi))
        if self.lo > self.hi:
            raise DomainError(f"empty level range: lo={self.lo} > hi={self.hi}")

    @classmethod
    def from_truncation(cls, l1, l2):
        """Window ``[-l1, l2]`` in the L1/L2 parametrisation."""
        return cls(-l1, l2)

    @property
    def width(self):
        return self.hi - self.lo + 1

    @property
    def l1(self):
        return -self.lo

    @property
    def l2(self):
        return self.hi

    @property
    def levels(self):
        return np.arange(self.lo, self.hi + 1)

    def widen(self, below, above=None):
        above = below if above is None else above
        return LevelRange(self.lo - below, self.hi + above)

    def __contains__(self, level):
        return self.lo <= level <= self.hi

    def __iter__(self):
        return iter(range(self.lo, self.hi + 1))

    def __len__(self):
        return self.width


def _frozen(arr):
    arr = np.array(arr, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class BernoulliProfile:
    """Probability of a one at every level of ``range``.

    The same container holds input, noise, carry, effective-noise and
    distortion profiles.  ``probs[i]`` belongs to level ``range.lo + i``.
    """

    range: LevelRange
    probs: np.ndarray = field(repr=False)

    def __post_init__(self):
        probs = _frozen(self.probs)
        if probs.shape != (self.range.width,):
            raise DomainError(
                f"profile has {probs.shape} entries, range [{self.range.lo}, {self.range.hi}] "
                f"needs {self.range.width}"
            )
        if np.any(~np.isfinite(probs)) or np.any(probs < 0) or np.any(probs > 0.5):
            raise DomainError("profile entries must lie in [0, 0.5]")
        object.__setattr__(self, "probs", probs)

    @property
    def levels(self):
        return self.range.levels

    def at(self, level):
        if level not in self.range:
            raise KeyError(level)
        return float(self.probs[level - self.range.lo])

    def replace(self, level, value):
        """Copy with the entry at ``level`` replaced (used for negative controls)."""
        probs = self.probs.copy()
        probs[level - self.range.lo] = value
        return BernoulliProfile(self.range, probs)

    def check_same_range(self, other):
        if self.range != other.range:
            raise RangeMismatchError(
                f"profiles cover different ranges: [{self.range.lo}, {self.range.hi}] "
                f"vs [{other.range.lo}, {other.range.hi}]"
            )


@dataclass(frozen=True)
class QaryProfile:
    """Per-level categorical distributions over ``q`` symbols (``table[i, s]``)."""

    range: LevelRange
    q: int
    table: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.q < 2:
            raise DomainError(f"alphabet size must be >= 2, got {self.q}")
        table = _frozen(self.table)
        if table.shape != (self.range.width, self.q):
            raise DomainError(f"table shape {table.shape} != {(self.range.width, self.q)}")
        if np.any(table < 0):
            raise DomainError("negative probability in q-ary table")
        if np.any(np.abs(table.sum(axis=1) - 1.0) > 1e-12):
            raise DomainError("q-ary rows must sum to 1")
        object.__setattr__(self, "table", table)

    @property
    def levels(self):
        return self.range.levels


def _check_rate(lam):
    if not np.isfinite(lam) or lam <= 0:
        raise DomainError(f"rate parameter must be positive and finite, got {lam}")


def level_prob(lam, l):
    """P(B_l = 1) = 1 / (1 + exp(lam * 2**l)).

    ``l`` may be an integer or an integer array.  When ``lam * 2**l``
    overflows the result is exactly 0; for very fine levels it rounds to 0.5
    from below (the first-order behaviour is ``0.5 - lam * 2**l / 4``).
    """
    _check_rate(lam)
    l = np.asarray(l)
    with np.errstate(over="ignore"):
        x = np.ldexp(float(lam), l.astype(np.int64))
    out = expit(-x)
    if out.ndim == 0:
        return float(out)
    return out


def binary_profile(lam, rng):
    """Bernoulli profile of the binary expansion of Exp(lam) over ``rng``."""
    return BernoulliProfile(rng, level_prob(lam, rng.levels))


def qary_level_dist(lam, l, q):
    """Distribution of the base-``q`` digit at level ``l`` of an Exp(lam) variable.

    ``P(B_l = s) = (1 - e^{-a}) e^{-a s} / (1 - e^{-a q})`` with ``a = lam * q**l``.
    """
    _check_rate(lam)
    if int(q) != q or q < 2:
        raise DomainError(f"alphabet size must be an integer >= 2, got {q}")
    q = int(q)
    with np.errstate(over="ignore"):
        a = lam * float(q) ** l
    s = np.arange(q)
    if not np.isfinite(a):
        row = np.zeros(q)
        row[0] = 1.0
        return row
    with np.errstate(under="ignore"):
        # -expm1(-a q) -> 1 when e^{-aq} underflows: the limiting form
        row = -np.expm1(-a) * np.exp(-a * s) / -np.expm1(-a * q)
    return row / row.sum()


def qary_profile(lam, rng, q):
    table = np.array([qary_level_dist(lam, int(l), q) for l in rng.levels])
    return QaryProfile(rng, int(q), table)


def reconstruct(symbols, rng, q=2):
    """Positional value ``sum_l q**l * symbol_l``.

    ``symbols`` is either a mapping ``{level: symbol}`` (missing levels are
    zero) or an array whose last axis runs over ``rng`` from ``lo`` to
    ``hi``; leading axes are treated as a batch.
    """
    if isinstance(symbols, Mapping):
        arr = np.zeros(rng.width, dtype=np.int64)
        for level, sym in symbols.items():
            if level not in rng:
                raise DomainError(f"level {level} outside [{rng.lo}, {rng.hi}]")
            arr[level - rng.lo] = sym
        symbols = arr
    symbols = np.asarray(symbols)
    if symbols.shape[-1:] != (rng.width,):
        raise DomainError(f"expected {rng.width} symbols on the last axis, got shape {symbols.shape}")
    if np.any(symbols < 0) or np.any(symbols > q - 1) or np.any(symbols != np.round(symbols)):
        raise DomainError(f"symbols must be integers in [0, {q - 1}]")
    weights = float(q) ** rng.levels.astype(float)
    out = symbols.astype(float) @ weights
    if np.ndim(out) == 0:
        return float(out)
    return out


def _zigzag(level):
    return 2 * level if level >= 0 else -2 * level - 1


def level_uniforms(seed, level, n, start=0):
    """Uniform draws for samples ``start .. start+n-1`` of one level.

    Draw ``i`` depends only on ``(seed, level, i)``, so any partition of the
    sample index range reproduces the same stream.
    """
    if seed < 0:
        raise DomainError("seed must be non-negative")
    out = np.empty(n)
    stop = start + n
    first = start // CHUNK
    last = (stop - 1) // CHUNK if n else first - 1
    for chunk in range(first, last + 1):
        ss = np.random.SeedSequence([seed, _zigzag(int(level)), chunk])
        block = np.random.Generator(np.random.Philox(ss)).random(CHUNK)
        lo = max(start, chunk * CHUNK)
        hi = min(stop, (chunk + 1) * CHUNK)
        out[lo - start : hi - start] = block[lo - chunk * CHUNK : hi - chunk * CHUNK]
    return out


def sample_levels(profile, n, seed, start=0):
    """Independent Bernoulli draws per level: uint8 array of shape (n, width)."""
    if n < 1:
        raise DomainError(f"sample count must be >= 1, got {n}")
    bits = np.empty((n, profile.range.width), dtype=np.uint8)
    for i, level in enumerate(profile.range):
        bits[:, i] = level_uniforms(seed, level, n, start) < profile.probs[i]
    return bits


def sample_expanded(lam, rng, n, seed):
    """``n`` reconstructed samples of the truncated binary expansion of Exp(lam)."""
    bits = sample_levels(binary_profile(lam, rng), n, seed)
    return reconstruct(bits, rng)


def truncated_mean(profile):
    """Mean of the truncated expansion, ``sum_l 2**l * probs[l]``."""
    return float(np.ldexp(profile.probs, profile.levels).sum())


def truncation_deficit_bound(lam, rng):
    """Upper bound on ``1/lam - truncated_mean``: levels above ``hi`` carry at
    most ``2**(1 - hi) / lam**2`` and levels below ``lo`` at most ``2**(lo - 1)``."""
    return 2.0 ** (1 - rng.hi) / lam**2 + 2.0 ** (rng.lo - 1)
