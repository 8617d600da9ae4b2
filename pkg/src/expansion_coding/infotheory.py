"""Entropy helpers shared by the channel and source computations.

All logarithms are base 2. The limit convention H(0) = H(1) = 0 is exact.
"""

import numpy as np

LOG2E = float(np.log2(np.e))


def binary_entropy(p):
    """Binary entropy in bits, elementwise.

    Uses ``log1p`` for the ``1 - p`` branch so that tiny probabilities keep
    full relative precision (coarse levels have p ~ 1e-300).
    """
    p = np.asarray(p, dtype=float)
    out = np.zeros_like(p)
    m = (p > 0) & (p < 1)
    pm = p[m]
    out[m] = -(pm * np.log(pm) + (1.0 - pm) * np.log1p(-pm)) / np.log(2.0)
    if out.ndim == 0:
        return float(out)
    return out


def entropy(dist, axis=-1):
    """Shannon entropy (bits) of categorical distribution(s) along ``axis``."""
    dist = np.asarray(dist, dtype=float)
    logs = np.zeros_like(dist)
    m = dist > 0
    logs[m] = np.log2(dist[m])
    return -(dist * logs).sum(axis=axis)


def bconv(a, b):
    """Binary convolution a(1-b) + b(1-a): the parameter of the XOR of two
    independent Bernoulli variables."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return a * (1.0 - b) + b * (1.0 - a)


def cyclic_conv(a, b):
    """Modulo-q convolution of two length-q rows (or stacks of rows).

    ``out[..., s] = sum_i a[..., i] * b[..., (s - i) mod q]``: the law of the
    sum modulo q of two independent symbols.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    q = a.shape[-1]
    out = np.zeros_like(a)
    for i in range(q):
        out += a[..., i : i + 1] * np.roll(b, i, axis=-1)
    return out


def plugin_mutual_information(counts):
    """Plug-in mutual information (bits) from a joint count table.

    ``counts`` has shape (..., nx, ny); leading axes are batched.
    """
    counts = np.asarray(counts, dtype=float)
    total = counts.sum(axis=(-2, -1), keepdims=True)
    joint = counts / total
    px = joint.sum(axis=-1)
    py = joint.sum(axis=-2)
    hxy = entropy(joint.reshape(joint.shape[:-2] + (-1,)))
    return entropy(px) + entropy(py) - hxy
