"""Binary symmetric channel noise operator.

``T_p f(x) = P(f(Y) = 1 | X = x)`` where ``Y`` is ``X`` with each bit flipped
independently with probability ``p``.  Two routes are provided: the spectral
one (production, ``O(n 2**n)``) and a direct convolution kept as the oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .boolean_fn import BooleanFunction, fwht, popcount


@dataclass(frozen=True, eq=False)
class NoiseField:
    """The ``2**n`` values of ``T_p f`` at a fixed crossover probability."""

    n: int
    p: float
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.shape != (1 << self.n,):
            raise ValueError(f"field must have 2**n = {1 << self.n} values, got {values.shape}")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def __len__(self):
        return self.values.size


def check_probability(p: float) -> float:
    p = float(p)
    if not 0.0 < p < 0.5:
        raise ValueError(f"crossover probability must lie in (0, 1/2), got {p!r}")
    return p


def kernel_weights(n: int, p: float) -> np.ndarray:
    """``p**k * (1-p)**(n-k)`` for ``k = 0..n`` (kernel mass at distance k)."""
    k = np.arange(n + 1)
    return p**k * (1.0 - p) ** (n - k)


def eigenvalues(n: int, p: float) -> np.ndarray:
    """``(1 - 2p)**wt(v)`` indexed by ``v``."""
    return (1.0 - 2.0 * p) ** popcount(np.arange(1 << n))


def apply_noise_direct(f: BooleanFunction, p: float) -> NoiseField:
    """Convolution with the channel kernel, summed exactly rounded per x.

    Terms are taken in ascending ``y`` over the support of ``f``.
    """
    p = check_probability(p)
    weights = kernel_weights(f.n, p)
    ones = np.flatnonzero(f.table)
    out = np.zeros(len(f))
    if ones.size:
        for x in range(len(f)):
            out[x] = math.fsum(weights[popcount(ones ^ x)])
    return NoiseField(f.n, p, out)


def noise_tables(tables: np.ndarray, p: float) -> np.ndarray:
    """Spectral ``T_p`` over a stack of truth tables with shape ``(m, 2**n)``.

    The forward butterfly runs in exact integers; the single ``1/2**n``
    rescale is a power of two and introduces no rounding.
    """
    p = check_probability(p)
    tables = np.asarray(tables)
    size = tables.shape[-1]
    n = size.bit_length() - 1
    spectrum = fwht(tables.astype(np.int64))
    return fwht(spectrum * eigenvalues(n, p)) / size


def apply_noise_spectral(f: BooleanFunction, p: float) -> NoiseField:
    p = check_probability(p)
    return NoiseField(f.n, p, noise_tables(f.table, p))


apply_noise = apply_noise_spectral


def complement_field(field: NoiseField) -> NoiseField:
    return NoiseField(field.n, field.p, 1.0 - field.values)


def dictatorship_field(n: int, p: float) -> NoiseField:
    """Field of ``f(x) = x_1`` written down directly: ``p`` or ``1 - p``."""
    p = check_probability(p)
    x = np.arange(1 << n)
    return NoiseField(n, p, np.where(x & 1, 1.0 - p, p))
