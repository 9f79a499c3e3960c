"""alpha-power sums of a noise field and their gap to the dictatorship.

``N_alpha(f) = sum_x T_p f(x)**alpha`` and the symmetrized variant that adds
``(1 - T_p f(x))**alpha`` are kept as raw sums (no ``2**-n`` averaging); the
normalization cancels in every comparison against the dictatorship.

Information quantities are in bits.  Powers are ``exp(alpha * ln t)`` so that
alpha is a continuous parameter, and every sum goes through ``math.fsum``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .boolean_fn import BooleanFunction, is_balanced, popcount, wht
from .noise import NoiseField, apply_noise, check_probability, dictatorship_field

MAX_EXPONENT = 700.0


class RangeExceededError(OverflowError):
    """An alpha-power at this alpha would overflow a double."""


def _check_exponents(alphas, logs: np.ndarray):
    alphas = np.atleast_1d(alphas)
    if not (alphas.size and logs.size):
        return
    top = max(alphas.max() * logs.max(), alphas.max() * logs.min(), alphas.min() * logs.max(), alphas.min() * logs.min())
    if top > MAX_EXPONENT:
        raise RangeExceededError("alpha range overflows the alpha-power of a field value")


def binary_entropy(q: float) -> float:
    """``h(q)`` in bits, with ``h(0) = h(1) = 0``."""
    q = float(q)
    if not 0.0 <= q <= 1.0:
        raise ValueError(f"binary_entropy needs q in [0, 1], got {q!r}")
    if q == 0.0 or q == 1.0:
        return 0.0
    return -(q * math.log2(q) + (1.0 - q) * math.log2(1.0 - q))


def _power_terms(values: np.ndarray, alpha: float) -> np.ndarray:
    if np.any(values < 0.0):
        raise ValueError("noise field values must be nonnegative")
    if alpha <= 0.0 and np.any(values == 0.0):
        raise ValueError(f"field value 0 raised to alpha={alpha} <= 0 is undefined")
    logs = np.log(values[values > 0.0])
    _check_exponents(alpha, logs)
    return np.exp(alpha * logs)


def sym_values(field: NoiseField) -> np.ndarray:
    """Field values followed by their complements."""
    return np.concatenate([field.values, 1.0 - field.values])


def n_alpha(field: NoiseField, alpha: float) -> float:
    return math.fsum(_power_terms(field.values, alpha))


def n_alpha_sym(field: NoiseField, alpha: float) -> float:
    return math.fsum(_power_terms(sym_values(field), alpha))


@dataclass(frozen=True)
class CurveSpec:
    """A g-curve: ``field_f`` measured against the dictatorship ``field_f0``."""

    field_f: NoiseField
    field_f0: NoiseField
    symmetrized: bool = False

    def __post_init__(self):
        if self.field_f.n != self.field_f0.n or self.field_f.p != self.field_f0.p:
            raise ValueError("field_f and field_f0 must share n and p")
        f0 = np.sort(self.field_f0.values)
        half = len(f0) // 2
        p = self.field_f0.p
        if not (np.allclose(f0[:half], p, rtol=0, atol=1e-12)
                and np.allclose(f0[half:], 1.0 - p, rtol=0, atol=1e-12)):
            raise ValueError("field_f0 is not a dictatorship field")

    @classmethod
    def for_function(cls, f: BooleanFunction, p: float, symmetrized: bool = False) -> "CurveSpec":
        return cls(apply_noise(f, p), dictatorship_field(f.n, p), symmetrized)

    def signed_values(self) -> tuple[np.ndarray, np.ndarray]:
        """Values entering with +1 and with -1 in the g-curve."""
        if self.symmetrized:
            return sym_values(self.field_f), sym_values(self.field_f0)
        return self.field_f.values, self.field_f0.values


def g(spec: CurveSpec, alpha: float) -> float:
    plus, minus = spec.signed_values()
    return math.fsum(np.concatenate([_power_terms(plus, alpha), -_power_terms(minus, alpha)]))


def g_curve(spec: CurveSpec, alphas) -> np.ndarray:
    """``g`` at every alpha in ``alphas``; each point is an exactly rounded sum."""
    plus, minus = spec.signed_values()
    alphas = np.asarray(alphas, dtype=float)
    if np.any(plus <= 0.0) or np.any(minus <= 0.0):
        return np.array([g(spec, a) for a in alphas])
    logs = np.concatenate([np.log(plus), np.log(minus)])
    _check_exponents(alphas, logs)
    signs = np.concatenate([np.ones(plus.size), -np.ones(minus.size)])
    terms = np.exp(np.outer(alphas, logs)) * signs
    return np.array([math.fsum(row) for row in terms])


def deriv_at_one(field: NoiseField, symmetrized: bool = False) -> float:
    """``d/dalpha N_alpha`` at ``alpha = 1``: ``sum t log2 t`` (plus the 1-t part)."""
    values = sym_values(field) if symmetrized else field.values
    if np.any(values <= 0.0) or np.any(values >= 1.0):
        raise ValueError("deriv_at_one needs every field value strictly inside (0, 1)")
    return math.fsum(values * np.log2(values))


def mutual_information(f: BooleanFunction, p: float) -> float:
    """``I(f(Y); X)`` in bits for balanced ``f``."""
    p = check_probability(p)
    if not is_balanced(f):
        raise ValueError("mutual_information requires a balanced function")
    field = apply_noise(f, p)
    return 1.0 + deriv_at_one(field, symmetrized=True) / len(field)


def dictatorship_information(p: float) -> float:
    """``1 - h(p)``, the conjectured maximum."""
    return 1.0 - binary_entropy(check_probability(p))


def n2_spectral(f: BooleanFunction, p: float) -> float:
    """``N_2`` through Parseval: ``sum_v (1-2p)**(2 wt v) * fhat(v)**2``."""
    p = check_probability(p)
    coeffs = wht(f).coeffs
    lam2 = (1.0 - 2.0 * p) ** (2 * popcount(np.arange(coeffs.size)))
    return math.fsum(lam2 * coeffs**2)
