"""Exponential sums ``sum_i A_i exp(c_i alpha)`` and their real zeros.

A g-curve is such a sum with one term per field value: exponent ``ln t`` and
coefficient +1 for the function, -1 for the dictatorship baseline.  After
sorting and merging equal exponents, the number of sign changes in the
coefficient sequence bounds the number of real zeros counted with
multiplicity (Laguerre's rule of signs for exponential sums).

Coefficients are kept as integers, so merging and cancellation are exact and
``sign_changes`` involves no tolerance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

from .noise import NoiseField
from .norms import MAX_EXPONENT, RangeExceededError, sym_values

MERGE_TOL = 1e-12
TANGENCY_TOL = 1e-7
EXACT_ZERO_TOL = 1e-12
FAR_LIMIT = 1e9


@dataclass(frozen=True, eq=False)
class ExpSum:
    """Canonical exponential sum: strictly increasing exponents, nonzero integer coefficients."""

    exponents: np.ndarray
    coefficients: np.ndarray
    merge_tol: float = MERGE_TOL

    def __post_init__(self):
        c = np.array(self.exponents, dtype=float)
        a = np.array(self.coefficients, dtype=np.int64)
        if c.shape != a.shape or c.ndim != 1:
            raise ValueError("exponents and coefficients must be matching 1-d arrays")
        if np.any(a == 0):
            raise ValueError("canonical coefficients must be nonzero")
        if c.size > 1:
            gaps = np.diff(c)
            if np.any(gaps <= self.merge_tol * np.maximum(1.0, np.abs(c[1:]))):
                raise ValueError("exponents must be strictly increasing beyond merge_tol")
        c.setflags(write=False)
        a.setflags(write=False)
        object.__setattr__(self, "exponents", c)
        object.__setattr__(self, "coefficients", a)
        object.__setattr__(self, "_cmax", float(np.max(np.abs(c))) if c.size else 0.0)

    @classmethod
    def from_terms(cls, terms, merge_tol: float = MERGE_TOL) -> "ExpSum":
        """Canonicalize ``(c, A)`` pairs: sort, merge near-equal exponents, drop zeros.

        A merged cluster keeps the smallest exponent in it; clusters chain
        through consecutive gaps below ``merge_tol * max(1, |c|)``.
        """
        terms = list(terms)
        if not terms:
            return cls(np.empty(0), np.empty(0, dtype=np.int64), merge_tol)
        c = np.array([t[0] for t in terms], dtype=float)
        a = np.array([t[1] for t in terms])
        if not np.all(a == np.round(a)):
            raise ValueError("coefficients must be integers")
        return cls._canonical(c, a.astype(np.int64), merge_tol)

    @classmethod
    def _canonical(cls, c: np.ndarray, a: np.ndarray, merge_tol: float) -> "ExpSum":
        if not np.all(np.isfinite(c)):
            raise ValueError("exponents must be finite")
        order = np.argsort(c, kind="stable")
        c, a = c[order], a[order]
        starts = np.concatenate(
            [[0], np.flatnonzero(np.diff(c) > merge_tol * np.maximum(1.0, np.abs(c[1:]))) + 1]
        )
        merged = np.add.reduceat(a, starts)
        keep = merged != 0
        return cls(c[starts][keep], merged[keep], merge_tol)

    @property
    def terms(self) -> list[tuple[float, int]]:
        return [(float(c), int(a)) for c, a in zip(self.exponents, self.coefficients)]

    def __len__(self):
        return self.coefficients.size

    def __eq__(self, other):
        if not isinstance(other, ExpSum):
            return NotImplemented
        return (np.array_equal(self.exponents, other.exponents)
                and np.array_equal(self.coefficients, other.coefficients))

    def __hash__(self):
        return hash((self.exponents.tobytes(), self.coefficients.tobytes()))

    def is_zero(self) -> bool:
        return self.coefficients.size == 0

    def key(self) -> tuple:
        return (self.exponents.tobytes(), self.coefficients.tobytes())

    def _check_range(self, alpha: float):
        if self._cmax * abs(alpha) > MAX_EXPONENT:
            raise RangeExceededError(f"exp-sum evaluation at alpha={alpha} would overflow")

    def evaluate(self, alpha: float) -> float:
        self._check_range(alpha)
        return math.fsum(self.coefficients * np.exp(self.exponents * alpha))

    def evaluate_derivative(self, alpha: float) -> float:
        self._check_range(alpha)
        return math.fsum(self.coefficients * self.exponents * np.exp(self.exponents * alpha))

    def evaluate_many(self, alphas) -> np.ndarray:
        """``evaluate`` at each alpha; every point is still an exactly rounded sum."""
        alphas = np.asarray(alphas, dtype=float)
        if alphas.size:
            self._check_range(float(np.max(np.abs(alphas))))
        terms = np.exp(np.outer(alphas, self.exponents)) * self.coefficients
        return np.array([math.fsum(row) for row in terms])

    def magnitude(self, alpha: float) -> float:
        """``sum |A_i| exp(c_i alpha)``: the scale against which zeros are judged."""
        self._check_range(alpha)
        return math.fsum(np.abs(self.coefficients) * np.exp(self.exponents * alpha))

    def shifted(self, b: float) -> "ExpSum":
        """The sum with every exponent moved by ``b``: equals ``exp(b alpha) * self``."""
        return ExpSum(self.exponents + b, self.coefficients, self.merge_tol)

    def grid(self, alphas: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Values and magnitudes on a grid (plain pairwise sums, for scanning)."""
        alphas = np.asarray(alphas, dtype=float)
        if alphas.size:
            self._check_range(float(np.max(np.abs(alphas))))
        e = np.exp(np.outer(alphas, self.exponents))
        return (e * self.coefficients).sum(axis=1), (e * np.abs(self.coefficients)).sum(axis=1)


def build_expsum(field_f: NoiseField, field_f0: NoiseField, symmetrized: bool,
                 merge_tol: float = MERGE_TOL) -> ExpSum:
    """The g-curve of ``field_f`` against ``field_f0`` as a canonical exponential sum.

    ``field_f0`` is taken as given (no dictatorship check), so a deliberately
    wrong baseline can be fed through the same machinery.
    """
    if field_f.n != field_f0.n:
        raise ValueError("fields must share n")
    plus, minus = field_f.values, field_f0.values
    if symmetrized:
        plus, minus = sym_values(field_f), sym_values(field_f0)
    for values in (plus, minus):
        if np.any(values <= 0.0) or np.any(values >= 1.0):
            raise ValueError("field values must lie strictly inside (0, 1); degenerate function")
    c = np.concatenate([np.log(plus), np.log(minus)])
    a = np.concatenate([np.ones(plus.size, dtype=np.int64), -np.ones(minus.size, dtype=np.int64)])
    return ExpSum._canonical(c, a, merge_tol)


def sign_changes(s: ExpSum) -> int:
    signs = np.sign(s.coefficients)
    return int(np.count_nonzero(signs[1:] != signs[:-1]))


def sign_pattern(s: ExpSum) -> str:
    """Run-compressed coefficient signs in exponent order, e.g. ``'+-+-+'``."""
    out = []
    for a in s.coefficients:
        ch = "+" if a > 0 else "-"
        if not out or out[-1] != ch:
            out.append(ch)
    return "".join(out)


def has_extreme_value(field: NoiseField) -> bool:
    """Some ``T_p f(x)`` lies below ``p`` or above ``1 - p``."""
    return bool(np.any(field.values < field.p) or np.any(field.values > 1.0 - field.p))


class Crossing(NamedTuple):
    location: float
    refined: bool


class Tangency(NamedTuple):
    location: float
    residual: float


@dataclass
class ZeroReport:
    sign_change_bound: int
    crossings: list[Crossing] = field(default_factory=list)
    tangencies: list[Tangency] = field(default_factory=list)
    far_crossings: list[Crossing] = field(default_factory=list)
    scan_range: tuple[float, float] = (0.0, 0.0)
    grid_step: float = 0.0

    def all_crossings(self) -> list[Crossing]:
        return sorted(self.crossings + self.far_crossings)

    def zero_count(self) -> int:
        """Zeros found, tangencies counted with multiplicity two."""
        return len(self.crossings) + len(self.far_crossings) + 2 * len(self.tangencies)

    def within_bound(self) -> bool:
        return self.zero_count() <= self.sign_change_bound

    def to_dict(self) -> dict:
        return {
            "sign_change_bound": self.sign_change_bound,
            "crossings": [c._asdict() for c in self.crossings],
            "tangencies": [t._asdict() for t in self.tangencies],
            "far_crossings": [c._asdict() for c in self.far_crossings],
            "scan_range": list(self.scan_range),
            "grid_step": self.grid_step,
            "zero_count": self.zero_count(),
        }


def _sign(x: float) -> int:
    return (x > 0) - (x < 0)


def _bisect(func: Callable[[float], float], a: float, b: float, sign_a: int, tol: float) -> tuple[float, float]:
    """Shrink a sign-change bracket ``[a, b]`` to width ``tol * max(1, |a|)``."""
    for _ in range(400):
        if b - a <= tol * max(1.0, abs(a)):
            break
        mid = 0.5 * (a + b)
        if mid <= a or mid >= b:
            break
        s = _sign(func(mid))
        if s == 0:
            return mid, mid
        if s == sign_a:
            a = mid
        else:
            b = mid
    return a, b


def _polish(func, deriv, a: float, b: float, steps: int = 6) -> float:
    """Newton steps from the bracket midpoint, kept only while inside and improving."""
    x = 0.5 * (a + b)
    fx = func(x)
    for _ in range(steps):
        d = deriv(x)
        if d == 0.0 or fx == 0.0:
            break
        nxt = x - fx / d
        if not a <= nxt <= b:
            break
        fn = func(nxt)
        if abs(fn) >= abs(fx):
            break
        x, fx = nxt, fn
    return x


def _refine_root(s: ExpSum, a: float, b: float, sign_a: int, tol: float) -> float:
    lo, hi = _bisect(s.evaluate, a, b, sign_a, tol)
    if lo == hi:
        return float(lo)
    return float(_polish(s.evaluate, s.evaluate_derivative, lo, hi))


def _far_zero(s: ExpSum, start: float, start_sign: int, direction: int, span: float, tol: float):
    """Locate the zero beyond the scanned range implied by the asymptotic sign.

    The sum is divided by its dominant exponential so it can be evaluated at
    any alpha on that side without overflow or underflow.
    """
    lead = s.exponents[-1] if direction > 0 else s.exponents[0]
    scaled = s.shifted(-lead)
    c, a = scaled.exponents, scaled.coefficients

    def h(alpha):
        return math.fsum(a * np.exp(c * alpha))

    def dh(alpha):
        return math.fsum(a * c * np.exp(c * alpha))

    x0, step = start, max(1.0, span)
    while True:
        x1 = x0 + direction * step
        if abs(x1) > FAR_LIMIT:
            return None
        if _sign(h(x1)) != start_sign:
            break
        x0, step = x1, 2.0 * step
    lo, hi = (x0, x1) if direction > 0 else (x1, x0)
    sign_lo = start_sign if direction > 0 else -start_sign
    lo, hi = _bisect(h, lo, hi, sign_lo, tol)
    return float(lo if lo == hi else _polish(h, dh, lo, hi))


def find_zeros(s: ExpSum, alpha_lo: float = -8.0, alpha_hi: float = 12.0, grid_step: float = 1e-3,
               refine_tol: float = 1e-12, tangency_tol: float = TANGENCY_TOL, far: bool = True) -> ZeroReport:
    """Scan ``[alpha_lo, alpha_hi]`` for real zeros of ``s``.

    Sign flips between grid neighbours are bracketed and refined (bisection,
    then Newton with the analytic derivative).  Points where the sum is
    tiny relative to ``s.magnitude`` without a sign flip are reported as
    tangencies (even-order zero candidates) with their residual.  With
    ``far`` set, a mismatch between the sign at a range end and the sign of
    the dominant term on that side locates one more zero outside the range.
    """
    if not alpha_lo < alpha_hi:
        raise ValueError("need alpha_lo < alpha_hi")
    if grid_step <= 0:
        raise ValueError("grid_step must be positive")
    report = ZeroReport(sign_changes(s), scan_range=(float(alpha_lo), float(alpha_hi)),
                        grid_step=float(grid_step))
    if s.is_zero():
        return report

    m = int(round((alpha_hi - alpha_lo) / grid_step)) + 1
    alphas = np.linspace(alpha_lo, alpha_hi, max(m, 2))
    vals, scale = s.grid(alphas)
    rel = np.abs(vals) / scale
    sgn = np.sign(vals).astype(int)
    sgn[rel <= EXACT_ZERO_TOL] = 0
    nz = np.flatnonzero(sgn)
    if nz.size == 0:
        return report

    crossings, tangencies = report.crossings, report.tangencies

    def boundary_zero(run: slice):
        idx = run.start + int(np.argmin(rel[run]))
        crossings.append(Crossing(float(alphas[idx]), False))

    if nz[0] > 0:
        boundary_zero(slice(0, nz[0]))

    left, right = nz[:-1], nz[1:]
    events = (sgn[left] != sgn[right]) | (right > left + 1)
    for i, j in zip(left[events], right[events]):
        if sgn[i] != sgn[j]:
            crossings.append(Crossing(_refine_root(s, alphas[i], alphas[j], sgn[i], refine_tol), True))
        elif j > i + 1:
            _classify_dip(s, alphas[i], alphas[j], sgn[i], refine_tol, tangency_tol, crossings, tangencies,
                          force=True)

    # dips that stay clear of the exact-zero threshold but come close to zero
    inner = np.arange(1, alphas.size - 1)
    dips = inner[(sgn[inner - 1] == sgn[inner]) & (sgn[inner] == sgn[inner + 1]) & (sgn[inner] != 0)
                 & (rel[inner] <= rel[inner - 1]) & (rel[inner] < rel[inner + 1])
                 & (rel[inner] < tangency_tol)]
    for i in dips:
        _classify_dip(s, alphas[i - 1], alphas[i + 1], sgn[i], refine_tol, tangency_tol, crossings, tangencies)

    if far:
        span = alpha_hi - alpha_lo
        top = int(np.sign(s.coefficients[-1]))
        if nz[-1] == alphas.size - 1 and sgn[nz[-1]] != top:
            loc = _far_zero(s, alphas[-1], sgn[nz[-1]], +1, span, refine_tol)
            if loc is not None:
                report.far_crossings.append(Crossing(loc, True))
        bottom = int(np.sign(s.coefficients[0]))
        if nz[0] == 0 and sgn[0] != bottom:
            loc = _far_zero(s, alphas[0], sgn[0], -1, span, refine_tol)
            if loc is not None:
                report.far_crossings.append(Crossing(loc, True))
        report.far_crossings.sort()

    if nz[-1] < alphas.size - 1:
        boundary_zero(slice(nz[-1] + 1, alphas.size))
    crossings.sort()
    tangencies.sort()
    return report


def _classify_dip(s, a, b, side_sign, refine_tol, tangency_tol, crossings, tangencies, force=False):
    """Resolve a same-sign dip on ``[a, b]``: a tangency, two close crossings, or nothing."""
    da, db = s.evaluate_derivative(a), s.evaluate_derivative(b)
    if _sign(da) != _sign(db) and _sign(da) != 0 and _sign(db) != 0:
        lo, hi = _bisect(s.evaluate_derivative, a, b, _sign(da), refine_tol)
        x = lo if lo == hi else _polish(s.evaluate_derivative, lambda t: _second_derivative(s, t), lo, hi)
    else:
        x = 0.5 * (a + b)
    value = s.evaluate(x)
    local = s.magnitude(x)
    if _sign(value) == -side_sign and abs(value) > EXACT_ZERO_TOL * local:
        crossings.append(Crossing(_refine_root(s, a, x, side_sign, refine_tol), True))
        crossings.append(Crossing(_refine_root(s, x, b, -side_sign, refine_tol), True))
    elif force or abs(value) < tangency_tol * local:
        tangencies.append(Tangency(float(x), float(abs(value))))


def _second_derivative(s: ExpSum, alpha: float) -> float:
    return math.fsum(s.coefficients * s.exponents**2 * np.exp(s.exponents * alpha))
