"""Boolean functions on the Hamming cube and their Walsh-Fourier spectra.

Inputs are encoded as unsigned integers: bit ``j - 1`` of ``x`` holds the
coordinate ``x_j``.  With this encoding the Hamming distance is the popcount
of an XOR and the butterfly of the fast transform walks the index bits.

The spectrum uses the orthonormal characters
``W_v(y) = 2**(-n/2) * (-1)**<v, y>``, so Parseval holds with no extra factor.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

MAX_N = 20


def popcount(x):
    """Hamming weight of an int or an integer array."""
    if isinstance(x, (int, np.integer)):
        return int(x).bit_count()
    return np.bitwise_count(np.asarray(x)).astype(np.int64)


def hamming_distance(x, y):
    return popcount(np.bitwise_xor(x, y))


def _readonly(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class BooleanFunction:
    """Truth table of ``f: {0,1}^n -> {0,1}``; ``table[x]`` is ``f(x)``."""

    n: int
    table: np.ndarray

    def __post_init__(self):
        if not 1 <= self.n <= MAX_N:
            raise ValueError(f"dimension n={self.n} outside 1..{MAX_N}")
        table = np.asarray(self.table)
        if table.shape != (1 << self.n,):
            raise ValueError(f"table must have length 2**n = {1 << self.n}, got {table.shape}")
        if not np.isin(table, (0, 1)).all():
            raise ValueError("truth table entries must be 0 or 1")
        object.__setattr__(self, "table", _readonly(table.astype(np.uint8)))

    def __call__(self, x: int) -> int:
        return int(self.table[x])

    def __len__(self) -> int:
        return self.table.size

    def __eq__(self, other):
        if not isinstance(other, BooleanFunction):
            return NotImplemented
        return self.n == other.n and np.array_equal(self.table, other.table)

    def __hash__(self):
        return hash((self.n, self.table.tobytes()))

    def __repr__(self):
        return f"BooleanFunction(n={self.n}, table={to_hex(self)})"

    @property
    def weight(self) -> int:
        return int(self.table.sum())


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Orthonormal Walsh-Fourier coefficients; ``coeffs[v]`` is f-hat(v)."""

    n: int
    coeffs: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "coeffs", _readonly(np.asarray(self.coeffs, dtype=float)))

    def energy(self) -> float:
        return float(np.sum(self.coeffs**2))


def from_truth_table(bits: Iterable[int]) -> BooleanFunction:
    """Build a function from a 0/1 sequence listed in index order x = 0, 1, ..."""
    table = np.asarray(list(bits) if not isinstance(bits, np.ndarray) else bits)
    length = table.size
    if length < 2 or length > (1 << MAX_N):
        raise ValueError(f"truth table length {length} outside 2..2**{MAX_N}")
    if length & (length - 1):
        raise ValueError(f"truth table length {length} is not a power of two")
    if table.dtype.kind not in "iub":
        raise ValueError("truth table entries must be integers 0 or 1")
    return BooleanFunction(length.bit_length() - 1, table)


def parse_truth_table(text: str, n: int | None = None) -> BooleanFunction:
    """Parse a '0'/'1' string (index 0 first) or a '0x' hex integer.

    Hex tables are integers whose bit ``x`` is ``f(x)``, written most
    significant nibble first, so the 3-bit majority is ``0xe8``.  For hex
    input ``n`` defaults to the dimension implied by the digit count.
    """
    text = text.strip()
    if text[:2].lower() == "0x":
        digits = text[2:]
        if not digits:
            raise ValueError("empty hex truth table")
        try:
            value = int(digits, 16)
        except ValueError:
            raise ValueError(f"invalid hex truth table {text!r}") from None
        if n is None:
            bits = 4 * len(digits)
            if bits & (bits - 1):
                raise ValueError(f"hex table with {len(digits)} digits does not imply a dimension; pass n")
            n = bits.bit_length() - 1
        if not 1 <= n <= MAX_N:
            raise ValueError(f"dimension n={n} outside 1..{MAX_N}")
        if value >> (1 << n):
            raise ValueError(f"hex table {text!r} has bits beyond index 2**{n} - 1")
        return from_int(value, n)
    if not text or set(text) - {"0", "1"}:
        raise ValueError(f"truth table {text!r} must consist of '0'/'1' characters")
    f = from_truth_table([int(ch) for ch in text])
    if n is not None and f.n != n:
        raise ValueError(f"truth table has dimension {f.n}, expected {n}")
    return f


def from_int(value: int, n: int) -> BooleanFunction:
    """Function whose table is the bit pattern of ``value`` (bit x = f(x))."""
    size = 1 << n
    table = np.array([(value >> x) & 1 for x in range(size)], dtype=np.uint8)
    return BooleanFunction(n, table)


def to_int(f: BooleanFunction) -> int:
    return int.from_bytes(np.packbits(f.table, bitorder="little").tobytes(), "little")


def to_hex(f: BooleanFunction) -> str:
    digits = max(1, (len(f) + 3) // 4)
    return f"0x{to_int(f):0{digits}x}"


def to_bitstring(f: BooleanFunction) -> str:
    return "".join("01"[b] for b in f.table)


def dictatorship(n: int, i: int) -> BooleanFunction:
    """``f(x) = x_i`` (coordinates numbered from 1)."""
    if not 1 <= i <= n:
        raise ValueError(f"coordinate i={i} outside 1..{n}")
    x = np.arange(1 << n)
    return BooleanFunction(n, (x >> (i - 1)) & 1)


def majority(n: int) -> BooleanFunction:
    if n % 2 == 0:
        raise ValueError(f"majority needs odd n (ties undefined), got n={n}")
    x = np.arange(1 << n)
    return BooleanFunction(n, (popcount(x) >= (n + 1) // 2).astype(np.uint8))


def constant(n: int, value: int) -> BooleanFunction:
    return BooleanFunction(n, np.full(1 << n, value, dtype=np.uint8))


def is_balanced(f: BooleanFunction) -> bool:
    return f.weight == len(f) // 2


def complement(f: BooleanFunction) -> BooleanFunction:
    return BooleanFunction(f.n, 1 - f.table)


def is_dictatorship(f: BooleanFunction) -> bool:
    """True for ``x_i`` and for ``1 - x_i`` (the orbit of the maximizer)."""
    x = np.arange(len(f))
    for i in range(f.n):
        coord = (x >> i) & 1
        if np.array_equal(f.table, coord) or np.array_equal(f.table, 1 - coord):
            return True
    return False


def fwht(a: np.ndarray) -> np.ndarray:
    """Unnormalized Walsh-Hadamard butterfly along the last axis.

    Works on stacked inputs of shape ``(..., 2**n)``.  Integer input stays
    integral, so the transform of a truth table is exact.
    """
    a = np.array(a, copy=True)
    size = a.shape[-1]
    if size & (size - 1):
        raise ValueError("transform length must be a power of two")
    lead = a.shape[:-1]
    h = 1
    while h < size:
        view = a.reshape(*lead, size // (2 * h), 2, h)
        lo = view[..., 0, :].copy()
        hi = view[..., 1, :]
        view[..., 0, :] += hi
        view[..., 1, :] = lo - hi
        h *= 2
    return a


def wht(f: BooleanFunction) -> Spectrum:
    raw = fwht(f.table.astype(np.int64))
    return Spectrum(f.n, raw / np.sqrt(len(f)))


def inverse_wht(spec: Spectrum) -> np.ndarray:
    """Real-valued table recovered from an orthonormal spectrum."""
    return fwht(spec.coeffs) / np.sqrt(spec.coeffs.size)
