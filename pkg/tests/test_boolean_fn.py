import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from boolnoise import boolean_fn as bf
from conftest import random_function


def wht_oracle(table):
    """Defining inner product summed one character at a time."""
    size = len(table)
    out = np.zeros(size)
    for v in range(size):
        out[v] = math.fsum((-1) ** bin(v & y).count("1") * int(table[y]) for y in range(size))
    return out / math.sqrt(size)


def test_from_truth_table_single_coordinate():
    f = bf.from_truth_table([0, 1])
    assert f.n == 1
    assert f == bf.dictatorship(1, 1)


def test_from_truth_table_majority_order():
    f = bf.from_truth_table([0, 0, 0, 1, 0, 1, 1, 1])
    assert f.n == 3
    assert all(f(x) == int(bin(x).count("1") >= 2) for x in range(8))


@pytest.mark.parametrize("bits", [[0] * 6, [1], [], [0, 2], [0, 1, 1, 0.5]])
def test_from_truth_table_rejects(bits):
    with pytest.raises(ValueError):
        bf.from_truth_table(bits)


def test_dictatorship_tables():
    assert bf.dictatorship(1, 1).table.tolist() == [0, 1]
    f = bf.dictatorship(3, 1)
    assert np.flatnonzero(f.table).tolist() == [1, 3, 5, 7]
    assert bf.is_balanced(f)
    with pytest.raises(ValueError):
        bf.dictatorship(3, 4)
    with pytest.raises(ValueError):
        bf.dictatorship(3, 0)


def test_majority():
    assert bf.majority(3).table.tolist() == [0, 0, 0, 1, 0, 1, 1, 1]
    assert bf.majority(1) == bf.dictatorship(1, 1)
    assert bf.is_balanced(bf.majority(5))
    with pytest.raises(ValueError):
        bf.majority(2)


def test_is_balanced():
    assert bf.is_balanced(bf.majority(3))
    assert not bf.is_balanced(bf.constant(3, 0))
    assert bf.is_balanced(bf.dictatorship(4, 2))


def test_complement():
    d = bf.dictatorship(3, 1)
    assert bf.is_balanced(bf.complement(d))
    assert bf.complement(bf.complement(d)) == d
    assert bf.complement(bf.majority(3)).table.tolist() == [1, 1, 1, 0, 1, 0, 0, 0]


def test_is_dictatorship():
    assert bf.is_dictatorship(bf.dictatorship(4, 3))
    assert bf.is_dictatorship(bf.complement(bf.dictatorship(4, 3)))
    assert not bf.is_dictatorship(bf.majority(3))


def test_text_formats():
    maj = bf.majority(3)
    assert bf.to_hex(maj) == "0xe8"
    assert bf.to_bitstring(maj) == "00010111"
    assert bf.parse_truth_table("0xe8") == maj
    assert bf.parse_truth_table("00010111") == maj
    assert bf.parse_truth_table("0x6", n=2) == bf.parse_truth_table("0110")
    assert bf.from_int(bf.to_int(maj), 3) == maj
    for bad in ("0x", "0xzz", "012", "", "0x1ff"):
        with pytest.raises(ValueError):
            bf.parse_truth_table(bad)
    with pytest.raises(ValueError):
        bf.parse_truth_table("0110", n=3)


def test_hamming_distance():
    assert bf.hamming_distance(0b1011, 0b0110) == 3
    assert bf.popcount(np.array([0, 7, 8])).tolist() == [0, 3, 1]


def test_table_is_read_only():
    f = bf.majority(3)
    with pytest.raises(ValueError):
        f.table[0] = 1


def test_wht_balanced_dc():
    coeffs = bf.wht(bf.majority(3)).coeffs
    assert coeffs[0] == pytest.approx(4 / math.sqrt(8), abs=1e-15)
    assert coeffs[0] == pytest.approx(1.414213562, abs=1e-9)


@pytest.mark.parametrize("n,i", [(1, 1), (3, 2), (5, 5)])
def test_wht_dictatorship_support(n, i):
    coeffs = bf.wht(bf.dictatorship(n, i)).coeffs
    support = np.flatnonzero(np.abs(coeffs) > 1e-12)
    assert support.tolist() == [0, 1 << (i - 1)]
    assert np.allclose(coeffs[support] ** 2, 2**n / 4, atol=1e-12)


def test_wht_constant_zero():
    assert not np.any(bf.wht(bf.constant(4, 0)).coeffs)


@pytest.mark.parametrize("n", range(1, 7))
def test_wht_matches_inner_product(rng, n):
    for _ in range(5):
        f = random_function(rng, n)
        assert np.max(np.abs(bf.wht(f).coeffs - wht_oracle(f.table))) < 1e-12


@pytest.mark.parametrize("n", range(1, 11))
def test_wht_round_trip_and_parseval(rng, n):
    tables = rng.integers(0, 2, size=(1000, 1 << n))
    for table in tables[:: max(1, 1000 // 50)]:
        f = bf.BooleanFunction(n, table)
        spec = bf.wht(f)
        back = bf.inverse_wht(spec)
        assert np.max(np.abs(back - f.table)) < 1e-12
        assert np.array_equal(np.rint(back).astype(np.uint8), f.table)
        assert abs(f.weight - spec.energy()) < (1 << n) * 1e-12
    # the full 1000 through the stacked butterfly
    raw = bf.fwht(tables)
    back = bf.fwht(raw) // (1 << n)
    assert np.array_equal(back, tables)


@pytest.mark.parametrize("n", range(1, 9))
def test_balanced_energy(rng, n):
    f = random_function(rng, n, balanced=True)
    assert abs(bf.wht(f).energy() - 2 ** (n - 1)) < 1e-9


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 8).flatmap(lambda n: st.tuples(st.just(n), st.integers(0, (1 << (1 << n)) - 1))))
def test_complement_flips_nonzero_coefficients(args):
    n, value = args
    f = bf.from_int(value, n)
    a, b = bf.wht(f).coeffs, bf.wht(bf.complement(f)).coeffs
    assert np.allclose(b[1:], -a[1:], atol=1e-12, rtol=0)
    assert b[0] + a[0] == pytest.approx(math.sqrt(1 << n), abs=1e-12)
