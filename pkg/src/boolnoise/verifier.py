"""Exhaustive checks of the four dictatorship conjectures at small n.

For each balanced ``f`` and crossover probability ``p``:

* ``CK_unsym``: ``sum T_p f log T_p f`` does not exceed the dictatorship value;
* ``CK``: ``I(f(Y); X) <= 1 - h(p)``;
* ``LM``: ``N_alpha(f) <= N_alpha(f_0)`` on ``1 <= alpha <= 2``;
* ``LM_sym``: the same for the symmetrized sums.

Alongside these, ``g(2) <= 0`` with equality only for dictatorships, and the
zero count of the symmetrized g-curve against its sign-change bound.

Tables stream in ascending order in fixed batches and results merge in
table order, so reports are byte-identical however many processes run them.
"""

from __future__ import annotations

import itertools
import json
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from functools import lru_cache
from typing import Iterator, Sequence

import numpy as np

from .boolean_fn import BooleanFunction, fwht, is_balanced, is_dictatorship, popcount, to_hex, to_int
from .laguerre import ExpSum, build_expsum, find_zeros, has_extreme_value, sign_changes
from .noise import NoiseField, check_probability, dictatorship_field, noise_tables
from .norms import binary_entropy, deriv_at_one

CONJECTURES = ("CK_unsym", "CK", "LM", "LM_sym")
DEFAULT_P_GRID = tuple(round(0.05 * k, 2) for k in range(1, 10))
DEFAULT_ALPHA_STEP = 1.0 / 64
SLACK_TOL = 1e-9
LEMMA1_EQ_TOL = 1e-12
MAX_N = 5
CANONICAL_MAX_N = 6
ZERO_SCAN = (-8.0, 12.0, 1e-3)
CERTIFY_STEP = 1e-3


def alpha_grid(step: float = DEFAULT_ALPHA_STEP) -> np.ndarray:
    """Uniform grid on ``[1, 2]`` with both endpoints."""
    if not 0 < step <= 1:
        raise ValueError(f"alpha step must lie in (0, 1], got {step}")
    m = int(round(1.0 / step))
    return 1.0 + np.arange(m + 1) / m


# -- symmetry group --------------------------------------------------------

@lru_cache(maxsize=None)
def _group_maps(n: int) -> np.ndarray:
    """Index maps ``x -> perm(x) ^ mask`` for the hyperoctahedral group, shape ``(2**n n!, 2**n)``."""
    x = np.arange(1 << n)
    bits = (x[:, None] >> np.arange(n)) & 1
    maps = []
    for perm in itertools.permutations(range(n)):
        moved = (bits[:, list(perm)] << np.arange(n)).sum(axis=1)
        maps.append(moved[None, :] ^ x[:, None])
    return np.concatenate(maps).astype(np.intp)


def _lex_keys(tables: np.ndarray) -> np.ndarray:
    """Pack 0/1 rows into integers with entry 0 most significant."""
    size = tables.shape[-1]
    shifts = np.arange(size - 1, -1, -1, dtype=np.uint64)
    return np.bitwise_or.reduce(tables.astype(np.uint64) << shifts, axis=-1)


def orbit(f: BooleanFunction) -> np.ndarray:
    """All images of ``f`` under coordinate permutations, input flips and output complement."""
    if f.n > CANONICAL_MAX_N:
        raise ValueError(f"direct group enumeration supports n <= {CANONICAL_MAX_N}, got {f.n}")
    images = f.table[_group_maps(f.n)]
    return np.concatenate([images, 1 - images])


def canonical_form(f: BooleanFunction) -> BooleanFunction:
    """Lexicographically smallest truth table (index 0 first) in the orbit of ``f``."""
    images = orbit(f)
    return BooleanFunction(f.n, images[int(np.argmin(_lex_keys(images)))])


def canonical_keys(tables: np.ndarray) -> np.ndarray:
    """Canonical lexicographic key for each row of a table stack (n <= 6)."""
    tables = np.asarray(tables)
    n = tables.shape[-1].bit_length() - 1
    maps = _group_maps(n)
    out = np.empty(tables.shape[0], dtype=np.uint64)
    for k, row in enumerate(tables):
        images = row[maps]
        out[k] = min(_lex_keys(images).min(), _lex_keys(1 - images).min())
    return out


# -- enumeration -----------------------------------------------------------

def _check_n(n: int, allow_long: bool):
    if not 1 <= n <= MAX_N:
        raise ValueError(f"exhaustive enumeration supports 1 <= n <= {MAX_N}, got n={n}")
    if n == MAX_N and not allow_long:
        raise ValueError("n=5 enumerates C(32,16) ~ 6.0e8 tables; pass allow_long=True to run it")


def _gosper(n: int) -> Iterator[int]:
    """Integers of ``2**n`` bits with exactly ``2**(n-1)`` set, ascending."""
    size = 1 << n
    v = (1 << (size // 2)) - 1
    limit = 1 << size
    while v < limit:
        yield v
        t = v | (v - 1)
        v = (t + 1) | (((~t & -~t) - 1) >> ((v & -v).bit_length()))


def balanced_tables(n: int, allow_long: bool = False) -> np.ndarray:
    """Every balanced truth table as rows of a ``uint8`` array, ascending table value."""
    _check_n(n, allow_long)
    size = 1 << n
    if n <= 4:
        values = np.arange(1 << size, dtype=np.int64)
        values = values[popcount(values) == size // 2]
    else:
        values = np.fromiter(_gosper(n), dtype=np.int64)
    return ((values[:, None] >> np.arange(size)) & 1).astype(np.uint8)


def enumerate_balanced(n: int, reduce_symmetry: bool = False, allow_long: bool = False) -> Iterator[BooleanFunction]:
    """Balanced functions in ascending table value, or one canonical form per orbit.

    Representatives come out in ascending canonical order.
    """
    if not reduce_symmetry:
        _check_n(n, allow_long)
        for value in _gosper(n):
            yield BooleanFunction(n, (value >> np.arange(1 << n)) & 1)
        return
    tables = balanced_tables(n, allow_long)
    keys = canonical_keys(tables)
    size = 1 << n
    shifts = np.arange(size - 1, -1, -1, dtype=np.uint64)
    for key in np.unique(keys):
        yield BooleanFunction(n, ((key >> shifts) & np.uint64(1)).astype(np.uint8))


def count_orbits(n: int, allow_long: bool = False) -> int:
    return int(np.unique(canonical_keys(balanced_tables(n, allow_long))).size)


# -- single-function check -------------------------------------------------

@dataclass(frozen=True)
class ConjectureVerdict:
    conjecture_id: str
    holds: bool
    margin: float
    witness_alpha: float | None
    p: float


@dataclass
class FunctionCheck:
    """Everything recorded for one ``(f, p)`` pair."""

    truth_table: str
    n: int
    p: float
    verdicts: list[ConjectureVerdict]
    g2: float
    g2_sym: float
    dictatorship: bool
    lemma1_ok: bool
    zero_count: int | None
    sign_change_bound: int
    extreme_value: bool
    interior_crossings: dict

    def verdict(self, cid: str) -> ConjectureVerdict:
        return self.verdicts[CONJECTURES.index(cid)]

    @property
    def all_hold(self) -> bool:
        return all(v.holds for v in self.verdicts)

    def implication_ok(self) -> bool:
        """LM => CK_unsym and LM_sym => CK, as they must hold per function."""
        v = {x.conjecture_id: x.holds for x in self.verdicts}
        return not (v["LM"] and not v["CK_unsym"]) and not (v["LM_sym"] and not v["CK"])


def _curve_margin(s: ExpSum, alphas: np.ndarray, slack_tol: float) -> tuple[float, float | None, list[float]]:
    """Negated max of the curve over the alpha grid and any interior sign pockets.

    A crossing strictly inside ``(1, 2)`` means the curve is positive
    somewhere there; the midpoints between crossings are added to the grid
    so that such a pocket shows up in the margin.
    """
    if s.is_zero():
        return 0.0, None, []
    report = find_zeros(s, 1.0, 2.0, CERTIFY_STEP, far=False)
    inner = [c.location for c in report.crossings if 1.0 + 1e-9 < c.location < 2.0 - 1e-9]
    candidates = list(alphas)
    if inner:
        edges = [1.0] + inner + [2.0]
        candidates += [0.5 * (a + b) for a, b in zip(edges[:-1], edges[1:])]
    values = s.evaluate_many(candidates)
    k = int(np.argmax(values))
    margin = -float(values[k])
    witness = float(candidates[k]) if margin < -slack_tol else None
    return margin, witness, inner


def _field_quantities(field_f: NoiseField, f0: NoiseField, exact_baseline: bool, alphas: np.ndarray,
                      slack_tol: float, zero_scan: bool) -> dict:
    """Everything in a check that depends only on the multiset of field values."""
    p = field_f.p
    size = len(field_f)
    d_f, d_f0 = deriv_at_one(field_f), deriv_at_one(f0)
    info_f = 1.0 + deriv_at_one(field_f, True) / size
    info_f0 = 1.0 - binary_entropy(p) if exact_baseline else 1.0 + deriv_at_one(f0, True) / size

    s_plain = build_expsum(field_f, f0, False)
    s_sym = build_expsum(field_f, f0, True)
    m_lm, w_lm, inner_lm = _curve_margin(s_plain, alphas, slack_tol)
    m_sym, w_sym, inner_sym = _curve_margin(s_sym, alphas, slack_tol)
    margins = {
        "CK_unsym": (d_f0 - d_f, None),
        "CK": (info_f0 - info_f, None),
        "LM": (m_lm, w_lm),
        "LM_sym": (m_sym, w_sym),
    }
    zero_count = find_zeros(s_sym, *ZERO_SCAN).zero_count() if zero_scan else None
    return {
        "verdicts": [ConjectureVerdict(cid, bool(margins[cid][0] >= -slack_tol), float(margins[cid][0]),
                                       margins[cid][1], p) for cid in CONJECTURES],
        "g2": float(s_plain.evaluate(2.0)),
        "g2_sym": float(s_sym.evaluate(2.0)),
        "extreme_value": has_extreme_value(field_f),
        "interior_crossings": {"LM": inner_lm, "LM_sym": inner_sym},
        "zero_count": zero_count,
        "sign_change_bound": sign_changes(s_sym),
    }


def check_field(f: BooleanFunction, field_f: NoiseField, alphas: np.ndarray | None = None,
                slack_tol: float = SLACK_TOL, baseline: NoiseField | None = None,
                zero_scan: bool = True) -> FunctionCheck:
    """:func:`check_function` with the noise field already computed."""
    alphas = alpha_grid() if alphas is None else np.asarray(alphas, dtype=float)
    f0 = dictatorship_field(f.n, field_f.p) if baseline is None else baseline
    shared = _field_quantities(field_f, f0, baseline is None, alphas, slack_tol, zero_scan)
    return _assemble(f, field_f.p, shared, is_dictatorship(f))


def _lemma1_ok(shared: dict, dictator: bool) -> bool:
    """``g(2) <= 0`` for both curves, with equality exactly on dictatorships."""
    g2, g2_sym = shared["g2"], shared["g2_sym"]
    if dictator:
        return abs(g2) < LEMMA1_EQ_TOL and abs(g2_sym) < LEMMA1_EQ_TOL
    return g2 <= -LEMMA1_EQ_TOL and g2_sym <= -LEMMA1_EQ_TOL


def _assemble(f: BooleanFunction, p: float, shared: dict, dictator: bool) -> FunctionCheck:
    return FunctionCheck(to_hex(f), f.n, p, dictatorship=dictator, lemma1_ok=_lemma1_ok(shared, dictator), **shared)


def check_function(f: BooleanFunction, p: float, alpha_grid: Sequence[float] | None = None,
                   slack_tol: float = SLACK_TOL, baseline: NoiseField | None = None,
                   zero_scan: bool = True) -> FunctionCheck:
    """Verdicts for all four conjectures plus the g(2) and zero-bound records.

    ``baseline`` replaces the dictatorship field; it exists to exercise the
    failure path and is never needed for real checks.
    """
    p = check_probability(p)
    if not is_balanced(f):
        raise ValueError("check_function requires a balanced function")
    field_f = NoiseField(f.n, p, noise_tables(f.table, p))
    return check_field(f, field_f, alpha_grid, slack_tol, baseline, zero_scan)


# -- exhaustive run --------------------------------------------------------
#
# T_p f(x) = sum_k N_k(x) p**k (1-p)**(n-k) with N_k(x) the number of ones of
# f at distance k from x.  Functions whose multisets of distance profiles
# N(x) coincide therefore have the same field multiset for every p, and
# every checked quantity is a symmetric function of that multiset.  The
# expensive checks run once per profile class, on its smallest table.

BATCH_SIZE = 4096
CLASS_FIELD_TOL = 1e-10


def profile_keys(tables: np.ndarray) -> list[bytes]:
    """Exact class key per table: the sorted multiset of distance profiles."""
    tables = np.asarray(tables)
    size = tables.shape[-1]
    n = size.bit_length() - 1
    spheres = (popcount(np.arange(size))[None, :] == np.arange(n + 1)[:, None]).astype(np.int64)
    prof = fwht(fwht(tables.astype(np.int64))[:, None, :] * fwht(spheres)[None]) // size
    codes = np.einsum("mkx,k->mx", prof, (size + 1) ** np.arange(n + 1, dtype=np.int64))
    codes.sort(axis=1)
    return [row.tobytes() for row in codes]


def _table_batches(n: int, reduce_symmetry: bool, allow_long: bool) -> Iterator[np.ndarray]:
    if reduce_symmetry:
        reps = np.array([f.table for f in enumerate_balanced(n, True, allow_long)])
        # output complement preserves only the symmetrized quantities
        both = np.concatenate([reps, 1 - reps])
        values = np.array([int.from_bytes(np.packbits(t, bitorder="little").tobytes(), "little") for t in both])
        yield both[np.argsort(values, kind="stable")]
        return
    if n <= 4:
        tables = balanced_tables(n, allow_long)
        for i in range(0, len(tables), BATCH_SIZE):
            yield tables[i:i + BATCH_SIZE]
        return
    _check_n(n, allow_long)
    source = _gosper(n)
    size = 1 << n
    while True:
        values = np.fromiter(itertools.islice(source, BATCH_SIZE), dtype=np.int64)
        if not values.size:
            return
        yield ((values[:, None] >> np.arange(size)) & 1).astype(np.uint8)


def _class_task(args) -> tuple[list[dict], np.ndarray]:
    """Heavy checks for one class representative at every p."""
    n, table, p_grid, alphas, slack_tol, zero_scan = args
    shared, fields = [], []
    for p in p_grid:
        field_f = NoiseField(n, p, noise_tables(table, p))
        shared.append(_field_quantities(field_f, dictatorship_field(n, p), True, alphas, slack_tol, zero_scan))
        fields.append(np.sort(field_f.values))
    return shared, np.array(fields)


def _dictator_mask(tables: np.ndarray) -> np.ndarray:
    size = tables.shape[-1]
    n = size.bit_length() - 1
    coords = (np.arange(size)[None, :] >> np.arange(n)[:, None]) & 1
    dict_tables = np.concatenate([coords, 1 - coords]).astype(np.uint8)
    return (tables[:, None, :] == dict_tables[None]).all(axis=2).any(axis=1)


class _Aggregate:
    def __init__(self, p_grid):
        self.p_grid = p_grid
        self.worst: dict = {}
        self.counterexamples: list = []
        self.lemma1: list = []
        self.bound: list = []
        self.implication: list = []
        self.zeros: Counter = Counter()
        self.signs: Counter = Counter()
        self.functions = 0
        self.checks = 0

    def add(self, value: int, hex_table: str, shared_by_p: list[dict], dictator: bool):
        self.functions += 1
        for p, shared in zip(self.p_grid, shared_by_p):
            self.checks += 1
            holds = {}
            for v in shared["verdicts"]:
                holds[v.conjecture_id] = v.holds
                rank = (v.margin, value, p)
                cur = self.worst.get(v.conjecture_id)
                if cur is None or rank < cur[0]:
                    self.worst[v.conjecture_id] = (rank, {"margin": v.margin, "truth_table_hex": hex_table,
                                                          "p": p, "witness_alpha": v.witness_alpha})
                if not v.holds:
                    self.counterexamples.append((value, {"truth_table_hex": hex_table, "n": None, "p": p,
                                                         "conjecture_id": v.conjecture_id,
                                                         "witness_alpha": v.witness_alpha, "margin": v.margin}))
            brief = {"truth_table_hex": hex_table, "p": p}
            if not _lemma1_ok(shared, dictator):
                self.lemma1.append(dict(brief, g2=shared["g2"], g2_sym=shared["g2_sym"], dictatorship=dictator))
            zc, bound = shared["zero_count"], shared["sign_change_bound"]
            if (zc is not None and zc > bound) or (shared["extreme_value"] and bound > 4):
                self.bound.append(dict(brief, zero_count=zc, sign_change_bound=bound))
            if (holds["LM"] and not holds["CK_unsym"]) or (holds["LM_sym"] and not holds["CK"]):
                self.implication.append(brief)
            if zc is not None:
                self.zeros[str(zc)] += 1
            self.signs[str(bound)] += 1


@dataclass
class VerificationReport:
    n: int
    p_grid: list[float]
    alpha_grid: dict
    slack_tol: float
    reduce_symmetry: bool
    functions_tested: int
    orbit_representatives: int | None
    profile_classes: int
    class_field_max_deviation: float
    checks: int
    verdicts: dict
    lemma1_violations: list
    zero_bound_violations: list
    implication_violations: list
    zero_count_distribution: dict
    sign_change_distribution: dict

    @property
    def all_hold(self) -> bool:
        return self.verdicts["all_hold"]

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def counterexamples_csv(self) -> str:
        lines = ["truth_table_hex,n,p,conjecture_id,witness_alpha,margin"]
        for c in self.verdicts["counterexamples"]:
            w = "" if c["witness_alpha"] is None else format(c["witness_alpha"], ".17g")
            lines.append(f"{c['truth_table_hex']},{c['n']},{format(c['p'], '.17g')},"
                         f"{c['conjecture_id']},{w},{format(c['margin'], '.17g')}")
        return "\n".join(lines) + "\n"


def verify_all(n: int, p_grid: Sequence[float] = DEFAULT_P_GRID, alpha_step: float = DEFAULT_ALPHA_STEP,
               reduce_symmetry: bool = False, workers: int = 1, slack_tol: float = SLACK_TOL,
               zero_scan: bool = True, allow_long: bool = False) -> VerificationReport:
    """Check every balanced ``f`` (or every orbit, with its complement) at every ``p``.

    The report depends only on the arguments, never on ``workers``.
    """
    _check_n(n, allow_long)
    p_grid = [check_probability(p) for p in p_grid]
    if not p_grid:
        raise ValueError("p_grid must be nonempty")
    alphas = alpha_grid(alpha_step)
    agg = _Aggregate(p_grid)
    classes: dict[bytes, tuple[list[dict], np.ndarray]] = {}
    deviation = 0.0
    pool = ProcessPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        for tables in _table_batches(n, reduce_symmetry, allow_long):
            keys = profile_keys(tables)
            fresh: dict[bytes, np.ndarray] = {}
            for key, table in zip(keys, tables):
                if key not in classes and key not in fresh:
                    fresh[key] = table
            tasks = [(n, t, p_grid, alphas, slack_tol, zero_scan) for t in fresh.values()]
            results = pool.map(_class_task, tasks) if pool and len(tasks) > 1 else map(_class_task, tasks)
            classes.update(zip(fresh.keys(), results))

            # each function's own field must match its class representative
            for k, p in enumerate(p_grid):
                own = np.sort(noise_tables(tables, p), axis=1)
                rep = np.array([classes[key][1][k] for key in keys])
                deviation = max(deviation, float(np.max(np.abs(own - rep))))
            if deviation > CLASS_FIELD_TOL:
                raise RuntimeError(f"profile class field mismatch {deviation:.3g}")

            dictators = _dictator_mask(tables)
            for table, key, dictator in zip(tables, keys, dictators):
                f = BooleanFunction(n, table)
                agg.add(to_int(f), to_hex(f), classes[key][0], bool(dictator))
    finally:
        if pool:
            pool.shutdown()

    counterexamples = []
    for _, c in sorted(agg.counterexamples, key=lambda item: (item[0], item[1]["p"], item[1]["conjecture_id"])):
        counterexamples.append(dict(c, n=n))
    return VerificationReport(
        n=n, p_grid=list(p_grid),
        alpha_grid={"min": 1.0, "max": 2.0, "step": alpha_step, "points": len(alphas)},
        slack_tol=slack_tol, reduce_symmetry=reduce_symmetry, functions_tested=agg.functions,
        orbit_representatives=(count_orbits(n) if n <= 4 else None) if not reduce_symmetry else agg.functions // 2,
        profile_classes=len(classes), class_field_max_deviation=deviation, checks=agg.checks,
        verdicts={"all_hold": not counterexamples,
                  "worst_margin": {c: agg.worst[c][1] for c in CONJECTURES if c in agg.worst},
                  "counterexamples": counterexamples},
        lemma1_violations=agg.lemma1, zero_bound_violations=agg.bound, implication_violations=agg.implication,
        zero_count_distribution=dict(sorted(agg.zeros.items())),
        sign_change_distribution=dict(sorted(agg.signs.items())),
    )
