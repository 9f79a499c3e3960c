"""Command line front end: ``analyze``, ``verify`` and ``figure2``.

Exit codes: 0 success, 1 numerical range error, 2 invalid input,
3 counterexample found by ``verify``.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import boolean_fn as bf
from .laguerre import RangeExceededError, build_expsum, find_zeros, sign_changes, sign_pattern
from .noise import apply_noise, apply_noise_direct, check_probability, dictatorship_field
from .norms import CurveSpec, deriv_at_one, dictatorship_information, g_curve, mutual_information
from .verifier import DEFAULT_P_GRID, check_field, verify_all

log = logging.getLogger("boolnoise")

FIGURE2_P = (0.21, 0.068, 0.017)


class UsageError(ValueError):
    pass


def fmt(x: float) -> str:
    """17 significant digits, dot decimal separator regardless of locale."""
    return format(float(x), ".17g")


def dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def resolve_function(spec: str | None, truth_table: str | None, n: int | None) -> bf.BooleanFunction:
    if truth_table is not None:
        return bf.parse_truth_table(truth_table, n)
    if spec is None:
        raise UsageError("give --function or --truth-table")
    if n is None:
        raise UsageError("--n is required with --function")
    if spec == "majority":
        return bf.majority(n)
    if spec.startswith("dictatorship"):
        _, _, idx = spec.partition(":")
        return bf.dictatorship(n, int(idx) if idx else 1)
    if spec.startswith(("0x", "0X")) or set(spec) <= {"0", "1"}:
        return bf.parse_truth_table(spec, n)
    raise UsageError(f"unknown function source {spec!r}")


def _grid(lo: float, hi: float, step: float) -> np.ndarray:
    if not lo < hi or step <= 0:
        raise UsageError("need alpha-min < alpha-max and alpha-step > 0")
    m = int(round((hi - lo) / step))
    return np.linspace(lo, hi, m + 1)


def _parse_p_grid(text: str | None) -> list[float]:
    if text is None:
        return list(DEFAULT_P_GRID)
    try:
        return [check_probability(float(x)) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_analyze(args) -> int:
    f = resolve_function(args.function, args.truth_table, args.n)
    p = check_probability(args.p)
    sym = args.symmetrized
    alphas = _grid(args.alpha_min, args.alpha_max, args.alpha_step)

    field = apply_noise(f, p)
    f0 = dictatorship_field(f.n, p)
    curve = g_curve(CurveSpec(field, f0, sym), alphas)

    if args.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["alpha", "g_sym" if sym else "g"])
        w.writerows([fmt(a), fmt(v)] for a, v in zip(alphas, curve))
        _emit(buf.getvalue(), args.out)
        return 0

    s = build_expsum(field, f0, sym)
    scan_step = min(args.alpha_step, 1e-3)
    zeros = find_zeros(s, args.alpha_min, args.alpha_max, scan_step)
    report = {
        "function": {"n": f.n, "truth_table": bf.to_bitstring(f), "truth_table_hex": bf.to_hex(f),
                     "balanced": bf.is_balanced(f), "dictatorship": bf.is_dictatorship(f)},
        "p": p,
        "symmetrized": sym,
        "field": [float(v) for v in field.values],
        "curve": {"alpha": [float(a) for a in alphas], "g": [float(v) for v in curve]},
        "expsum": {"terms": [{"c": c, "A": a} for c, a in s.terms], "sign_pattern": sign_pattern(s)},
        "sign_change_bound": sign_changes(s),
        "zeros": zeros.to_dict(),
        "deriv_at_one": {"f": deriv_at_one(field, sym), "f0": deriv_at_one(f0, sym)},
    }
    if bf.is_balanced(f):
        report["mutual_information"] = mutual_information(f, p)
        report["dictatorship_information"] = dictatorship_information(p)
        check = check_field(f, field)
        report["verdicts"] = [v.__dict__ for v in check.verdicts]
        report["lemma1"] = {"g2": check.g2, "g2_sym": check.g2_sym, "ok": check.lemma1_ok}
    _emit(dump_json(report), args.out)
    return 0


def cmd_verify(args) -> int:
    if not 1 <= args.n <= 5:
        raise UsageError(f"verify supports 1 <= n <= 5, got n={args.n}")
    if args.n == 5 and not args.long:
        raise UsageError("n=5 is a multi-hour run; pass --long to enable it")
    report = verify_all(args.n, _parse_p_grid(args.p_grid), args.alpha_step or 1 / 64,
                        reduce_symmetry=args.reduce_symmetry, workers=args.workers, allow_long=args.long)
    text = report.counterexamples_csv() if args.format == "csv" else report.to_json() + "\n"
    _emit(text, args.out)
    log.info("n=%d: %d functions, %d checks, all hold: %s", report.n, report.functions_tested,
             report.checks, report.all_hold)
    return 0 if report.all_hold else 3


def closed_form_check(p: float) -> dict:
    """Compare the noisy 3-bit majority field with the hand-expanded term list."""
    q = 1.0 - p
    expected = [
        (q**3 + 3 * p * q**2, 2),
        (q**3 + q**2 * p + 2 * q * p**2, 6),
        (2 * q**2 * p + q * p**2 + p**3, 6),
        (p**3 + 3 * q * p**2, 2),
    ]
    direct = apply_noise_direct(bf.majority(3), p).values
    computed = np.sort(np.concatenate([direct, 1.0 - direct]))[::-1]
    listed = np.array([v for v, k in expected for _ in range(k)])
    base = np.sort(dictatorship_field(3, p).values)
    err = float(np.max(np.abs(computed - listed)))
    base_err = float(max(np.max(np.abs(base[:4] - p)), np.max(np.abs(base[4:] - q))))
    return {"p": p, "max_abs_error": err, "baseline_max_abs_error": base_err,
            "ok": err < 1e-12 and base_err < 1e-12}


def figure2_data(p_list, alpha_min=-1.0, alpha_max=3.0, alpha_step=0.01) -> dict:
    alphas = _grid(alpha_min, alpha_max, alpha_step)
    f = bf.majority(3)
    out = {"alpha": alphas, "curves": {}, "sidecar": {"closed_form": [], "zeros": {}}}
    for p in p_list:
        p = check_probability(p)
        field, f0 = apply_noise(f, p), dictatorship_field(3, p)
        out["curves"][p] = g_curve(CurveSpec(field, f0, True), alphas)
        s = build_expsum(field, f0, True)
        zeros = find_zeros(s)
        out["sidecar"]["closed_form"].append(closed_form_check(p))
        out["sidecar"]["zeros"][fmt(p)] = dict(zeros.to_dict(), g_at_0=s.evaluate(0.0),
                                              dg_at_0=s.evaluate_derivative(0.0))
    return out


def cmd_figure2(args) -> int:
    p_list = _parse_p_grid(args.p_grid) if args.p_grid else list(FIGURE2_P)
    lo = -1.0 if args.alpha_min is None else args.alpha_min
    hi = 3.0 if args.alpha_max is None else args.alpha_max
    data = figure2_data(p_list, lo, hi, args.alpha_step or 0.01)
    sidecar = data["sidecar"]
    if args.out:
        outdir = Path(args.out)
        outdir.mkdir(parents=True, exist_ok=True)
        for p, curve in data["curves"].items():
            rows = ["alpha,g_sym"] + [f"{fmt(a)},{fmt(v)}" for a, v in zip(data["alpha"], curve)]
            (outdir / f"figure2_p{fmt(p)}.csv").write_text("\n".join(rows) + "\n")
        (outdir / "figure2_sidecar.json").write_text(dump_json(sidecar))
    elif args.format == "json":
        sys.stdout.write(dump_json({"alpha": [float(a) for a in data["alpha"]],
                                    "curves": {fmt(p): [float(v) for v in c] for p, c in data["curves"].items()},
                                    "sidecar": sidecar}))
    else:
        rows = ["p,alpha,g_sym"]
        for p, curve in data["curves"].items():
            rows += [f"{fmt(p)},{fmt(a)},{fmt(v)}" for a, v in zip(data["alpha"], curve)]
        sys.stdout.write("\n".join(rows) + "\n")
    return 0 if all(c["ok"] for c in sidecar["closed_form"]) else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="boolnoise", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", help="g-curve, zeros and verdicts for one function")
    a.add_argument("--function", help="'majority', 'dictatorship:i', or a truth table")
    a.add_argument("--truth-table", help="'0'/'1' string (index 0 first) or 0x-prefixed hex")
    a.add_argument("--n", type=int)
    a.add_argument("--p", type=float, required=True)
    a.add_argument("--alpha-min", type=float, default=-8.0)
    a.add_argument("--alpha-max", type=float, default=12.0)
    a.add_argument("--alpha-step", type=float, default=0.05,
                   help="curve sample spacing; the zero scan uses min(step, 1e-3)")
    a.add_argument("--symmetrized", action="store_true")
    a.add_argument("--format", choices=("json", "csv"), default="json")
    a.add_argument("--out")
    a.set_defaults(func=cmd_analyze)

    v = sub.add_parser("verify", help="exhaustive check over balanced functions")
    v.add_argument("--n", type=int, required=True)
    v.add_argument("--p-grid", help="comma separated crossover probabilities")
    v.add_argument("--alpha-step", type=float, help="grid step on [1, 2] (default 1/64)")
    v.add_argument("--reduce-symmetry", action="store_true")
    v.add_argument("--workers", type=int, default=1)
    v.add_argument("--long", action="store_true", help="allow the n=5 run")
    v.add_argument("--format", choices=("json", "csv"), default="json")
    v.add_argument("--out")
    v.set_defaults(func=cmd_verify)

    fg = sub.add_parser("figure2", help="g_sym curves of the 3-bit majority")
    fg.add_argument("--p-grid", help="comma separated p values (default 0.21,0.068,0.017)")
    fg.add_argument("--alpha-min", type=float)
    fg.add_argument("--alpha-max", type=float)
    fg.add_argument("--alpha-step", type=float)
    fg.add_argument("--format", choices=("json", "csv"), default="csv")
    fg.add_argument("--out", help="directory for per-p CSV files and the sidecar JSON")
    fg.set_defaults(func=cmd_figure2)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except RangeExceededError as exc:
        print(f"boolnoise: range error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"boolnoise: invalid input: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
