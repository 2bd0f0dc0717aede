"""Batch experiment runner: fixtures in, tables out.

Subcommands mirror the library: verify-all, count-vinogradov, linnik,
karatsuba, counting-lemma, ratio, main-lemma, reverse-square, exponents,
pigeonhole-report.  Reports are JSON (or CSV for sweeps), embed the full
configuration and library version, and are byte-identical for identical
(configuration, seed) pairs.

Exit codes: 0 success, 2 usage error, 3 budget exhausted, 4 verification
failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from fractions import Fraction

from . import __version__
from .errors import BudgetExceededError, MomentLabError, SupportError
from .exponents import ExponentParams, bdg_sharp_exponent, iterate_D_bound, theorem_exponent
from .qadic import QRational
from .stepfn import ModulatedStep
from .vinogradov import (
    count_J,
    count_J_congruence,
    karatsuba_bound,
    karatsuba_exponent_trace,
    classical_iteration_exponent,
    linnik_bound,
    linnik_count,
    linnik_max,
)
from .wavepackets import ScaleConfig, pigeonhole

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_BUDGET = 3
EXIT_VERIFICATION = 4


def _prime_check(value: str) -> int:
    from .vinogradov import _is_prime

    n = int(value)
    if not _is_prime(n):
        raise argparse.ArgumentTypeError(f"{n} is not prime")
    return n


def _fraction(value: str) -> Fraction:
    return Fraction(value)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="momentlab",
        description="Exact q-adic moment-curve laboratory: counting, tilings, decoupling checks.",
    )
    parser.add_argument("--version", action="version", version=f"momentlab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, seed=True):
        p.add_argument("--output", help="write the report to this path (default stdout)")
        p.add_argument("--format", choices=("json", "csv"), default="json")
        if seed:
            p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("verify-all", help="run the full desk-scale verification suite")
    p.add_argument("--q", type=_prime_check, required=True)
    p.add_argument("--k", type=int, required=True)
    common(p)

    p = sub.add_parser("count-vinogradov", help="exact solution counts of the power-sum system")
    p.add_argument("--s", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--X", type=int, required=True)
    p.add_argument("--mod-p", type=_prime_check, default=None)
    p.add_argument("--residue", type=int, default=None)
    p.add_argument("--budget", type=int, default=None)
    common(p, seed=False)

    p = sub.add_parser("linnik", help="residue counts with prescribed power sums")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--p", type=_prime_check, required=True)
    p.add_argument("--exhaustive", action="store_true", help="maximize over all targets")
    p.add_argument("--residues", type=int, nargs="*", default=None, help="target residues H_1..H_k")
    common(p, seed=False)

    p = sub.add_parser("karatsuba", help="iteration upper bound with trace")
    p.add_argument("--s", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--X", type=int, required=True)
    common(p, seed=False)

    p = sub.add_parser("counting-lemma", help="exhaustive transverse-tuple counting bound")
    p.add_argument("--q", type=_prime_check, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--delta-exp", type=int, required=True)
    p.add_argument("--kappa-exp", type=int, required=True)
    p.add_argument("--exhaustive", action="store_true", default=True)
    common(p, seed=False)

    p = sub.add_parser("ratio", help="decoupling ratio of a function fixture")
    p.add_argument("--input", required=True, help="JSON fixture with the function")
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--delta-exp", type=int, required=True)
    common(p, seed=False)

    p = sub.add_parser("main-lemma", help="two-branch moment inequality on a fixture")
    p.add_argument("--input", required=True)
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--delta-exp", type=int, required=True)
    p.add_argument("--eps", type=_fraction, default=Fraction(1, 2))
    common(p, seed=False)

    p = sub.add_parser("reverse-square", help="reverse square-function ratio and recursion")
    p.add_argument("--input", required=True)
    p.add_argument("--delta-exp", type=int, required=True)
    p.add_argument("--kappa-exp", type=int, required=True)
    common(p, seed=False)

    p = sub.add_parser("exponents", help="sweep the claimed exponents over p")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--p0", type=int, required=True)
    p.add_argument("--c0", type=_fraction, required=True)
    p.add_argument("--eps", type=_fraction, required=True)
    p.add_argument("--p-max", type=int, required=True)
    p.add_argument("--trajectories", action="store_true", help="include numeric unrolls")
    common(p, seed=False)

    p = sub.add_parser("pigeonhole-report", help="bucket statistics of a random or fixture function")
    p.add_argument("--q", type=_prime_check, default=None)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--delta-exp", type=int, required=True)
    p.add_argument("--p", type=int, default=8)
    p.add_argument("--input", help="JSON fixture (otherwise a seeded random instance)")
    p.add_argument("--n-intervals", type=int, default=3)
    common(p)

    return parser


def _config_dict(args) -> dict:
    skip = {"output", "format"}
    return {
        key: (str(v) if isinstance(v, Fraction) else v)
        for key, v in sorted(vars(args).items())
        if key not in skip and v is not None
    }


def _load_fixture(path: str) -> ModulatedStep:
    with open(path, encoding="utf-8") as fh:
        return ModulatedStep.from_json(json.load(fh))


def _emit(args, payload: dict, csv_rows=None, csv_header=None) -> None:
    """Write the report atomically; stdout when no output path is given."""
    payload = {
        "version": __version__,
        "config": _config_dict(args),
        "threads": int(os.environ.get("MOMENTLAB_THREADS", "1")),
        **payload,
    }
    if args.format == "csv":
        if csv_rows is None:
            raise MomentLabError("this subcommand has no tabular form; use --format json")
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["# momentlab", __version__])
        writer.writerow(["# config", json.dumps(payload["config"], sort_keys=True)])
        writer.writerow(csv_header)
        writer.writerows(csv_rows)
        text = buf.getvalue()
    else:
        text = json.dumps(payload, indent=2, sort_keys=True, default=str) + "\n"
    if args.output:
        tmp = args.output + ".tmp"
        with open(tmp, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, args.output)
    else:
        sys.stdout.write(text)


def _cmd_verify_all(args) -> int:
    from .verify import run_all

    reports = run_all(args.q, args.k, seed=args.seed)
    ok = all(r["passed"] for r in reports)
    for r in reports:
        status = "PASS" if r["passed"] else "FAIL"
        print(f"{status}  {r['name']:<22} {r['runtime_s']:>8.2f}s", file=sys.stderr)
    _emit(args, {"passed": ok, "suites": reports})
    return EXIT_OK if ok else EXIT_VERIFICATION


def _cmd_count_vinogradov(args) -> int:
    kwargs = {"budget": args.budget} if args.budget else {}
    payload = {"count": count_J(args.s, args.k, args.X, **kwargs)}
    if args.mod_p is not None:
        payload["count_distinct_mod_p"] = count_J_congruence(
            args.s, args.k, args.X, args.mod_p, None, **kwargs
        )
        if args.residue is not None:
            payload["count_pinned_residue"] = count_J_congruence(
                args.s, args.k, args.X, args.mod_p, args.residue, **kwargs
            )
    rows = [[args.s, args.k, args.X, payload["count"],
             payload.get("count_distinct_mod_p", ""), payload.get("count_pinned_residue", "")]]
    _emit(args, payload, rows, ["s", "k", "X", "count", "count_distinct_mod_p", "count_pinned_residue"])
    return EXIT_OK


def _cmd_linnik(args) -> int:
    bound = linnik_bound(args.k, args.p)
    payload = {"bound": bound}
    if args.exhaustive or args.residues is None:
        value, argmax = linnik_max(args.k, args.p)
        payload.update({"max_count": value, "argmax_residues": argmax, "holds": value <= bound})
    if args.residues is not None:
        if len(args.residues) != args.k:
            raise MomentLabError(f"need exactly {args.k} residues")
        payload["count"] = linnik_count(args.k, args.p, args.residues)
        payload["holds"] = payload["count"] <= bound
    if not payload.get("holds", True):
        _emit(args, payload)
        return EXIT_VERIFICATION
    _emit(args, payload)
    return EXIT_OK


def _cmd_karatsuba(args) -> int:
    trace = karatsuba_bound(args.s, args.k, args.X)
    exponent, steps = karatsuba_exponent_trace(args.s, args.k)
    payload = trace.to_json()
    payload["symbolic_exponent"] = str(exponent)
    payload["closed_form_exponent"] = str(classical_iteration_exponent(args.s, args.k))
    rows = [
        [st.get("s"), str(st.get("X")), st.get("prime", ""), str(st.get("factor"))]
        for st in trace.steps
    ]
    _emit(args, payload, rows, ["s", "X", "prime", "factor"])
    return EXIT_OK


def _cmd_counting_lemma(args) -> int:
    from .decoupling import counting_lemma_exhaustive

    rep = counting_lemma_exhaustive(args.q, args.k, args.delta_exp, args.kappa_exp)
    _emit(args, rep)
    return EXIT_OK if rep["holds"] else EXIT_VERIFICATION


def _cmd_ratio(args) -> int:
    from .decoupling import DecouplingInstance, decoupling_ratio

    f = _load_fixture(args.input)
    inst = DecouplingInstance(f, args.delta_exp, args.p)
    ratio, rep = decoupling_ratio(inst)
    rep["certificate_intervals"] = [K.to_json() for K in sorted(inst.certificate, key=lambda i: i.key())]
    _emit(args, rep)
    return EXIT_OK


def _cmd_main_lemma(args) -> int:
    from .decoupling import verify_main_lemma

    f = _load_fixture(args.input)
    cfg = ScaleConfig.from_epsilon(f.q, f.k, args.delta_exp, args.eps)
    rep = verify_main_lemma(f, cfg, args.p)
    _emit(args, rep)
    return EXIT_OK if rep["holds"] else EXIT_VERIFICATION


def _cmd_reverse_square(args) -> int:
    from .decoupling import reverse_square_check

    f = _load_fixture(args.input)
    rep = reverse_square_check(f, args.delta_exp, args.kappa_exp)
    _emit(args, rep)
    return EXIT_OK if rep["recursion_holds"] and rep["broad_holds"] else EXIT_VERIFICATION


def _cmd_exponents(args) -> int:
    params = ExponentParams(k=args.k, p0=args.p0, c0=args.c0, epsilon=args.eps)
    rows = []
    records = []
    p = args.p0
    while p <= args.p_max:
        te = theorem_exponent(params, p)
        record = {
            "p": p,
            "delta_exponent": te["delta_exponent"],
            "q_exponent": str(te["q_exponent"]),
            "bdg_sharp_exponent": -bdg_sharp_exponent(args.k, p),
        }
        if args.trajectories and p > args.p0:
            record["trajectory_delta_exponent"] = iterate_D_bound(params, p).final_delta_exponent
        records.append(record)
        rows.append([p, te["delta_exponent"], str(te["q_exponent"]), -bdg_sharp_exponent(args.k, p)])
        p += 2 * args.k
    _emit(args, {"rows": records}, rows, ["p", "delta_exponent", "q_exponent", "bdg_sharp_exponent"])
    return EXIT_OK


def _cmd_pigeonhole_report(args) -> int:
    if args.input:
        f = _load_fixture(args.input)
        q, k = f.q, f.k
    else:
        if args.q is None or args.k is None:
            raise MomentLabError("need --q and --k (or --input) for a random instance")
        import random

        from .random_instances import random_curve_supported

        q, k = args.q, args.k
        f = random_curve_supported(random.Random(args.seed), q, k, args.delta_exp, args.n_intervals, 2)
    cfg = ScaleConfig.from_epsilon(q, k, args.delta_exp, Fraction(1, 2))
    buckets, remainder, info = pigeonhole(f, cfg, args.p)
    payload = {
        "buckets": [b.to_json() for b in buckets],
        "remainder_terms": len(remainder.terms),
        "H_star": info["H_star"],
        "remainder_lp": info["remainder_lp"],
        "remainder_bound": info["remainder_bound"],
        "n_buckets": info["n_buckets"],
        "class_bound": info["class_bound"],
    }
    _emit(args, payload)
    return EXIT_OK


_COMMANDS = {
    "verify-all": _cmd_verify_all,
    "count-vinogradov": _cmd_count_vinogradov,
    "linnik": _cmd_linnik,
    "karatsuba": _cmd_karatsuba,
    "counting-lemma": _cmd_counting_lemma,
    "ratio": _cmd_ratio,
    "main-lemma": _cmd_main_lemma,
    "reverse-square": _cmd_reverse_square,
    "exponents": _cmd_exponents,
    "pigeonhole-report": _cmd_pigeonhole_report,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except BudgetExceededError as exc:
        print(json.dumps({"error": "budget-exceeded", "reason": str(exc)}), file=sys.stderr)
        return EXIT_BUDGET
    except (SupportError, MomentLabError) as exc:
        print(json.dumps({"error": "verification-failure", "reason": str(exc)}), file=sys.stderr)
        return EXIT_VERIFICATION
    except (OSError, ValueError, json.JSONDecodeError) as exc:
        print(json.dumps({"error": "usage", "reason": str(exc)}), file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
