"""Command-line entry point.

Subcommands: ``gen``, ``reduce mtp2sat|isolate|cnf2mtp``, ``verify``,
``simulate``, ``saddle`` and ``pipeline``.  Global flags ``--seed``,
``--budget`` and ``--out`` may appear before or after the subcommand.

Exit codes: 0 when every assertion passed, 1 on a contract violation (or a
failed internal stage check), 2 on an input error.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from .clausepoly import cnf_to_mtp, width_reduce
from .cnf import CnfFormula, load_cnf, projected_counts, save_cnf, to_dimacs
from .compiler import mtp_to_sat
from .errors import InputError, QCollapseError, StageError
from .isolation import isolate
from .pipeline import PROFILES, gen_instance, pipeline
from .poly import (DEFAULT_BUDGET, MtpInstance, as_assignment, brute_force_decide, instance_to_json,
                   load_instance, promise_of_count)
from .saddle.sets import parse_set_spec
from .saddle.solvers import solve_reduced
from .saddle.states import matrix_from_json, matrix_to_json
from .verifier import (EXACT_T_LIMIT, acceptance_probability_exact, build_verifier, check_pcp_contract,
                       run_verifier)

EXIT_OK, EXIT_VIOLATION, EXIT_INPUT = 0, 1, 2


def _frac(x) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def _emit(args, text: str) -> None:
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


# --------------------------------------------------------------------------- subcommands


def cmd_gen(args) -> int:
    obj = gen_instance(args.profile, args.seed, n=args.n, k=args.k, density=args.density,
                       terms=args.terms, degree=args.degree, coeff_bound=args.coeff_bound)
    if isinstance(obj, CnfFormula):
        if args.out:
            save_cnf(obj, args.out)
        else:
            sys.stdout.write(to_dimacs(obj))
        return EXIT_OK
    _emit(args, instance_to_json(obj))
    return EXIT_OK


def cmd_reduce(args) -> int:
    if args.kind == "mtp2sat":
        cnf = mtp_to_sat(load_instance(args.input))
        if args.out:
            save_cnf(cnf, args.out)
        else:
            sys.stdout.write(to_dimacs(cnf))
        return EXIT_OK
    if args.kind == "isolate":
        cnf = load_cnf(args.input)
        prefix = args.out or str(Path(args.input).with_suffix(""))
        for k, f in enumerate(isolate(cnf, args.seed), start=1):
            path = f"{prefix}.k{k}.cnf"
            save_cnf(f, path)
            print(json.dumps({"k": k, "path": path, "num_vars": f.num_vars, "clauses": len(f.clauses)}))
        return EXIT_OK
    if args.kind == "cnf2mtp":
        cnf = load_cnf(args.input)
        if cnf.max_width > args.max_width:
            cnf = width_reduce(cnf, args.max_width)
        _emit(args, instance_to_json(cnf_to_mtp(cnf, args.max_width)))
        return EXIT_OK
    raise InputError(f"unknown reduction {args.kind!r}")


def _contract_doc(rep, spec) -> dict:
    def num(v):
        return _frac(v) if isinstance(v, Fraction) else v

    def approx(v):
        return float(v) if v is not None else None

    return {
        "holds": rep.holds,
        "promise": rep.promise.value,
        "mode": rep.mode,
        "repetitions": spec.repetitions,
        "B": _frac(spec.total_weight),
        "completeness": _frac(spec.completeness),
        "soundness": _frac(spec.soundness),
        "c_minus_s": _frac(spec.completeness_raw - spec.soundness_raw),
        "witnesses": ["".join(map(str, w)) for w in rep.witnesses],
        "witness_acceptance": {"".join(map(str, w)): num(v) for w, v in rep.witness_acceptance.items()},
        "witness_acceptance_float": {"".join(map(str, w)): approx(v) for w, v in rep.witness_acceptance.items()},
        "max_other_acceptance": num(rep.max_other_acceptance),
        "max_other_acceptance_float": approx(rep.max_other_acceptance),
        "reason": rep.reason,
    }


def cmd_verify(args) -> int:
    inst = load_instance(args.instance)
    spec = build_verifier(inst, Fraction(args.fail_budget))
    dec = brute_force_decide(inst, args.budget)
    prom = promise_of_count(len(dec.witnesses))
    wit = dec.witnesses[0] if len(dec.witnesses) == 1 else None
    rep = check_pcp_contract(spec, inst, mode=args.mode, budget_bits=args.budget, promise=prom, witness=wit)
    _emit(args, json.dumps(_contract_doc(rep, spec), indent=1, sort_keys=True) + "\n")
    return EXIT_OK if rep.holds else EXIT_VIOLATION


def cmd_simulate(args) -> int:
    inst = load_instance(args.instance)
    spec = build_verifier(inst, Fraction(args.fail_budget))
    if args.trials is not None:
        spec = spec.with_repetitions(args.trials)
    y = as_assignment([int(c) for c in args.proof.strip()], inst.num_vars)
    ss = np.random.SeedSequence(args.seed)
    seeds = [int(s.generate_state(1)[0]) for s in ss.spawn(args.runs)]
    runs = [run_verifier(spec, y, s) for s in seeds]
    rate = float(np.mean([r.accepted for r in runs]))
    doc = {"proof": args.proof.strip(), "repetitions": spec.repetitions, "runs": args.runs,
           "acceptance_rate": rate, "max_queries": max(r.max_queries for r in runs),
           "query_bound": spec.query_bound}
    if spec.repetitions <= EXACT_T_LIMIT:
        exact = acceptance_probability_exact(spec, y)
        se = max(float(np.sqrt(float(exact) * (1 - float(exact)) / args.runs)), 1e-12)
        doc.update(exact_acceptance=_frac(exact), exact_acceptance_float=float(exact),
                   z_score=(rate - float(exact)) / se)
    _emit(args, json.dumps(doc, indent=1, sort_keys=True) + "\n")
    return EXIT_OK


def cmd_saddle(args) -> int:
    R, _ = matrix_from_json(Path(args.observable).read_text())
    set_a, set_b = parse_set_spec(args.set_a), parse_set_spec(args.set_b)
    res = solve_reduced(R, set_a, set_b, tol=args.tol, seed=args.seed)
    doc = {"value_lower": res.value_lower, "value_upper": res.value_upper, "gap": res.gap,
           "certificate": res.certificate.value, "converged": res.converged,
           "iterations": res.iterations, "set_a": set_a.describe(), "set_b": set_b.describe(),
           "rho": json.loads(matrix_to_json(res.rho, set_a.registers)),
           "sigma": json.loads(matrix_to_json(res.sigma, set_b.registers))}
    _emit(args, json.dumps(doc, indent=1) + "\n")
    return EXIT_OK if res.converged else EXIT_VIOLATION


def cmd_pipeline(args) -> int:
    inst = load_instance(args.instance)
    sat = mtp_to_sat(inst)
    lines, ok = [], True
    for s in range(args.seed, args.seed + args.seeds):
        rep = pipeline(inst, s, budget=args.budget, sat=sat)
        lines.extend(rep.lines())
        ok &= rep.soundness_ok
    _emit(args, "\n".join(lines) + "\n")
    return EXIT_OK if ok else EXIT_VIOLATION


# --------------------------------------------------------------------------- parser


def _globals(parser: argparse.ArgumentParser, suppress: bool) -> None:
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    parser.add_argument("--seed", type=int, default=d(0), help="random seed (default 0)")
    parser.add_argument("--budget", type=int, default=d(DEFAULT_BUDGET),
                        help="enumeration budget in variables/bits (default %(default)s)")
    parser.add_argument("--out", default=d(None), help="output path (default stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qcollapse", description=__doc__.splitlines()[0])
    _globals(parser, suppress=False)
    common = argparse.ArgumentParser(add_help=False)
    _globals(common, suppress=True)
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", parents=[common], help="generate an instance")
    g.add_argument("--profile", required=True, choices=PROFILES)
    g.add_argument("--n", type=int, default=6)
    g.add_argument("--k", type=int, default=3)
    g.add_argument("--density", type=float, default=4.0)
    g.add_argument("--terms", type=int, default=6)
    g.add_argument("--degree", type=int, default=2)
    g.add_argument("--coeff-bound", type=int, default=4)
    g.set_defaults(func=cmd_gen)

    r = sub.add_parser("reduce", parents=[common], help="apply one reduction")
    r.add_argument("kind", choices=("mtp2sat", "isolate", "cnf2mtp"))
    r.add_argument("input", help="instance JSON (mtp2sat) or DIMACS file (isolate, cnf2mtp)")
    r.add_argument("--max-width", type=int, default=3)
    r.set_defaults(func=cmd_reduce)

    v = sub.add_parser("verify", parents=[common], help="check the verifier contract")
    v.add_argument("--instance", required=True)
    v.add_argument("--mode", choices=("auto", "exact", "certified"), default="auto")
    v.add_argument("--fail-budget", default="1/3")
    v.set_defaults(func=cmd_verify)

    s = sub.add_parser("simulate", parents=[common], help="Monte-Carlo runs of the verifier")
    s.add_argument("--instance", required=True)
    s.add_argument("--proof", required=True, help="proof bits, e.g. 0110")
    s.add_argument("--trials", type=int, default=None, help="repetitions T per run")
    s.add_argument("--runs", type=int, default=1000)
    s.add_argument("--fail-budget", default="1/3")
    s.set_defaults(func=cmd_simulate)

    sd = sub.add_parser("saddle", parents=[common], help="solve a constrained saddle point")
    sd.add_argument("--observable", required=True)
    sd.add_argument("--set-a", required=True, help="e.g. full@4, sep@2,2, ent:0.3@2,2")
    sd.add_argument("--set-b", required=True)
    sd.add_argument("--tol", type=float, default=1e-6)
    sd.set_defaults(func=cmd_saddle)

    p = sub.add_parser("pipeline", parents=[common], help="run the whole chain")
    p.add_argument("--instance", required=True)
    p.add_argument("--seeds", type=int, default=1, help="number of consecutive seeds")
    p.set_defaults(func=cmd_pipeline)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        return args.func(args)
    except StageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VIOLATION
    except (InputError, FileNotFoundError, IsADirectoryError, json.JSONDecodeError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except QCollapseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
