"""Command line front end.

One subcommand per pipeline operation.  Exit codes: 0 on success, 1 when
a decision or certification answers no, 2 for input problems, 3 when a
desk-scale resource cap trips.  ``--json`` switches to machine-readable
output; every run is deterministic, so identical inputs and flags give
byte-identical bytes no matter the ``--threads`` setting (all current
computations are exact single-pass algorithms; the flag is validated and
reserved for batch use).
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .circuits import encode_approx_partial, encode_probabilistic_partial, parse_circuit
from .decpomdp import (
    encode_decpomdp,
    encoding_to_sdimacs,
    parse_decpomdp,
    parse_policy,
    policy_to_skolem,
    policy_value,
)
from .errors import DssatError, ResourceCapError
from .evaluator import eval_skolem, evaluate
from .reductions import dqbf_from_formula, dqbf_to_dssat
from .sdimacs import parse_sdimacs, parse_skolem, print_sdimacs, print_skolem
from .solver import decide_dssat, solve_dssat_exact, solve_ssat

CERTIFY_TOL = 1e-9


def _read(path: str) -> str:
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _write(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def _emit_json(payload: dict) -> None:
    print(json.dumps(payload, sort_keys=True))


def _thread_count(args) -> int:
    n = args.threads
    if n is None:
        env = os.environ.get("DSSAT_THREADS")
        n = int(env) if env else (os.cpu_count() or 1)
    if n < 1:
        raise ValueError(f"thread count {n} must be positive")
    return n


def _counts(formula) -> dict:
    m = formula.matrix
    return {
        "vars": len(formula.prefix),
        "random": len(formula.randoms),
        "universal": len(formula.universals),
        "exist": len(formula.existentials),
        "clauses": len(m.clauses) if m.kind == "cnf" else len(m.implications),
        "extended": formula.extended,
    }


def cmd_parse(args) -> int:
    formula = parse_sdimacs(_read(args.file))
    text = print_sdimacs(formula)
    if args.json:
        _emit_json(_counts(formula) | {"text": text})
    else:
        print(text, end="")
    return 0


def cmd_solve(args) -> int:
    formula = parse_sdimacs(_read(args.file))
    res = solve_dssat_exact(formula, max_skolem_space=args.max_skolem_space)
    if args.json:
        _emit_json({"value": res.value, "candidates": res.stats.candidates,
                    "witness": print_skolem(res.witness, formula)})
    else:
        print(f"value {res.value!r}")
    return 0


def cmd_decide(args) -> int:
    formula = parse_sdimacs(_read(args.file))
    res = decide_dssat(formula, args.theta,
                       max_skolem_space=args.max_skolem_space)
    verdict = "yes" if res.decision else "no"
    if args.json:
        _emit_json({"decision": res.decision, "theta": args.theta,
                    "value": res.value, "candidates": res.stats.candidates})
    else:
        print(f"decision {verdict} value {res.value!r}")
    return 0 if res.decision else 1


def cmd_eval(args) -> int:
    formula = parse_sdimacs(_read(args.file))
    skolems = parse_skolem(_read(args.skolem), formula)
    value = evaluate(formula, skolems, max_random_vars=args.max_random_vars)
    if args.json:
        _emit_json({"value": value})
    else:
        print(f"value {value!r}")
    return 0


def cmd_ssat(args) -> int:
    formula = parse_sdimacs(_read(args.file))
    res = solve_ssat(formula, max_skolem_space=args.max_skolem_space)
    if args.json:
        _emit_json({"value": res.value,
                    "witness": print_skolem(res.witness, formula)})
    else:
        print(f"value {res.value!r}")
    return 0


def cmd_dqbf2dssat(args) -> int:
    formula = parse_sdimacs(_read(args.file))
    text = print_sdimacs(dqbf_to_dssat(dqbf_from_formula(formula)))
    if args.out:
        _write(args.out, text)
    if args.json:
        _emit_json({"text": text})
    elif not args.out:
        print(text, end="")
    return 0


def cmd_encode_decpomdp(args) -> int:
    model = parse_decpomdp(_read(args.model))
    artifact = encode_decpomdp(model)
    text, sidecar = encoding_to_sdimacs(artifact)
    if args.out:
        _write(args.out, text)
    if args.dir:
        _write(args.dir, json.dumps(sidecar, sort_keys=True, indent=2) + "\n")
    summary = {
        "kappa": artifact.kappa,
        "scale": artifact.scale,
        "offset": artifact.offset,
        "horizon": model.horizon,
        "stage_vars": list(artifact.stage_vars),
        "stage_clauses": list(artifact.stage_clauses),
        "vars": len(artifact.formula.prefix),
        "clauses": len(artifact.formula.matrix.implications),
    }
    if args.json:
        _emit_json(summary)
    elif not args.out:
        print(text, end="")
    else:
        for key in ("kappa", "scale", "offset", "horizon"):
            print(f"{key} {summary[key]!r}")
    return 0


def cmd_certify_policy(args) -> int:
    model = parse_decpomdp(_read(args.model))
    policy = parse_policy(_read(args.policy), model)
    artifact = encode_decpomdp(model)
    skolems = policy_to_skolem(model, policy, artifact)
    scaled = artifact.kappa * eval_skolem(artifact.formula, skolems,
                                          max_random_vars=None)
    descaled = artifact.descale(scaled)
    reference = policy_value(model, policy)
    ok = abs(descaled - reference) <= CERTIFY_TOL
    if args.json:
        _emit_json({"encoded_scaled": scaled, "descaled": descaled,
                    "reference": reference, "kappa": artifact.kappa,
                    "certified": ok})
    else:
        print(f"encoded {scaled!r}")
        print(f"descaled {descaled!r}")
        print(f"reference {reference!r}")
        print(f"certified {'yes' if ok else 'no'}")
    return 0 if ok else 1


def cmd_encode_circuit(args) -> int:
    spec = parse_circuit(_read(args.spec))
    impl = parse_circuit(_read(args.impl))
    encode = encode_approx_partial if args.approx else encode_probabilistic_partial
    enc = encode(spec, impl)
    text = print_sdimacs(enc.formula)
    if args.out:
        _write(args.out, text)
    if args.json:
        _emit_json({
            "text": text,
            "kind": enc.kind,
            "inputs": list(enc.x),
            "noise": list(enc.z),
            "copies": list(enc.y),
            "black_boxes": {orig: enc.directory[h] for orig, h in enc.bbs},
            "ok": enc.directory[enc.ok],
        })
    elif not args.out:
        print(text, end="")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true",
                        help="machine-readable output on stdout")
    common.add_argument("--threads", type=int, default=None, metavar="N",
                        help="worker threads (default: DSSAT_THREADS or all "
                             "cores); output is identical for any value")
    common.add_argument("--max-random-vars", type=int, default=24, metavar="N",
                        help="cap on random variables for summation (default 24)")
    common.add_argument("--max-skolem-space", type=int, default=1 << 20,
                        metavar="N", help="cap on Skolem candidates (default 2^20)")
    common.add_argument("--max-policy-space", type=int, default=10 ** 6,
                        metavar="N", help="cap on joint policies (default 10^6)")

    parser = argparse.ArgumentParser(
        prog="dssat",
        description="Exact toolkit for stochastic satisfiability with "
                    "explicit dependency sets.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("parse", parents=[common],
                       help="validate a formula and echo its canonical form")
    p.add_argument("file")
    p.set_defaults(fn=cmd_parse)

    p = sub.add_parser("solve", parents=[common],
                       help="maximize satisfying probability over Skolem sets")
    p.add_argument("file")
    p.set_defaults(fn=cmd_solve)

    p = sub.add_parser("decide", parents=[common],
                       help="compare the optimal value against a threshold")
    p.add_argument("file")
    p.add_argument("--theta", type=float, required=True,
                   help="decision threshold in [0, 1]")
    p.set_defaults(fn=cmd_decide)

    p = sub.add_parser("eval", parents=[common],
                       help="evaluate a formula under given Skolem tables")
    p.add_argument("file")
    p.add_argument("--skolem", required=True, metavar="FILE",
                   help="table file, one 'f <var> <bits>' line per existential")
    p.set_defaults(fn=cmd_eval)

    p = sub.add_parser("ssat", parents=[common],
                       help="solve a linear-prefix instance by quantifier rules")
    p.add_argument("file")
    p.set_defaults(fn=cmd_ssat)

    p = sub.add_parser("dqbf2dssat", parents=[common],
                       help="replace universals with half-half randomness")
    p.add_argument("file")
    p.add_argument("--out", metavar="FILE", help="write the result here")
    p.set_defaults(fn=cmd_dqbf2dssat)

    p = sub.add_parser("encode-decpomdp", parents=[common],
                       help="encode a decision process as a Boolean formula")
    p.add_argument("model")
    p.add_argument("--out", metavar="FILE", help="write the formula here")
    p.add_argument("--dir", metavar="FILE",
                   help="write the variable directory sidecar here")
    p.set_defaults(fn=cmd_encode_decpomdp)

    p = sub.add_parser("certify-policy", parents=[common],
                       help="check a policy's value through the encoding")
    p.add_argument("model")
    p.add_argument("--policy", required=True, metavar="FILE")
    p.set_defaults(fn=cmd_certify_policy)

    p = sub.add_parser("encode-circuit", parents=[common],
                       help="encode best-case agreement of a partial design")
    p.add_argument("--spec", required=True, metavar="FILE")
    p.add_argument("--impl", required=True, metavar="FILE")
    p.add_argument("--approx", action="store_true",
                   help="noise-free counting variant")
    p.add_argument("--out", metavar="FILE", help="write the formula here")
    p.set_defaults(fn=cmd_encode_circuit)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        _thread_count(args)
        return args.fn(args)
    except ResourceCapError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (DssatError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
