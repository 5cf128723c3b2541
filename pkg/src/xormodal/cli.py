"""Command-line front end.

Exit codes: 0 success/true, 1 false or nothing found within budget,
2 usage error, 3 verification failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import kripke, witness
from .cnf import CnfError, brute_force_sat, evaluate, parse_dimacs
from .formula import FormulaSyntaxError, parse_formula, print_formula
from .kripke import KripkeError, dump_model, frame_properties, load_model, to_json_dict
from .modelcheck import ModelCheckError, check
from .reduction import reduce, write_reduction
from .solver import BudgetExceeded, SearchBudget, bounded_modal_sat

EXIT_OK, EXIT_FALSE, EXIT_USAGE, EXIT_VERIFY = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _read_text(path) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def _formula_arg(value):
    """A path to a .mf file, or inline formula text when no such file exists."""
    text = _read_text(value) if os.path.isfile(value) else value
    return parse_formula(text)


def _emit(args, payload: dict, text: str):
    if args.json:
        print(json.dumps(payload))
    else:
        print(text)


# -- subcommands ----------------------------------------------------------------


def cmd_reduce(args) -> int:
    f = parse_dimacs(_read_text(args.input))
    out = reduce(f, pad_clauses=not args.no_pad)
    write_reduction(out, args.output, args.stats)
    _emit(args, {"output": args.output, **out.stats},
          "\n".join(f"{k:>14}: {v}" for k, v in out.stats.items()))
    return EXIT_OK


def _parse_assignment(text: str):
    names = set()
    for item in filter(None, (s.strip() for s in text.split(","))):
        names.add(f"x{item}" if item.isdigit() else item)
    return names


def cmd_witness(args) -> int:
    f = parse_dimacs(_read_text(args.input))
    assignment = _parse_assignment(args.assignment) if args.assignment is not None else None
    try:
        cert = witness.build_witness(f, assignment)
    except witness.UnsatisfiableError as exc:
        _emit(args, {"verified": False, "error": str(exc)}, str(exc))
        return EXIT_FALSE
    dump_model(cert.model, args.output)
    formula_file = None
    if args.cert:
        formula_file = args.formula or str(Path(args.cert).with_suffix(".mf"))
        with open(formula_file, "w", encoding="utf-8") as fh:
            fh.write(print_formula(cert.formula) + "\n")
        witness.write_certificate(cert, args.cert, formula_file)
    payload = cert.to_json_dict(formula_file)
    _emit(args, payload,
          f"verified: {cert.verified}\nworlds: {len(cert.model.worlds)}\n"
          f"start world: {cert.start_world}\ncore size: {len(cert.core)}")
    return EXIT_OK


def cmd_check(args) -> int:
    m = load_model(args.model)
    f = _formula_arg(args.formula)
    result = check(m, args.world, f)
    _emit(args, {"world": args.world, "result": result}, "true" if result else "false")
    return EXIT_OK if result else EXIT_FALSE


def cmd_solve(args) -> int:
    f = _formula_arg(args.formula)
    budget = SearchBudget(args.max_worlds, args.max_props, args.frame, args.arity)
    found = bounded_modal_sat(f, budget)
    if found is None:
        _emit(args, {"satisfiable_within_budget": False}, "no model within budget")
        return EXIT_FALSE
    m, w = found
    payload = {"satisfiable_within_budget": True, "world": w, "model": to_json_dict(m)}
    if args.json:
        print(json.dumps(payload))
    else:
        print(f"# satisfied at world {w}")
        print(json.dumps(to_json_dict(m), indent=1))
    return EXIT_OK


def cmd_frames(args) -> int:
    m = load_model(args.model)
    props = frame_properties(m)
    payload = {str(i): {"reflexive": p.reflexive, "transitive": p.transitive, "symmetric": p.symmetric}
               for i, p in props.items()}
    lines = ["relation  reflexive  transitive  symmetric"]
    for i, p in props.items():
        lines.append(f"{i:>8}  {str(p.reflexive):>9}  {str(p.transitive):>10}  {str(p.symmetric):>9}")
    _emit(args, payload, "\n".join(lines))
    return EXIT_OK


def cmd_roundtrip(args) -> int:
    stages = []

    def stage(name, ok, detail=""):
        stages.append({"stage": name, "ok": bool(ok), "detail": detail})
        return ok

    f = parse_dimacs(_read_text(args.input))
    stage("parse", True, f"{len(f.variables)} variables, {len(f.clauses)} clauses")
    sat = brute_force_sat(f)
    stage("brute-force", sat is not None, "satisfiable" if sat is not None else "unsatisfiable")
    code = EXIT_FALSE
    if sat is not None:
        red = reduce(f)
        stage("reduce", True, f"formula size {red.stats['formula_size']}")
        try:
            cert = witness.build_witness(f, sat, reduction=red)
            stage("witness", True, f"{len(cert.model.worlds)} worlds")
        except witness.WitnessError as exc:
            stage("witness", False, str(exc))
            cert = None
        if cert is not None:
            holds = check(cert.model, cert.start_world, cert.formula)
            s5 = kripke.in_frame_class(cert.model, "s5")
            stage("check", holds and s5, f"holds={holds} s5={s5}")
            extracted = witness.extract_assignment(cert.model, cert.start_world, red.variables)
            stage("extract", True, ",".join(sorted(extracted.true_set)))
            padded_ok = evaluate(red.tree, extracted)
            orig_ok = evaluate(f, extracted.restrict(f.variables))
            stage("re-eval", padded_ok and orig_ok, f"padded={padded_ok} input={orig_ok}")
        code = EXIT_OK if all(s["ok"] for s in stages) else EXIT_VERIFY
    payload = {"stages": stages, "exit_code": code}
    text = "\n".join(f"{'PASS' if s['ok'] else 'FAIL'}  {s['stage']:<12} {s['detail']}" for s in stages)
    _emit(args, payload, text)
    return code


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--json", action="store_true", help="emit one JSON object on stdout")

    parser = _Parser(prog="xormodal", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("reduce", parents=[common], help="translate a DIMACS 3CNF into a .mf formula")
    p.add_argument("input")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--stats")
    p.add_argument("--no-pad", action="store_true", help="skip the padding clauses")
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("witness", parents=[common], help="build and verify an S5 witness model")
    p.add_argument("input")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--cert")
    p.add_argument("--formula", help="where to write the reduced formula (default: next to --cert)")
    p.add_argument("--assignment", help="comma-separated true variables, e.g. 1,3 or x1,x3")
    p.set_defaults(func=cmd_witness)

    p = sub.add_parser("check", parents=[common], help="model-check a formula at a world")
    p.add_argument("model")
    p.add_argument("world")
    p.add_argument("formula", help=".mf file or inline formula")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("solve", parents=[common], help="bounded model search")
    p.add_argument("formula", help=".mf file or inline formula")
    p.add_argument("--frame", choices=["k", "t", "s4", "s5"], default="s5")
    p.add_argument("--max-worlds", type=int, default=4)
    p.add_argument("--max-props", type=int, default=3)
    p.add_argument("--arity", type=int, default=2)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("frames", parents=[common], help="frame properties of each relation")
    p.add_argument("model")
    p.set_defaults(func=cmd_frames)

    p = sub.add_parser("roundtrip", parents=[common], help="run and report the full pipeline")
    p.add_argument("input")
    p.set_defaults(func=cmd_roundtrip)
    return parser


def run_cli(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except witness.WitnessError as exc:
        detail = {"error": str(exc), "world": exc.world,
                  "subformula": print_formula(exc.subformula) if exc.subformula is not None else None}
        print(json.dumps(detail), file=sys.stderr)
        return EXIT_VERIFY
    except (CnfError, FormulaSyntaxError, KripkeError, ModelCheckError, BudgetExceeded,
            json.JSONDecodeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main():
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
