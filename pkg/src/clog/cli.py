"""Command-line interface.

Exit codes: 0 true/model, 1 false/unsat, 2 usage or input error,
3 unknown-at-budget.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import __version__
from .ast import StructuralError, iter_occurrences, kind_of
from .causal import compile_theory
from .corpus import random_theory
from .foid import export_foid
from .infer import (
    InferenceResult, bounded_query, endogenous_expand, fast_total_expand,
    model_check, model_expand, with_vocabulary,
)
from .parser import (
    ParseError, SourceFile, parse_structure, parse_theory, print_structure,
    print_theory, print_vocabulary,
)
from .transform import DEFF, NormalFormError, classify, normalize

EXIT = {"true": 0, "model": 0, "false": 1, "unsat": 1, "unknown-at-budget": 3}
USAGE = 2


class UsageError(Exception):
    pass


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="clog", description="FO(C) causal logic toolkit")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def common(p, structure=False, search=False):
        p.add_argument("-t", "--theory", required=False, help=".foc file ('-' for stdin)")
        p.add_argument("--json", action="store_true", help="emit a JSON report")
        if structure:
            p.add_argument("-s", "--structure", required=True, help=".struct file")
        if search:
            p.add_argument("--mode", choices=("lazy", "exhaustive"), default="lazy",
                           help="choice-function enumeration strategy")
        return p

    common(sub.add_parser("check", help="model checking"), True, True)
    common(sub.add_parser("expand", help="model expansion"), True, True)
    p = common(sub.add_parser("expand-endo", help="endogenous model expansion"), True, True)
    p.add_argument("--fast", action="store_true",
                   help="single canonical run for Or-only theories, falling back to search")
    p = common(sub.add_parser("query", help="bounded query with fresh elements"), True, True)
    p.add_argument("-q", "--query", required=True, help="propositional atom")
    p.add_argument("--budget", type=int, default=1, help="number of fresh elements (k)")
    p = common(sub.add_parser("normalize", help="print a normal form"))
    p.add_argument("--target", choices=("nestnf", "det", "deff"), default="deff")
    common(sub.add_parser("export", help="print the FO(ID) form of the DefF theory"))
    p = common(sub.add_parser("info", help="vocabulary, classes and occurrences"))
    p.add_argument("--seed", type=int, help="use the seeded random corpus theory")
    return ap


def _load_theory(args):
    seed = getattr(args, "seed", None)
    if seed is not None:
        if args.theory:
            raise UsageError("--theory and --seed are mutually exclusive")
        return random_theory(seed)
    if not args.theory:
        raise UsageError("a theory is required (-t PATH)")
    return parse_theory(SourceFile.read(args.theory))


def _load_structure(args, theory):
    return parse_structure(SourceFile.read(args.structure), theory.vocabulary)


def _report(command, verdict=None, result: InferenceResult | None = None, output=None) -> dict:
    rep = {"command": command, "verdict": verdict, "witness": None, "model": None,
           "stats": {}, "output": output}
    if result is not None:
        rep["verdict"] = result.verdict
        rep["stats"] = dict(result.stats)
        if result.witness is not None:
            rep["witness"] = result.witness.to_json()
        if result.model is not None:
            rep["model"] = print_structure(result.model)
    return rep


def _emit(rep: dict, as_json: bool, out):
    if as_json:
        json.dump(rep, out, indent=2, sort_keys=True)
        out.write("\n")
        return
    if rep["output"] is not None:
        out.write(rep["output"])
        if not rep["output"].endswith("\n"):
            out.write("\n")
    if rep["verdict"] is not None:
        out.write(f"verdict: {rep['verdict']}\n")
    if rep["model"] is not None:
        out.write(rep["model"].rstrip("\n") + "\n")


def _info(theory) -> str:
    lines = [print_vocabulary(theory.vocabulary)]
    lines.append("classes: " + ", ".join(sorted(classify(theory))))
    compiled = compile_theory(theory)
    lines.append("endogenous: " + ", ".join(sorted(compiled.endogenous)))
    exo = sorted(set(theory.vocabulary.predicates) - compiled.endogenous)
    lines.append("exogenous: " + ", ".join(exo))
    lines.append("occurrences:")
    for o in iter_occurrences(theory.causal):
        ctx = ", ".join(o.context)
        lines.append(f"  {o.index}: {kind_of(o.node)} [{ctx}]")
    lines.append(print_theory(theory))
    return "\n".join(lines)


def run(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return USAGE if e.code else 0
    try:
        theory = _load_theory(args)
        cmd = args.command
        if cmd == "normalize":
            rep = _report(cmd, output=print_theory(normalize(theory, args.target)))
        elif cmd == "export":
            rep = _report(cmd, output=export_foid(normalize(theory, DEFF)))
        elif cmd == "info":
            rep = _report(cmd, output=_info(theory))
        else:
            I = with_vocabulary(_load_structure(args, theory), theory)
            if cmd == "check":
                res = model_check(theory, I, args.mode)
            elif cmd == "expand":
                res = model_expand(theory, I, args.mode)
            elif cmd == "expand-endo":
                res = fast_total_expand(theory, I) if args.fast else \
                    endogenous_expand(theory, I, args.mode)
            else:
                res = bounded_query(theory, I, args.query, args.budget, args.mode)
            rep = _report(cmd, result=res)
    except (ParseError, StructuralError, NormalFormError, UsageError, ValueError, OSError) as e:
        err.write(f"clog: error: {e}\n")
        return USAGE
    _emit(rep, args.json, out)
    return EXIT.get(rep["verdict"], 0)


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
