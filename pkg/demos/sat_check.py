"""Decide small CNF formulas by model checking the guess-and-hide SAT
theory, and compare with a truth-table check."""

from itertools import product

from clog.corpus import load_theory
from clog.infer import model_check
from clog.parser import parse_structure

t = load_theory("sat")


def encode(clauses):
    symbols = sorted({s for cl in clauses for s, _ in cl})
    names = [f"c{i}" for i in range(len(clauses))]
    pos = [f"({c}, {s})" for c, cl in zip(names, clauses) for s, sign in cl if sign]
    neg = [f"({c}, {s})" for c, cl in zip(names, clauses) for s, sign in cl if not sign]
    ps = ", ".join(f"({s})" for s in symbols)
    return (f"structure {{ domain = {{{', '.join(names + symbols)}}}; "
            f"Cl = {{{', '.join(f'({c})' for c in names)}}}; PS = {{{ps}}}; "
            f"Pos = {{{', '.join(pos)}}}; Neg = {{{', '.join(neg)}}}; "
            f"Tr = {{{ps}}}; Fa = {{{ps}}}; Sol = true }}")


def brute_force(clauses):
    symbols = sorted({s for cl in clauses for s, _ in cl})
    return any(all(any(v[symbols.index(s)] == sign for s, sign in cl) for cl in clauses)
               for v in product((False, True), repeat=len(symbols)))


examples = {
    "(p | q) & ~p": [[("p", True), ("q", True)], [("p", False)]],
    "p & ~p": [[("p", True)], [("p", False)]],
    "(p | ~q) & (q | r) & ~r": [[("p", True), ("q", False)], [("q", True), ("r", True)],
                                [("r", False)]],
}
for text, clauses in examples.items():
    r = model_check(t, parse_structure(encode(clauses), t.vocabulary))
    print(f"{text:28} model check: {r.verdict:5}  truth table: {brute_force(clauses)}")
