"""Bundled example theories and structures plus a seeded random theory
generator for property tests.

Hand-written cases live as ``.foc``/``.struct`` files next to this module.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from importlib import resources

from .ast import (
    TOP, And, Atom, CAll, CAnd, CAtom, CIf, CNew, COr, CSel, Exists, FocTheory,
    Forall, Iff, Implies, Neg, Or, RExists, RForall, Var, Vocabulary,
    iter_occurrences,
)
from .parser import SourceFile, parse_structure, parse_theory
from .semantics import PartialSet, PartialStructure, completions, unknown_structure

THEORIES = (
    "naturals", "green_card", "sat", "sat_plain", "sat_guess", "sat_hide",
    "loop_negation", "self_negation", "reach", "win", "create_one",
    "create_marked", "pick", "branch", "cases", "guarded_or",
)
STRUCTURES = ("green_card", "sat_pos", "sat_neg", "sat_input")

# hand-written theories small enough for exhaustive comparison at |D| <= 2
SMALL = (
    "naturals", "green_card", "sat_guess", "sat_hide", "loop_negation",
    "self_negation", "reach", "win", "create_one", "create_marked", "pick",
    "branch", "guarded_or",
)


def corpus_path(name: str):
    return resources.files("clog") / "corpus" / name


def _read(name: str) -> SourceFile:
    p = corpus_path(name)
    return SourceFile(p.read_text(encoding="utf-8"), f"corpus/{name}")


def load_theory(name: str) -> FocTheory:
    return parse_theory(_read(f"{name}.foc"))


def load_structure(name: str, vocabulary: Vocabulary) -> PartialStructure:
    return parse_structure(_read(f"{name}.struct"), vocabulary)


@dataclass
class Case:
    name: str
    theory: FocTheory
    seed: int | None = None

    @property
    def deterministic(self) -> bool:
        return not any(isinstance(o.node, (COr, CSel, CNew))
                       for o in iter_occurrences(self.theory.causal))

    @property
    def negation_free(self) -> bool:
        return not _mentions_negation(self.theory.causal)


def _mentions_negation(c) -> bool:
    return any(_has_neg(f) for o in iter_occurrences(c) for f in _node_formulas(o.node))


def _node_formulas(n):
    if isinstance(n, CIf):
        return (n.cond,)
    if isinstance(n, (CAll, CSel)):
        return (n.qual,)
    return ()


def _has_neg(f) -> bool:
    match f:
        case Neg():
            return True
        case Implies() | Iff():
            return True
        case And(l, r) | Or(l, r):
            return _has_neg(l) or _has_neg(r)
        case Forall(_, b) | Exists(_, b):
            return _has_neg(b)
        case RForall(_, q, b) | RExists(_, q, b):
            # the qualification of a universal sits under a negation
            return isinstance(f, RForall) or _has_neg(q) or _has_neg(b)
    return False


def hand_written(names=THEORIES) -> list:
    return [Case(n, load_theory(n)) for n in names]


# --------------------------------------------------------------------------
# Random theories


_VARS = ("x", "y")


def random_theory(seed: int, max_height: int = 3, max_nondet: int = 2) -> FocTheory:
    """A random closed theory over at most two predicates (arity <= 2) using
    only the variables x and y.

    The generator is deterministic in ``seed``.  At most ``max_nondet`` Or,
    Sel or New nodes are produced and the result has height <= ``max_height``.
    """
    rng = random.Random(seed)
    npred = rng.choice((1, 2, 2))
    preds = {}
    for name in ("P", "Q")[:npred]:
        preds[name] = rng.choice((0, 1, 1, 2))
    budget = [max_nondet]

    def atom_for(scope, formula):
        fits = [p for p, n in preds.items() if n == 0 or (scope and n <= 2)]
        if not fits:
            return None
        p = rng.choice(fits)
        args = tuple(Var(rng.choice(scope)) for _ in range(preds[p]))
        return Atom(p, args) if formula else CAtom(p, args)

    def cond(scope):
        r = rng.random()
        a = atom_for(scope, True)
        if a is None or r < 0.15:
            free = [v for v in _VARS if v not in scope]
            if free:
                v = free[0]
                inner = atom_for(scope + (v,), True)
                if inner is not None:
                    return Exists(v, inner if rng.random() < 0.7 else Neg(inner))
            return TOP
        if r < 0.45:
            return Neg(a)
        if r < 0.6:
            b = atom_for(scope, True)
            return And(a, b) if rng.random() < 0.5 else Or(a, Neg(b))
        return a

    def cee(scope, h):
        free = [v for v in _VARS if v not in scope]
        headless = not scope and all(n > 0 for n in preds.values())
        if headless:
            # only a binder can bring a head atom into reach
            options = ["all"] + (["sel", "new"] if budget[0] > 0 else [])
        else:
            options = ["atom"] if h == 0 or scope else []
            if h > 0:
                options += ["if", "and"] + (["all"] if free else [])
                if budget[0] > 0:
                    options += ["or"] + (["sel", "new"] if free else [])
        kind = rng.choice(options)
        if kind == "atom":
            return atom_for(scope, False)
        if kind == "if":
            return CIf(cond(scope), cee(scope, h - 1))
        if kind == "and":
            return CAnd(cee(scope, h - 1), cee(scope, h - 1))
        if kind == "or":
            budget[0] -= 1
            return COr(cee(scope, h - 1), cee(scope, h - 1))
        v = free[0]
        if kind == "all":
            return CAll(v, cond(scope + (v,)), cee(scope + (v,), h - 1))
        budget[0] -= 1
        if kind == "sel":
            return CSel(v, cond(scope + (v,)), cee(scope + (v,), h - 1))
        return CNew(v, cee(scope + (v,), h - 1))

    root = cee((), rng.randint(1, max_height))
    used = {}
    for o in iter_occurrences(root):
        if isinstance(o.node, CAtom):
            used[o.node.pred] = len(o.node.args)
    for p, n in preds.items():
        used.setdefault(p, n)
    return FocTheory(root, (), Vocabulary(dict(sorted(used.items()))))


def random_cases(count: int, start: int = 0) -> list:
    return [Case(f"random-{s}", random_theory(s), seed=s) for s in range(start, start + count)]


# --------------------------------------------------------------------------
# Inputs


def universe(n: int) -> tuple:
    return tuple(f"d{i}" for i in range(n))


def all_structures(theory: FocTheory, n: int):
    """Every two-valued structure over the theory's vocabulary on ``universe(n)``."""
    base = unknown_structure(universe(n), theory.vocabulary.predicates)
    yield from completions(base)


def exogenous_inputs(theory: FocTheory, n: int, endogenous):
    """Structures over ``universe(n)`` fixing every exogenous predicate and
    leaving the endogenous ones unknown, in canonical order."""
    base = unknown_structure(universe(n), theory.vocabulary.predicates)
    exo = [p for p in theory.vocabulary.predicates if p not in endogenous]
    yield from completions(base, exo)


def empty_endogenous(I: PartialStructure, endogenous) -> PartialStructure:
    """``I`` with every endogenous predicate set to the empty partial set."""
    return I.with_preds({p: PartialSet() for p in endogenous if p in I.preds})


def count_structures(theory: FocTheory, n: int) -> int:
    return 2 ** sum(n ** a for a in theory.vocabulary.predicates.values())


__all__ = [
    "THEORIES", "STRUCTURES", "SMALL", "Case", "load_theory", "load_structure",
    "hand_written", "random_theory", "random_cases", "universe", "all_structures",
    "exogenous_inputs", "empty_endogenous", "count_structures", "corpus_path",
]
