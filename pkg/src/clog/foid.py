"""Export of DefF theories as FO(ID) text, a reader for that text, and an
independent well-founded evaluator for inductive definitions.

Output format (``docs/foid-grammar.ebnf``)::

    // exists: _T1/1, S/1
    vocabulary { P/1. Q/1. introduced _T1/1. }
    define {
      !x : P(x) <- Q(x) & ~_T1(x).
    }
    !x: P(x) => Q(x).
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from itertools import product

from .ast import Atom, CAtom, FocTheory, StructuralError, TOP, Top, Vocabulary, cand_list
from .parser import (
    ParseError, SourceFile, _Parser, _source, print_formula, print_vocabulary,
)
from .semantics import F, T, U, PartialSet, PartialStructure, eval_formula
from .transform import DEFF, classify, make_rule, rule_view, rules_of


@dataclass(frozen=True)
class IDRule:
    head: str
    args: tuple
    vars: tuple
    body: object

    def __str__(self):
        return _rule_text(self)


@dataclass(frozen=True)
class InductiveDefinition:
    rules: tuple

    @property
    def defined(self) -> set:
        return {r.head for r in self.rules}


@dataclass
class FoidTheory:
    definition: InductiveDefinition
    sentences: tuple
    vocabulary: Vocabulary
    exists: dict = field(default_factory=dict)


def definition_of(theory) -> InductiveDefinition:
    """The inductive definition a DefF causal theory corresponds to."""
    if DEFF not in classify(theory):
        raise StructuralError("theory is not in DefF")
    out = []
    for r in rules_of(theory):
        v = rule_view(r)
        out.append(IDRule(v.body.pred, v.body.args, v.vars, v.guard))
    return InductiveDefinition(tuple(out))


def _rule_text(r: IDRule) -> str:
    head = r.head if not r.args else f"{r.head}({', '.join(a.name for a in r.args)})"
    prefix = f"!{', '.join(r.vars)} : " if r.vars else ""
    return f"{prefix}{head} <- {print_formula(r.body)}."


def export_foid(theory: FocTheory, introduced=None) -> str:
    """FO(ID) text for a DefF theory; ``introduced`` defaults to the
    vocabulary's introduced symbols."""
    defn = definition_of(theory)
    vocab = theory.vocabulary
    intro = sorted(vocab.introduced if introduced is None else introduced)
    lines = []
    if intro:
        sig = ", ".join(f"{p}/{vocab.predicates[p]}" for p in intro)
        lines.append(f"// exists: {sig}")
    lines.append(print_vocabulary(vocab))
    lines.append("define {")
    for r in defn.rules:
        lines.append(f"  {_rule_text(r)}")
    lines.append("}")
    for s in theory.sentences:
        lines.append(f"{print_formula(s)}.")
    return "\n".join(lines) + "\n"


_EXISTS_RE = re.compile(r"^\s*//\s*exists:(.*)$", re.MULTILINE)


def parse_foid(src) -> FoidTheory:
    """Read text produced by :func:`export_foid`."""
    src = _source(src)
    exists = {}
    m = _EXISTS_RE.search(src.text)
    if m:
        for item in m.group(1).split(","):
            item = item.strip()
            if not item:
                continue
            name, _, arity = item.partition("/")
            exists[name.strip()] = int(arity)
    p = _Parser(src)
    if p.at("vocabulary"):
        p.vocab_block()
    p.expect("define")
    p.expect("{")
    rules = []
    while not p.accept("}"):
        scope = frozenset()
        names = ()
        if p.accept("!"):
            names, scope = p.var_list(scope)
            p.expect(":")
        head = p.ident("defined predicate")
        args = p.args(scope)
        p.check_pred(head, len(args))
        p.expect("<-")
        body = p.formula(scope)
        p.expect(".")
        rules.append(IDRule(head.value, args, tuple(names), body))
    sentences = []
    while p.tok.kind != "eof":
        sentences.append(p.formula(frozenset()))
        p.expect(".")
    return FoidTheory(InductiveDefinition(tuple(rules)), tuple(sentences),
                      p.vocabulary(), exists)


def foid_to_theory(ft: FoidTheory) -> FocTheory:
    """Back to a DefF causal theory (one All-rule per definitional rule)."""
    rules = [make_rule(r.vars, r.body, CAtom(r.head, r.args)) for r in ft.definition.rules]
    return FocTheory(cand_list(rules), ft.sentences, ft.vocabulary)


# --------------------------------------------------------------------------
# Well-founded model of an inductive definition


def _ground(defn: InductiveDefinition, I: PartialStructure):
    """Map each defined ground atom to its list of (body, env) instances."""
    elems = sorted(I.domain.ct)
    inst = {}
    for r in defn.rules:
        for vals in product(elems, repeat=len(r.vars)):
            env = dict(zip(r.vars, vals))
            head = tuple(env[a.name] if a.name in env else I.consts[a.name] for a in r.args)
            inst.setdefault((r.head, head), []).append((r.body, env))
    return inst


def wf_id_oracle(defn: InductiveDefinition, I: PartialStructure, arities=None) -> PartialStructure:
    """Well-founded model of ``defn`` over the two-valued domain and open
    predicates of ``I``.

    Works on ground atoms directly: repeatedly make true every unknown atom
    with a body that is true, and make false the greatest unfounded set,
    i.e. the largest set of unknown atoms whose bodies are all false once
    the set itself is made false.
    """
    if not I.domain.is_two_valued:
        raise ValueError("the oracle needs a two-valued domain")
    arities = dict(arities or {})
    arities.update(I.arities)
    for r in defn.rules:
        arities.setdefault(r.head, len(r.args))
    defined = defn.defined
    elems = sorted(I.domain.ct)
    atoms = [(p, t) for p in sorted(defined) for t in product(elems, repeat=arities[p])]
    inst = _ground(defn, I)
    value = {a: U for a in atoms}

    def structure(overrides=None) -> PartialStructure:
        val = dict(value)
        if overrides:
            val.update(overrides)
        preds = {p: s for p, s in I.preds.items() if p not in defined}
        for p in defined:
            ct = {t for (q, t) in atoms if q == p and val[(q, t)] == T}
            pt = {t for (q, t) in atoms if q == p and val[(q, t)] != F}
            preds[p] = PartialSet(frozenset(ct), frozenset(pt))
        return PartialStructure(I.universe, I.domain, preds, I.consts, {}, arities)

    def body_value(atom, J):
        best = F
        for body, env in inst.get(atom, ()):
            best = max(best, eval_formula(body, J, env))
            if best == T:
                break
        return best

    while True:
        J = structure()
        unknown = [a for a in atoms if value[a] == U]
        made_true = {a for a in unknown if body_value(a, J) == T}
        X = set(unknown) - made_true
        while True:
            JX = structure({a: F for a in X})
            keep = {a for a in X if body_value(a, JX) == F}
            if keep == X:
                break
            X = keep
        if not made_true and not X:
            return J
        for a in made_true:
            value[a] = T
        for a in X:
            value[a] = F
