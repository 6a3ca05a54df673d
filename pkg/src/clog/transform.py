"""Normal forms and the passes that reach them.

A *rule* is a top-level conjunct of the causal theory, read as
``All x1[true]: ... All xn[phi]: body`` (or ``body <- phi`` when there are
no variables).  NestNF asks every rule body to have height at most one;
DefF asks for atomic bodies.
"""

from __future__ import annotations

from dataclasses import dataclass

from .ast import (
    And, Atom, BOT, Bot, CAll, CAnd, CAtom, CIf, CNew, COr, CSel, Const, Eq,
    Exists, FocTheory, Forall, Iff, Implies, Neg, Occurrence, Or, RExists,
    RForall, StructuralError, TOP, Top, Var, cand_items, cand_list, children,
    conj, disj, exists_many, forall_many, formula_preds, fresh_name, height,
    implies, iter_occurrences, node_at, rename_bound, replace_at,
)

NESTNF = "NestNF"
DEFF = "DefF"
DETERMINISTIC = "Deterministic"
CREATION_FREE = "CreationFree"
GENERAL = "General"

TARGETS = {"nestnf": NESTNF, "det": DETERMINISTIC, "deff": DEFF}


class NormalFormError(ValueError):
    pass


# --------------------------------------------------------------------------
# Rules and metrics


@dataclass(frozen=True)
class Rule:
    vars: tuple
    guard: object
    body: object


def rule_view(c) -> Rule:
    """Split a top-level conjunct into variables, guard and body."""
    if isinstance(c, CIf):
        return Rule((), c.cond, c.body)
    names = []
    node = c
    guard = TOP
    while isinstance(node, CAll):
        names.append(node.var)
        if not isinstance(node.qual, Top):
            guard = node.qual
            node = node.body
            break
        node = node.body
    return Rule(tuple(names), guard, node)


def make_rule(vars, guard, body):
    """Inverse of :func:`rule_view`."""
    vars = tuple(vars)
    if not vars:
        return body if isinstance(guard, Top) else CIf(guard, body)
    node = CAll(vars[-1], guard, body)
    for v in reversed(vars[:-1]):
        node = CAll(v, TOP, node)
    return node


def rules_of(theory) -> list:
    root = theory.causal if isinstance(theory, FocTheory) else theory
    return cand_items(root)


def nesting_depth(theory, occ) -> int:
    """Depth of an occurrence (or a path) in the parse tree."""
    path = occ.path if isinstance(occ, Occurrence) else tuple(occ)
    root = theory.causal if isinstance(theory, FocTheory) else theory
    node_at(root, path)
    return len(path)


def _has(c, types) -> bool:
    return any(isinstance(o.node, types) for o in iter_occurrences(c))


def classify(theory) -> set:
    root = theory.causal if isinstance(theory, FocTheory) else theory
    tags = set()
    views = [rule_view(r) for r in cand_items(root)]
    if all(height(v.body) <= 1 for v in views):
        tags.add(NESTNF)
        if all(isinstance(v.body, CAtom) for v in views):
            tags.add(DEFF)
    if not _has(root, CNew):
        tags.add(CREATION_FREE)
        if not _has(root, (CSel, COr)):
            tags.add(DETERMINISTIC)
    return tags or {GENERAL}


def is_nestnf(theory) -> bool:
    return NESTNF in classify(theory)


# --------------------------------------------------------------------------
# Unnest


def _taken_names(theory: FocTheory) -> set:
    return set(theory.vocabulary.predicates) | set(theory.vocabulary.constants)


def _occurrence(theory, occ) -> Occurrence:
    root = theory.causal
    path = occ.path if isinstance(occ, Occurrence) else tuple(occ)
    for o in iter_occurrences(root):
        if o.path == path:
            return o
    raise StructuralError(f"invalid path {path}")


def unnest(theory: FocTheory, occ, name=None) -> FocTheory:
    """Replace a proper subexpression ``C`` (context x̄) by ``P(x̄)`` and add
    the rule ``All x̄[P(x̄)]: C`` with a fresh predicate ``P``."""
    o = _occurrence(theory, occ)
    if not o.path:
        raise StructuralError("cannot unnest the root of a causal theory")
    if isinstance(o.node, CAtom):
        raise StructuralError("unnesting an atom-expression changes nothing")
    if name is None:
        name, _ = fresh_name("_T", _taken_names(theory))
    args = tuple(Var(v) for v in o.context)
    replaced = replace_at(theory.causal, o.path, CAtom(name, args))
    new_rule = make_rule(o.context, Atom(name, args), o.node)
    vocab = theory.vocabulary.extend({name: len(args)})
    return theory.with_causal(CAnd(replaced, new_rule), vocabulary=vocab)


def distribute(rule) -> list:
    """``All x̄[φ]: (C1 And C2)`` becomes one rule per conjunct."""
    v = rule_view(rule)
    if isinstance(v.body, CAnd):
        out = []
        for part in cand_items(v.body):
            out.extend(distribute(make_rule(v.vars, v.guard, part)))
        return out
    return [rule]


def _first_offender(body):
    """Leftmost-innermost proper subexpression that is not an atom."""
    for o in iter_occurrences(body):
        if o.path and height(o.node) == 1:
            return o
    return None


def to_nestnf(theory: FocTheory) -> FocTheory:
    """Unnest until every rule body has height at most one.

    Rules are processed in order; the rules an unnesting introduces are
    placed right after the rule that produced them and normalized in turn,
    so fresh names and rule order are reproducible.
    """
    taken = _taken_names(theory)
    counter = [1]
    new_preds = {}

    def process(rule) -> list:
        out = []
        for r in distribute(rule):
            extra = []
            v = rule_view(r)
            body = v.body
            while height(body) > 1:
                o = _first_offender(body)
                name, k = fresh_name("_T", taken, counter[0])
                counter[0] = k + 1
                taken.add(name)
                ctx = v.vars + o.context
                args = tuple(Var(x) for x in ctx)
                new_preds[name] = len(args)
                body = replace_at(body, o.path, CAtom(name, args))
                extra.append(make_rule(ctx, Atom(name, args), o.node))
            out.append(make_rule(v.vars, v.guard, body))
            for e in extra:
                out.extend(process(e))
        return out

    rules = []
    for r in rules_of(theory):
        rules.extend(process(r))
    vocab = theory.vocabulary.extend(new_preds) if new_preds else theory.vocabulary
    return theory.with_causal(cand_list(rules), vocabulary=vocab)


def relevance_condition(theory, occ):
    """Guard of the rule whose body is (or contains) the occurrence."""
    if not is_nestnf(theory):
        raise NormalFormError("relevance conditions are defined for NestNF theories")
    root = theory.causal if isinstance(theory, FocTheory) else theory
    path = occ.path if isinstance(occ, Occurrence) else tuple(occ)
    node_at(root, path)
    for rpath, rule in _rule_paths(root):
        if path[:len(rpath)] == rpath:
            return rule_view(rule).guard
    raise StructuralError(f"path {path} is not inside a rule")


def _rule_paths(root, prefix=()):
    if isinstance(root, CAnd):
        return _rule_paths(root.left, prefix + (0,)) + _rule_paths(root.right, prefix + (1,))
    return [(prefix, root)]


# --------------------------------------------------------------------------
# Determinization


@dataclass
class _NondetInfo:
    kind: str         # "or", "sel", "new"
    number: int       # per-kind counter from 1
    name: str
    context: tuple
    cond: object      # relevance condition (guard of the enclosing rule)
    qual: object = None
    var: str = None   # variable bound by a Sel


class SelectionVocabulary:
    """Names and arities of the predicates that encode a choice function."""

    def __init__(self, infos, vocabulary):
        self.infos = infos
        self.base = vocabulary
        self.selection = {"S": 1}
        for i in infos:
            arity = len(i.context) + (0 if i.kind == "or" else 1)
            self.selection[i.name] = arity
        self.transformed = dict(self.selection)
        self.transformed["U"] = 1

    @property
    def predicates(self) -> dict:
        return dict(self.transformed)


def _nondet_infos(theory: FocTheory) -> list:
    root = theory.causal
    taken = _taken_names(theory)
    counters = {"or": 0, "sel": 0, "new": 0}
    prefix = {"or": "Choose1_", "sel": "Sel_", "new": "Create_"}
    guards = {}
    for rpath, rule in _rule_paths(root):
        guards[rpath] = rule_view(rule).guard
    infos = {}
    for o in iter_occurrences(root):
        kind = {COr: "or", CSel: "sel", CNew: "new"}.get(type(o.node))
        if kind is None:
            continue
        cond = next(g for rp, g in guards.items() if o.path[:len(rp)] == rp)
        name, k = fresh_name(prefix[kind], taken, counters[kind] + 1)
        counters[kind] = k
        taken.add(name)
        qual = o.node.qual if kind == "sel" else None
        var = o.node.var if kind == "sel" else None
        infos[o.path] = _NondetInfo(kind, k, name, o.context, cond, qual, var)
    return infos


def selection_vocabulary(theory: FocTheory) -> SelectionVocabulary:
    return SelectionVocabulary(list(_nondet_infos(theory).values()), theory.vocabulary)


def _dom(x: str):
    return Or(Atom("U", (Var(x),)), Atom("S", (Var(x),)))


def relativize(f):
    """Restrict every FO quantifier to ``U(x) | S(x)``."""
    match f:
        case Atom() | Eq() | Top() | Bot():
            return f
        case Neg(b):
            return Neg(relativize(b))
        case And(l, r):
            return And(relativize(l), relativize(r))
        case Or(l, r):
            return Or(relativize(l), relativize(r))
        case Implies(l, r):
            return Implies(relativize(l), relativize(r))
        case Iff(l, r):
            return Iff(relativize(l), relativize(r))
        case Forall(v, b):
            return RForall(v, _dom(v), relativize(b))
        case Exists(v, b):
            return RExists(v, _dom(v), relativize(b))
        case RForall(v, q, b):
            return RForall(v, conj(_dom(v), relativize(q)), relativize(b))
        case RExists(v, q, b):
            return RExists(v, conj(_dom(v), relativize(q)), relativize(b))
    raise TypeError(f"not a formula: {f!r}")


def _vars(ctx):
    return tuple(Var(v) for v in ctx)


def _fresh_vars(n, avoid, stem):
    out = []
    k = 1
    while len(out) < n:
        name = f"{stem}{k}"
        if name not in avoid:
            out.append(name)
        k += 1
    return out


def _determinize(c, infos, path=()):
    match c:
        case CAtom():
            return c
        case CIf(cond, body):
            return CIf(relativize(cond), _determinize(body, infos, path + (0,)))
        case CAnd(l, r):
            return CAnd(_determinize(l, infos, path + (0,)), _determinize(r, infos, path + (1,)))
        case CAll(v, q, b):
            return CAll(v, conj(_dom(v), relativize(q)), _determinize(b, infos, path + (0,)))
        case COr(l, r):
            i = infos[path]
            ch = Atom(i.name, _vars(i.context))
            return CAnd(CIf(ch, _determinize(l, infos, path + (0,))),
                        CIf(Neg(ch), _determinize(r, infos, path + (1,))))
        case CSel(v, q, b):
            i = infos[path]
            guard = conj(_dom(v), relativize(q), Atom(i.name, _vars(i.context + (v,))))
            return CAll(v, guard, _determinize(b, infos, path + (0,)))
        case CNew(v, b):
            i = infos[path]
            return CAll(v, Atom(i.name, _vars(i.context + (v,))),
                        CAnd(CAtom("U", (Var(v),)), _determinize(b, infos, path + (0,))))
    raise TypeError(f"not a CEE: {c!r}")


def selection_theory(theory: FocTheory, infos=None) -> list:
    """Sentences whose models with domain D are the choice functions on D."""
    infos = list((infos or _nondet_infos(theory)).values())
    out = []
    for i in infos:
        if i.kind != "sel":
            continue
        xs = _fresh_vars(len(i.context), (), "x")
        y, z = "y", "z"
        sel = lambda arg: Atom(i.name, _vars(xs) + (Var(arg),))
        out.append(forall_many(xs, Exists(y, sel(y))))
        out.append(forall_many(xs + [y, z], Implies(And(sel(y), sel(z)), Eq(Var(y), Var(z)))))
    news = [i for i in infos if i.kind == "new"]
    for i in news:
        n = len(i.context)
        xs = _fresh_vars(n, (), "x")
        cr = lambda args, arg: Atom(i.name, _vars(args) + (Var(arg),))
        out.append(forall_many(xs + ["y", "z"],
                               Implies(And(cr(xs, "y"), cr(xs, "z")), Eq(Var("y"), Var("z")))))
        if n:
            ws = _fresh_vars(n, xs, "w")
            same = conj(*[Eq(Var(a), Var(b)) for a, b in zip(xs, ws)])
            out.append(forall_many(xs + ws + ["y"],
                                   Implies(And(cr(xs, "y"), cr(ws, "y")), same)))
    for a in range(len(news)):
        for b in range(a + 1, len(news)):
            ia, ib = news[a], news[b]
            xs = _fresh_vars(len(ia.context), (), "x")
            ws = _fresh_vars(len(ib.context), xs, "w")
            both = And(Atom(ia.name, _vars(xs) + (Var("y"),)),
                       Atom(ib.name, _vars(ws) + (Var("y"),)))
            out.append(forall_many(xs + ws + ["y"], Neg(both)))
    if news:
        created = []
        for i in news:
            xs = _fresh_vars(len(i.context), ("y",), "x")
            created.append(exists_many(xs, Atom(i.name, _vars(xs) + (Var("y"),))))
        out.append(Forall("y", Iff(Atom("S", (Var("y"),)), Neg(disj(*created)))))
    else:
        out.append(Forall("y", Atom("S", (Var("y"),))))
    for c in sorted(theory.vocabulary.constants):
        out.append(Atom("S", (Const(c),)))
    return out


def success_theory(theory: FocTheory, infos=None) -> list:
    """Sentences true exactly when the theory succeeds."""
    if not is_nestnf(theory):
        raise NormalFormError("success theory needs a NestNF theory")
    infos = list((infos or _nondet_infos(theory)).values())
    out = []
    for i in infos:
        xs = list(i.context)
        if i.kind == "new":
            y = _fresh_vars(1, xs, "y")[0] if "y" in xs else "y"
            body = Exists(y, Atom(i.name, _vars(xs) + (Var(y),)))
            out.append(forall_many(xs, implies(i.cond, body)))
        elif i.kind == "sel":
            # the selected variable keeps its name so the qualification reads as written
            sv = i.var
            body = Exists(sv, conj(Atom(i.name, _vars(xs) + (Var(sv),)), i.qual))
            out.append(forall_many(xs, implies(i.cond, body)))
    return out


def transform_deterministic(theory: FocTheory) -> FocTheory:
    """Replace choice functions by fresh exogenous predicates.

    Returns the deterministic causal theory together with the original FO
    sentences (relativized), the selection theory, the success theory and
    the partition constraint ``!x: S(x) <=> ~U(x)``.
    """
    if not is_nestnf(theory):
        raise NormalFormError("determinization needs a NestNF theory")
    infos = _nondet_infos(theory)
    causal = _determinize(theory.causal, infos)
    sel_vocab = SelectionVocabulary(list(infos.values()), theory.vocabulary)
    sentences = [relativize(s) for s in theory.sentences]
    sentences += selection_theory(theory, infos)
    sentences += success_theory(theory, infos)
    sentences.append(Forall("x", Iff(Atom("S", (Var("x"),)), Neg(Atom("U", (Var("x"),))))))
    vocab = theory.vocabulary.extend(sel_vocab.transformed)
    return FocTheory(causal, tuple(sentences), vocab)


# --------------------------------------------------------------------------
# DefF


def to_deff(theory: FocTheory) -> FocTheory:
    """Split a deterministic theory into rules with atomic bodies."""
    if DETERMINISTIC not in classify(theory):
        raise NormalFormError("DefF conversion needs a deterministic theory")
    out = []

    def walk(c, vars, guard):
        match c:
            case CAtom():
                out.append(make_rule(vars, guard, c))
            case CAnd(l, r):
                walk(l, vars, guard)
                walk(r, vars, guard)
            case CIf(cond, body):
                walk(body, vars, conj(guard, cond))
            case CAll(v, q, body):
                # the merged guard now sits in the scope of v
                walk(body, vars + (v,), conj(rename_bound(guard, {v}), q))
            case _:
                raise NormalFormError(f"unexpected {type(c).__name__} in a deterministic theory")

    for r in rules_of(theory):
        walk(r, (), TOP)
    return theory.with_causal(cand_list(out))


# --------------------------------------------------------------------------
# Pipeline


@dataclass
class Normalized:
    theory: FocTheory
    stages: dict
    introduced: frozenset


def normalize(theory: FocTheory, target: str = DEFF) -> FocTheory:
    """Bring ``theory`` into the requested normal form.

    ``target`` is one of ``NestNF``, ``Deterministic``, ``DefF`` (or the
    CLI names ``nestnf``, ``det``, ``deff``).  A theory already in the
    target class is returned unchanged.  Introduced symbols are recorded in
    the vocabulary (``vocabulary.introduced``).
    """
    return pipeline(theory, target).theory


def pipeline(theory: FocTheory, target: str = DEFF) -> Normalized:
    target = TARGETS.get(target, target)
    if target not in (NESTNF, DETERMINISTIC, DEFF):
        raise ValueError(f"unknown normal form {target!r}")
    stages = {"input": theory}
    tags = classify(theory)
    if target in tags:
        return Normalized(theory, stages, theory.vocabulary.introduced)
    current = theory
    if target == DEFF and DETERMINISTIC in tags:
        current = to_deff(current)
        stages["deff"] = current
    else:
        if NESTNF not in tags:
            current = to_nestnf(current)
            stages["nestnf"] = current
        if target != NESTNF:
            current = transform_deterministic(current)
            stages["det"] = current
            if target == DEFF:
                current = to_deff(current)
                stages["deff"] = current
    return Normalized(current, stages, current.vocabulary.introduced)
