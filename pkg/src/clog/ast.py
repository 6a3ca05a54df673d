"""Abstract syntax for FO(C): terms, FO formulas, causal effect expressions.

All nodes are frozen dataclasses, so they compare structurally and can be
shared freely.  Quantifiers bind a single variable; tuple quantification is
sugar that the parser expands into nested nodes.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterator, Mapping, Optional, Union

RESERVED_NAMES = frozenset({"U", "S"})
RESERVED_PREFIXES = ("_T", "Choose1_", "Sel_", "Create_")


def is_reserved(name: str) -> bool:
    return name in RESERVED_NAMES or name.startswith(RESERVED_PREFIXES)


class StructuralError(ValueError):
    """Raised for invalid paths or ill-formed trees."""


# --------------------------------------------------------------------------
# Terms


@dataclass(frozen=True)
class Var:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Const:
    name: str

    def __str__(self):
        return self.name


Term = Union[Var, Const]


# --------------------------------------------------------------------------
# FO formulas


@dataclass(frozen=True)
class Atom:
    pred: str
    args: tuple = ()


@dataclass(frozen=True)
class Eq:
    left: Term
    right: Term


@dataclass(frozen=True)
class Neg:
    body: "Formula"


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Or:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Implies:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Iff:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Forall:
    var: str
    body: "Formula"


@dataclass(frozen=True)
class Exists:
    var: str
    body: "Formula"


@dataclass(frozen=True)
class RForall:
    """``!x [qual]: body``, i.e. ``!x: qual => body``."""

    var: str
    qual: "Formula"
    body: "Formula"


@dataclass(frozen=True)
class RExists:
    """``?x [qual]: body``, i.e. ``?x: qual & body``."""

    var: str
    qual: "Formula"
    body: "Formula"


@dataclass(frozen=True)
class Top:
    pass


@dataclass(frozen=True)
class Bot:
    pass


TOP = Top()
BOT = Bot()

Formula = Union[Atom, Eq, Neg, And, Or, Implies, Iff, Forall, Exists,
                RForall, RExists, Top, Bot]


def conj(*parts: Formula) -> Formula:
    """Right-nested conjunction, dropping ``true`` conjuncts."""
    parts = [p for p in parts if not isinstance(p, Top)]
    if not parts:
        return TOP
    out = parts[-1]
    for p in reversed(parts[:-1]):
        out = And(p, out)
    return out


def disj(*parts: Formula) -> Formula:
    """Right-nested disjunction, dropping ``false`` disjuncts."""
    parts = [p for p in parts if not isinstance(p, Bot)]
    if not parts:
        return BOT
    out = parts[-1]
    for p in reversed(parts[:-1]):
        out = Or(p, out)
    return out


def implies(a: Formula, b: Formula) -> Formula:
    return b if isinstance(a, Top) else Implies(a, b)


def forall_many(vars, body: Formula) -> Formula:
    for v in reversed(list(vars)):
        body = Forall(v, body)
    return body


def exists_many(vars, body: Formula) -> Formula:
    for v in reversed(list(vars)):
        body = Exists(v, body)
    return body


def conjuncts(f: Formula) -> list:
    """Flatten nested ``And`` into a list, skipping ``true``."""
    if isinstance(f, And):
        return conjuncts(f.left) + conjuncts(f.right)
    if isinstance(f, Top):
        return []
    return [f]


# --------------------------------------------------------------------------
# Causal effect expressions


@dataclass(frozen=True)
class CAtom:
    pred: str
    args: tuple = ()


@dataclass(frozen=True)
class CIf:
    cond: Formula
    body: "CEE"


@dataclass(frozen=True)
class CAnd:
    left: "CEE"
    right: "CEE"


@dataclass(frozen=True)
class COr:
    left: "CEE"
    right: "CEE"


@dataclass(frozen=True)
class CAll:
    var: str
    qual: Formula
    body: "CEE"


@dataclass(frozen=True)
class CSel:
    var: str
    qual: Formula
    body: "CEE"


@dataclass(frozen=True)
class CNew:
    var: str
    body: "CEE"


CEE = Union[CAtom, CIf, CAnd, COr, CAll, CSel, CNew]
CEE_TYPES = (CAtom, CIf, CAnd, COr, CAll, CSel, CNew)
FORMULA_TYPES = (Atom, Eq, Neg, And, Or, Implies, Iff, Forall, Exists,
                 RForall, RExists, Top, Bot)

KIND_NAMES = {CAtom: "atom", CIf: "if", CAnd: "and", COr: "or",
              CAll: "all", CSel: "sel", CNew: "new"}


def kind_of(c: CEE) -> str:
    return KIND_NAMES[type(c)]


def cand_list(cees) -> CEE:
    """Right-nested ``And`` of a non-empty list of CEEs."""
    cees = list(cees)
    if not cees:
        raise StructuralError("empty list of causal effect expressions")
    out = cees[-1]
    for c in reversed(cees[:-1]):
        out = CAnd(c, out)
    return out


def cand_items(c: CEE) -> list:
    """Inverse of :func:`cand_list` on the right spine (and left nests)."""
    if isinstance(c, CAnd):
        return cand_items(c.left) + cand_items(c.right)
    return [c]


def children(c: CEE) -> tuple:
    if isinstance(c, CAtom):
        return ()
    if isinstance(c, (CAnd, COr)):
        return (c.left, c.right)
    return (c.body,)


def with_children(c: CEE, kids) -> CEE:
    kids = tuple(kids)
    if isinstance(c, CAtom):
        if kids:
            raise StructuralError("atoms have no children")
        return c
    if isinstance(c, (CAnd, COr)):
        return replace(c, left=kids[0], right=kids[1])
    return replace(c, body=kids[0])


def binder(c: CEE) -> Optional[str]:
    if isinstance(c, (CAll, CSel, CNew)):
        return c.var
    return None


def height(c: CEE) -> int:
    kids = children(c)
    if not kids:
        return 0
    return 1 + max(height(k) for k in kids)


# --------------------------------------------------------------------------
# Occurrences


@dataclass(frozen=True)
class Occurrence:
    index: int           # pre-order position in the parse tree
    path: tuple          # child indices from the root
    node: CEE
    context: tuple       # CEE-quantified variables on the root-to-node path

    @property
    def arity(self) -> int:
        return len(self.context)

    @property
    def kind(self) -> str:
        return kind_of(self.node)


def iter_occurrences(root: CEE) -> Iterator[Occurrence]:
    counter = 0

    def walk(node, path, ctx):
        nonlocal counter
        occ = Occurrence(counter, path, node, ctx)
        counter += 1
        yield occ
        inner = ctx + (node.var,) if binder(node) else ctx
        for i, kid in enumerate(children(node)):
            yield from walk(kid, path + (i,), inner)

    yield from walk(root, (), ())


def occurrences(theory, kind=None) -> list:
    """Depth-first (pre-order) list of occurrences, optionally filtered.

    ``kind`` is a CEE class, a kind name such as ``"sel"``, or a tuple of
    either.
    """
    root = theory.causal if isinstance(theory, FocTheory) else theory
    occs = list(iter_occurrences(root))
    if kind is None:
        return occs
    kinds = kind if isinstance(kind, tuple) else (kind,)
    names = {k if isinstance(k, str) else KIND_NAMES[k] for k in kinds}
    return [o for o in occs if o.kind in names]


def node_at(root: CEE, path) -> CEE:
    node = root
    for i in path:
        kids = children(node)
        if not 0 <= i < len(kids):
            raise StructuralError(f"invalid path {tuple(path)}")
        node = kids[i]
    return node


def context_at(root: CEE, path) -> tuple:
    node, ctx = root, ()
    for i in path:
        kids = children(node)
        if not 0 <= i < len(kids):
            raise StructuralError(f"invalid path {tuple(path)}")
        if binder(node):
            ctx += (node.var,)
        node = kids[i]
    return ctx


def replace_at(root: CEE, path, new: CEE) -> CEE:
    """Return ``root`` with the node at ``path`` replaced by ``new``."""
    path = tuple(path)
    if not path:
        return new
    kids = list(children(root))
    i = path[0]
    if not 0 <= i < len(kids):
        raise StructuralError(f"invalid path {path}")
    kids[i] = replace_at(kids[i], path[1:], new)
    return with_children(root, kids)


substitute = replace_at


# --------------------------------------------------------------------------
# Free variables


def term_vars(args) -> set:
    return {a.name for a in args if isinstance(a, Var)}


def formula_free_vars(f: Formula) -> set:
    match f:
        case Atom(_, args):
            return term_vars(args)
        case Eq(l, r):
            return term_vars((l, r))
        case Neg(b):
            return formula_free_vars(b)
        case And(l, r) | Or(l, r) | Implies(l, r) | Iff(l, r):
            return formula_free_vars(l) | formula_free_vars(r)
        case Forall(v, b) | Exists(v, b):
            return formula_free_vars(b) - {v}
        case RForall(v, q, b) | RExists(v, q, b):
            return (formula_free_vars(q) | formula_free_vars(b)) - {v}
        case Top() | Bot():
            return set()
    raise StructuralError(f"not a formula: {f!r}")


def formula_vars(f: Formula) -> set:
    """Every variable name in ``f``, free or bound."""
    match f:
        case Atom(_, args):
            return term_vars(args)
        case Eq(l, r):
            return term_vars((l, r))
        case Neg(b):
            return formula_vars(b)
        case And(l, r) | Or(l, r) | Implies(l, r) | Iff(l, r):
            return formula_vars(l) | formula_vars(r)
        case Forall(v, b) | Exists(v, b):
            return formula_vars(b) | {v}
        case RForall(v, q, b) | RExists(v, q, b):
            return formula_vars(q) | formula_vars(b) | {v}
    return set()


def rename_bound(f: Formula, avoid) -> Formula:
    """Rename quantified variables of ``f`` that clash with ``avoid`` so no
    quantifier rebinds one of those names.  Free variables are untouched."""
    avoid = set(avoid)
    taken = avoid | formula_vars(f)

    def fresh(v):
        k = 1
        while f"{v}{k}" in taken:
            k += 1
        taken.add(f"{v}{k}")
        return f"{v}{k}"

    def term(t, env):
        return Var(env[t.name]) if isinstance(t, Var) and t.name in env else t

    def go(g, env, scope):
        match g:
            case Atom(p, args):
                return Atom(p, tuple(term(a, env) for a in args))
            case Eq(l, r):
                return Eq(term(l, env), term(r, env))
            case Neg(b):
                return Neg(go(b, env, scope))
            case And(l, r) | Or(l, r) | Implies(l, r) | Iff(l, r):
                return type(g)(go(l, env, scope), go(r, env, scope))
            case Forall(v, b) | Exists(v, b):
                w = fresh(v) if v in scope else v
                return type(g)(w, go(b, {**env, v: w}, scope | {w}))
            case RForall(v, q, b) | RExists(v, q, b):
                w = fresh(v) if v in scope else v
                inner = {**env, v: w}
                return type(g)(w, go(q, inner, scope | {w}), go(b, inner, scope | {w}))
        return g

    return go(f, {}, frozenset(avoid | formula_free_vars(f)))


def cee_free_vars(c: CEE) -> set:
    match c:
        case CAtom(_, args):
            return term_vars(args)
        case CIf(cond, body):
            return formula_free_vars(cond) | cee_free_vars(body)
        case CAnd(l, r) | COr(l, r):
            return cee_free_vars(l) | cee_free_vars(r)
        case CAll(v, q, b) | CSel(v, q, b):
            return (formula_free_vars(q) | cee_free_vars(b)) - {v}
        case CNew(v, b):
            return cee_free_vars(b) - {v}
    raise StructuralError(f"not a causal effect expression: {c!r}")


def free_variables(e) -> set:
    if isinstance(e, CEE_TYPES):
        return cee_free_vars(e)
    return formula_free_vars(e)


def formula_preds(f: Formula) -> set:
    match f:
        case Atom(p, _):
            return {p}
        case Eq() | Top() | Bot():
            return set()
        case Neg(b) | Forall(_, b) | Exists(_, b):
            return formula_preds(b)
        case And(l, r) | Or(l, r) | Implies(l, r) | Iff(l, r):
            return formula_preds(l) | formula_preds(r)
        case RForall(_, q, b) | RExists(_, q, b):
            return formula_preds(q) | formula_preds(b)
    raise StructuralError(f"not a formula: {f!r}")


def cee_preds(c: CEE) -> set:
    """Every predicate mentioned anywhere in ``c`` (heads and conditions)."""
    out = set()
    for occ in iter_occurrences(c):
        n = occ.node
        if isinstance(n, CAtom):
            out.add(n.pred)
        elif isinstance(n, CIf):
            out |= formula_preds(n.cond)
        elif isinstance(n, (CAll, CSel)):
            out |= formula_preds(n.qual)
    return out


# --------------------------------------------------------------------------
# Vocabularies and theories


@dataclass(frozen=True)
class Vocabulary:
    predicates: Mapping[str, int] = field(default_factory=dict)
    constants: frozenset = frozenset()
    introduced: frozenset = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "predicates", dict(self.predicates))
        object.__setattr__(self, "constants", frozenset(self.constants))
        object.__setattr__(self, "introduced", frozenset(self.introduced))
        clash = set(self.predicates) & self.constants
        if clash:
            raise StructuralError(
                f"names used both as predicate and constant: {sorted(clash)}")
        stray = self.introduced - set(self.predicates)
        if stray:
            raise StructuralError(f"introduced symbols not declared: {sorted(stray)}")

    __hash__ = None

    def arity(self, pred: str) -> int:
        return self.predicates[pred]

    def names(self) -> set:
        return set(self.predicates) | set(self.constants)

    def extend(self, preds: Mapping[str, int], introduced=True) -> "Vocabulary":
        clash = [p for p, n in preds.items()
                 if p in self.predicates and self.predicates[p] != n]
        if clash:
            raise StructuralError(f"arity clash for {clash}")
        merged = dict(self.predicates)
        merged.update(preds)
        intro = self.introduced | (set(preds) if introduced else set())
        return Vocabulary(merged, self.constants, intro)

    def restrict(self, preds) -> "Vocabulary":
        keep = {p: n for p, n in self.predicates.items() if p in preds}
        return Vocabulary(keep, self.constants, self.introduced & set(keep))

    @property
    def base(self) -> "Vocabulary":
        """The user vocabulary, without transformation-introduced symbols."""
        return self.restrict(set(self.predicates) - self.introduced)


@dataclass(frozen=True)
class FocTheory:
    causal: CEE
    sentences: tuple = ()
    vocabulary: Vocabulary = field(default_factory=Vocabulary)

    def __post_init__(self):
        if isinstance(self.causal, (list, tuple)):
            object.__setattr__(self, "causal", cand_list(self.causal))
        object.__setattr__(self, "sentences", tuple(self.sentences))
        free = cee_free_vars(self.causal)
        if free:
            raise StructuralError(f"causal theory has free variables: {sorted(free)}")
        for s in self.sentences:
            fv = formula_free_vars(s)
            if fv:
                raise StructuralError(f"FO sentence has free variables: {sorted(fv)}")

    __hash__ = None

    @property
    def rules(self) -> list:
        return cand_items(self.causal)

    def with_causal(self, causal, vocabulary=None, sentences=None) -> "FocTheory":
        return FocTheory(causal,
                         self.sentences if sentences is None else sentences,
                         self.vocabulary if vocabulary is None else vocabulary)


def endogenous_predicates(theory) -> set:
    """Predicates heading some (possibly nested) atom-expression."""
    root = theory.causal if isinstance(theory, FocTheory) else theory
    return {o.node.pred for o in iter_occurrences(root) if isinstance(o.node, CAtom)}


def exogenous_predicates(theory: FocTheory) -> set:
    return set(theory.vocabulary.predicates) - endogenous_predicates(theory)


def fresh_name(prefix: str, taken, start: int = 1) -> tuple:
    """First ``prefix<k>`` (k >= start) not in ``taken``; returns (name, k)."""
    k = start
    while f"{prefix}{k}" in taken:
        k += 1
    return f"{prefix}{k}", k
