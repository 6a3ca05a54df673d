"""Three-valued truth, partial sets, partial structures and Kleene evaluation."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import IntEnum
from itertools import product
from typing import Iterator, Mapping, Optional

from .ast import (
    And, Atom, Bot, Const, Eq, Exists, Forall, Iff, Implies, Neg, Or, RExists,
    RForall, Top, Var,
)


class TruthValue(IntEnum):
    """Truth values ordered by the truth order f < u < t."""

    F = 0
    U = 1
    T = 2

    def inv(self) -> "TruthValue":
        return TruthValue(2 - self)

    def __invert__(self):
        return self.inv()

    @property
    def symbol(self) -> str:
        return "fut"[self]

    @classmethod
    def of(cls, b: bool) -> "TruthValue":
        return cls.T if b else cls.F


F, U, T = TruthValue.F, TruthValue.U, TruthValue.T


def precision_leq_value(a: TruthValue, b: TruthValue) -> bool:
    """``a <=p b``: u is below both t and f, which are incomparable."""
    return a == b or a == U


class EvaluationError(ValueError):
    pass


@dataclass(frozen=True)
class PartialSet:
    """A three-valued set given by its certainly-true and possibly-true parts."""

    ct: frozenset = frozenset()
    pt: frozenset = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "ct", frozenset(self.ct))
        object.__setattr__(self, "pt", frozenset(self.pt))
        if not self.ct <= self.pt:
            raise ValueError("partial set with ct not contained in pt")

    @classmethod
    def exact(cls, items) -> "PartialSet":
        s = frozenset(items)
        return cls(s, s)

    def value(self, x) -> TruthValue:
        if x in self.ct:
            return T
        if x in self.pt:
            return U
        return F

    @property
    def unknown(self) -> frozenset:
        return self.pt - self.ct

    @property
    def is_two_valued(self) -> bool:
        return self.ct == self.pt

    def restrict(self, v: TruthValue) -> "PartialSet":
        return restrict(self, v)

    def union(self, other: "PartialSet") -> "PartialSet":
        return PartialSet(self.ct | other.ct, self.pt | other.pt)

    def leq_p(self, other: "PartialSet") -> bool:
        """Whether ``other`` is at least as precise as ``self``."""
        return self.ct <= other.ct and other.pt <= self.pt


def restrict(s: PartialSet, v: TruthValue) -> PartialSet:
    """Pointwise minimum (truth order) of membership values with ``v``."""
    if v == T:
        return s
    if v == F:
        return PartialSet()
    return PartialSet(frozenset(), s.pt)


@dataclass(frozen=True)
class PartialStructure:
    """A finite partial structure.

    ``universe`` is the ordered set of element names the structure lives in;
    ``domain`` is the three-valued domain predicate over it.  ``preds`` maps
    every predicate to a partial set of argument tuples.
    """

    universe: tuple
    domain: PartialSet
    preds: Mapping[str, PartialSet]
    consts: Mapping[str, str] = field(default_factory=dict)
    assignment: Mapping[str, str] = field(default_factory=dict)
    arities: Optional[Mapping[str, int]] = None

    def __post_init__(self):
        object.__setattr__(self, "universe", tuple(sorted(set(self.universe))))
        object.__setattr__(self, "preds", dict(self.preds))
        object.__setattr__(self, "consts", dict(self.consts))
        object.__setattr__(self, "assignment", dict(self.assignment))
        ar = dict(self.arities or {})
        for p, s in self.preds.items():
            if p not in ar:
                sample = next(iter(s.pt), None)
                if sample is None:
                    raise ValueError(f"cannot infer arity of empty predicate {p}")
                ar[p] = len(sample)
        object.__setattr__(self, "arities", ar)
        self.validate()

    __hash__ = None

    def validate(self):
        uni = set(self.universe)
        if not self.domain.pt <= uni:
            raise ValueError("domain exceeds the universe")
        dpt = self.domain.pt
        for p, s in self.preds.items():
            n = self.arities[p]
            for tup in s.pt:
                if len(tup) != n:
                    raise ValueError(f"tuple {tup} has wrong arity for {p}/{n}")
                if not set(tup) <= dpt:
                    raise ValueError(f"tuple {tup} of {p} lies outside the domain")
        for c, e in self.consts.items():
            if e not in self.domain.ct:
                raise ValueError(f"constant {c} is not interpreted in the domain")

    def arity(self, pred: str) -> int:
        return self.arities[pred]

    @property
    def is_two_valued(self) -> bool:
        return self.domain.is_two_valued and all(s.is_two_valued for s in self.preds.values())

    def value(self, pred: str, args: tuple) -> TruthValue:
        return self.preds[pred].value(tuple(args))

    def with_preds(self, updates: Mapping[str, PartialSet], domain=None, arities=None):
        preds = dict(self.preds)
        preds.update(updates)
        ar = dict(self.arities)
        ar.update(arities or {})
        return PartialStructure(self.universe, self.domain if domain is None else domain,
                                preds, self.consts, self.assignment, ar)

    def assign(self, **env) -> "PartialStructure":
        a = dict(self.assignment)
        a.update(env)
        return replace(self, assignment=a)

    def project(self, preds) -> "PartialStructure":
        """Forget every predicate not in ``preds``."""
        keep = {p: s for p, s in self.preds.items() if p in preds}
        return PartialStructure(self.universe, self.domain, keep, self.consts,
                                self.assignment, {p: self.arities[p] for p in keep})

    def key(self) -> tuple:
        """Hashable identity (ignores the variable assignment)."""
        return (self.universe, self.domain.ct, self.domain.pt,
                tuple(sorted((p, s.ct, s.pt) for p, s in self.preds.items())),
                tuple(sorted(self.consts.items())))

    def same_as(self, other: "PartialStructure") -> bool:
        return self.key() == other.key()

    def all_tuples(self, pred: str) -> list:
        return list(product(sorted(self.domain.pt), repeat=self.arities[pred]))


def two_valued(domain, preds: Mapping[str, object], consts=None, arities=None,
               universe=None) -> PartialStructure:
    """Convenience constructor: ``preds`` maps names to sets of tuples.

    Unary predicates may be given as sets of bare element names and
    propositions as booleans.
    """
    dom = frozenset(domain)
    sets = {}
    ar = dict(arities or {})
    for p, val in preds.items():
        if isinstance(val, bool):
            tuples = {()} if val else set()
            ar.setdefault(p, 0)
        else:
            tuples = {t if isinstance(t, tuple) else (t,) for t in val}
        sets[p] = PartialSet.exact(tuples)
    return PartialStructure(tuple(universe or dom), PartialSet.exact(dom), sets,
                            consts or {}, {}, ar)


def unknown_structure(domain, arities: Mapping[str, int], consts=None) -> PartialStructure:
    """Two-valued domain, every predicate fully unknown."""
    dom = tuple(sorted(domain))
    preds = {p: PartialSet(frozenset(), frozenset(product(dom, repeat=n)))
             for p, n in arities.items()}
    return PartialStructure(dom, PartialSet.exact(dom), preds, consts or {}, {}, dict(arities))


# --------------------------------------------------------------------------
# Kleene evaluation


def _term_value(t, I: PartialStructure, env):
    if isinstance(t, Var):
        if t.name in env:
            return env[t.name]
        raise EvaluationError(f"unassigned variable {t.name}")
    if isinstance(t, Const):
        try:
            return I.consts[t.name]
        except KeyError:
            raise EvaluationError(f"uninterpreted constant {t.name}") from None
    raise EvaluationError(f"not a term: {t!r}")


def eval_formula(phi, I: PartialStructure, env: Optional[Mapping[str, str]] = None) -> TruthValue:
    """Three-valued value of ``phi`` in ``I`` (Kleene truth tables).

    Quantifiers range over the possibly-true part of the domain, guarded by
    the domain's own truth value.  ``env`` extends ``I.assignment``.
    """
    scope = dict(I.assignment)
    if env:
        scope.update(env)
    return _ev(phi, I, scope)


def _ev(phi, I, env) -> TruthValue:
    match phi:
        case Atom(p, args):
            try:
                s = I.preds[p]
            except KeyError:
                raise EvaluationError(f"uninterpreted predicate {p}") from None
            return s.value(tuple(_term_value(a, I, env) for a in args))
        case Eq(l, r):
            return TruthValue.of(_term_value(l, I, env) == _term_value(r, I, env))
        case Top():
            return T
        case Bot():
            return F
        case Neg(b):
            return _ev(b, I, env).inv()
        case And(l, r):
            a = _ev(l, I, env)
            return a if a == F else min(a, _ev(r, I, env))
        case Or(l, r):
            a = _ev(l, I, env)
            return a if a == T else max(a, _ev(r, I, env))
        case Implies(l, r):
            return _ev(Or(Neg(l), r), I, env)
        case Iff(l, r):
            a, b = _ev(l, I, env), _ev(r, I, env)
            return min(max(a.inv(), b), max(b.inv(), a))
        case Forall(v, b):
            return _quant(True, v, None, b, I, env)
        case Exists(v, b):
            return _quant(False, v, None, b, I, env)
        case RForall(v, q, b):
            return _quant(True, v, q, b, I, env)
        case RExists(v, q, b):
            return _quant(False, v, q, b, I, env)
    raise EvaluationError(f"not a formula: {phi!r}")


def _quant(universal, v, qual, body, I, env) -> TruthValue:
    saved = env.get(v, _MISSING)
    best = T if universal else F
    try:
        for d in sorted(I.domain.pt):
            env[v] = d
            dv = I.domain.value(d)
            if qual is None:
                inner = _ev(body, I, env)
            elif universal:
                inner = max(_ev(qual, I, env).inv(), _ev(body, I, env))
            else:
                inner = min(_ev(qual, I, env), _ev(body, I, env))
            if universal:
                best = min(best, max(dv.inv(), inner))
                if best == F:
                    break
            else:
                best = max(best, min(dv, inner))
                if best == T:
                    break
    finally:
        if saved is _MISSING:
            env.pop(v, None)
        else:
            env[v] = saved
    return best


_MISSING = object()


# --------------------------------------------------------------------------
# Precision and completions


def precision_leq(J: PartialStructure, I: PartialStructure) -> bool:
    """True iff ``I`` is at least as precise as ``J``."""
    if J.universe != I.universe or J.consts != I.consts:
        raise ValueError("structures over different universes or constants")
    if set(J.preds) != set(I.preds):
        raise ValueError("structures over different vocabularies")
    if not J.domain.leq_p(I.domain):
        return False
    return all(J.preds[p].leq_p(I.preds[p]) for p in J.preds)


def completions(I: PartialStructure, over=None) -> Iterator[PartialStructure]:
    """All structures two-valued on ``over`` that agree with ``I`` elsewhere
    and are at least as precise.

    Order: predicates sorted by name, unknown tuples in row-major order, and
    for each tuple "false" before "true" (the first completion is the least).
    """
    names = sorted(I.preds if over is None else over)
    slots = [(p, t) for p in names for t in sorted(I.preds[p].unknown)]
    for bits in product((False, True), repeat=len(slots)):
        added = {p: set(I.preds[p].ct) for p in names}
        for (p, t), b in zip(slots, bits):
            if b:
                added[p].add(t)
        yield I.with_preds({p: PartialSet.exact(added[p]) for p in names})
