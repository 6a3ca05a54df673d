"""Hypothesis strategies for formulas, partial structures and theories."""

from itertools import product

from hypothesis import strategies as st

from clog.ast import (
    BOT, TOP, And, Atom, Eq, Exists, Forall, Iff, Implies, Neg, Or, RExists,
    RForall, Var,
)
from clog.corpus import random_theory
from clog.semantics import PartialSet, PartialStructure

VOCAB = {"P": 1, "Q": 2, "R": 0}
ELEMENTS = ("a", "b", "c")
VARS = ("x", "y", "z")


def atoms(scope=VARS):
    def build(p):
        n = VOCAB[p]
        return st.tuples(*[st.sampled_from(scope) for _ in range(n)]).map(
            lambda vs: Atom(p, tuple(Var(v) for v in vs)))
    return st.sampled_from(sorted(VOCAB)).flatmap(build)


def formulas(max_leaves=12):
    """Formulas with free variables among x, y, z."""
    leaf = st.one_of(
        atoms(),
        st.just(TOP), st.just(BOT),
        st.tuples(st.sampled_from(VARS), st.sampled_from(VARS)).map(
            lambda p: Eq(Var(p[0]), Var(p[1]))),
    )

    def extend(children):
        v = st.sampled_from(VARS)
        return st.one_of(
            children.map(Neg),
            st.builds(And, children, children),
            st.builds(Or, children, children),
            st.builds(Implies, children, children),
            st.builds(Iff, children, children),
            st.builds(Forall, v, children),
            st.builds(Exists, v, children),
            st.builds(RForall, v, children, children),
            st.builds(RExists, v, children, children),
        )

    return st.recursive(leaf, extend, max_leaves=max_leaves)


@st.composite
def partial_structures(draw, max_size=3, two_valued=False, full_domain=False):
    n = draw(st.integers(1, max_size))
    uni = ELEMENTS[:n]
    if full_domain or two_valued:
        ct = pt = set(uni)
        if two_valued and not full_domain:
            pt = ct = {e for e in uni if draw(st.booleans())} or {uni[0]}
    else:
        pt = {e for e in uni if draw(st.booleans())} or {uni[0]}
        ct = {e for e in pt if draw(st.booleans())}
    preds = {}
    for p, k in VOCAB.items():
        tuples = list(product(sorted(pt), repeat=k))
        vals = [draw(st.sampled_from((0, 1, 2)) if not two_valued else st.sampled_from((0, 2)))
                for _ in tuples]
        preds[p] = PartialSet(frozenset(t for t, v in zip(tuples, vals) if v == 2),
                              frozenset(t for t, v in zip(tuples, vals) if v >= 1))
    return PartialStructure(uni, PartialSet(frozenset(ct), frozenset(pt)), preds, {}, {}, VOCAB)


@st.composite
def refinements(draw, I: PartialStructure):
    """A structure at least as precise as ``I``."""
    dom_ct = set(I.domain.ct)
    dom_pt = set(I.domain.pt)
    for e in sorted(I.domain.unknown):
        choice = draw(st.sampled_from(("keep", "true", "false")))
        mentioned = any(e in t for s in I.preds.values() for t in s.ct)
        if choice == "true":
            dom_ct.add(e)
        elif choice == "false" and not mentioned:
            dom_pt.discard(e)
    preds = {}
    for p, s in I.preds.items():
        ct, pt = set(s.ct), set(t for t in s.pt if set(t) <= dom_pt)
        for t in sorted(s.unknown):
            if not set(t) <= dom_pt:
                continue
            choice = draw(st.sampled_from(("keep", "true", "false")))
            if choice == "true":
                ct.add(t)
            elif choice == "false":
                pt.discard(t)
        preds[p] = PartialSet(frozenset(ct), frozenset(pt))
    return PartialStructure(I.universe, PartialSet(frozenset(dom_ct), frozenset(dom_pt)),
                            preds, I.consts, I.assignment, I.arities)


def envs(I):
    return st.fixed_dictionaries({v: st.sampled_from(I.universe) for v in VARS})


seeds = st.integers(min_value=0, max_value=10_000)
theories = seeds.map(random_theory)
