"""Shared checks used by several test modules and the acceptance suite."""

from clog.ast import (
    And, Atom, Eq, Exists, Forall, Iff, Implies, Neg, Or, RExists, RForall,
    CAll, CIf, Top, Var, cand_items, conjuncts,
)
from clog.causal import is_model
from clog.corpus import all_structures, universe
from clog.infer import models
from clog.semantics import unknown_structure
from clog.transform import rules_of


def model_keys(theory, n, stats=None):
    """Keys of every model of ``theory`` over ``universe(n)``, by exhaustive
    is_model over all two-valued structures.  Returns {key: witness}."""
    out = {}
    for I in all_structures(theory, n):
        ok, z = is_model(theory, I, "exhaustive", stats)
        if ok:
            out[I.key()] = (I, z)
    return out


def restricted_model_keys(theory, sigma, n, stats=None):
    """Restriction to ``sigma`` of every model of ``theory`` over
    ``universe(n)``.  Each model the search returns is re-confirmed with an
    exhaustive is_model.  Returns {restricted key: [(model, witness)]}."""
    out = {}
    I = unknown_structure(universe(n), theory.vocabulary.predicates)
    for M, _z in models(theory, I, "exhaustive", stats):
        ok, z = is_model(theory, M, "exhaustive", stats)
        assert ok, "search returned a structure is_model rejects"
        out.setdefault(M.project(sigma).key(), []).append((M, z))
    return out


# --------------------------------------------------------------------------
# Structural comparison up to renaming


def flat_rule(r):
    """(variables, guard conjuncts, body conjuncts) of a rule, looking
    through chains of All and <- so that ``All x [a] : All y [b] : C``
    and ``All x, y [a & b] : C`` compare equal."""
    vars_, guards = [], []
    node = r
    while isinstance(node, (CAll, CIf)):
        if isinstance(node, CAll):
            vars_.append(node.var)
            guards.extend(conjuncts(node.qual))
        else:
            guards.extend(conjuncts(node.cond))
        node = node.body
    guards = tuple(g for g in guards if not isinstance(g, Top))
    return tuple(vars_), guards, tuple(cand_items(node))


def rename_formula(f, names: dict, vars_: dict):
    rf = lambda g: rename_formula(g, names, vars_)  # noqa: E731
    match f:
        case Atom(p, args):
            return Atom(names.get(p, p), tuple(Var(vars_.get(a.name, a.name))
                                               if isinstance(a, Var) else a for a in args))
        case Eq(l, r):
            return Eq(*(Var(vars_.get(t.name, t.name)) if isinstance(t, Var) else t
                        for t in (l, r)))
        case Neg(b):
            return Neg(rf(b))
        case And(l, r) | Or(l, r) | Implies(l, r) | Iff(l, r):
            return type(f)(rf(l), rf(r))
        case Forall(v, b) | Exists(v, b):
            return type(f)(vars_.get(v, v), rf(b))
        case RForall(v, q, b) | RExists(v, q, b):
            return type(f)(vars_.get(v, v), rf(q), rf(b))
    return f


def alpha_normal(f):
    """Rename bound variables to v0, v1, ... in binding order so formulas
    equal up to variable renaming compare equal."""
    counter = [0]

    def go(g, env):
        match g:
            case Atom(p, args):
                return Atom(p, tuple(Var(env.get(a.name, a.name)) if isinstance(a, Var) else a
                                     for a in args))
            case Eq(l, r):
                return Eq(*(Var(env.get(t.name, t.name)) if isinstance(t, Var) else t
                            for t in (l, r)))
            case Neg(b):
                return Neg(go(b, env))
            case And(l, r) | Or(l, r) | Implies(l, r) | Iff(l, r):
                return type(g)(go(l, env), go(r, env))
            case Forall(v, b) | Exists(v, b):
                name = f"v{counter[0]}"
                counter[0] += 1
                return type(g)(name, go(b, {**env, v: name}))
            case RForall(v, q, b) | RExists(v, q, b):
                name = f"v{counter[0]}"
                counter[0] += 1
                inner = {**env, v: name}
                return type(g)(name, go(q, inner), go(b, inner))
        return g

    return go(f, {})


def flat_rules(theory):
    return [flat_rule(r) for r in rules_of(theory)]
