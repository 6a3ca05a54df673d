"""Independent reference implementations used to check the library.

None of these import the evaluators they check: three-valued connectives
come from explicit tables, two-valued evaluation and the least fixpoint of
deterministic theories are written from scratch, and CNF satisfiability is
brute force.
"""

from itertools import product

from clog.ast import (
    And, Atom, Bot, CAll, CAnd, CAtom, CIf, Const, Eq, Exists, Forall, Iff,
    Implies, Neg, Or, RExists, RForall, Top, Var,
)

# Kleene strong three-valued connectives, spelled out entry by entry.
NOT = {"t": "f", "f": "t", "u": "u"}
AND = {
    ("t", "t"): "t", ("t", "u"): "u", ("t", "f"): "f",
    ("u", "t"): "u", ("u", "u"): "u", ("u", "f"): "f",
    ("f", "t"): "f", ("f", "u"): "f", ("f", "f"): "f",
}
OR = {
    ("t", "t"): "t", ("t", "u"): "t", ("t", "f"): "t",
    ("u", "t"): "t", ("u", "u"): "u", ("u", "f"): "u",
    ("f", "t"): "t", ("f", "u"): "u", ("f", "f"): "f",
}


def _term(t, consts, env):
    if isinstance(t, Var):
        return env[t.name]
    assert isinstance(t, Const)
    return consts[t.name]


def table_eval(phi, I, env=None) -> str:
    """Three-valued value as one of 't', 'u', 'f', folding quantifiers
    through the ``AND``/``OR`` tables with the domain guard."""
    env = dict(env or {})

    def member(ps, x):
        return "t" if x in ps.ct else ("u" if x in ps.pt else "f")

    def ev(f):
        match f:
            case Atom(p, args):
                return member(I.preds[p], tuple(_term(a, I.consts, env) for a in args))
            case Eq(l, r):
                return "t" if _term(l, I.consts, env) == _term(r, I.consts, env) else "f"
            case Top():
                return "t"
            case Bot():
                return "f"
            case Neg(b):
                return NOT[ev(b)]
            case And(l, r):
                return AND[ev(l), ev(r)]
            case Or(l, r):
                return OR[ev(l), ev(r)]
            case Implies(l, r):
                return OR[NOT[ev(l)], ev(r)]
            case Iff(l, r):
                a, b = ev(l), ev(r)
                return AND[OR[NOT[a], b], OR[NOT[b], a]]
            case Forall(v, b) | Exists(v, b) | RForall(v, _, b) | RExists(v, _, b):
                universal = isinstance(f, (Forall, RForall))
                qual = getattr(f, "qual", None)
                acc = "t" if universal else "f"
                saved = env.get(v)
                for d in sorted(I.domain.pt):
                    env[v] = d
                    body = ev(b)
                    if qual is not None:
                        q = ev(qual)
                        body = OR[NOT[q], body] if universal else AND[q, body]
                    dv = member(I.domain, d)
                    if universal:
                        acc = AND[acc, OR[NOT[dv], body]]
                    else:
                        acc = OR[acc, AND[dv, body]]
                if saved is None:
                    env.pop(v, None)
                else:
                    env[v] = saved
                return acc
        raise TypeError(f)

    return ev(phi)


def classical_eval(phi, domain, rel, consts, env=None) -> bool:
    """Two-valued evaluation; ``rel`` maps predicates to sets of tuples."""
    env = dict(env or {})

    def ev(f):
        match f:
            case Atom(p, args):
                return tuple(_term(a, consts, env) for a in args) in rel[p]
            case Eq(l, r):
                return _term(l, consts, env) == _term(r, consts, env)
            case Top():
                return True
            case Bot():
                return False
            case Neg(b):
                return not ev(b)
            case And(l, r):
                return ev(l) and ev(r)
            case Or(l, r):
                return ev(l) or ev(r)
            case Implies(l, r):
                return (not ev(l)) or ev(r)
            case Iff(l, r):
                return ev(l) == ev(r)
            case Forall(v, b):
                return all(_with(env, v, d, lambda: ev(b)) for d in sorted(domain))
            case Exists(v, b):
                return any(_with(env, v, d, lambda: ev(b)) for d in sorted(domain))
            case RForall(v, q, b):
                return all(_with(env, v, d, lambda: (not ev(q)) or ev(b)) for d in sorted(domain))
            case RExists(v, q, b):
                return any(_with(env, v, d, lambda: ev(q) and ev(b)) for d in sorted(domain))
        raise TypeError(f)

    return ev(phi)


def _with(env, v, d, thunk):
    saved = env.get(v, None)
    env[v] = d
    try:
        return thunk()
    finally:
        if saved is None:
            env.pop(v, None)
        else:
            env[v] = saved


def two_valued_effect(c, domain, rel, consts, env=None) -> set:
    """Atoms caused by a deterministic CEE (atoms, If, And, All) in a
    two-valued interpretation ``rel``."""
    env = dict(env or {})
    out = set()

    def walk(n):
        match n:
            case CAtom(p, args):
                out.add((p, tuple(_term(a, consts, env) for a in args)))
            case CAnd(l, r):
                walk(l)
                walk(r)
            case CIf(cond, body):
                if classical_eval(cond, domain, rel, consts, env):
                    walk(body)
            case CAll(v, q, body):
                for d in sorted(domain):
                    saved = env.get(v)
                    env[v] = d
                    if classical_eval(q, domain, rel, consts, env):
                        walk(body)
                    if saved is None:
                        env.pop(v, None)
                    else:
                        env[v] = saved
            case _:
                raise TypeError(f"not deterministic: {n!r}")

    walk(c)
    return out


def least_fixpoint(c, domain, exo: dict, endogenous, consts=None) -> dict:
    """Least fixpoint of the two-valued immediate-consequence operator of a
    negation-free deterministic CEE, iterated from the empty set."""
    consts = consts or {}
    current = set()
    while True:
        rel = {p: set(ts) for p, ts in exo.items()}
        for p in endogenous:
            rel[p] = {a for (q, a) in current if q == p}
        nxt = two_valued_effect(c, domain, rel, consts)
        if nxt == current:
            return {p: {a for (q, a) in current if q == p} for p in endogenous}
        current = nxt


def cnf_satisfiable(clauses, symbols) -> bool:
    """``clauses`` are lists of (symbol, polarity) literals."""
    symbols = sorted(symbols)
    for bits in product((False, True), repeat=len(symbols)):
        val = dict(zip(symbols, bits))
        if all(any(val[s] == pol for s, pol in cl) for cl in clauses):
            return True
    return False


def satisfying_assignments(clauses, symbols) -> list:
    symbols = sorted(symbols)
    out = []
    for bits in product((False, True), repeat=len(symbols)):
        val = dict(zip(symbols, bits))
        if all(any(val[s] == pol for s, pol in cl) for cl in clauses):
            out.append(val)
    return out


def sat_structure_text(clauses, symbols, assignment=None, sol=True) -> str:
    """.struct text encoding a CNF.  With no assignment Tr and Fa are true
    on every symbol (the hiding construction)."""
    cl_names = [f"c{i + 1}" for i in range(len(clauses))]
    dom = cl_names + sorted(symbols)
    pos = [(c, s) for c, cl in zip(cl_names, clauses) for s, pol in cl if pol]
    neg = [(c, s) for c, cl in zip(cl_names, clauses) for s, pol in cl if not pol]
    if assignment is None:
        tr = fa = sorted(symbols)
    else:
        tr = sorted(s for s in symbols if assignment[s])
        fa = sorted(s for s in symbols if not assignment[s])

    def tuples(ts):
        return "{" + ", ".join("(" + ", ".join(t) + ")" for t in ts) + "}"

    return (
        "structure {\n"
        f"  domain = {{{', '.join(dom)}}};\n"
        f"  Cl = {tuples([(c,) for c in cl_names])};\n"
        f"  PS = {tuples([(s,) for s in sorted(symbols)])};\n"
        f"  Pos = {tuples(pos)};\n"
        f"  Neg = {tuples(neg)};\n"
        f"  Tr = {tuples([(s,) for s in tr])};\n"
        f"  Fa = {tuples([(s,) for s in fa])};\n"
        f"  Sol = {'true' if sol else 'false'}\n"
        "}\n"
    )
