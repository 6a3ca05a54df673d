"""Choice functions, effect sets, the causality operator and its
well-founded fixpoint.

Internally a partial structure over a fixed reference structure ``I`` is a
pair of *layers*.  A layer is a two-valued snapshot: a set of domain
elements and a set of endogenous atoms.  A three-valued structure with
certainly-true layer ``x`` and possibly-true layer ``y`` evaluates a formula
to true (lower bound) when positive occurrences are read in ``x`` and
negative ones in ``y``; swapping the two gives the upper bound.  This is the
usual bilattice reading and lets the operator accept pairs that are not
(yet) consistent, which the stable-revision schedule needs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations, product
from typing import Iterator, Mapping, NamedTuple, Optional

from .ast import (
    And, Atom, Bot, CAll, CAnd, CAtom, CIf, CNew, COr, CSel, Const, Eq, Exists,
    FocTheory, Forall, Iff, Implies, Neg, Or, RExists, RForall, Top, Var,
    endogenous_predicates, iter_occurrences,
)
from .semantics import F, T, U, PartialSet, PartialStructure, TruthValue


class LatticeError(ValueError):
    """An operator input or output outside the causal lattice."""


class IterationBoundExceeded(RuntimeError):
    pass


# --------------------------------------------------------------------------
# Choice functions

KINDS = ("sel", "or", "new")


@dataclass(frozen=True)
class ChoiceFunction:
    """Resolution of every Sel, Or and New instance over ``universe``.

    Tables map an occurrence index (pre-order) to a dict from argument
    tuples to values.  Missing entries take the defaults: Sel picks the
    least element, Or picks branch 1, New is undefined.
    """

    universe: tuple
    sel: Mapping[int, Mapping[tuple, str]] = field(default_factory=dict)
    orc: Mapping[int, Mapping[tuple, int]] = field(default_factory=dict)
    new: Mapping[int, Mapping[tuple, Optional[str]]] = field(default_factory=dict)

    def __post_init__(self):
        uni = tuple(sorted(set(self.universe)))
        object.__setattr__(self, "universe", uni)
        if not uni:
            raise ValueError("choice functions need a non-empty universe")
        least = uni[0]
        sel = {i: {a: e for a, e in t.items() if e != least} for i, t in self.sel.items()}
        orc = {i: {a: c for a, c in t.items() if c != 1} for i, t in self.orc.items()}
        new = {i: {a: e for a, e in t.items() if e is not None} for i, t in self.new.items()}
        object.__setattr__(self, "sel", {i: t for i, t in sel.items() if t})
        object.__setattr__(self, "orc", {i: t for i, t in orc.items() if t})
        object.__setattr__(self, "new", {i: t for i, t in new.items() if t})
        members = set(uni)
        for t in self.sel.values():
            if not set(t.values()) <= members:
                raise ValueError("Sel value outside the universe")
        for t in self.orc.values():
            if not set(t.values()) <= {1, 2}:
                raise ValueError("Or values must be 1 or 2")
        images = [e for t in self.new.values() for e in t.values()]
        if len(images) != len(set(images)):
            raise ValueError("New functions must be injective with disjoint images")
        if not set(images) <= members:
            raise ValueError("New value outside the universe")

    __hash__ = None

    def sel_at(self, occ: int, args: tuple) -> str:
        return self.sel.get(occ, {}).get(args, self.universe[0])

    def or_at(self, occ: int, args: tuple) -> int:
        return self.orc.get(occ, {}).get(args, 1)

    def new_at(self, occ: int, args: tuple) -> Optional[str]:
        return self.new.get(occ, {}).get(args)

    def lookup(self, kind: str, occ: int, args: tuple):
        if kind == "sel":
            return self.sel_at(occ, args)
        if kind == "or":
            return self.or_at(occ, args)
        return self.new_at(occ, args)

    @property
    def created(self) -> frozenset:
        return frozenset(e for t in self.new.values() for e in t.values())

    @property
    def initials(self) -> frozenset:
        """``ch_in``: the elements no New function creates."""
        return frozenset(self.universe) - self.created

    def key(self) -> tuple:
        def norm(tables):
            return tuple(sorted((i, tuple(sorted(t.items()))) for i, t in tables.items()))
        return (self.universe, norm(self.sel), norm(self.orc), norm(self.new))

    def __eq__(self, other):
        return isinstance(other, ChoiceFunction) and self.key() == other.key()

    @classmethod
    def from_assignment(cls, universe, values: Mapping[tuple, object]) -> "ChoiceFunction":
        """Build from ``{(kind, occ, args): value}``."""
        tables = {"sel": {}, "or": {}, "new": {}}
        for (kind, occ, args), v in values.items():
            tables[kind].setdefault(occ, {})[tuple(args)] = v
        return cls(universe, tables["sel"], tables["or"], tables["new"])

    def to_json(self) -> dict:
        def rows(tables):
            return {str(i): [{"args": list(a), "value": v} for a, v in sorted(t.items())]
                    for i, t in sorted(tables.items())}
        return {"universe": list(self.universe), "sel": rows(self.sel),
                "or": rows(self.orc), "new": rows(self.new)}

    @classmethod
    def from_json(cls, data: dict) -> "ChoiceFunction":
        def tables(rows):
            return {int(i): {tuple(r["args"]): r["value"] for r in rs} for i, rs in rows.items()}
        return cls(tuple(data["universe"]), tables(data.get("sel", {})),
                   tables(data.get("or", {})), tables(data.get("new", {})))


def trivial_chfun(universe) -> ChoiceFunction:
    return ChoiceFunction(tuple(universe))


# --------------------------------------------------------------------------
# Compiled theories


@dataclass(frozen=True)
class Instance:
    kind: str
    occ: int
    args: tuple

    @property
    def order(self):
        return (self.occ, self.args, self.kind)


class Compiled:
    """A CEE with nondeterministic occurrences tagged by pre-order index."""

    def __init__(self, root, vocabulary=None):
        self.root = root
        self._counter = 0
        self.tree = self._compile(root, ())
        self.nondet = [o for o in iter_occurrences(root)
                       if isinstance(o.node, (CSel, COr, CNew))]
        self.endogenous = frozenset(endogenous_predicates(root))
        self.vocabulary = vocabulary

    def _compile(self, node, ctx):
        # numbering must follow iter_occurrences (pre-order), and must not
        # rely on node identity since equal subtrees may be shared objects
        index = self._counter
        self._counter += 1
        match node:
            case CAtom(p, args):
                return ("atom", p, args)
            case CIf(cond, body):
                return ("if", cond, self._compile(body, ctx))
            case CAnd(l, r):
                return ("and", self._compile(l, ctx), self._compile(r, ctx))
            case COr(l, r):
                left = self._compile(l, ctx)
                return ("or", index, ctx, left, self._compile(r, ctx))
            case CAll(v, q, b):
                return ("all", v, q, self._compile(b, ctx + (v,)))
            case CSel(v, q, b):
                return ("sel", index, ctx, v, q, self._compile(b, ctx + (v,)))
            case CNew(v, b):
                return ("new", index, ctx, v, self._compile(b, ctx + (v,)))
        raise TypeError(f"not a CEE: {node!r}")

    def instances(self, universe) -> list:
        uni = sorted(universe)
        out = []
        for o in self.nondet:
            kind = {CSel: "sel", COr: "or", CNew: "new"}[type(o.node)]
            for args in product(uni, repeat=o.arity):
                out.append(Instance(kind, o.index, args))
        return out

    def kind_of(self, occ_index: int) -> str:
        for o in self.nondet:
            if o.index == occ_index:
                return {CSel: "sel", COr: "or", CNew: "new"}[type(o.node)]
        raise KeyError(occ_index)


def compile_theory(theory) -> Compiled:
    if isinstance(theory, Compiled):
        return theory
    if isinstance(theory, FocTheory):
        return Compiled(theory.causal, theory.vocabulary)
    return Compiled(theory)


# --------------------------------------------------------------------------
# Two-valued layer evaluation


class Layer(NamedTuple):
    D: frozenset
    atoms: frozenset


class _Eval:
    """Evaluator over layers.

    ``layered`` predicates are read from the layer's atom set; every other
    predicate is read from ``exo`` and additionally requires its arguments
    to lie in the layer's domain, which realizes the restriction of
    exogenous symbols to the current domain.
    """

    def __init__(self, compiled: Compiled, chfun, consts, layered, exo, recorder=None):
        self.c = compiled
        self.z = chfun
        self.consts = consts
        self.layered = layered
        self.exo = exo
        self.recorder = recorder
        self.ops = 0

    # -- formulas ------------------------------------------------------------
    def term(self, t, env):
        if isinstance(t, Var):
            return env[t.name]
        return self.consts[t.name]

    def args(self, args, env):
        return tuple(env[a.name] if isinstance(a, Var) else self.consts[a.name] for a in args)

    def ev(self, f, pos: Layer, neg: Layer, env) -> bool:
        match f:
            case Atom(p, args):
                vals = self.args(args, env)
                if p in self.layered:
                    return (p, vals) in pos.atoms
                if (p, vals) not in self.exo:
                    return False
                D = pos.D
                return all(v in D for v in vals)
            case Eq(l, r):
                return self.term(l, env) == self.term(r, env)
            case Top():
                return True
            case Bot():
                return False
            case Neg(b):
                return not self.ev(b, neg, pos, env)
            case And(l, r):
                return self.ev(l, pos, neg, env) and self.ev(r, pos, neg, env)
            case Or(l, r):
                return self.ev(l, pos, neg, env) or self.ev(r, pos, neg, env)
            case Implies(l, r):
                return (not self.ev(l, neg, pos, env)) or self.ev(r, pos, neg, env)
            case Iff(l, r):
                return (((not self.ev(l, neg, pos, env)) or self.ev(r, pos, neg, env))
                        and ((not self.ev(r, neg, pos, env)) or self.ev(l, pos, neg, env)))
            case Forall(v, b):
                return self._all(v, None, b, pos, neg, env)
            case RForall(v, q, b):
                return self._all(v, q, b, pos, neg, env)
            case Exists(v, b):
                return self._any(v, None, b, pos, neg, env)
            case RExists(v, q, b):
                return self._any(v, q, b, pos, neg, env)
        raise TypeError(f"not a formula: {f!r}")

    def _all(self, v, q, b, pos, neg, env):
        saved = env.get(v)
        ok = True
        for d in neg.D:
            env[v] = d
            if q is not None and not self.ev(q, neg, pos, env):
                continue
            if not self.ev(b, pos, neg, env):
                ok = False
                break
        _restore(env, v, saved)
        return ok

    def _any(self, v, q, b, pos, neg, env):
        saved = env.get(v)
        ok = False
        for d in pos.D:
            env[v] = d
            if q is not None and not self.ev(q, pos, neg, env):
                continue
            if self.ev(b, pos, neg, env):
                ok = True
                break
        _restore(env, v, saved)
        return ok

    # -- effect sets -----------------------------------------------------------
    def choose(self, kind, occ, ctx, env):
        args = tuple(env[v] for v in ctx)
        if self.recorder is not None:
            self.recorder.add(Instance(kind, occ, args))
        return args, self.z.lookup(kind, occ, args)

    def cs(self, node, pos, neg, env, atoms, created, reach=None):
        tag = node[0]
        if tag == "atom":
            _, p, args = node
            atoms.add((p, self.args(args, env)))
        elif tag == "and":
            self.cs(node[1], pos, neg, env, atoms, created, reach)
            self.cs(node[2], pos, neg, env, atoms, created, reach)
        elif tag == "if":
            if self.ev(node[1], pos, neg, env):
                self.cs(node[2], pos, neg, env, atoms, created, reach)
        elif tag == "all":
            _, v, q, body = node
            saved = env.get(v)
            for d in pos.D:
                env[v] = d
                if self.ev(q, pos, neg, env):
                    self.cs(body, pos, neg, env, atoms, created, reach)
            _restore(env, v, saved)
        elif tag == "or":
            _, occ, ctx, left, right = node
            _, choice = self.choose("or", occ, ctx, env)
            self.cs(left if choice == 1 else right, pos, neg, env, atoms, created, reach)
        elif tag == "sel":
            _, occ, ctx, v, q, body = node
            args, e = self.choose("sel", occ, ctx, env)
            saved = env.get(v)
            env[v] = e
            ok = e in pos.D and self.ev(q, pos, neg, env)
            if reach is not None:
                reach.append(("sel", occ, args, e, ok, dict(env)))
            if ok:
                self.cs(body, pos, neg, env, atoms, created, reach)
            _restore(env, v, saved)
        elif tag == "new":
            _, occ, ctx, v, body = node
            args, e = self.choose("new", occ, ctx, env)
            if reach is not None:
                reach.append(("new", occ, args, e, e is not None, None))
            if e is None:
                return
            created.add(e)
            saved = env.get(v)
            env[v] = e
            self.cs(body, pos, neg, env, atoms, created, reach)
            _restore(env, v, saved)
        else:
            raise TypeError(tag)

    def effect(self, pos, neg, reach=None):
        atoms, created = set(), set()
        self.cs(self.c.tree, pos, neg, {}, atoms, created, reach)
        return atoms, created

    def op(self, pos: Layer, neg: Layer, initials: frozenset) -> Layer:
        """One component of the causality operator."""
        self.ops += 1
        atoms, created = self.effect(pos, neg)
        return Layer(initials | created, frozenset(atoms))


def _restore(env, v, saved):
    if saved is None:
        env.pop(v, None)
    else:
        env[v] = saved


# --------------------------------------------------------------------------
# Well-founded fixpoint


@dataclass
class WFResult:
    lower: Layer
    upper: Layer
    operator_applications: int
    initials: frozenset
    bound: int
    succeeds: Optional[bool] = None

    @property
    def is_two_valued(self) -> bool:
        return self.lower == self.upper


def _context_parts(compiled: Compiled, context: PartialStructure, universe=None):
    endo = compiled.endogenous
    exo = set()
    for p, s in context.preds.items():
        if p in endo:
            continue
        if not s.is_two_valued:
            raise ValueError(f"exogenous predicate {p} is not two-valued in the context")
        exo.update((p, t) for t in s.ct)
    if universe is None:
        if not context.domain.is_two_valued:
            raise ValueError("the reference structure needs a two-valued domain")
        universe = context.domain.ct
    return frozenset(exo), frozenset(universe)


def domain_atom_count(compiled: Compiled, universe, initials, arities) -> int:
    """Number of atoms the operator can change: creatable elements plus
    endogenous ground atoms."""
    n = len(universe) - len(initials)
    size = len(universe)
    for p in compiled.endogenous:
        n += size ** arities[p]
    return n


def _arities(compiled: Compiled, context: PartialStructure):
    ar = dict(context.arities)
    for o in iter_occurrences(compiled.root):
        if isinstance(o.node, CAtom):
            ar.setdefault(o.node.pred, len(o.node.args))
    return ar


def _top_layer(compiled, universe, arities) -> Layer:
    uni = sorted(universe)
    atoms = frozenset((p, t) for p in compiled.endogenous
                      for t in product(uni, repeat=arities[p]))
    return Layer(frozenset(universe), atoms)


def _check_initials(z: ChoiceFunction, consts, universe):
    for c, e in consts.items():
        if e in z.created:
            raise LatticeError(f"constant {c} denotes an element the choice function creates")
    if not set(z.universe) >= set(universe):
        raise LatticeError("choice function universe does not cover the domain")


def _wf_layers(ev: _Eval, initials, top: Layer, bound: int):
    bottom = Layer(initials, frozenset())
    L, Up = bottom, top

    def lfp(f, start):
        x = start
        while True:
            y = f(x)
            if ev.ops > bound:
                raise IterationBoundExceeded(
                    f"well-founded computation exceeded {bound} operator applications")
            if y == x:
                return x
            x = y

    while True:
        newL = lfp(lambda x: ev.op(x, Up, initials), L)
        newU = lfp(lambda x: ev.op(x, L, initials), bottom)
        if newL == L and newU == Up:
            return L, Up
        L, Up = newL, newU


def _run(compiled: Compiled, context: PartialStructure, z, recorder=None,
         check_success=True) -> WFResult:
    exo, universe = _context_parts(compiled, context)
    _check_initials(z, context.consts, universe)
    initials = frozenset(universe) & z.initials
    arities = _arities(compiled, context)
    n = domain_atom_count(compiled, universe, initials, arities)
    bound = (n + 2) ** 2
    ev = _Eval(compiled, z, context.consts, compiled.endogenous, exo, recorder)
    L, Up = _wf_layers(ev, initials, _top_layer(compiled, universe, arities), bound)
    res = WFResult(L, Up, ev.ops, initials, bound)
    if check_success and L == Up:
        reach = []
        ev.effect(L, L, reach)
        res.succeeds = all(entry[4] for entry in reach)
    return res


def layers_to_structure(compiled, context: PartialStructure, lower: Layer, upper: Layer,
                        arities=None) -> PartialStructure:
    """The partial structure in the causal lattice described by two layers."""
    exo, universe = _context_parts(compiled, context)
    arities = arities or _arities(compiled, context)
    preds = {}
    for p in sorted(set(arities) | set(context.preds)):
        if p in compiled.endogenous:
            ct = {a for (q, a) in lower.atoms if q == p}
            pt = {a for (q, a) in upper.atoms if q == p} | ct
        else:
            tuples = [a for (q, a) in exo if q == p]
            ct = {a for a in tuples if set(a) <= lower.D}
            pt = {a for a in tuples if set(a) <= upper.D}
        preds[p] = PartialSet(frozenset(ct), frozenset(pt))
    dom = PartialSet(frozenset(lower.D), frozenset(upper.D | lower.D))
    return PartialStructure(tuple(sorted(universe)), dom, preds, context.consts, {}, arities)


def well_founded(delta, z: ChoiceFunction, context: PartialStructure,
                 stats: Optional[dict] = None) -> PartialStructure:
    """Well-founded fixpoint of the causality operator under ``z``.

    ``context`` supplies the reference domain and the two-valued
    exogenous symbols.  Operator applications are added to ``stats``.
    """
    compiled = compile_theory(delta)
    res = _run(compiled, context, z, check_success=False)
    if stats is not None:
        stats["operator_applications"] = stats.get("operator_applications", 0) + res.operator_applications
        stats["bound"] = res.bound
        stats["max_ratio"] = max(stats.get("max_ratio", 0.0), res.operator_applications / res.bound)
    return layers_to_structure(compiled, context, res.lower, res.upper)


def structure_layers(J: PartialStructure, preds=None):
    """(certainly-true layer, possibly-true layer) of a partial structure."""
    names = J.preds if preds is None else preds
    lo = frozenset((p, t) for p in names for t in J.preds[p].ct)
    hi = frozenset((p, t) for p in names for t in J.preds[p].pt)
    return Layer(J.domain.ct, lo), Layer(J.domain.pt, hi)


# --------------------------------------------------------------------------
# Effect sets and the operator on explicit partial structures


@dataclass(frozen=True)
class RelevantInstance:
    kind: str            # "sel" or "new"
    occurrence: int
    args: tuple
    success: TruthValue


@dataclass(frozen=True)
class EffectSet:
    atoms: PartialSet                  # of (pred, args); creation markers are ("U", (e,))
    relevance: tuple = ()

    def value(self, pred, args) -> TruthValue:
        return self.atoms.value((pred, tuple(args)))


CREATED = "U"


def effect_set(delta, I: PartialStructure, z: ChoiceFunction, env=None) -> EffectSet:
    """Three-valued effect set of ``delta`` in ``I`` under ``z``.

    All predicates are read directly from ``I``.  Creation of ``e`` shows up
    as the atom ``("U", (e,))``.  Relevance lists every Sel/New instance
    reached with a non-false accumulated condition.
    """
    compiled = compile_theory(delta)
    lo, hi = structure_layers(I)
    ev = _Eval(compiled, z, I.consts, frozenset(I.preds), frozenset())
    base = dict(I.assignment)
    base.update(env or {})

    def run(pos, neg, reach):
        atoms, created = set(), set()
        ev.cs(compiled.tree, pos, neg, dict(base), atoms, created, reach)
        return atoms | {(CREATED, (e,)) for e in created}

    reach_hi, reach_lo = [], []
    ct = run(lo, hi, reach_lo)
    pt = run(hi, lo, reach_hi)
    certain = {(k, o, a) for (k, o, a, _e, ok, _env) in reach_lo if ok}
    entries = []
    seen = set()
    for (k, o, a, _e, ok, _env) in reach_hi:
        if (k, o, a) in seen:
            continue
        seen.add((k, o, a))
        val = T if (k, o, a) in certain else (U if ok else F)
        entries.append(RelevantInstance(k, o, a, val))
    return EffectSet(PartialSet(frozenset(ct), frozenset(pt | ct)), tuple(entries))


def apply_operator(delta, z: ChoiceFunction, J: PartialStructure,
                   context: Optional[PartialStructure] = None,
                   endogenous=None) -> PartialStructure:
    """Partial immediate causality operator applied to ``J``.

    ``endogenous`` overrides the syntactic endogenous set (predicates listed
    there but never caused come out false).  Exogenous symbols are taken
    from ``context`` (default: ``J`` itself) and restricted to the new
    domain.
    """
    compiled = compile_theory(delta)
    endo = set(compiled.endogenous if endogenous is None else endogenous)
    ref = context or J
    if not (J.domain.pt <= ref.domain.pt):
        raise LatticeError("input domain exceeds the reference domain")
    initials = frozenset(ref.domain.pt) & z.initials
    if not initials <= J.domain.ct:
        raise LatticeError("input domain misses initial elements")
    E = effect_set(compiled, J, z)
    created_ct = {a[0] for (p, a) in E.atoms.ct if p == CREATED}
    created_pt = {a[0] for (p, a) in E.atoms.pt if p == CREATED}
    dom = PartialSet(frozenset(initials | created_ct), frozenset(initials | created_pt))
    preds = {}
    for p in J.preds:
        if p in endo:
            ct = {a for (q, a) in E.atoms.ct if q == p}
            pt = {a for (q, a) in E.atoms.pt if q == p}
        else:
            src = ref.preds[p]
            ct = {a for a in src.ct if set(a) <= dom.ct}
            pt = {a for a in src.pt if set(a) <= dom.pt}
        preds[p] = PartialSet(frozenset(ct), frozenset(pt))
    return PartialStructure(ref.universe, dom, preds, J.consts, {}, J.arities)


def succeeds(delta, I: PartialStructure, z: ChoiceFunction) -> bool:
    """Whether every relevant Sel picks a qualifying element and every
    relevant New creates one, in the two-valued structure ``I``."""
    if not I.is_two_valued:
        raise ValueError("succeeds is defined on two-valued structures")
    compiled = compile_theory(delta)
    layer, _ = structure_layers(I)
    ev = _Eval(compiled, z, I.consts, frozenset(I.preds), frozenset())
    reach = []
    atoms, created = set(), set()
    ev.cs(compiled.tree, layer, layer, dict(I.assignment), atoms, created, reach)
    return all(entry[4] for entry in reach)


# --------------------------------------------------------------------------
# Enumerating choice functions


def _new_assignments(instances, pool, used):
    """Joint partial injective assignments of New instances into ``pool``."""
    if not instances:
        yield {}
        return
    head, rest = instances[0], instances[1:]
    for tail in _new_assignments(rest, pool, used):
        yield {head: None, **tail}
    for e in sorted(pool):
        if e in used:
            continue
        used.add(e)
        for tail in _new_assignments(rest, pool, used):
            yield {head: e, **tail}
        used.discard(e)


def _options(inst: Instance, universe, taken_images=frozenset(), pool=None):
    if inst.kind == "sel":
        return list(sorted(universe))
    if inst.kind == "or":
        return [1, 2]
    pool = sorted(universe if pool is None else pool)
    return [None] + [e for e in pool if e not in taken_images]


def exhaustive_chfuns(delta, universe) -> Iterator[ChoiceFunction]:
    """Every choice function over ``universe``, in canonical order."""
    compiled = compile_theory(delta)
    uni = tuple(sorted(universe))
    insts = sorted(compiled.instances(uni), key=lambda i: i.order)
    choice_insts = [i for i in insts if i.kind != "new"]
    new_insts = [i for i in insts if i.kind == "new"]
    option_lists = [_options(i, uni) for i in choice_insts]
    for combo in product(*option_lists):
        base = {(i.kind, i.occ, i.args): v for i, v in zip(choice_insts, combo)}
        for news in _new_assignments(new_insts, uni, set()):
            vals = dict(base)
            vals.update({(i.kind, i.occ, i.args): v for i, v in news.items()})
            yield ChoiceFunction.from_assignment(uni, vals)


class _Recorder(set):
    pass


def _forbidden_created(consts) -> frozenset:
    return frozenset(consts.values())


def _created_sets(universe, consts, max_size):
    pool = sorted(set(universe) - _forbidden_created(consts))
    for k in range(0, min(max_size, len(pool)) + 1):
        for K in combinations(pool, k):
            yield frozenset(K)


@dataclass
class Outcome:
    chfun: ChoiceFunction
    result: WFResult


def explore(delta, context: PartialStructure, mode: str = "lazy",
            require_full_domain: bool = False, stats: Optional[dict] = None,
            created: Optional[frozenset] = None) -> Iterator[Outcome]:
    """Stream (choice function, well-founded result) pairs.

    Exhaustive mode runs every choice function.  Lazy mode branches only on
    instances the computation actually consults; for each distinct outcome
    class it yields one representative whose unconsulted entries take the
    defaults.  ``require_full_domain`` skips choice functions whose created
    elements cannot all end up in the domain (useful for model search).
    ``created`` restricts the search to choice functions creating exactly
    that set.
    """
    compiled = compile_theory(delta)
    _exo, universe = _context_parts(compiled, context)
    uni = tuple(sorted(universe))
    stats = stats if stats is not None else {}
    stats.setdefault("chfuns_examined", 0)
    stats.setdefault("operator_applications", 0)
    stats.setdefault("max_ratio", 0.0)

    def note(res: WFResult):
        stats["chfuns_examined"] += 1
        stats["operator_applications"] += res.operator_applications
        stats["max_ratio"] = max(stats["max_ratio"], res.operator_applications / res.bound)

    forbidden = _forbidden_created(context.consts)
    if mode == "exhaustive":
        for z in exhaustive_chfuns(compiled, uni):
            if z.created & forbidden or (created is not None and z.created != created):
                continue
            res = _run(compiled, context, z)
            note(res)
            if require_full_domain and res.lower.D != frozenset(uni):
                continue
            yield Outcome(z, res)
        return
    if mode != "lazy":
        raise ValueError(f"unknown enumeration mode {mode!r}")

    all_new = sorted((i for i in compiled.instances(uni) if i.kind == "new"),
                     key=lambda i: i.order)
    if created is not None:
        if created & forbidden or not created <= set(uni):
            return
        created_sets = [frozenset(created)]
    else:
        created_sets = _created_sets(uni, context.consts, len(all_new))
    for K in created_sets:
        yield from _lazy_branch(compiled, context, uni, K, {}, all_new,
                                require_full_domain, note)


def _lazy_branch(compiled, context, uni, K, decided, all_new, require_full, note):
    vals = {(i.kind, i.occ, i.args): v for i, v in decided.items()}
    images = {v for i, v in decided.items() if i.kind == "new" and v is not None}
    # elements of K not yet created by a decided instance are placed on the
    # first New instances not decided so far; while they stay unconsulted
    # their values cannot influence the run
    spare = [i for i in all_new if i not in decided]
    missing = sorted(K - images)
    if len(missing) > len(spare):
        return
    filler = {}
    for inst, e in zip(spare, missing):
        filler[(inst.kind, inst.occ, inst.args)] = e
    rec = _Recorder()
    z = ChoiceFunction.from_assignment(uni, {**filler, **vals})
    res = _run(compiled, context, z, recorder=rec)
    note(res)
    # consulted filler instances are branched on like any other
    open_ = sorted((i for i in rec if i not in decided), key=lambda i: i.order)
    if not open_:
        if require_full and res.lower.D != frozenset(uni):
            return
        yield Outcome(z, res)
        return
    inst = open_[0]
    if inst.kind == "new":
        options = [None] + [e for e in sorted(K) if e not in images]
    else:
        options = _options(inst, uni)
    for v in options:
        yield from _lazy_branch(compiled, context, uni, K, {**decided, inst: v},
                                all_new, require_full, note)


def enumerate_chfuns(delta, universe, mode: str = "exhaustive",
                     context: Optional[PartialStructure] = None) -> Iterator[ChoiceFunction]:
    """Choice functions over ``universe``.

    Lazy mode needs a reference ``context`` (exogenous interpretation) to
    decide which instances are consulted; without one an empty two-valued
    context over ``universe`` is used.
    """
    if mode == "exhaustive":
        yield from exhaustive_chfuns(delta, universe)
        return
    compiled = compile_theory(delta)
    if context is None:
        uni = tuple(sorted(universe))
        context = PartialStructure(uni, PartialSet.exact(uni), {}, {}, {}, {})
    for out in explore(compiled, context, mode):
        yield out.chfun


# --------------------------------------------------------------------------
# Model checking


def endogenous_layer(compiled: Compiled, I: PartialStructure) -> Layer:
    atoms = frozenset((p, t) for p in compiled.endogenous
                      for t in I.preds.get(p, PartialSet()).ct)
    return Layer(frozenset(I.domain.ct), atoms)


def is_model(delta, I: PartialStructure, mode: str = "lazy", stats=None):
    """``(True, witness)`` if some choice function makes ``I`` the
    well-founded fixpoint with success, else ``(False, None)``."""
    if not I.is_two_valued:
        raise ValueError("model checking needs a two-valued structure")
    compiled = compile_theory(delta)
    missing = compiled.endogenous - set(I.preds)
    if missing:
        raise ValueError(f"structure does not interpret {sorted(missing)}")
    target = endogenous_layer(compiled, I)
    for out in explore(compiled, I, mode, require_full_domain=True, stats=stats):
        r = out.result
        if r.is_two_valued and r.succeeds and r.lower == target:
            return True, out.chfun
    return False, None


def replay(delta, I: PartialStructure, z: ChoiceFunction) -> bool:
    """Re-run the fixpoint under ``z`` and confirm it reproduces ``I``."""
    compiled = compile_theory(delta)
    res = _run(compiled, I, z)
    return (res.is_two_valued and bool(res.succeeds)
            and res.lower == endogenous_layer(compiled, I))
