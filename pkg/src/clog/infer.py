"""Inference tasks: model checking, model expansion, endogenous model
expansion, the polynomial fast path for Or-only theories, and a bounded
variant of querying with object creation.

Everything is brute force over finite domains with a deterministic search
order: exogenous completions first (pruned by the FO sentences), then
choice functions in canonical order.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from itertools import product
from typing import Iterator, Optional

from .ast import CNew, CSel, FocTheory, formula_preds, iter_occurrences
from .causal import (
    ChoiceFunction, _run, compile_theory, explore, is_model, layers_to_structure,
    replay as _replay_causal, trivial_chfun,
)
from .semantics import T, PartialSet, PartialStructure, eval_formula

VERDICTS = ("true", "false", "unsat", "model", "unknown-at-budget")


@dataclass
class InferenceResult:
    verdict: str
    model: Optional[PartialStructure] = None
    witness: Optional[ChoiceFunction] = None
    stats: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.verdict not in VERDICTS:
            raise ValueError(f"unknown verdict {self.verdict!r}")
        if self.verdict == "model" and (self.model is None or self.witness is None):
            raise ValueError("model verdicts carry a model and a witness")

    @property
    def ok(self) -> bool:
        return self.verdict in ("true", "model")


def _as_theory(theory) -> FocTheory:
    if isinstance(theory, FocTheory):
        return theory
    from .ast import CAtom, Vocabulary
    preds = {}
    for o in iter_occurrences(theory):
        if isinstance(o.node, CAtom):
            preds[o.node.pred] = len(o.node.args)
    return FocTheory(theory, (), Vocabulary(preds))


def with_vocabulary(I: PartialStructure, theory: FocTheory) -> PartialStructure:
    """Add vocabulary predicates ``I`` does not mention, fully unknown."""
    missing = {p: n for p, n in theory.vocabulary.predicates.items() if p not in I.preds}
    if not missing:
        return I
    dom = sorted(I.domain.pt)
    extra = {p: PartialSet(frozenset(), frozenset(product(dom, repeat=n)))
             for p, n in missing.items()}
    return I.with_preds(extra, arities=missing)


def _new_stats() -> dict:
    return {"chfuns_examined": 0, "operator_applications": 0, "max_ratio": 0.0,
            "completions_examined": 0, "wall_time": 0.0}


def exogenous_completions(theory: FocTheory, I: PartialStructure,
                          stats: Optional[dict] = None) -> Iterator[PartialStructure]:
    """Completions of ``I`` that are two-valued on the exogenous symbols.

    Predicates are filled in one at a time; a partial assignment is
    abandoned as soon as some FO sentence is already false under it.
    """
    I = with_vocabulary(I, theory)
    compiled = compile_theory(theory)
    endo = compiled.endogenous
    exo = [p for p in theory.vocabulary.predicates if p not in endo]
    sentences = list(theory.sentences)
    mentions = [formula_preds(s) for s in sentences]
    if any(eval_formula(s, I) == 0 for s in sentences):
        return

    order = []
    assigned = set()
    remaining = set(exo)
    while remaining:
        def score(p):
            closes = sum(1 for m in mentions if p in m and m <= assigned | {p})
            return (-closes, len(I.preds[p].unknown), p)
        best = min(remaining, key=score)
        order.append(best)
        assigned.add(best)
        remaining.discard(best)
    checks = [[s for s, m in zip(sentences, mentions) if p in m] for p in order]

    def rec(i, J):
        if i == len(order):
            if stats is not None:
                stats["completions_examined"] = stats.get("completions_examined", 0) + 1
            yield J
            return
        p = order[i]
        ps = J.preds[p]
        unknown = sorted(ps.unknown)
        for bits in product((False, True), repeat=len(unknown)):
            ct = set(ps.ct)
            ct.update(t for t, b in zip(unknown, bits) if b)
            J2 = J.with_preds({p: PartialSet.exact(ct)})
            if any(eval_formula(s, J2) == 0 for s in checks[i]):
                continue
            yield from rec(i + 1, J2)

    yield from rec(0, I)


def _refines(I: PartialStructure, M: PartialStructure) -> bool:
    return all(I.preds[p].leq_p(M.preds[p]) for p in I.preds if p in M.preds)


def models(theory, I: PartialStructure, mode: str = "lazy", stats=None,
           complete_exogenous: bool = True) -> Iterator[tuple]:
    """All (model, witness) pairs more precise than ``I``, in search order.

    The same model may appear with several witnesses.
    """
    theory = _as_theory(theory)
    if not I.domain.is_two_valued:
        raise ValueError("model expansion needs a two-valued domain")
    I = with_vocabulary(I, theory)
    stats = stats if stats is not None else _new_stats()
    compiled = compile_theory(theory)
    arities = dict(theory.vocabulary.predicates)
    arities.update(I.arities)
    contexts = exogenous_completions(theory, I, stats) if complete_exogenous else [I]
    for ctx in contexts:
        for out in explore(compiled, ctx, mode, require_full_domain=True, stats=stats):
            r = out.result
            if not (r.is_two_valued and r.succeeds):
                continue
            M = layers_to_structure(compiled, ctx, r.lower, r.upper, arities)
            if not _refines(I, M):
                continue
            if any(eval_formula(s, M) != T for s in theory.sentences):
                continue
            yield M, out.chfun


def _finish(verdict, stats, start, model=None, witness=None) -> InferenceResult:
    stats["wall_time"] = time.perf_counter() - start
    return InferenceResult(verdict, model, witness, stats)


def model_check(theory, I: PartialStructure, mode: str = "lazy") -> InferenceResult:
    """``true`` iff the two-valued structure ``I`` is a model."""
    start = time.perf_counter()
    theory = _as_theory(theory)
    stats = _new_stats()
    if not I.is_two_valued:
        raise ValueError("model checking needs a two-valued structure")
    I = with_vocabulary(I, theory)
    if not I.is_two_valued:
        raise ValueError("structure leaves vocabulary symbols uninterpreted")
    if any(eval_formula(s, I) != T for s in theory.sentences):
        return _finish("false", stats, start)
    ok, witness = is_model(theory, I, mode, stats)
    if ok:
        return _finish("true", stats, start, I, witness)
    return _finish("false", stats, start)


def model_expand(theory, I: PartialStructure, mode: str = "lazy") -> InferenceResult:
    """First model more precise than ``I``, or ``unsat``."""
    start = time.perf_counter()
    stats = _new_stats()
    for M, z in models(theory, I, mode, stats):
        return _finish("model", stats, start, M, z)
    return _finish("unsat", stats, start)


def check_endogenous_input(theory, I: PartialStructure):
    theory = _as_theory(theory)
    I = with_vocabulary(I, theory)
    endo = compile_theory(theory).endogenous
    if not I.domain.is_two_valued:
        raise ValueError("endogenous model expansion needs a two-valued domain")
    dom = sorted(I.domain.ct)
    for p, s in I.preds.items():
        if p in endo:
            full = frozenset(product(dom, repeat=I.arity(p)))
            if s.ct or s.pt != full:
                raise ValueError(f"endogenous predicate {p} must be completely unknown")
        elif not s.is_two_valued:
            raise ValueError(f"exogenous predicate {p} must be two-valued")
    return theory, I


def endogenous_expand(theory, I: PartialStructure, mode: str = "lazy") -> InferenceResult:
    """Model expansion from a structure that fixes every exogenous symbol
    and leaves the endogenous ones unknown."""
    start = time.perf_counter()
    theory, I = check_endogenous_input(theory, I)
    stats = _new_stats()
    for M, z in models(theory, I, mode, stats, complete_exogenous=False):
        return _finish("model", stats, start, M, z)
    return _finish("unsat", stats, start)


def fast_total_expand(theory, I: PartialStructure) -> InferenceResult:
    """One fixpoint run under the canonical choice function (every Or takes
    its first branch).

    Meant for theories without Sel/New that the caller knows to be total.
    If the run is not two-valued (or violates an FO sentence) the search
    falls back to endogenous model expansion; ``stats["fallback"]`` and
    ``stats["totality_failed"]`` report what happened.
    """
    start = time.perf_counter()
    theory, I = check_endogenous_input(theory, I)
    if any(isinstance(o.node, (CSel, CNew)) for o in iter_occurrences(theory.causal)):
        raise ValueError("the fast path rejects theories with Sel or New expressions")
    compiled = compile_theory(theory)
    z = trivial_chfun(sorted(I.domain.ct))
    res = _run(compiled, I, z)
    stats = _new_stats()
    stats["chfuns_examined"] = 1
    stats["operator_applications"] = res.operator_applications
    stats["max_ratio"] = res.operator_applications / res.bound
    stats["fallback"] = False
    stats["totality_failed"] = not res.is_two_valued
    if res.is_two_valued:
        arities = dict(theory.vocabulary.predicates)
        M = layers_to_structure(compiled, I, res.lower, res.upper, arities)
        if all(eval_formula(s, M) == T for s in theory.sentences):
            return _finish("model", stats, start, M, z)
    stats["fallback"] = True
    fb = endogenous_expand(theory, I)
    for k in ("chfuns_examined", "operator_applications"):
        stats[k] += fb.stats[k]
    stats["max_ratio"] = max(stats["max_ratio"], fb.stats["max_ratio"])
    return _finish(fb.verdict, stats, start, fb.model, fb.witness)


def fresh_elements(taken, k: int) -> list:
    out, i = [], 1
    while len(out) < k:
        name = f"_new{i}"
        if name not in taken:
            out.append(name)
        i += 1
    return out


def bounded_query(theory, I: PartialStructure, atom: str, budget: int,
                  mode: str = "lazy") -> InferenceResult:
    """Is there a model that creates at most ``budget`` fresh elements,
    keeps the initial elements of ``I``, and makes ``atom`` true?

    For j = 0..budget the universe is extended by j fresh elements on which
    every exogenous symbol is false; the choice function must create
    exactly those.  ``unknown-at-budget`` means no such model exists within
    the budget (it does not mean that none exists).
    """
    start = time.perf_counter()
    if budget < 0:
        raise ValueError("budget must be non-negative")
    theory, I = check_endogenous_input(theory, I)
    if theory.vocabulary.predicates.get(atom, 0) != 0 or atom not in theory.vocabulary.predicates:
        raise ValueError(f"{atom} is not a propositional symbol of the theory")
    compiled = compile_theory(theory)
    stats = _new_stats()
    base = sorted(I.domain.ct)
    arities = dict(theory.vocabulary.predicates)
    for j in range(budget + 1):
        fresh = fresh_elements(set(I.universe), j)
        dom = tuple(sorted(base + fresh))
        preds = {p: (s if p not in compiled.endogenous else PartialSet())
                 for p, s in I.preds.items()}
        ctx = PartialStructure(dom, PartialSet.exact(dom), preds, I.consts, {}, arities)
        for out in explore(compiled, ctx, mode, require_full_domain=True, stats=stats,
                           created=frozenset(fresh)):
            r = out.result
            if not (r.is_two_valued and r.succeeds):
                continue
            M = layers_to_structure(compiled, ctx, r.lower, r.upper, arities)
            if M.value(atom, ()) != T:
                continue
            if any(eval_formula(s, M) != T for s in theory.sentences):
                continue
            stats["fresh_elements"] = j
            return _finish("true", stats, start, M, out.chfun)
    stats["fresh_elements"] = budget
    return _finish("unknown-at-budget", stats, start)


def replay(theory, model: PartialStructure, witness: ChoiceFunction) -> bool:
    """Re-run the fixpoint with ``witness``: does it reproduce ``model``,
    succeed, and satisfy the FO sentences?"""
    theory = _as_theory(theory)
    if not _replay_causal(theory, model, witness):
        return False
    return all(eval_formula(s, model) == T for s in theory.sentences)
