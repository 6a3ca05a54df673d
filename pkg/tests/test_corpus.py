import pytest
from hypothesis import given

from clog.ast import (
    CNew, COr, CSel, binder, cee_free_vars, formula_vars, height,
    iter_occurrences,
)
from clog.corpus import (
    STRUCTURES, THEORIES, count_structures, hand_written, load_structure,
    load_theory, random_cases, random_theory,
)
from clog.parser import parse_theory, print_theory

from strategies import seeds


@pytest.mark.parametrize("name", THEORIES)
def test_theory_files_parse(name):
    t = load_theory(name)
    assert parse_theory(print_theory(t)) == t


@pytest.mark.parametrize("name", STRUCTURES)
def test_structure_files_parse(name):
    theory = "green_card" if name == "green_card" else "sat"
    I = load_structure(name, load_theory(theory).vocabulary)
    assert I.domain.ct <= set(I.universe) and I.domain.ct


def _variables(theory):
    seen = set()
    for o in iter_occurrences(theory.causal):
        if binder(o.node):
            seen.add(binder(o.node))
        for f in (getattr(o.node, "cond", None), getattr(o.node, "qual", None)):
            if f is not None:
                seen |= formula_vars(f)
    return seen


@given(seeds)
def test_random_theory_shape(seed):
    t = random_theory(seed)
    assert height(t.causal) <= 3
    assert len(t.vocabulary.predicates) <= 2
    assert max(t.vocabulary.predicates.values()) <= 2
    nondet = [o for o in iter_occurrences(t.causal) if isinstance(o.node, (COr, CSel, CNew))]
    assert len(nondet) <= 2
    assert _variables(t) <= {"x", "y"}
    assert not cee_free_vars(t.causal)


@given(seeds)
def test_random_theory_is_reproducible(seed):
    assert random_theory(seed) == random_theory(seed)


def test_random_theories_vary():
    assert len({print_theory(c.theory) for c in random_cases(50)}) > 30


def test_random_corpus_mixes_kinds():
    cases = random_cases(200)
    assert sum(c.deterministic for c in cases) >= 20
    assert sum(not c.deterministic for c in cases) >= 20
    assert any(c.negation_free and not c.deterministic for c in cases)


def test_case_flags():
    by = {c.name: c for c in hand_written()}
    assert by["reach"].deterministic and by["reach"].negation_free
    assert not by["loop_negation"].negation_free
    assert not by["naturals"].deterministic


def test_count_structures():
    assert count_structures(parse_theory("vocabulary { P/1. Q/0. } clog { Q. }"), 2) == 8
