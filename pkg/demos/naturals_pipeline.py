"""Walk the natural-numbers theory through every normal form, export it as
an inductive definition, and confirm it has no model on small domains."""

from clog.corpus import load_theory, universe
from clog.foid import export_foid
from clog.infer import endogenous_expand
from clog.parser import print_theory
from clog.semantics import unknown_structure
from clog.transform import pipeline

t = load_theory("naturals")
p = pipeline(t)
for stage, theory in p.stages.items():
    print(f"--- {stage}")
    print(print_theory(theory))
print("--- introduced:", ", ".join(sorted(p.introduced)))
print("--- FO(ID) export")
print(export_foid(p.theory, p.introduced))

for n in range(1, 5):
    I = unknown_structure(universe(n), t.vocabulary.predicates)
    r = endogenous_expand(t, I, "exhaustive")
    print(f"|D| = {n}: {r.verdict} ({r.stats['chfuns_examined']} choice functions)")
