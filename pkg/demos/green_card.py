"""Model expansion on the green-card lottery: find who ends up with
permanent residence, and show the choice function behind it."""

from clog.corpus import load_structure, load_theory
from clog.infer import models, replay
from clog.parser import print_structure

t = load_theory("green_card")
I = load_structure("green_card", t.vocabulary)
for k, (M, z) in enumerate(models(t, I), 1):
    print(f"--- model {k} (replays: {replay(t, M, z)})")
    print(print_structure(M))
    print("choices:", z.to_json())
