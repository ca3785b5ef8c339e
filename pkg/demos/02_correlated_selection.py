"""How much does correlation help an element that keeps showing up?

An element meets k fresh partners in a row.  With independent coins it is
missed with probability 2^-k; the two correlated selectors do better, and
their exact miss probabilities sit under the recurrence bounds.
"""
from ocsmatch.ocs import SelectorKind
from ocsmatch.oracle import exact_never_selected
from ocsmatch.recurrences import eval_f, eval_g

kinds = [SelectorKind.independent(), SelectorKind.warmup(), SelectorKind.improved()]
p = kinds[2].p
print(f"{'k':>2} " + " ".join(f"{str(k):>24s}" for k in kinds) + f" {'bound f':>10s} {'bound g':>10s}")
for k in range(1, 5):
    # each partner is seen once just before it meets element 0
    pairs = []
    for t in range(k):
        pairs += [(100 + t, 10 + t), (0, 10 + t)]
    idx = [j for j, pr in enumerate(pairs) if 0 in pr]
    row = [exact_never_selected(kind, pairs, 0, idx) for kind in kinds]
    print(f"{k:>2} " + " ".join(f"{v:24.6f}" for v in row)
          + f" {2**-k * eval_f(k):10.6f} {2**-k * eval_g(k, p):10.6f}")
