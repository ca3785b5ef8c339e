"""One run of the edge-weighted matcher on a small random graph.

Prints each round's decision alongside the running surrogate value and
dual objective, then confirms the invariants and compares the realized
weight with the offline optimum.
"""
from ocsmatch.ocs import SelectorKind
from ocsmatch.oracle import exact_algorithm_value, offline_optimum
from ocsmatch.primal_dual import check_invariants
from ocsmatch.workbench import random_bipartite, run_instance

inst = random_bipartite(4, 6, max_weight=10.0, density=0.7, seed=2)
for j, arrival in enumerate(inst.arrivals):
    print(f"online {j}: " + ", ".join(f"{i}:{w:.2f}" for i, w in arrival))

eng = run_instance(inst, "edge_weighted", SelectorKind.improved(), seed=1)
print()
for rec in eng.transcript:
    pair = f"({rec.i1},{rec.i2})" if rec.type == "randomized" else str(rec.i1 if rec.i1 is not None else "-")
    print(f"round {rec.round}: {rec.type:13s} {pair:7s} beta={rec.beta:7.4f}  pbar={rec.pbar:8.4f}  dual={rec.dual:8.4f}")

print("\ninvariants ok:", check_invariants(eng).ok)
opt = offline_optimum(inst)
print(f"this run: {eng.algorithm_value():.4f}  surrogate: {eng.surrogate_primal():.4f}  optimum: {opt:.4f}")
if len(eng.pairs()) <= 8:
    exact = exact_algorithm_value(inst, "edge_weighted", SelectorKind.improved())
    print(f"exact expectation: {exact:.4f}  ratio {exact / opt:.4f}")
