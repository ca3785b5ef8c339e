"""Triangular graphs, where greedy choices go wrong early.

Candidates are taken from the high end of the id range, which leaves each
online vertex's own partner for last.  Fully correlated halves give 5/9 on
the nine-vertex triangle; fresh coins drift to one half on larger
triangles; the sparse random variant shows how much real selectors recover.
"""
import sys

from ocsmatch.workbench import run_experiment

trials = int(sys.argv[1]) if len(sys.argv) > 1 else 50

res = run_experiment("nine", engine="perfect_correlation")
print(f"nine-vertex triangle, perfect correlation: {res.values[0]:g}/{res.opt:g} = {res.mean_ratio:.4f}")

for n in (27, 243, 2187):
    res = run_experiment(f"ut:{n}", engine="independent_greedy", trials=trials, master_seed=1)
    print(f"triangle n={n:5d}, fresh coins: {res.mean_ratio:.4f} +- {res.std_error:.4f}")

for selector in ("independent", "warmup", "improved"):
    engine = "independent_greedy" if selector == "independent" else "unweighted"
    res = run_experiment("er_ut:8192:0.015625:0", engine=engine, selector=selector if engine == "unweighted" else None,
                         trials=trials, master_seed=1)
    print(f"sparse random triangle n=8192, {selector:11s}: {res.mean_ratio:.4f} +- {res.std_error:.4f}")
