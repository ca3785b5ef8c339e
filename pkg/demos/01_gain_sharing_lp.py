"""Where the competitive ratios come from.

Solves the gain-sharing LP for both correlation strengths, sweeps the
deterministic multiplier kappa, then checks the stored tables against the
constraints they are supposed to satisfy.
"""
from ocsmatch.lp import build_edge_weighted_lp, build_unweighted_lp, kappa_sweep, solve, verify_table
from ocsmatch.recurrences import RecurrenceTable
from ocsmatch.tables import GAMMA_IMPROVED, GAMMA_WARMUP, PUBLISHED

for label, gamma in (("warmup selector", GAMMA_WARMUP), ("improved selector", GAMMA_IMPROVED)):
    sol = solve(build_edge_weighted_lp(gamma, 1.5, 8))
    print(f"{label:18s} gamma={gamma:.6f}  ratio={sol.objective:.8f}  ({sol.iterations} pivots)")

sol = solve(build_unweighted_lp(RecurrenceTable.improved(k_max=9), 8))
print(f"{'unweighted':18s} ratio={sol.objective:.8f}")

print("\nkappa sweep at gamma = 1/16:")
for kappa, ratio in kappa_sweep(GAMMA_WARMUP, 8, [1.0, 1.25, 1.5, 1.75, 1 + 15 / 16, 2.0]):
    print(f"  kappa={kappa:<7.4g} ratio={ratio:.6f}")

print("\nstored tables, checked against their own LP:")
for name, table in PUBLISHED.items():
    rep = verify_table(table)
    print(f"  {name}: worst constraint {rep.worst} off by {rep.max_violation:.1e} -> {'ok' if rep.passed else 'BAD'}")
