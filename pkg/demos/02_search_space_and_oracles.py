"""
Pruning the difficulty search and checking the inner solve
==========================================================

Only nondecreasing difficulty vectors can satisfy truth-telling, so the outer
search shrinks from m**n to C(n+m-1, n) candidates.  Each candidate needs the
smallest weights meeting the constraints, found by a difference-constraint
fixpoint and cross-checked here against a brute-force grid.
"""

import numpy as np

from tanglepap import (
    brute_force_weights,
    build_constraints,
    count_monotone,
    solve_mechanism,
    solve_weights,
    reference_config,
)

cfg = reference_config(1000)

###############################################################################
# Pruned and exhaustive searches return the same mechanism.

pruned = solve_mechanism(cfg, "pruned")
full = solve_mechanism(cfg, "exhaustive")
print(f"pruned:     {pruned.candidates_examined} candidates, {pruned.candidates_feasible} feasible")
print(f"exhaustive: {full.candidates_examined} candidates, {full.candidates_feasible} feasible")
print("same optimum:", pruned.d == full.d, pruned.objective_value == full.objective_value)
print("count_monotone(3, 12) =", count_monotone(3, 12))

###############################################################################
# The constraint rows for the optimal difficulty vector, and which of them
# pin each weight.

system = build_constraints(cfg, pruned.d)
print(system.counts())
res = solve_weights(cfg, pruned.d, trace=True)
for i, tags in enumerate(res.binding):
    print(f"type {i + 1}: w = {res.w[i]:.6f}, binding rows {tags}")
print("fixpoint sweeps:", np.array(res.history).round(4))

###############################################################################
# Non-monotone vectors are rejected with a readable reason.

for bad in ((4, 3, 9), (4, 9, 6)):
    print(bad, "->", solve_weights(cfg, bad).reason)

###############################################################################
# The grid oracle lands within a couple of grid steps of the fixpoint.

small = reference_config(100)
d = (3, 4, 6)
exact = solve_weights(small, d)
grid = brute_force_weights(small, d, grid_step=2e-3, w_max=3.0)
print("fixpoint:", np.round(exact.w, 5), " grid:", np.round(grid.w, 5))
