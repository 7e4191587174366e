"""
Solving the reference mechanism
===============================

Three agent types with computing power 1, 3 and 10 share a ledger.  The rate
controller assigns each type a proof-of-work difficulty and a transaction
weight so that every agent prefers its own bundle and still participates.
"""

from tanglepap import solve_mechanism, reference_config, tx_rate, verify_assignment

###############################################################################
# The bundled configuration: uniform type fractions, difficulties 1..12,
# alpha = 0.1, beta = 80, u0 = 10.

cfg = reference_config(N=100)
print(cfg)

###############################################################################
# Solve for a growing population.  Difficulty and weight rise with the type
# and with N; the weakest type keeps d = 4 and w = 1 throughout.

for N in (100, 1000, 10000, 100000):
    sol = solve_mechanism(reference_config(N))
    rates = [tx_rate(x, d) for x, d in zip(cfg.xs, sol.d)]
    print(f"N={N:>6}  d={sol.d}  w={tuple(round(v, 3) for v in sol.w)}  "
          f"per-agent rates={[f'{r:.2e}' for r in rates]}  objective={sol.objective_value:.4f}")

###############################################################################
# Nobody gains by misreporting and every type clears the reservation utility.

sol = solve_mechanism(reference_config(100))
report = verify_assignment(reference_config(100), sol.assignment)
print("truth-telling:", report.truth_telling, "participation:", report.participation)
print("smallest constraint slack (weight units):", report.min_slack)
