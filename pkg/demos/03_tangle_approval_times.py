"""
Approval times on a simulated Tangle
====================================

Transactions arrive at each type's assigned rate and approve two tips picked
in proportion to their weight.  Heavier transactions get picked sooner, so the
types that carry harder proof of work wait less for their first approval.
"""

import numpy as np

from tanglepap import SimConfig, fixed_linear_scheme, run, solve_mechanism, reference_config

cfg = reference_config(100)
mechanism = solve_mechanism(cfg).assignment
baseline = fixed_linear_scheme(cfg, slope=1.0, intercept=0.0)

###############################################################################
# Mean approval time per type over 20 seeds, 2000 steps each.


def approval_times(assignment, seeds=range(20)):
    out = []
    for seed in seeds:
        m = run(SimConfig(cfg, assignment, horizon=2000, seed=seed))
        out.append([t.mean_approval_time for t in m.per_type])
    return np.array(out, dtype=float)


for name, a in (("mechanism", mechanism), ("linear baseline", baseline)):
    times = approval_times(a)
    print(f"{name:>16}: d={a.d} w={tuple(round(v, 2) for v in a.w)}")
    print(f"{'':>16}  mean approval time per type {times.mean(axis=0).round(3)}")

###############################################################################
# One run in detail, including transactions still waiting at the horizon.

m = run(SimConfig(cfg, mechanism, horizon=2000, seed=7))
for i, t in enumerate(m.per_type):
    print(f"type {i + 1}: created {t.created}, approved {t.approved}, "
          f"still tips {t.unapproved}, mean wait {t.mean_approval_time:.3f}")
print("tips at the horizon:", m.final_tip_count)
