"""
Mechanism weights versus a fixed linear weight rule
===================================================

Under a fixed rule w = intercept + slope * d each type simply picks its
favourite difficulty.  The mechanism instead makes weight grow faster than
linearly in difficulty, which is what pushes strong agents to hard puzzles.
"""

from tanglepap import fixed_linear_scheme, solve_mechanism, reference_config, wot_slopes

cfg = reference_config(100000)
sol = solve_mechanism(cfg)
base = fixed_linear_scheme(cfg, slope=1.0, intercept=0.0)

print("type   x   mechanism (d, w)      linear rule (d, w)")
for i, x in enumerate(cfg.xs):
    print(f"{i + 1:>4} {x:>4g}   ({sol.d[i]:>2}, {sol.w[i]:8.3f})      ({base.d[i]:>2}, {base.w[i]:5.1f})")

###############################################################################
# Consecutive slopes of weight against difficulty are increasing: the
# mechanism's weight schedule is convex in difficulty.

print("mechanism slopes dw/dd:", [round(s, 3) for s in wot_slopes(sol.d, sol.w)])
print("linear rule slope: 1.0 everywhere")

###############################################################################
# Normalising the linear rule to the weakest type's weight puts both schemes
# on the same footing.

print("normalised linear weights:", fixed_linear_scheme(cfg, normalize=True).w)
