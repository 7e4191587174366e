"""Weight assignment for a fixed difficulty vector.

Once ``d`` is fixed every truth-telling row involves exactly two weights, so
the feasible set is a system of difference constraints with ``w[0]`` pinned
to 1.  The principal's objective increases in every weight, so the optimum is
the componentwise-minimal feasible point: the longest-path fixpoint reached
by Bellman-Ford style relaxation from the static lower bounds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .mechanism import (
    FEAS_TOL,
    Assignment,
    MechanismConfig,
    build_constraints,
    check_difficulty,
    objective,
    utility,
)

__all__ = [
    "InnerResult",
    "VerificationReport",
    "solve_weights",
    "brute_force_weights",
    "verify_assignment",
]


@dataclass(frozen=True)
class InnerResult:
    status: str
    w: tuple[float, ...] | None = None
    binding: tuple[tuple[tuple, ...], ...] = ()
    reason: str = ""
    excess: float = 0.0
    sweeps: int = 0
    history: tuple[tuple[float, ...], ...] = field(default=(), repr=False)

    @property
    def feasible(self) -> bool:
        return self.status == "feasible"


def _binding_tags(system, w) -> tuple[tuple[tuple, ...], ...]:
    slack = system.slacks(w)
    n = len(w)
    per_type: list[list[tuple]] = [[] for _ in range(n)]
    for tag, s in zip(system.tags, slack):
        if abs(s) <= FEAS_TOL:
            owner = 0 if tag[0] == "NORM" else tag[1]
            per_type[owner].append(tag)
    return tuple(tuple(t) for t in per_type)


def solve_weights(
    config: MechanismConfig, d: Sequence[int], trace: bool = False
) -> InnerResult:
    """Componentwise-minimal feasible weights for difficulty vector ``d``.

    Infeasibility is returned, never raised.  ``excess`` on an infeasible
    result measures, in weight units, how far the tightest demand overshoots
    (used to pick a nearest-to-feasible witness).  With ``trace`` the weight
    vector after every sweep is kept in ``history``.
    """
    d = check_difficulty(config, d)
    system = build_constraints(config, d)
    n, beta = config.n, config.beta

    # static lower bounds from PC and LB rows
    lb = [1.0] * n
    edges: list[tuple[int, int, float]] = []  # w[i] >= w[j] + c
    for tag, a, b in zip(system.tags, system.A, system.b):
        if tag[0] == "PC":
            i = tag[1]
            lb[i] = max(lb[i], float(b) / beta)
        elif tag[0] == "IC":
            edges.append((tag[1], tag[2], float(b) / beta))

    if lb[0] > 1.0 + FEAS_TOL:
        return InnerResult(
            "infeasible",
            reason=(
                f"PC(1) needs w(1) >= {lb[0]:.6g} but normalisation fixes w(1) = 1"
            ),
            excess=lb[0] - 1.0,
        )

    w = list(lb)
    w[0] = 1.0
    pred = [-1] * n
    history = [tuple(w)] if trace else []
    sweeps = 0
    changed_node = -1
    for sweep in range(n):
        changed = False
        for i, j, c in edges:
            if i == 0:
                continue
            cand = w[j] + c
            if cand > w[i]:
                w[i] = cand
                pred[i] = j
                changed = True
                changed_node = i
        if not changed:
            break
        if sweep < n - 1:
            sweeps += 1
            if trace:
                history.append(tuple(w))
    else:
        # still relaxing after n-1 sweeps: positive cycle among free weights
        cycle = _find_cycle(pred, changed_node, n)
        pairs = set(zip(cycle, cycle[1:] + cycle[:1]))
        gain = sum(c for i, j, c in edges if (i, j) in pairs)
        names = " <- ".join(str(k + 1) for k in cycle)
        return InnerResult(
            "infeasible",
            reason=f"truth-telling rows form a cycle with positive gain {gain:.6g} over types {names}",
            excess=gain if gain > 0 else math.inf,
            sweeps=sweeps,
            history=tuple(history),
        )

    # rows pointing into the pinned node act as upper bounds on other weights
    worst, worst_edge = 0.0, None
    for i, j, c in edges:
        if i != 0:
            continue
        over = w[j] + c - 1.0
        if over > worst:
            worst, worst_edge = over, (j, c)
    if worst > FEAS_TOL:
        j, c = worst_edge
        cap = 1.0 - c
        return InnerResult(
            "infeasible",
            reason=(
                f"IC(1,{j + 1}) caps w({j + 1}) at {cap:.6g} "
                f"while its lower bounds require w({j + 1}) >= {w[j]:.6g}"
            ),
            excess=worst,
            sweeps=sweeps,
            history=tuple(history),
        )

    wt = tuple(w)
    return InnerResult(
        "feasible",
        w=wt,
        binding=_binding_tags(system, wt),
        sweeps=sweeps,
        history=tuple(history),
    )


def _find_cycle(pred: list[int], start: int, n: int) -> list[int]:
    v = start
    for _ in range(n):
        if pred[v] < 0:
            return [start]
        v = pred[v]
    cycle = [v]
    u = pred[v]
    while u != v and u >= 0:
        cycle.append(u)
        u = pred[u]
    # consecutive entries (i, pred[i]) are the relaxed rows w[i] >= w[pred[i]] + c
    return cycle


# ---------------------------------------------------------------------------
# grid oracle


def brute_force_weights(
    config: MechanismConfig,
    d: Sequence[int],
    grid_step: float = 1e-3,
    w_max: float = 4.0,
    chunk: int = 1 << 20,
) -> InnerResult:
    """Exhaustive grid search over weights, checking utilities directly.

    Scans ``w[i]`` in ``{1, 1+step, ..., w_max}`` for every type but the
    first (pinned at 1).  A grid point is accepted when truth-telling and
    participation hold to within ``grid_step`` weight units.  Among accepted
    points the one with the smallest objective wins, then the smallest total
    weight.  Meant for two or three types.
    """
    if not grid_step > 0:
        raise ValueError("grid_step must be positive")
    if not w_max >= 1:
        raise ValueError("w_max must be >= 1")
    d = check_difficulty(config, d)
    n, beta, xs, g = config.n, config.beta, config.xs, config.cost_model
    tol = beta * grid_step  # relaxation in utility units
    k_max = int(math.floor((w_max - 1.0) / grid_step + 1e-9))
    levels = 1.0 + grid_step * np.arange(k_max + 1)

    def feasible_mask(W: np.ndarray) -> np.ndarray:
        # W has shape (n, K)
        ok = np.ones(W.shape[1], dtype=bool)
        for i in range(n):
            own = utility(W[i], d[i], xs[i], beta, g)
            ok &= own >= config.u0 - tol
            for j in range(n):
                if j != i:
                    ok &= own >= utility(W[j], d[j], xs[i], beta, g) - tol
        return ok

    if n == 1:
        W = np.ones((1, 1))
        if feasible_mask(W)[0]:
            return InnerResult("feasible", w=(1.0,))
        return InnerResult("infeasible", reason="participation fails at w = [1]")

    free = n - 1
    total = (k_max + 1) ** free
    best = None  # (objective, sum, flat index)
    for start in range(0, total, chunk):
        idx = np.arange(start, min(total, start + chunk))
        digits = np.unravel_index(idx, (k_max + 1,) * free)
        W = np.empty((n, idx.size))
        W[0] = 1.0
        for k, dig in enumerate(digits):
            W[k + 1] = levels[dig]
        mask = feasible_mask(W)
        if not mask.any():
            continue
        Wf = W[:, mask]
        obj = np.asarray(objective(config, d, Wf), dtype=float) * np.ones(Wf.shape[1])
        ssum = Wf.sum(axis=0)
        order = np.lexsort((ssum, obj))
        k = order[0]
        cand = (float(obj[k]), float(ssum[k]), tuple(float(v) for v in Wf[:, k]))
        if best is None or cand[:2] < best[:2]:
            best = cand
    if best is None:
        return InnerResult(
            "infeasible",
            reason=(
                f"no grid point feasible at step {grid_step:g} up to w_max {w_max:g} "
                "(inconclusive if the grid is too coarse)"
            ),
        )
    return InnerResult("feasible", w=best[2])


# ---------------------------------------------------------------------------
# verification


@dataclass(frozen=True)
class VerificationReport:
    truth_telling: tuple[bool, ...]
    participation: tuple[bool, ...]
    min_slack: float
    failures: tuple[str, ...]

    @property
    def ok(self) -> bool:
        return not self.failures


def verify_assignment(
    config: MechanismConfig, a: Assignment, tol: float = FEAS_TOL
) -> VerificationReport:
    """Check truth-telling and participation of an assignment.

    Utilities are compared directly.  ``min_slack`` is the smallest slack
    over the constraint rows in weight units; the normalisation row is
    skipped for baseline assignments.
    """
    d = check_difficulty(config, a.d)
    n, beta, xs, g = config.n, config.beta, config.xs, config.cost_model
    w = a.w
    tt, pc, failures = [], [], []
    for i in range(n):
        own = utility(w[i], d[i], xs[i], beta, g)
        honest = True
        for j in range(n):
            if j == i:
                continue
            other = utility(w[j], d[j], xs[i], beta, g)
            if own < other - tol:
                honest = False
                failures.append(
                    f"type {i + 1} gains {other - own:.6g} by reporting type {j + 1}"
                )
        tt.append(honest)
        part = own >= config.u0 - tol
        pc.append(part)
        if not part:
            failures.append(f"type {i + 1} utility {own:.6g} below u0 = {config.u0:g}")
    system = build_constraints(config, d)
    slack = system.slacks(w, scaled=True)
    if a.provenance == "baseline":
        slack = slack[~system.is_equality]
    elif slack[system.is_equality].min() < -tol:
        failures.append(f"normalisation violated: w(1) = {w[0]!r}")
    return VerificationReport(tuple(tt), tuple(pc), float(slack.min()), tuple(failures))
