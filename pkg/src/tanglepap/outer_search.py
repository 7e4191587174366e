"""Outer enumeration over difficulty vectors.

Truth-telling under decreasing differences forces optimal difficulties to be
nondecreasing in computing power, so only nondecreasing vectors need an
inner solve.  Exhaustive mode checks every vector in ``{1..m}^n`` and exists
to verify that pruning loses nothing.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterator

from .inner_solver import solve_weights, verify_assignment
from .mechanism import Assignment, MechanismConfig, Objective, objective

__all__ = [
    "InfeasibleMechanismError",
    "MechanismSolution",
    "EXHAUSTIVE_LIMIT",
    "enumerate_monotone",
    "count_monotone",
    "solve_mechanism",
    "wot_slopes",
]

EXHAUSTIVE_LIMIT = 10**6


class InfeasibleMechanismError(RuntimeError):
    """No difficulty vector admits feasible weights."""

    def __init__(self, message: str, witness=None):
        super().__init__(message)
        self.witness = witness


@dataclass(frozen=True)
class MechanismSolution:
    assignment: Assignment
    objective_value: float
    candidates_examined: int
    candidates_feasible: int
    mode: str

    def __post_init__(self):
        d, w = self.assignment.d, self.assignment.w
        if any(b < a for a, b in zip(d, d[1:])):
            raise AssertionError(f"optimal difficulties not monotone: {d}")
        if any(b < a - 1e-9 for a, b in zip(w, w[1:])):
            raise AssertionError(f"optimal weights not monotone: {w}")

    @property
    def d(self) -> tuple[int, ...]:
        return self.assignment.d

    @property
    def w(self) -> tuple[float, ...]:
        return self.assignment.w


def enumerate_monotone(n: int, m: int) -> Iterator[tuple[int, ...]]:
    """Nondecreasing vectors in ``{1..m}^n`` in lexicographic order."""
    if n < 1 or m < 1:
        raise ValueError("n and m must be positive")
    return itertools.combinations_with_replacement(range(1, m + 1), n)


def count_monotone(n: int, m: int) -> int:
    if n < 1 or m < 1:
        raise ValueError("n and m must be positive")
    return math.comb(n + m - 1, n)


def solve_mechanism(
    config: MechanismConfig,
    mode: str = "pruned",
    objective_fn: Objective = objective,
) -> MechanismSolution:
    """Globally optimal ``(d, w)`` for ``config``.

    ``objective_fn`` must be nondecreasing in every weight for the minimal
    inner weights to stay optimal.  Equal objectives resolve to the
    lexicographically smallest ``d``; the inner weights are unique.
    """
    n, m = config.n, config.m
    if mode == "pruned":
        candidates = enumerate_monotone(n, m)
    elif mode == "exhaustive":
        if m**n > EXHAUSTIVE_LIMIT:
            raise ValueError(f"exhaustive search over {m}^{n} vectors exceeds {EXHAUSTIVE_LIMIT}")
        candidates = itertools.product(range(1, m + 1), repeat=n)
    else:
        raise ValueError(f"unknown search mode {mode!r}")

    examined = feasible = 0
    best = None
    nearest = None
    for d in candidates:
        examined += 1
        res = solve_weights(config, d)
        if not res.feasible:
            if nearest is None or res.excess < nearest[0]:
                nearest = (res.excess, d, res.reason)
            continue
        feasible += 1
        val = float(objective_fn(config, d, res.w))
        if best is None or val < best[0]:
            best = (val, d, res.w)

    if best is None:
        excess, d, reason = nearest
        raise InfeasibleMechanismError(
            f"no feasible mechanism among {examined} difficulty vectors; "
            f"nearest is d={list(d)}: {reason}",
            witness=nearest,
        )
    val, d, w = best
    assignment = Assignment(d, w, "mechanism")
    report = verify_assignment(config, assignment)
    if not report.ok:
        raise AssertionError(f"solver produced an invalid mechanism: {report.failures}")
    return MechanismSolution(assignment, val, examined, feasible, mode)


def wot_slopes(d, w) -> list[float | None]:
    """Consecutive ``(w[i+1]-w[i]) / (d[i+1]-d[i])``; ``None`` where ``d`` repeats."""
    out = []
    for k in range(len(d) - 1):
        dd = d[k + 1] - d[k]
        out.append((w[k + 1] - w[k]) / dd if dd else None)
    return out
