"""Discrete-time Tangle simulation under a difficulty/weight assignment.

Each step every agent type emits transactions at its assigned rate.  Every
new transaction approves two tips drawn independently, with repetition,
with probability proportional to tip weight.  A transaction created at step
``t`` becomes a tip candidate at ``t + 1``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .mechanism import Assignment, ConfigError, MechanismConfig, tx_rate

__all__ = [
    "GENESIS",
    "Transaction",
    "TangleState",
    "SimConfig",
    "TypeMetrics",
    "SimMetrics",
    "arrival_means",
    "arrivals_for_step",
    "accept_reject",
    "select_tips",
    "step",
    "simulate",
    "run",
    "approval_stats",
]

GENESIS = -1  # owner_type of the genesis transaction


@dataclass(frozen=True)
class Transaction:
    id: int
    owner_type: int
    weight: float
    created_at: int
    approved_at: int | None = None
    approves: tuple[int, int] | None = None


class TangleState:
    """Column store of transactions plus the current tip and pending sets.

    After step ``t`` completes, ``tips`` holds the transactions created at or
    before ``t - 1`` that have no approver, and ``pending`` holds those
    created at ``t``.  ``approved_at`` is -1 until a transaction's first
    approval; the genesis approves nothing (-1, -1).
    """

    def __init__(self, genesis_weight: float = 1.0, capacity: int = 1024):
        self.owner = np.empty(capacity, dtype=np.int64)
        self.weight = np.empty(capacity, dtype=float)
        self.created_at = np.empty(capacity, dtype=np.int64)
        self.approved_at = np.empty(capacity, dtype=np.int64)
        self.approves = np.empty((capacity, 2), dtype=np.int64)
        self.size = 0
        self.clock = 0
        self.tips = np.empty(0, dtype=np.int64)
        self.pending = self.append(
            np.array([GENESIS]), np.array([genesis_weight]), 0, np.array([[-1, -1]])
        )

    @classmethod
    def genesis(cls, weight: float = 1.0) -> "TangleState":
        return cls(weight)

    def __len__(self) -> int:
        return self.size

    def _grow(self, need: int) -> None:
        cap = len(self.owner)
        if need <= cap:
            return
        while cap < need:
            cap *= 2
        for name in ("owner", "weight", "created_at", "approved_at", "approves"):
            old = getattr(self, name)
            new = np.empty((cap,) + old.shape[1:], dtype=old.dtype)
            new[: self.size] = old[: self.size]
            setattr(self, name, new)

    def append(self, owners, weights, t: int, approves) -> np.ndarray:
        k = len(owners)
        self._grow(self.size + k)
        sl = slice(self.size, self.size + k)
        self.owner[sl] = owners
        self.weight[sl] = weights
        self.created_at[sl] = t
        self.approved_at[sl] = -1
        self.approves[sl] = approves
        ids = np.arange(self.size, self.size + k, dtype=np.int64)
        self.size += k
        return ids

    def transaction(self, i: int) -> Transaction:
        appr = int(self.approved_at[i])
        a, b = (int(v) for v in self.approves[i])
        return Transaction(
            int(i),
            int(self.owner[i]),
            float(self.weight[i]),
            int(self.created_at[i]),
            None if appr < 0 else appr,
            None if a < 0 else (a, b),
        )

    @property
    def transactions(self) -> list[Transaction]:
        return [self.transaction(i) for i in range(self.size)]

    def edges(self) -> np.ndarray:
        """``(source, target)`` approval edges, two per non-genesis transaction."""
        src = np.repeat(np.arange(1, self.size), 2)
        return np.column_stack([src, self.approves[1 : self.size].ravel()])


@dataclass(frozen=True)
class SimConfig:
    config: MechanismConfig
    assignment: Assignment
    horizon: int = 2000
    seed: int = 42
    arrival_model: str = "poisson"

    def __post_init__(self):
        if int(self.horizon) != self.horizon or self.horizon < 1:
            raise ConfigError(f"SimConfig: horizon must be a positive integer, got {self.horizon!r}")
        if self.arrival_model not in ("poisson", "deterministic"):
            raise ConfigError(f"SimConfig: unknown arrival model {self.arrival_model!r}")
        if len(self.assignment.d) != self.config.n:
            raise ConfigError("SimConfig: assignment does not match the agent type count")


@dataclass(frozen=True)
class TypeMetrics:
    created: int
    approved: int
    unapproved: int
    mean_approval_time: float | None


@dataclass(frozen=True)
class SimMetrics:
    per_type: tuple[TypeMetrics, ...]
    genesis: TypeMetrics
    final_tip_count: int
    total_transactions: int


# ---------------------------------------------------------------------------
# arrivals and tip selection


def arrival_means(config: MechanismConfig, assignment: Assignment) -> np.ndarray:
    """Expected arrivals per step for each type: ``N * p(x) * rate(x, d(x))``."""
    return np.array(
        [
            config.N * p * tx_rate(x, d, config.cost_model)
            for x, p, d in zip(config.xs, config.ps, assignment.d)
        ]
    )


def arrivals_for_step(
    config: MechanismConfig,
    assignment: Assignment,
    rng: np.random.Generator,
    model: str = "poisson",
) -> np.ndarray:
    means = arrival_means(config, assignment)
    if model == "poisson":
        return rng.poisson(means)
    if model == "deterministic":
        return np.rint(means).astype(np.int64)  # round half to even
    raise ConfigError(f"unknown arrival model {model!r}")


def accept_reject(weights: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """``k`` independent indices drawn with probability proportional to ``weights``.

    Proposes a uniform index and accepts it with probability
    ``weight / max(weights)``; rejected slots are redrawn.
    """
    weights = np.asarray(weights, dtype=float)
    if weights.size == 0:
        raise ValueError("cannot sample from an empty tip set")
    out = np.empty(k, dtype=np.int64)
    todo = np.arange(k)
    wmax = weights.max()
    while todo.size:
        cand = rng.integers(0, weights.size, size=todo.size)
        keep = rng.random(todo.size) * wmax < weights[cand]
        out[todo[keep]] = cand[keep]
        todo = todo[~keep]
    return out


def select_tips(
    tip_ids: Sequence[int], weights: Sequence[float], rng: np.random.Generator
) -> tuple[int, int]:
    a, b = accept_reject(np.asarray(weights), 2, rng)
    return int(tip_ids[a]), int(tip_ids[b])


# ---------------------------------------------------------------------------
# dynamics


def step(state: TangleState, sim: SimConfig, rng: np.random.Generator) -> TangleState:
    """Advance ``state`` by one time step in place and return it.

    Last step's arrivals become tips first.  All arrivals of this step then
    sample from that tip set; tips that gained an approver leave it at the
    end of the step.  Arrivals are created in type order.
    """
    t = state.clock + 1
    state.tips = np.concatenate([state.tips, state.pending])
    state.pending = np.empty(0, dtype=np.int64)
    counts = arrivals_for_step(sim.config, sim.assignment, rng, sim.arrival_model)
    k = int(counts.sum())
    if k:
        tips = state.tips
        picks = tips[accept_reject(state.weight[tips], 2 * k, rng)].reshape(k, 2)
        owners = np.repeat(np.arange(len(counts)), counts)
        weights = np.asarray(sim.assignment.w, dtype=float)[owners]
        state.pending = state.append(owners, weights, t, picks)
        targets = np.unique(picks)
        fresh = targets[state.approved_at[targets] < 0]
        state.approved_at[fresh] = t
        state.tips = tips[~np.isin(tips, targets)]
    state.clock = t
    return state


def simulate(sim: SimConfig) -> TangleState:
    rng = np.random.default_rng(sim.seed)
    state = TangleState.genesis()
    for _ in range(sim.horizon):
        step(state, sim, rng)
    return state


def approval_stats(state: TangleState, n_types: int | None = None) -> dict[int, TypeMetrics]:
    """Per-owner approval statistics; the genesis appears under ``GENESIS``.

    Means are over approved transactions only and are ``None`` when nothing
    of that owner was approved.  Unapproved transactions are counted, never
    dropped.
    """
    size = state.size
    owner = state.owner[:size] + 1  # shift GENESIS to bin 0
    done = state.approved_at[:size] >= 0
    delay = (state.approved_at[:size] - state.created_at[:size])[done]
    bins = max(int(owner.max()) + 1, (n_types or 0) + 1)
    created = np.bincount(owner, minlength=bins)
    approved = np.bincount(owner[done], minlength=bins)
    total = np.bincount(owner[done], weights=delay, minlength=bins)
    out = {}
    for b in range(bins):
        mean = float(total[b] / approved[b]) if approved[b] else None
        out[b - 1] = TypeMetrics(int(created[b]), int(approved[b]), int(created[b] - approved[b]), mean)
    return out


def run(sim: SimConfig) -> SimMetrics:
    state = simulate(sim)
    stats = approval_stats(state, sim.config.n)
    return SimMetrics(
        per_type=tuple(stats[i] for i in range(sim.config.n)),
        genesis=stats[GENESIS],
        final_tip_count=len(state.tips) + len(state.pending),
        total_transactions=state.size,
    )
