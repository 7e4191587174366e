"""Domain types and model functions for the transaction-rate control mechanism.

Agents of type ``x`` (computing power) receive a proof-of-work difficulty
``d(x)`` and a transaction weight ``w(x)``.  Their utility is
``beta * w - cost(d, x)`` and, with the shipped exponential cost, they emit
transactions at rate ``x * exp(-d)``.  The principal picks ``(d, w)`` to
minimise a weighted sum of the aggregate transaction rate and the weights,
subject to truth-telling and participation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "DomainError",
    "ConfigError",
    "CostModel",
    "ExpCost",
    "EXP_COST",
    "has_decreasing_differences",
    "AgentTypeSet",
    "MechanismConfig",
    "Assignment",
    "ConstraintSystem",
    "check_difficulty",
    "check_weights",
    "cost",
    "utility",
    "tx_rate",
    "build_constraints",
    "objective",
    "fixed_linear_scheme",
    "FEAS_TOL",
]

FEAS_TOL = 1e-9


class DomainError(ValueError):
    """Model function evaluated outside its domain."""


class ConfigError(ValueError):
    """A configuration or domain value violates an invariant."""


# ---------------------------------------------------------------------------
# cost models


class CostModel:
    """Cost of meeting difficulty ``d`` with computing power ``x``.

    Subclasses implement :meth:`__call__`.  The transaction rate of an agent
    is the reciprocal of its cost.  Structural monotonicity of optimal
    mechanisms requires *decreasing differences*: the extra cost of a harder
    puzzle shrinks as ``x`` grows (see :func:`has_decreasing_differences`).
    """

    name = "abstract"

    def __call__(self, d: int, x: float) -> float:
        raise NotImplementedError

    def rate(self, x: float, d: int) -> float:
        return 1.0 / self(d, x)


class ExpCost(CostModel):
    """``exp(d) / x``: hash puzzles get exponentially harder with difficulty."""

    name = "exp"

    def __call__(self, d: int, x: float) -> float:
        _check_domain(d, x)
        return math.exp(d) / x

    def rate(self, x: float, d: int) -> float:
        _check_domain(d, x)
        return x * math.exp(-d)

    def __repr__(self) -> str:
        return "ExpCost()"


EXP_COST = ExpCost()


def _check_domain(d, x) -> None:
    if not x > 0:
        raise DomainError(f"computing power must be positive, got {x!r}")
    if d < 1:
        raise DomainError(f"difficulty level must be >= 1, got {d!r}")


def has_decreasing_differences(model: CostModel, m: int, xs: Sequence[float]) -> bool:
    """Check ``cost(d2,x1) - cost(d1,x1) > cost(d2,x2) - cost(d1,x2)``.

    Exhaustive over ``1 <= d1 < d2 <= m`` and ordered pairs ``x1 < x2`` of
    ``xs``.  Also requires cost to be strictly increasing in ``d``.
    """
    xs = sorted(xs)
    for x in xs:
        for d in range(1, m):
            if not model(d + 1, x) > model(d, x):
                return False
    for a in range(len(xs)):
        for b in range(a + 1, len(xs)):
            for d1 in range(1, m + 1):
                for d2 in range(d1 + 1, m + 1):
                    lo = model(d2, xs[a]) - model(d1, xs[a])
                    hi = model(d2, xs[b]) - model(d1, xs[b])
                    if not lo > hi:
                        return False
    return True


# ---------------------------------------------------------------------------
# configuration types


@dataclass(frozen=True)
class AgentTypeSet:
    """Ordered agent types: computing powers ``xs`` with population fractions ``ps``."""

    xs: tuple[float, ...]
    ps: tuple[float, ...]

    def __post_init__(self):
        xs = tuple(float(x) for x in self.xs)
        ps = tuple(float(p) for p in self.ps)
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "ps", ps)
        if not xs:
            raise ConfigError("AgentTypeSet: at least one agent type is required")
        if len(xs) != len(ps):
            raise ConfigError("AgentTypeSet: xs and ps must have equal length")
        if any(not (x > 0 and math.isfinite(x)) for x in xs):
            raise ConfigError("AgentTypeSet: computing powers must be positive and finite")
        if any(b <= a for a, b in zip(xs, xs[1:])):
            raise ConfigError("AgentTypeSet: computing powers must be strictly increasing")
        if any(not 0 < p <= 1 for p in ps):
            raise ConfigError("AgentTypeSet: every fraction p must lie in (0, 1]")
        if abs(math.fsum(ps) - 1.0) > 1e-9:
            raise ConfigError(f"AgentTypeSet: fractions must sum to 1, got {math.fsum(ps)!r}")

    @classmethod
    def from_pairs(cls, pairs: Sequence[tuple[float, float]]) -> "AgentTypeSet":
        return cls(tuple(x for x, _ in pairs), tuple(p for _, p in pairs))

    def __len__(self) -> int:
        return len(self.xs)


@dataclass(frozen=True)
class MechanismConfig:
    types: AgentTypeSet
    m: int
    alpha: float
    beta: float
    u0: float
    N: int
    cost_model: CostModel = field(default=EXP_COST, compare=False)

    def __post_init__(self):
        if not isinstance(self.types, AgentTypeSet):
            raise ConfigError("MechanismConfig: types must be an AgentTypeSet")
        if int(self.m) != self.m or self.m < 1:
            raise ConfigError(f"MechanismConfig: m must be a positive integer, got {self.m!r}")
        if int(self.N) != self.N or self.N < 1:
            raise ConfigError(f"MechanismConfig: N must be a positive integer, got {self.N!r}")
        if not self.beta > 0:
            raise ConfigError(f"MechanismConfig: beta must be positive, got {self.beta!r}")
        if not self.alpha >= 0:
            raise ConfigError(f"MechanismConfig: alpha must be non-negative, got {self.alpha!r}")
        if not math.isfinite(self.u0):
            raise ConfigError("MechanismConfig: u0 must be finite")
        object.__setattr__(self, "m", int(self.m))
        object.__setattr__(self, "N", int(self.N))
        if self.cost_model is not EXP_COST and not has_decreasing_differences(
            self.cost_model, self.m, self.types.xs
        ):
            raise ConfigError(
                "MechanismConfig: cost model lacks decreasing differences on this type set"
            )

    @property
    def n(self) -> int:
        return len(self.types)

    @property
    def xs(self) -> tuple[float, ...]:
        return self.types.xs

    @property
    def ps(self) -> tuple[float, ...]:
        return self.types.ps

    def with_N(self, N: int) -> "MechanismConfig":
        return MechanismConfig(
            self.types, self.m, self.alpha, self.beta, self.u0, N, self.cost_model
        )


def check_difficulty(config: MechanismConfig, d: Sequence[int]) -> tuple[int, ...]:
    d = tuple(int(v) for v in d)
    if len(d) != config.n:
        raise ConfigError(f"difficulty vector has length {len(d)}, expected {config.n}")
    if any(not 1 <= v <= config.m for v in d):
        raise ConfigError(f"difficulty levels must lie in 1..{config.m}, got {d}")
    return d


def check_weights(w: Sequence[float], normalized: bool = True) -> tuple[float, ...]:
    w = tuple(float(v) for v in w)
    if normalized:
        if any(v < 1.0 - FEAS_TOL for v in w):
            raise ConfigError(f"weights must be >= 1, got {w}")
        if w and w[0] != 1.0:
            raise ConfigError(f"lowest type must carry weight exactly 1, got {w[0]!r}")
    elif any(not v > 0 for v in w):
        raise ConfigError(f"weights must be positive, got {w}")
    return w


@dataclass(frozen=True)
class Assignment:
    """A per-type ``(d, w)`` scheme, either a solved mechanism or the linear baseline."""

    d: tuple[int, ...]
    w: tuple[float, ...]
    provenance: str = "mechanism"

    def __post_init__(self):
        if self.provenance not in ("mechanism", "baseline"):
            raise ConfigError(f"unknown provenance {self.provenance!r}")
        d = tuple(int(v) for v in self.d)
        if any(v < 1 for v in d):
            raise ConfigError(f"difficulty levels must be >= 1, got {d}")
        if len(d) != len(self.w):
            raise ConfigError("d and w must have one entry per agent type")
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "w", check_weights(self.w, self.provenance == "mechanism"))


# ---------------------------------------------------------------------------
# model functions


def cost(d_level: int, x: float, model: CostModel = EXP_COST) -> float:
    return model(d_level, x)


def utility(w_val, d_level: int, x: float, beta: float, model: CostModel = EXP_COST):
    """Agent utility ``beta * w - cost(d, x)``; ``w_val`` may be an array."""
    return beta * w_val - model(d_level, x)


def tx_rate(x: float, d_level: int, model: CostModel = EXP_COST) -> float:
    """Expected transactions per time step for one agent of power ``x``."""
    return model.rate(x, d_level)


# ---------------------------------------------------------------------------
# constraint system


@dataclass(frozen=True)
class ConstraintSystem:
    """Rows ``A @ w >= b`` (``==`` for the normalisation row), each with a tag.

    Tags are tuples with 0-based type indices: ``("IC", i, j)`` says type ``i``
    prefers its own bundle to type ``j``'s, ``("PC", i)`` is participation,
    ``("LB", i)`` is ``w[i] >= 1`` and ``("NORM",)`` fixes ``w[0] = 1``.
    """

    A: np.ndarray
    b: np.ndarray
    tags: tuple[tuple, ...]

    def __len__(self) -> int:
        return len(self.tags)

    @property
    def is_equality(self) -> np.ndarray:
        return np.array([t[0] == "NORM" for t in self.tags])

    def counts(self) -> dict[str, int]:
        out = {"IC": 0, "PC": 0, "LB": 0, "NORM": 0}
        for t in self.tags:
            out[t[0]] += 1
        return out

    def row(self, tag: tuple) -> tuple[np.ndarray, float]:
        k = self.tags.index(tag)
        return self.A[k], float(self.b[k])

    def slacks(self, w: Sequence[float], scaled: bool = False) -> np.ndarray:
        """Row slacks at ``w``; negative means violated.

        With ``scaled`` each row is divided by its largest coefficient, so
        slacks are in weight units.
        """
        w = np.asarray(w, dtype=float)
        s = self.A @ w - self.b
        eq = self.is_equality
        s[eq] = -np.abs(s[eq])
        if scaled:
            s = s / np.abs(self.A).max(axis=1)
        return s

    def is_satisfied(self, w: Sequence[float], tol: float = FEAS_TOL) -> bool:
        return bool(np.all(self.slacks(w) >= -tol))


def build_constraints(config: MechanismConfig, d: Sequence[int]) -> ConstraintSystem:
    """Linearise truth-telling and participation for a fixed difficulty vector.

    Truth-telling for type ``i`` against report ``j`` reads
    ``beta*w[i] - beta*w[j] >= cost(d[i], x[i]) - cost(d[j], x[i])``.
    Ties count as truthful.
    """
    d = check_difficulty(config, d)
    n, beta, xs, g = config.n, config.beta, config.xs, config.cost_model
    rows, rhs, tags = [], [], []
    for i in range(n):
        own = g(d[i], xs[i])
        for j in range(n):
            if j == i:
                continue
            a = np.zeros(n)
            a[i], a[j] = beta, -beta
            rows.append(a)
            rhs.append(own - g(d[j], xs[i]))
            tags.append(("IC", i, j))
    for i in range(n):
        a = np.zeros(n)
        a[i] = beta
        rows.append(a)
        rhs.append(config.u0 + g(d[i], xs[i]))
        tags.append(("PC", i))
    for i in range(n):
        a = np.zeros(n)
        a[i] = 1.0
        rows.append(a)
        rhs.append(1.0)
        tags.append(("LB", i))
    a = np.zeros(n)
    a[0] = 1.0
    rows.append(a)
    rhs.append(1.0)
    tags.append(("NORM",))
    return ConstraintSystem(np.array(rows), np.array(rhs, dtype=float), tuple(tags))


# ---------------------------------------------------------------------------
# principal objective

Objective = Callable[[MechanismConfig, Sequence[int], Sequence[float]], float]


def objective(config: MechanismConfig, d: Sequence[int], w) -> float:
    """``sum_x p(x) * (N * rate(x, d(x)) + alpha * w(x))``.

    ``w`` may have a trailing batch axis (shape ``(n, ...)``), which the grid
    oracle uses to score many candidate weight vectors at once.
    """
    total = 0.0
    for i, (x, p) in enumerate(zip(config.xs, config.ps)):
        total = total + p * (config.N * config.cost_model.rate(x, d[i]) + config.alpha * w[i])
    return total


# ---------------------------------------------------------------------------
# fixed linear baseline


def fixed_linear_scheme(
    config: MechanismConfig,
    slope: float = 1.0,
    intercept: float = 0.0,
    normalize: bool = False,
) -> Assignment:
    """Weights fixed as ``intercept + slope * d``; each type picks its best ``d``.

    Ties go to the smaller difficulty.  With ``normalize`` the weights are
    divided by the weight at the lowest chosen difficulty.
    """
    if not slope > 0:
        raise ConfigError(f"baseline slope must be positive, got {slope!r}")
    if not intercept >= 0:
        raise ConfigError(f"baseline intercept must be non-negative, got {intercept!r}")
    ds, ws = [], []
    for x in config.xs:
        best_d, best_u = 1, -math.inf
        for dl in range(1, config.m + 1):
            u = utility(intercept + slope * dl, dl, x, config.beta, config.cost_model)
            if u > best_u:
                best_d, best_u = dl, u
        ds.append(best_d)
        ws.append(intercept + slope * best_d)
    if normalize:
        ref = intercept + slope * min(ds)
        ws = [v / ref for v in ws]
    return Assignment(tuple(ds), tuple(ws), "baseline")
