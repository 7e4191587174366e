"""Principal-agent transaction-rate control for Tangle-style DAG ledgers."""

from .inner_solver import (
    InnerResult,
    VerificationReport,
    brute_force_weights,
    solve_weights,
    verify_assignment,
)
from .mechanism import (
    EXP_COST,
    AgentTypeSet,
    Assignment,
    ConfigError,
    ConstraintSystem,
    CostModel,
    DomainError,
    ExpCost,
    MechanismConfig,
    build_constraints,
    cost,
    fixed_linear_scheme,
    has_decreasing_differences,
    objective,
    tx_rate,
    utility,
)
from .outer_search import (
    InfeasibleMechanismError,
    MechanismSolution,
    count_monotone,
    enumerate_monotone,
    solve_mechanism,
    wot_slopes,
)
from .tangle_sim import SimConfig, SimMetrics, TangleState, approval_stats, run, simulate


def reference_config(N: int = 100) -> MechanismConfig:
    """The reference three-type configuration (x = 1, 3, 10; m = 12)."""
    return MechanismConfig(
        AgentTypeSet((1.0, 3.0, 10.0), (1 / 3, 1 / 3, 1 / 3)),
        m=12,
        alpha=0.1,
        beta=80.0,
        u0=10.0,
        N=N,
    )


__version__ = "0.1.0"
