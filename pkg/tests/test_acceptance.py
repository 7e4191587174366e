"""Exit criteria for the package, one test per criterion.

Run ``pytest tests/test_acceptance.py`` to get one PASS/FAIL line per
criterion in the terminal summary.
"""

import math
import time

import numpy as np
import pytest

from tanglepap import (
    AgentTypeSet,
    MechanismConfig,
    brute_force_weights,
    count_monotone,
    enumerate_monotone,
    fixed_linear_scheme,
    solve_mechanism,
    solve_weights,
    reference_config,
    verify_assignment,
    wot_slopes,
)
from tanglepap.tangle_sim import (
    SimConfig,
    TangleState,
    accept_reject,
    arrival_means,
    arrivals_for_step,
    run,
    step,
)

SWEEP = (100, 1000, 10000, 100000)


@pytest.fixture(scope="module")
def solutions():
    start = time.perf_counter()
    out = {}
    for N in SWEEP:
        cfg = reference_config(N)
        out[N] = (cfg, solve_mechanism(cfg, "pruned"), solve_mechanism(cfg, "exhaustive"))
    return out, time.perf_counter() - start


def test_c01_prune_equivalence(solutions, criterion):
    """C1 prune-equivalence: pruned == exhaustive (12^3) on reference at every N, < 5 s"""
    sols, elapsed = solutions
    for N, (cfg, pruned, full) in sols.items():
        assert full.candidates_examined == 12**3
        assert pruned.d == full.d
        assert abs(pruned.objective_value - full.objective_value) <= 1e-9
    criterion["detail"] = f"({elapsed:.2f} s)"
    assert elapsed < 5.0


def test_c02_monotone_mechanism(solutions, criterion):
    """C2 monotone mechanism: d, w nondecreasing in type and in N"""
    sols, _ = solutions
    for cfg, pruned, full in sols.values():
        for s in (pruned, full):
            assert all(a <= b for a, b in zip(s.d, s.d[1:]))
            assert all(a <= b + 1e-9 for a, b in zip(s.w, s.w[1:]))
    seq = [sols[N][1] for N in SWEEP]
    for prev, cur in zip(seq, seq[1:]):
        assert all(a <= b for a, b in zip(prev.d, cur.d))
        assert all(a <= b + 1e-9 for a, b in zip(prev.w, cur.w))
    criterion["detail"] = "d by N: " + " ".join(str(s.d) for s in seq)


def _random_case(rng):
    n = int(rng.integers(2, 4))
    m = int(rng.integers(2, 6))
    cfg = MechanismConfig(
        AgentTypeSet(tuple(np.sort(rng.uniform(1, 10, n))), tuple(rng.dirichlet(np.ones(n)))),
        m,
        alpha=float(rng.uniform(0.01, 1)),
        beta=float(rng.uniform(10, 100)),
        u0=float(rng.uniform(0, 20)),
        N=int(rng.integers(1, 100_000)),
    )
    d = tuple(sorted(int(v) for v in rng.integers(1, m + 1, n)))
    return cfg, d


def _grid_ceiling(cfg, d):
    # minimal weights never exceed the static bound plus every truth-telling increment
    costs = [math.exp(d[i]) / cfg.xs[i] for i in range(cfg.n)]
    return max(1.0, (cfg.u0 + max(costs)) / cfg.beta) + sum(costs) / cfg.beta + 0.01


def test_c03_inner_solver_oracle(criterion):
    """C3 inner-solver oracle: 200 random configs, fixpoint vs grid (step 1e-3) within 2e-3, < 30 s"""
    rng = np.random.default_rng(2024)
    start = time.perf_counter()
    feasible = agree = 0
    worst = 0.0
    for _ in range(200):
        cfg, d = _random_case(rng)
        fast = solve_weights(cfg, d)
        slow = brute_force_weights(cfg, d, grid_step=1e-3, w_max=_grid_ceiling(cfg, d))
        assert fast.feasible == slow.feasible, (cfg, d, fast.reason, slow.reason)
        agree += 1
        if fast.feasible:
            feasible += 1
            err = float(np.max(np.abs(np.subtract(fast.w, slow.w))))
            worst = max(worst, err)
            assert err <= 2e-3, (cfg, d, fast.w, slow.w)
    elapsed = time.perf_counter() - start
    criterion["detail"] = (
        f"(verdicts {agree}/200 agree, {feasible} feasible, max err {worst:.2e}, {elapsed:.1f} s)"
    )
    assert elapsed < 30.0


def test_c04_truth_telling_participation(solutions, criterion):
    """C4 truth-telling & participation: every solution verifies, min slack >= -1e-9"""
    sols, _ = solutions
    slacks = []
    for cfg, pruned, full in sols.values():
        for s in (pruned, full):
            rep = verify_assignment(cfg, s.assignment)
            assert rep.ok, rep.failures
            assert all(rep.truth_telling) and all(rep.participation)
            assert rep.min_slack >= -1e-9
            slacks.append(rep.min_slack)
    criterion["detail"] = f"(min slack {min(slacks):.1e})"


def test_c05_convexity(solutions, criterion):
    """C5 convexity of WoT in PoW at the largest N with distinct d"""
    sols, _ = solutions
    distinct = [N for N in SWEEP if len(set(sols[N][1].d)) == len(sols[N][1].d)]
    if not distinct:
        criterion["detail"] = "(vacuous: no sweep point with pairwise-distinct d)"
        return
    N = max(distinct)
    s = sols[N][1]
    slopes = wot_slopes(s.d, s.w)
    assert all(a <= b for a, b in zip(slopes, slopes[1:])), slopes
    criterion["detail"] = f"(N={N}, d={s.d}, slopes={[round(v, 4) for v in slopes]})"


def test_c06_baseline_best_response(criterion):
    """C6 baseline best response: d_br = 4 for x=1, 7 for x=10 (beta=80, slope 1, m=12)"""
    cfg = MechanismConfig(AgentTypeSet((1.0, 10.0), (0.5, 0.5)), 12, 0.1, 80.0, 10.0, 100)
    a = fixed_linear_scheme(cfg, slope=1.0, intercept=0.0)
    assert a.d == (4, 7) and a.w == (4.0, 7.0)
    criterion["detail"] = f"(d_br={a.d})"


def test_c07_simulator_invariants(solutions, criterion):
    """C7 simulator invariants: 2000 steps at N=100, zero violations, < 10 s"""
    cfg, sol, _ = solutions[0][100]
    sim = SimConfig(cfg, sol.assignment, horizon=2000, seed=42)
    start = time.perf_counter()
    rng = np.random.default_rng(sim.seed)
    s = TangleState.genesis()
    violations = 0
    for _ in range(sim.horizon):
        step(s, sim, rng)
        has_in = np.zeros(s.size, dtype=bool)
        has_in[s.approves[1 : s.size].ravel()] = True
        expected = np.flatnonzero((s.created_at[: s.size] <= s.clock - 1) & ~has_in)
        violations += not np.array_equal(np.sort(s.tips), expected)
    size = s.size
    ids = np.arange(size)
    src = np.repeat(ids[1:], 2)
    dst = s.approves[1:size].ravel()
    violations += int(np.sum(s.created_at[src] <= s.created_at[dst]))  # acyclic
    violations += int(np.sum((dst < 0) | (dst >= src)))  # two valid approvals each
    violations += int(np.any(s.approves[0] != -1))  # genesis approves nothing
    done = s.approved_at[:size] >= 0
    violations += int(np.sum(s.approved_at[:size][done] < s.created_at[:size][done] + 1))
    elapsed = time.perf_counter() - start
    criterion["detail"] = f"({size} transactions, {violations} violations, {elapsed:.1f} s)"
    assert violations == 0
    assert elapsed < 10.0


def test_c08_approval_time_ordering(solutions, criterion):
    """C8 approval-time ordering: highest type waits <= lowest type in >= 18/20 seeds"""
    cfg, sol, _ = solutions[0][100]
    wins = 0
    for seed in range(42, 62):
        m = run(SimConfig(cfg, sol.assignment, horizon=2000, seed=seed))
        lo, hi = m.per_type[0].mean_approval_time, m.per_type[-1].mean_approval_time
        wins += hi is not None and lo is not None and hi <= lo
    criterion["detail"] = f"({wins}/20)"
    assert wins >= 18


def test_c09_sampling(solutions, criterion):
    """C9 sampling: accept-reject TV <= 0.01 vs direct; Poisson means within 4 sigma"""
    w = np.array([1.0, 2.5, 0.5, 7.0, 3.0])
    draws = 100_000
    ar = np.bincount(accept_reject(w, draws, np.random.default_rng(10)), minlength=5)
    direct = np.bincount(
        np.random.default_rng(11).choice(5, size=draws, p=w / w.sum()), minlength=5
    )
    tv = 0.5 * float(np.abs(ar / draws - direct / draws).sum())
    assert tv <= 0.01

    cfg, sol, _ = solutions[0][100]
    mu = arrival_means(cfg, sol.assignment)
    rng = np.random.default_rng(12)
    counts = np.array([arrivals_for_step(cfg, sol.assignment, rng) for _ in range(100_000)])
    z = (counts.mean(axis=0) - mu) / np.sqrt(mu / 100_000)
    assert np.all(np.abs(z) <= 4)
    criterion["detail"] = f"(TV={tv:.4f}, max |z|={np.abs(z).max():.2f})"


def test_c10_enumeration_count(criterion):
    """C10 enumeration count: enumerate_monotone(3, 12) yields 364 distinct nondecreasing vectors"""
    vecs = list(enumerate_monotone(3, 12))
    assert len(vecs) == 364 == count_monotone(3, 12)
    assert len(set(vecs)) == 364
    assert all(list(v) == sorted(v) and all(1 <= x <= 12 for x in v) for v in vecs)
    criterion["detail"] = "(364)"
