"""Command line entry point: ``tanglepap {solve,simulate,sweep,compare}``.

Tables go to stdout (or ``--out``) as CSV with a header row, or as JSON that
wraps the same rows together with an echo of the loaded configuration.

Exit codes: 0 success, 2 configuration error, 3 no feasible mechanism.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import sys
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .mechanism import (
    AgentTypeSet,
    Assignment,
    ConfigError,
    MechanismConfig,
    fixed_linear_scheme,
    tx_rate,
)
from .outer_search import InfeasibleMechanismError, solve_mechanism, wot_slopes
from .tangle_sim import SimConfig, run

DEFAULT_SWEEP = (100, 1000, 10000, 100000)
DEFAULT_SEEDS = 20

_TOP_KEYS = {"types", "max_difficulty", "alpha", "beta", "u0", "N", "sweep_N", "sim", "baseline"}
_REQUIRED = ("types", "max_difficulty", "alpha", "beta", "u0")
_SIM_KEYS = {"horizon", "seed", "arrival_model"}
_BASELINE_KEYS = {"slope", "intercept"}


@dataclass(frozen=True)
class RunConfig:
    mechanism: MechanismConfig
    horizon: int = 2000
    seed: int = 42
    arrival_model: str = "poisson"
    sweep: tuple[int, ...] = DEFAULT_SWEEP
    slope: float = 1.0
    intercept: float = 0.0
    source: dict = field(default_factory=dict, compare=False)

    def echo(self) -> dict:
        m = self.mechanism
        return {
            "types": [{"x": x, "p": p} for x, p in zip(m.xs, m.ps)],
            "max_difficulty": m.m,
            "alpha": m.alpha,
            "beta": m.beta,
            "u0": m.u0,
            "N": m.N,
            "sweep_N": list(self.sweep),
            "sim": {"horizon": self.horizon, "seed": self.seed, "arrival_model": self.arrival_model},
            "baseline": {"slope": self.slope, "intercept": self.intercept},
        }


def _number(obj: dict, key: str, where: str, integer: bool = False):
    v = obj[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{where}{key}: expected a number, got {v!r}")
    if integer:
        if isinstance(v, float) and not v.is_integer():
            raise ConfigError(f"{where}{key}: expected an integer, got {v!r}")
        return int(v)
    if not math.isfinite(v):
        raise ConfigError(f"{where}{key}: must be finite")
    return float(v)


def _reject_unknown(obj, allowed: set, where: str) -> None:
    if not isinstance(obj, dict):
        raise ConfigError(f"{where or 'config'}: expected a JSON object")
    extra = sorted(set(obj) - allowed)
    if extra:
        raise ConfigError(f"{where or 'config'}: unknown key(s) {', '.join(extra)}")


def parse_config(raw: dict) -> RunConfig:
    """Validate a decoded JSON config and fill defaults."""
    _reject_unknown(raw, _TOP_KEYS, "")
    for key in _REQUIRED:
        if key not in raw:
            raise ConfigError(f"missing required key {key!r}")
    types = raw["types"]
    if not isinstance(types, list):
        raise ConfigError("types: expected a list of {x, p} objects")
    pairs = []
    for k, entry in enumerate(types):
        where = f"types[{k}]."
        _reject_unknown(entry, {"x", "p"}, f"types[{k}]")
        if "x" not in entry or "p" not in entry:
            raise ConfigError(f"types[{k}]: both x and p are required")
        pairs.append((_number(entry, "x", where), _number(entry, "p", where)))
    type_set = AgentTypeSet.from_pairs(pairs)
    mech = MechanismConfig(
        type_set,
        m=_number(raw, "max_difficulty", "", integer=True),
        alpha=_number(raw, "alpha", ""),
        beta=_number(raw, "beta", ""),
        u0=_number(raw, "u0", ""),
        N=_number(raw, "N", "", integer=True) if "N" in raw else 100,
    )

    sim = raw.get("sim", {})
    _reject_unknown(sim, _SIM_KEYS, "sim")
    horizon = _number(sim, "horizon", "sim.", integer=True) if "horizon" in sim else 2000
    if horizon < 1:
        raise ConfigError("sim.horizon: must be a positive integer")
    seed = _number(sim, "seed", "sim.", integer=True) if "seed" in sim else 42
    arrival = sim.get("arrival_model", "poisson")
    if arrival not in ("poisson", "deterministic"):
        raise ConfigError(f"sim.arrival_model: expected 'poisson' or 'deterministic', got {arrival!r}")

    sweep = DEFAULT_SWEEP
    if "sweep_N" in raw:
        vals = raw["sweep_N"]
        if not isinstance(vals, list) or not vals:
            raise ConfigError("sweep_N: expected a non-empty list of positive integers")
        sweep = tuple(_number({"v": v}, "v", "sweep_N ", integer=True) for v in vals)
        if any(v < 1 for v in sweep):
            raise ConfigError("sweep_N: values must be positive integers")

    base = raw.get("baseline", {})
    _reject_unknown(base, _BASELINE_KEYS, "baseline")
    slope = _number(base, "slope", "baseline.") if "slope" in base else 1.0
    intercept = _number(base, "intercept", "baseline.") if "intercept" in base else 0.0
    if not slope > 0:
        raise ConfigError("baseline.slope: must be positive")
    if intercept < 0:
        raise ConfigError("baseline.intercept: must be non-negative")

    return RunConfig(mech, horizon, seed, arrival, sweep, slope, intercept, source=raw)


def load_config(path=None) -> RunConfig:
    """Read a JSON config file; ``None`` loads the bundled reference fixture."""
    if path is None:
        text = resources.files("tanglepap").joinpath("data/reference.json").read_text()
        name = "reference.json"
    else:
        p = Path(path)
        try:
            text = p.read_text()
        except OSError as exc:
            raise ConfigError(f"{p}: cannot read config ({exc.strerror})") from exc
        name = str(p)
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{name}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    return parse_config(raw)


def bundled_config_path() -> Path:
    return Path(str(resources.files("tanglepap").joinpath("data/reference.json")))


# ---------------------------------------------------------------------------
# tables


def fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, int)) and not isinstance(v, float):
        return str(int(v))
    return repr(float(f"{float(v):.6g}"))


def _typed(v):
    if v is None or isinstance(v, int):
        return v
    return float(f"{float(v):.6g}")


@dataclass
class Table:
    columns: tuple[str, ...]
    rows: list[tuple]

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(",".join(self.columns) + "\n")
        for r in self.rows:
            buf.write(",".join(fmt(v) for v in r) + "\n")
        return buf.getvalue()

    def to_json(self, config: RunConfig) -> str:
        payload = {
            "config": config.echo(),
            "columns": list(self.columns),
            "rows": [[_typed(v) for v in r] for r in self.rows],
        }
        return json.dumps(payload, indent=2) + "\n"


def _solutions(cfg: RunConfig, exhaustive: bool):
    mode = "exhaustive" if exhaustive else "pruned"
    return [(N, solve_mechanism(cfg.mechanism.with_N(N), mode)) for N in cfg.sweep]


def cmd_solve(cfg: RunConfig, exhaustive: bool = False) -> Table:
    m = cfg.mechanism
    rows = []
    for N, sol in _solutions(cfg, exhaustive):
        for i, (x, p) in enumerate(zip(m.xs, m.ps)):
            d, w = sol.d[i], sol.w[i]
            rows.append(
                (N, i + 1, x, p, d, w, tx_rate(x, d, m.cost_model), sol.objective_value)
            )
    cols = ("N", "type_index", "x", "p", "d", "w", "per_type_rate", "objective_value")
    return Table(cols, rows)


def _assignment(mech: MechanismConfig, cfg: RunConfig, scheme: str) -> Assignment:
    if scheme == "baseline":
        return fixed_linear_scheme(mech, cfg.slope, cfg.intercept)
    return solve_mechanism(mech).assignment


def _seeds(cfg: RunConfig, k: int) -> list[int]:
    return [cfg.seed + s for s in range(k)]


def cmd_simulate(
    cfg: RunConfig, seeds: int = DEFAULT_SEEDS, scheme: str = "mechanism", sweep: bool = False
) -> Table:
    rows = []
    for N in cfg.sweep if sweep else (cfg.mechanism.N,):
        mech = cfg.mechanism.with_N(N)
        assignment = _assignment(mech, cfg, scheme)
        for seed in _seeds(cfg, seeds):
            metrics = run(SimConfig(mech, assignment, cfg.horizon, seed, cfg.arrival_model))
            for i, t in enumerate(metrics.per_type):
                rows.append(
                    (N, seed, i + 1, t.created, t.approved, t.unapproved, t.mean_approval_time)
                )
    cols = ("N", "seed", "type_index", "created", "approved", "unapproved", "mean_approval_time")
    return Table(cols, rows)


def cmd_sweep(cfg: RunConfig, seeds: int = DEFAULT_SEEDS, scheme: str = "mechanism") -> Table:
    """Approval time per type across the N sweep, pooled over seeds."""
    m = cfg.mechanism
    rows = []
    for N in cfg.sweep:
        mech = m.with_N(N)
        assignment = _assignment(mech, cfg, scheme)
        created = [0] * m.n
        approved = [0] * m.n
        delay = [0.0] * m.n
        for seed in _seeds(cfg, seeds):
            metrics = run(SimConfig(mech, assignment, cfg.horizon, seed, cfg.arrival_model))
            for i, t in enumerate(metrics.per_type):
                created[i] += t.created
                approved[i] += t.approved
                if t.approved:
                    delay[i] += t.mean_approval_time * t.approved
        for i in range(m.n):
            mean = delay[i] / approved[i] if approved[i] else None
            rows.append(
                (N, i + 1, m.xs[i], assignment.d[i], assignment.w[i], seeds,
                 created[i], approved[i], created[i] - approved[i], mean)
            )
    cols = ("N", "type_index", "x", "d", "w", "seeds", "created", "approved",
            "unapproved", "mean_approval_time")
    return Table(cols, rows)


def cmd_compare(cfg: RunConfig) -> Table:
    m = cfg.mechanism
    base = fixed_linear_scheme(m, cfg.slope, cfg.intercept)
    rows = []
    for N, sol in _solutions(cfg, False):
        slopes = [None] + wot_slopes(sol.d, sol.w)
        for i, x in enumerate(m.xs):
            rows.append((N, i + 1, x, sol.d[i], sol.w[i], base.d[i], base.w[i], slopes[i]))
    cols = ("N", "type_index", "x", "mech_d", "mech_w", "base_d", "base_w", "mech_slope")
    return Table(cols, rows)


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tanglepap", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config (default: bundled reference fixture)")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--out", help="write the table here instead of stdout")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", parents=[common], help="optimal (d, w) per N in sweep_N")
    p.add_argument("--exhaustive", action="store_true", help="search all m^n difficulty vectors")

    for name, text in (("simulate", "per-seed approval metrics"),
                       ("sweep", "approval time per type across sweep_N")):
        p = sub.add_parser(name, parents=[common], help=text)
        p.add_argument("--seeds", type=int, default=DEFAULT_SEEDS)
        p.add_argument("--scheme", choices=("mechanism", "baseline"), default="mechanism")
        if name == "simulate":
            p.add_argument("--sweep", action="store_true", help="simulate every N in sweep_N")

    sub.add_parser("compare", parents=[common], help="mechanism vs fixed linear weights")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if getattr(args, "seeds", 1) < 1:
            raise ConfigError("--seeds must be a positive integer")
        if args.command == "solve":
            table = cmd_solve(cfg, args.exhaustive)
        elif args.command == "simulate":
            table = cmd_simulate(cfg, args.seeds, args.scheme, args.sweep)
        elif args.command == "sweep":
            table = cmd_sweep(cfg, args.seeds, args.scheme)
        else:
            table = cmd_compare(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except InfeasibleMechanismError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return 3
    text = table.to_json(cfg) if args.format == "json" else table.to_csv()
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
