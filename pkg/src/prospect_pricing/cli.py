"""Command-line entry point: config parsing, seeding, dispatch, CSV output."""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from dataclasses import dataclass

from . import experiments
from .channel import UnattainableGuaranteeError
from .experiments import (DEFAULT_ALPHA_STEP, DEFAULT_RANGE_ADMISSION,
                          DEFAULT_RANGE_COMPARISON, DEFAULT_RANGE_EXPANSION,
                          DEFAULT_RANGE_LOSS, DEFAULT_RANGE_PRICE,
                          DEFAULT_SEED, HEADER_NE, SweepSpec, SweepTable,
                          build_scenario)
from .game import solve_nash
from .weighting import InsufficientDataError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INFEASIBLE = 3
EXIT_USAGE = 64


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class Config:
    """Scenario parameters; defaults reproduce the published cell setup."""

    tx_power_dbm: float = 40.0
    antenna_const_db: float = -64.5
    noise_psd_dbm_per_hz: float = -174.0
    ref_distance_m: float = 20.0
    pathloss_exponent: float = 4.0
    shadow_sigma_db: float = 4.0
    cell_radius_m: float = 800.0
    n_users: int = 10
    price_coeff: float = 2e-3
    price_exp: float = 0.82
    benefit_coeff: float = 1e-2
    benefit_exp: float = 0.65
    c1: float = (1.0 / 3.0) * 1e-6
    c3: float = 1e-8
    bandwidth_margin: float = 0.10
    total_bandwidth_hz: float | None = None
    seed: int = DEFAULT_SEED


_INT_KEYS = {"n_users", "seed"}
_OPTIONAL_KEYS = {"total_bandwidth_hz"}


def _check(config: Config) -> None:
    def fail(key: str, why: str) -> None:
        raise ConfigError(f"invalid config value for {key!r}: {why}")

    if config.n_users < 1:
        fail("n_users", "must be >= 1")
    if config.seed < 0:
        fail("seed", "must be >= 0")
    if config.ref_distance_m <= 0.0:
        fail("ref_distance_m", "must be > 0")
    if config.cell_radius_m < config.ref_distance_m:
        fail("cell_radius_m", "must be >= ref_distance_m")
    if config.pathloss_exponent <= 0.0:
        fail("pathloss_exponent", "must be > 0")
    if config.shadow_sigma_db < 0.0:
        fail("shadow_sigma_db", "must be >= 0")
    for key in ("price_coeff", "benefit_coeff"):
        if getattr(config, key) <= 0.0:
            fail(key, "must be > 0")
    for key in ("price_exp", "benefit_exp"):
        if not 0.0 < getattr(config, key) <= 1.0:
            fail(key, "must lie in (0, 1]")
    for key in ("c1", "c3"):
        if getattr(config, key) < 0.0:
            fail(key, "must be >= 0")
    if config.bandwidth_margin < 0.0:
        fail("bandwidth_margin", "must be >= 0")
    if config.total_bandwidth_hz is not None and config.total_bandwidth_hz <= 0.0:
        fail("total_bandwidth_hz", "must be > 0 when set")


def config_from_mapping(data: dict) -> Config:
    names = {f.name for f in dataclasses.fields(Config)}
    for key in data:
        if key not in names:
            raise ConfigError(f"unknown config key: {key!r}")
    coerced = {}
    for key, value in data.items():
        if key in _INT_KEYS:
            if isinstance(value, bool) or not isinstance(value, int):
                raise ConfigError(f"invalid config value for {key!r}: expected an integer")
            coerced[key] = value
        elif key in _OPTIONAL_KEYS and value is None:
            coerced[key] = None
        else:
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ConfigError(f"invalid config value for {key!r}: expected a number")
            coerced[key] = float(value)
    config = Config(**coerced)
    _check(config)
    return config


def parse_config(path: str) -> Config:
    """Load a JSON config; an empty file (or the name 'default') means defaults."""
    if path == "default":
        return Config()
    try:
        with open(path, "r", encoding="utf-8") as f:
            text = f.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path!r}: {exc}") from exc
    if not text.strip():
        return Config()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path!r} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"config file {path!r} must hold a JSON object")
    return config_from_mapping(data)


def serialize_config(config: Config) -> str:
    return json.dumps(dataclasses.asdict(config), indent=2, sort_keys=True) + "\n"


def scenario_from_config(config: Config, seed: int | None = None):
    return build_scenario(
        n_users=config.n_users,
        seed=config.seed if seed is None else seed,
        cell_radius_m=config.cell_radius_m,
        tx_power_dbm=config.tx_power_dbm,
        antenna_const_db=config.antenna_const_db,
        noise_psd_dbm_per_hz=config.noise_psd_dbm_per_hz,
        ref_distance_m=config.ref_distance_m,
        pathloss_exponent=config.pathloss_exponent,
        shadow_sigma_db=config.shadow_sigma_db,
        price_coeff=config.price_coeff,
        price_exp=config.price_exp,
        benefit_coeff=config.benefit_coeff,
        benefit_exp=config.benefit_exp,
        c1=config.c1,
        c3=config.c3,
        bandwidth_margin=config.bandwidth_margin,
        total_bandwidth_hz=config.total_bandwidth_hz)


class _UsageError(Exception):
    pass


class _ExitRequest(Exception):
    def __init__(self, status: int) -> None:
        self.status = status


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        raise _UsageError(message)

    def exit(self, status: int = 0, message: str | None = None) -> None:  # type: ignore[override]
        if message:
            sys.stderr.write(message)
        raise _ExitRequest(status)


_SWEEPS = {
    "sweep-loss": (experiments.sweep_revenue_loss, DEFAULT_RANGE_LOSS),
    "sweep-price": (experiments.sweep_price, DEFAULT_RANGE_PRICE),
    "sweep-expansion": (experiments.sweep_expansion, DEFAULT_RANGE_EXPANSION),
    "sweep-admission": (None, DEFAULT_RANGE_ADMISSION),
    "sweep-compare": (experiments.sweep_comparison, DEFAULT_RANGE_COMPARISON),
}

_SWEEP_HELP = {
    "sweep-loss": "revenue lost when the offer is priced for unweighted users",
    "sweep-price": "highest posted price users still accept, per exponent",
    "sweep-expansion": "bandwidth needed to win the revenue back by expansion",
    "sweep-admission": "revenue recovery by dropping the costliest users",
    "sweep-compare": "bandwidth and revenue of every recovery strategy",
}


def _build_parser() -> _Parser:
    parser = _Parser(prog="prospect-pricing",
                     description="Spectrum-pricing game solver and sweep runner")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    def common(p: _Parser) -> None:
        p.add_argument("--config", default=None,
                       help="JSON config path, or 'default' for built-ins")
        p.add_argument("--seed", type=int, default=None,
                       help="override the scenario seed")
        p.add_argument("--out", default=None, help="output CSV path (default stdout)")

    def alpha_flags(p: _Parser) -> None:
        p.add_argument("--alpha-min", type=float, default=None)
        p.add_argument("--alpha-max", type=float, default=None)
        p.add_argument("--alpha-step", type=float, default=None)

    common(sub.add_parser("ne-solve", help="solve the pricing game once"))
    for name in _SWEEPS:
        p = sub.add_parser(name, help=_SWEEP_HELP[name])
        common(p)
        alpha_flags(p)
        if name == "sweep-admission":
            p.add_argument("--max-drops", type=int, default=3)
    fit = sub.add_parser("fit-pwf", help="fit the weighting exponent to rating data")
    common(fit)
    fit.add_argument("--data", default=None,
                     help="ratings/fps CSV (default: bundled dataset)")
    return parser


def _write_table(table: SweepTable, out: str | None) -> None:
    if out is None:
        experiments.write_csv(sys.stdout, table.header, table.rows)
    else:
        with open(out, "w", encoding="utf-8", newline="") as f:
            experiments.write_csv(f, table.header, table.rows)


def _run(args) -> tuple[SweepTable, int]:
    config = Config() if args.config is None else parse_config(args.config)
    seed = args.seed if args.seed is not None else config.seed
    if seed < 0:
        raise ConfigError("seed must be >= 0")

    if args.command == "fit-pwf":
        if args.data is None:
            records = experiments.bundled_psych_records()
        else:
            try:
                with open(args.data, "r", encoding="utf-8") as f:
                    records = experiments.load_psych_records(f)
            except OSError as exc:
                raise ConfigError(f"cannot read data file {args.data!r}: {exc}") from exc
            except ValueError as exc:
                raise ConfigError(str(exc)) from exc
        return experiments.fit_table(records), EXIT_OK

    try:
        scenario = scenario_from_config(config, seed)
    except UnattainableGuaranteeError as exc:
        return SweepTable(("status", "detail"),
                          (("infeasible", str(exc)),)), EXIT_INFEASIBLE

    if args.command == "ne-solve":
        ne = solve_nash(scenario)
        table = SweepTable(HEADER_NE, ((ne.rate_bps, ne.n_served, ne.sp_revenue),))
        return table, EXIT_OK if ne.equilibrium else EXIT_INFEASIBLE

    runner, (amin_default, amax_default) = _SWEEPS[args.command]
    amin = amin_default if args.alpha_min is None else args.alpha_min
    amax = amax_default if args.alpha_max is None else args.alpha_max
    step = DEFAULT_ALPHA_STEP if args.alpha_step is None else args.alpha_step
    if step <= 0.0:
        raise _UsageError("--alpha-step must be > 0")
    if not 0.0 < amin <= amax <= 1.0:
        raise _UsageError("alpha range must satisfy 0 < min <= max <= 1")
    spec = SweepSpec(scenario=scenario, alpha_min=amin, alpha_max=amax,
                     alpha_step=step, rng_seed=seed,
                     offer_margin=config.bandwidth_margin)
    try:
        if args.command == "sweep-admission":
            table = experiments.sweep_admission(spec, max_drops=args.max_drops)
        else:
            table = runner(spec)
    except UnattainableGuaranteeError as exc:
        return SweepTable(("status", "detail"),
                          (("infeasible", str(exc)),)), EXIT_INFEASIBLE
    except ValueError as exc:
        if "no equilibrium" in str(exc):
            return SweepTable(("status", "detail"),
                              (("no-equilibrium", str(exc)),)), EXIT_INFEASIBLE
        raise ConfigError(str(exc)) from exc
    return table, EXIT_OK


def dispatch(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:]) if argv is None else list(argv)
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise _UsageError("a subcommand is required")
        table, status = _run(args)
    except _ExitRequest as exc:
        return exc.status
    except _UsageError as exc:
        sys.stderr.write(f"{parser.prog}: error: {exc}\n")
        sys.stderr.write(parser.format_usage())
        return EXIT_USAGE
    except (ConfigError, InsufficientDataError) as exc:
        sys.stderr.write(f"{parser.prog}: error: {exc}\n")
        return EXIT_CONFIG
    _write_table(table, args.out)
    return status


def main() -> None:
    sys.exit(dispatch())
