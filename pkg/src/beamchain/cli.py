"""Command-line interface.

Exit codes: 0 success, 2 config validation failure, 3 numerical failure,
4 I/O failure.  The BEAMCHAIN_MAX_DIM environment variable overrides the
dimension guard and BEAMCHAIN_BACKEND selects the compute backend
(auto, numba, numpy).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .errors import BeamchainError, ConfigError
from .scenarios import SCENARIO_HELP, SCENARIOS, parse_config, run_scenario, serialize_config

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4


def _describe_config_error(exc: ConfigError) -> str:
    where = []
    if exc.line is not None:
        where.append(f"line {exc.line}, column {exc.column}")
    if exc.field is not None:
        where.append(f"field '{exc.field}'")
    prefix = "; ".join(where)
    return f"{prefix}: {exc}" if prefix else str(exc)


def _fail(message: str, code: int) -> int:
    print(f"error: {message}", file=sys.stderr)
    return code


def _load_config(path: str):
    """Returns (config, None) or (None, exit_code) with the error printed."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        return None, _fail(f"cannot read {path}: {exc}", EXIT_IO)
    try:
        return parse_config(text), None
    except ConfigError as exc:
        return None, _fail(_describe_config_error(exc), EXIT_CONFIG)


def cmd_run(args: argparse.Namespace) -> int:
    config, code = _load_config(args.config)
    if config is None:
        return code
    try:
        record = run_scenario(config, out_dir=args.out)
    except ConfigError as exc:
        return _fail(_describe_config_error(exc), EXIT_CONFIG)
    except BeamchainError as exc:
        return _fail(f"{config.scenario}: {exc}", EXIT_NUMERICAL)
    except OSError as exc:
        return _fail(f"{config.scenario}: {exc}", EXIT_IO)
    out = args.out if args.out is not None else config.output_dir
    print(f"{config.scenario}: wrote {out} in {record.wall_time_seconds:.2f} s")
    print(json.dumps(record.results, indent=2))
    return EXIT_OK


def cmd_validate(args: argparse.Namespace) -> int:
    config, code = _load_config(args.config)
    if config is None:
        return code
    print(f"valid: {config.scenario}")
    print(json.dumps(serialize_config(config), indent=2))
    return EXIT_OK


def cmd_scenarios(_args: argparse.Namespace) -> int:
    print("scenarios (config key: scenario)")
    for name in SCENARIOS:
        print(f"\n{name}")
        print(f"  {SCENARIO_HELP[name]}")
    print(
        "\ncommon keys: sigma_spec ({thermal: b} | {fock: n} | {coherent: a}),"
        "\n  rho0_spec (same, or \"fock_default\"; default \"fock_default\"),"
        "\n  lambda (scalar or list; K list for vanhove), n_max (default 40),"
        "\n  tol (default 1e-9), max_steps (default 10000),"
        "\n  z_grid ({r_max: 2.0, points: 25}), output_dir (or --out)"
    )
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="beamchain",
        description="Collision-model simulator for one optical mode meeting "
        "a stream of identically prepared reservoir modes at a beam splitter.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="execute a scenario config")
    run.add_argument("--config", required=True, help="path to a JSON scenario config")
    run.add_argument("--out", default=None, help="output directory (overrides config)")
    run.set_defaults(handler=cmd_run)

    validate = sub.add_parser("validate", help="parse a config without running it")
    validate.add_argument("--config", required=True, help="path to a JSON scenario config")
    validate.set_defaults(handler=cmd_validate)

    scenarios = sub.add_parser("scenarios", help="list scenarios and config schema")
    scenarios.set_defaults(handler=cmd_scenarios)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.handler(args)


if __name__ == "__main__":
    sys.exit(main())
