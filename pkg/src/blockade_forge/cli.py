"""Command-line interface: ``gate``, ``optimize``, ``scan`` and ``validate``.

All areas and angles on the command line are in units of pi.  Every
option can also be given in a ``--config`` file of ``key = value`` lines
(``#`` starts a comment, keys use the long option name with ``-`` or
``_``); options on the command line win over the file.

Exit codes: 0 success, 2 configuration error, 3 validation failure,
4 I/O error.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from pathlib import Path

from .export import write_map_csv, write_pgm
from .metrics import (METRICS, TargetGate, entangling_power, fidelity, target_cminus,
                      target_cphase, target_cplus)
from .optimizer import SimplexOptions, optimize_phases
from .propagators import compose_gate
from .protocol import InvalidSpecError, ProtocolSpec, Scheme, beta_from_b_squared, build_sequence
from .scanner import GridSpec, map_max, refine_max, scan
from .validation import MODES, run_validation

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_VALIDATION = 3
EXIT_IO = 4

PI = math.pi


class ConfigError(ValueError):
    """Bad or inconsistent configuration."""


def parse_config_file(path) -> dict[str, str]:
    """Read ``key = value`` lines; blank lines and ``#`` comments are skipped."""
    out = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key = value, got {raw.strip()!r}")
            key, value = (part.strip() for part in line.split("=", 1))
            out[key.replace("-", "_")] = value
    return out


def _bool(text: str, key: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"config key {key!r}: expected a boolean, got {text!r}")


def parse_target(text: str) -> TargetGate:
    """``cplus``, ``cminus`` or ``cphase:t01,t10,t11`` (phases in units of pi)."""
    low = text.strip().lower()
    if low == "cplus":
        return target_cplus()
    if low == "cminus":
        return target_cminus()
    if low.startswith("cphase:"):
        try:
            t01, t10, t11 = (float(x) * PI for x in low[len("cphase:"):].split(","))
        except ValueError:
            raise ConfigError(f"target: cannot parse {text!r}; expected cphase:t01,t10,t11") from None
        return target_cphase(t01, t10, t11)
    raise ConfigError(f"target: unknown gate {text!r}; expected cplus, cminus or cphase:...")


def parse_phases(text: str | None, m_pulses: int) -> tuple[float, ...]:
    if text is None or text == "":
        return (0.0,) * m_pulses
    try:
        values = tuple(float(x) * PI for x in text.split(","))
    except ValueError:
        raise ConfigError(f"phases: cannot parse {text!r}") from None
    if len(values) == 1 and m_pulses > 1:
        values = values * m_pulses
    if len(values) != m_pulses:
        raise ConfigError(f"phases: expected {m_pulses} values, got {len(values)}")
    return values


def _add_protocol_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--scheme", help="jp, sop or spp")
    p.add_argument("--pulses", type=int, default=3, help="number of pulses M")
    p.add_argument("--beta", type=float, help="overlap angle (units of pi)")
    p.add_argument("--b-squared", type=float, help="overlap given as b_tilde^2")
    p.add_argument("--sign", type=int, default=1, help="SOP only: -1 flips every other odd pulse")
    p.add_argument("--target", default="cplus", help="cplus, cminus or cphase:t01,t10,t11")
    p.add_argument("--metric", default="trace", help=f"fidelity metric: {', '.join(METRICS)}")
    p.add_argument("--single-photon", action="store_true",
                   help="drop the Stark phases (single-photon driving)")


def _add_optimizer_args(p: argparse.ArgumentParser) -> None:
    d = SimplexOptions()
    p.add_argument("--restarts", type=int, default=d.restarts)
    p.add_argument("--max-iter", type=int, default=d.max_iterations)
    p.add_argument("--tol", type=float, default=d.tolerance)
    p.add_argument("--seed", type=int, default=d.seed)
    p.add_argument("--initial-step", type=float, default=d.initial_step,
                   help="initial simplex edge in radians")


def build_parser() -> tuple[argparse.ArgumentParser, dict]:
    parser = argparse.ArgumentParser(
        prog="blockade-forge",
        description="Rydberg-blockade phase gates from two-photon pulse sequences.")
    parser.add_argument("--config", help="key = value file; command-line options override it")
    sub = parser.add_subparsers(dest="command", required=True)
    subs = {}

    p = sub.add_parser("gate", help="evaluate one pulse sequence")
    _add_protocol_args(p)
    p.add_argument("--s-odd", type=float, help="summed odd-pulse area (units of pi)")
    p.add_argument("--s-even", type=float, help="summed even-pulse area (units of pi)")
    p.add_argument("--phases", help="comma-separated phases (units of pi); default all zero")
    subs["gate"] = p

    p = sub.add_parser("optimize", help="optimise the pulse phases at fixed areas")
    _add_protocol_args(p)
    _add_optimizer_args(p)
    p.add_argument("--s-odd", type=float)
    p.add_argument("--s-even", type=float)
    subs["optimize"] = p

    p = sub.add_parser("scan", help="fidelity map over the summed areas")
    _add_protocol_args(p)
    _add_optimizer_args(p)
    p.add_argument("--min", type=float, help="lower bound of both axes (default: one step)")
    p.add_argument("--max", type=float, default=10.0, help="upper bound of both axes")
    for axis in ("s-odd", "s-even"):
        p.add_argument(f"--{axis}-min", type=float)
        p.add_argument(f"--{axis}-max", type=float)
    p.add_argument("--step", type=float, default=0.05)
    p.add_argument("--optimize-phases", action="store_true")
    p.add_argument("--phases", help="fixed phases when not optimising (units of pi)")
    p.add_argument("--output", default="map.csv")
    p.add_argument("--pgm", help="also write a greyscale PGM raster")
    p.add_argument("--threads", type=int,
                   help="worker threads (default: $BLOCKADE_FORGE_THREADS or CPU count)")
    p.add_argument("--refine", type=float,
                   help="refine the maximum on a finer grid within this radius (units of pi)")
    p.add_argument("--refine-candidates", type=int, default=1)
    subs["scan"] = p

    p = sub.add_parser("validate", help="run the closed-form oracle checks")
    p.add_argument("--draws", type=int, default=1000)
    p.add_argument("--ode-draws", type=int, help="draws for the integration checks (default: --draws)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mode", default="two-photon", help=f"one of {', '.join(MODES)}")
    p.add_argument("--steps", type=int, default=4000, help="integration steps per pulse")
    subs["validate"] = p
    return parser, subs


def parse_args(argv=None) -> argparse.Namespace:
    parser, subs = build_parser()
    args = parser.parse_args(argv)
    if not args.config:
        return args
    try:
        values = parse_config_file(args.config)
    except OSError as exc:
        raise ConfigError(f"cannot read config file {args.config}: {exc}") from exc
    sp = subs[args.command]
    actions = {a.dest: a for a in sp._actions if a.dest != "help"}
    defaults = {}
    for key, value in values.items():
        if key in ("config", "command"):
            raise ConfigError(f"config key {key!r} is not allowed in a config file")
        if key not in actions:
            raise ConfigError(f"unknown config key {key!r} for the {args.command} command")
        if isinstance(actions[key], argparse._StoreTrueAction):
            defaults[key] = _bool(value, key)
        else:
            defaults[key] = value
    sp.set_defaults(**defaults)
    try:
        return parser.parse_args(argv)
    except SystemExit as exc:
        raise ConfigError("invalid value in config file") from exc


def _require(args, *names):
    for name in names:
        if getattr(args, name) is None:
            raise ConfigError(f"missing required setting {name.replace('_', '-')!r}")


def protocol_from_args(args, s_odd: float = 0.0, s_even: float = 0.0,
                       phases=None) -> ProtocolSpec:
    _require(args, "scheme")
    if args.beta is not None and args.b_squared is not None:
        raise ConfigError("give either 'beta' or 'b-squared', not both")
    if args.b_squared is not None:
        beta = beta_from_b_squared(args.b_squared)
    elif args.beta is not None:
        beta = args.beta * PI
    else:
        beta = 0.0
    if args.metric not in METRICS:
        raise ConfigError(f"metric: unknown value {args.metric!r}")
    return ProtocolSpec(Scheme.parse(args.scheme), args.pulses, beta, s_odd, s_even,
                        phases=phases, sign=args.sign)


def options_from_args(args) -> SimplexOptions:
    return SimplexOptions(max_iterations=args.max_iter, tolerance=args.tol,
                          restarts=args.restarts, seed=args.seed,
                          initial_step=args.initial_step)


def _fmt_complex(z: complex) -> str:
    return f"{z.real:+.6f} {z.imag:+.6f}i"


def check_writable(path) -> None:
    """Raise ``OSError`` unless ``path`` can be created or overwritten."""
    path = Path(path)
    parent = path.parent if str(path.parent) else Path(".")
    if path.is_dir():
        raise IsADirectoryError(f"output path {path} is a directory")
    if not parent.is_dir():
        raise FileNotFoundError(f"output directory {parent} does not exist")
    if path.exists():
        if not os.access(path, os.W_OK):
            raise PermissionError(f"output file {path} is not writable")
    elif not os.access(parent, os.W_OK):
        raise PermissionError(f"output directory {parent} is not writable")


def cmd_gate(args, out=None) -> int:
    out = out or sys.stdout
    _require(args, "s_odd", "s_even")
    m = args.pulses
    spec = protocol_from_args(args, args.s_odd * PI, args.s_even * PI, parse_phases(args.phases, m))
    target = parse_target(args.target)
    gate = compose_gate(build_sequence(spec), stark=not args.single_photon)
    leak = gate.leakage()
    for label, u, lk in zip(("u00", "u01", "u10", "u11"), gate.as_array(), leak):
        print(f"{label} = {_fmt_complex(u)}   leakage {lk:.3e}", file=out)
    print(f"fidelity ({args.target}, {args.metric}): {fidelity(gate, target, args.metric):.6f}",
          file=out)
    ep = entangling_power(gate)
    flags = []
    if ep.approximate:
        flags.append("approximate")
    if ep.leakage_warning:
        flags.append("leakage warning")
    note = f" [{', '.join(flags)}]" if flags else ""
    print(f"entangling power: {ep.value:.6f} (maximum 2/9){note}", file=out)
    return EXIT_OK


def cmd_optimize(args, out=None) -> int:
    out = out or sys.stdout
    _require(args, "s_odd", "s_even")
    spec = protocol_from_args(args, args.s_odd * PI, args.s_even * PI)
    target = parse_target(args.target)
    res = optimize_phases(spec, target, options_from_args(args), metric=args.metric,
                          stark=not args.single_photon)
    print("phases (units of pi): " + ", ".join(f"{p / PI:.6f}" for p in res.best_phases), file=out)
    print(f"fidelity ({args.target}, {args.metric}): {res.best_fidelity:.6f}", file=out)
    print(f"evaluations: {res.evaluations} over {res.restarts_used} restarts", file=out)
    return EXIT_OK


def grid_from_args(args, m_pulses: int) -> GridSpec:
    step = args.step * PI
    lo = args.min * PI if args.min is not None else step
    hi = args.max * PI

    def pick(value, default):
        return value * PI if value is not None else default

    fixed = None if args.optimize_phases else parse_phases(args.phases, m_pulses)
    return GridSpec(pick(args.s_odd_min, lo), pick(args.s_odd_max, hi),
                    pick(args.s_even_min, lo), pick(args.s_even_max, hi), step, fixed)


def cmd_scan(args, out=None) -> int:
    out = out or sys.stdout
    spec = protocol_from_args(args)
    target = parse_target(args.target)
    grid = grid_from_args(args, spec.m_pulses)
    opts = options_from_args(args)
    if args.threads is not None and args.threads < 1:
        raise ConfigError("threads must be >= 1")
    check_writable(args.output)
    if args.pgm:
        check_writable(args.pgm)
    fmap = scan(spec, target, grid, opts, metric=args.metric, stark=not args.single_photon,
                threads=args.threads)
    write_map_csv(args.output, fmap)
    if args.pgm:
        write_pgm(args.pgm, fmap)
    rows, cols = fmap.shape
    best = map_max(fmap)
    print(f"wrote {rows * cols} points ({rows} x {cols}) to {args.output}", file=out)
    print(f"maximum fidelity {best.fidelity:.6f} at s_odd = {best.s_odd / PI:.4f} pi, "
          f"s_even = {best.s_even / PI:.4f} pi", file=out)
    if args.refine is not None:
        ref = refine_max(fmap, args.refine * PI, candidates=args.refine_candidates,
                         threads=args.threads)
        print(f"refined maximum {ref.fidelity:.6f} at s_odd = {ref.s_odd / PI:.4f} pi, "
              f"s_even = {ref.s_even / PI:.4f} pi, phases (pi) = "
              + ", ".join(f"{p / PI:.6f}" for p in ref.phases), file=out)
    return EXIT_OK


def cmd_validate(args, out=None) -> int:
    out = out or sys.stdout
    if args.mode not in MODES:
        raise ConfigError(f"mode: unknown value {args.mode!r}")
    results = run_validation(args.draws, args.seed, args.mode, args.ode_draws, args.steps)
    for r in results:
        print(r.line(), file=out)
    failed = [r.name for r in results if not r.passed]
    if failed:
        print("validation failed: " + "; ".join(failed), file=out)
        return EXIT_VALIDATION
    print("all checks passed", file=out)
    return EXIT_OK


COMMANDS = {"gate": cmd_gate, "optimize": cmd_optimize, "scan": cmd_scan,
            "validate": cmd_validate}


def main(argv=None) -> int:
    try:
        args = parse_args(argv)
        return COMMANDS[args.command](args)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else EXIT_CONFIG
    except (ConfigError, InvalidSpecError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO

