"""Command-line entry point: run, sweep, validate and serve subcommands.

Configuration precedence is CLI flag > spec file > built-in default.  Spec
files are flat key=value lines; keys match the long option names with
underscores.  Exit codes: 0 success, 1 validation failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .bench import FUSED, SPLIT_OVERLAP, BenchError, ImbalanceProfile, \
    RunConfig, SweepSpec, run_once, run_sweep, SweepRow, run_id_for
from .csvio import emit_csv
from .grid import GridConfig, GridError
from .metrics import EnergyModel
from .runtime import Scheduling, SHARED_HANDOFF, COPY_THROUGH
from .solver import PhysicsSystem, SolverConfig
from .validate import format_report, run_validation

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2

_STRATEGIES = {"fused": FUSED, "split-overlap": SPLIT_OVERLAP,
               "split_overlap": SPLIT_OVERLAP}
_PATHS = {"shared-handoff": SHARED_HANDOFF, "shared_handoff": SHARED_HANDOFF,
          "copy-through": COPY_THROUGH, "copy_through": COPY_THROUGH}
_RECONSTRUCTIONS = {"first-order": "first_order", "first_order": "first_order",
                    "plm-minmod": "plm_minmod", "plm_minmod": "plm_minmod"}


class UsageError(Exception):
    pass


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--config", metavar="FILE",
                   help="key=value spec file (CLI flags take precedence)")
    p.add_argument("--nx", type=int, default=64,
                   help="cells per axis (cube), default 64")
    p.add_argument("--block", type=int, default=16,
                   help="block size B, default 16")
    p.add_argument("--system", choices=("advection", "euler"),
                   default="advection")
    p.add_argument("--velocity", default="1,0,0",
                   help="advection velocity vx,vy,vz")
    p.add_argument("--gamma", type=float, default=1.4)
    p.add_argument("--reconstruction", choices=sorted(_RECONSTRUCTIONS),
                   default="plm-minmod")
    p.add_argument("--cfl", type=float, default=0.4)
    p.add_argument("--steps", type=int, default=10)
    p.add_argument("--ranks", type=int, default=1)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--strategy", choices=sorted(_STRATEGIES), default="fused")
    p.add_argument("--scheduling", choices=("static", "dynamic"),
                   default="static")
    p.add_argument("--chunk", type=int, default=1,
                   help="dynamic scheduling chunk size")
    p.add_argument("--path", choices=sorted(_PATHS), default="shared-handoff",
                   help="intra-node delivery path")
    p.add_argument("--imbalance-k", type=int, default=1,
                   help="max synthetic work multiplier (1 = off)")
    p.add_argument("--imbalance-seed", type=int, default=0)
    p.add_argument("--node-power", type=float, default=None,
                   help="average watts per node; enables energy accounting")
    p.add_argument("--nodes", type=int, default=1)
    p.add_argument("--carbon-intensity", type=float, default=275.0,
                   help="gCO2e per kWh")
    p.add_argument("--output", metavar="CSV", default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="halolab",
        description="Block-grid halo-exchange proxy benchmark")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p_run = sub.add_parser("run", help="execute one configuration")
    _add_common(p_run)
    p_run.add_argument("--reps", type=int, default=1)

    p_sweep = sub.add_parser("sweep", help="execute a configuration matrix")
    _add_common(p_sweep)
    p_sweep.add_argument("--reps", type=int, default=5)
    p_sweep.add_argument("--scaling", choices=("strong", "weak"),
                         default="strong")
    p_sweep.add_argument("--cells-per-core", type=int, default=65536)
    p_sweep.add_argument("--configs", default="1x1",
                         help="comma list of RANKSxTHREADS, e.g. 1x1,2x2")
    p_sweep.add_argument("--strategies", default="fused",
                         help="comma list from {fused,split-overlap}")
    p_sweep.add_argument("--schedulings", default="static",
                         help="comma list from {static,dynamic}")
    p_sweep.add_argument("--paths", default="shared-handoff",
                         help="comma list of intra-node paths")

    p_val = sub.add_parser("validate", help="run the oracle suite")
    p_val.add_argument("--fault-inject", action="store_true",
                       help=argparse.SUPPRESS)  # test hook

    p_serve = sub.add_parser("serve", help="start the HTTP service")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8177)
    return parser


def load_spec_file(path: str) -> dict:
    """Flat key=value lines; '#' starts a comment; unknown keys rejected."""
    values = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        values[key.replace("-", "_")] = value
    return values


def apply_spec_file(parser: argparse.ArgumentParser, argv: list[str]) -> list[str]:
    """Fold --config file values in as parser defaults (CLI flags win)."""
    if "--config" not in argv:
        return argv
    idx = argv.index("--config")
    try:
        path = argv[idx + 1]
    except IndexError:
        raise UsageError("--config requires a file path")
    values = load_spec_file(path)
    known = {a.dest for sp in parser._subparsers._group_actions
             for a in sp.choices.values() for a in a._actions}
    unknown = set(values) - known
    if unknown:
        raise UsageError(f"unknown keys in {path}: {sorted(unknown)}")
    for sp in parser._subparsers._group_actions:
        for sub in sp.choices.values():
            defaults = {}
            dests = {a.dest: a for a in sub._actions}
            for key, val in values.items():
                if key in dests:
                    action = dests[key]
                    if action.type is int:
                        defaults[key] = int(val)
                    elif action.type is float:
                        defaults[key] = float(val)
                    else:
                        defaults[key] = val
            sub.set_defaults(**defaults)
    return argv


def _grid_from(args) -> GridConfig:
    return GridConfig(args.nx, args.nx, args.nx, args.block)


def _system_from(args) -> PhysicsSystem:
    if args.system == "advection":
        parts = [float(v) for v in args.velocity.split(",")]
        if len(parts) != 3:
            raise UsageError(f"--velocity needs 3 components, got {args.velocity!r}")
        return PhysicsSystem("advection", tuple(parts))
    return PhysicsSystem("euler", gamma=args.gamma)


def _solver_from(args) -> SolverConfig:
    return SolverConfig(reconstruction=_RECONSTRUCTIONS[args.reconstruction],
                        cfl=args.cfl)


def _scheduling_from(kind: str, chunk: int) -> Scheduling:
    return Scheduling("static_blocked") if kind == "static" \
        else Scheduling("dynamic", chunk)


def _energy_from(args) -> EnergyModel | None:
    if args.node_power is None:
        return None
    return EnergyModel(args.node_power, args.nodes, args.carbon_intensity)


def _imbalance_from(args) -> ImbalanceProfile | None:
    if args.imbalance_k <= 1:
        return None
    return ImbalanceProfile(args.imbalance_seed, args.imbalance_k)


def run_config_from_args(args) -> RunConfig:
    return RunConfig(
        grid=_grid_from(args), system=_system_from(args),
        solver=_solver_from(args), steps=args.steps, ranks=args.ranks,
        threads=args.threads, strategy=_STRATEGIES[args.strategy],
        scheduling=_scheduling_from(args.scheduling, args.chunk),
        path=_PATHS[args.path], imbalance=_imbalance_from(args),
        energy=_energy_from(args))


def cmd_run(args) -> int:
    cfg = run_config_from_args(args)
    rows = []
    for rep in range(args.reps):
        try:
            result = run_once(cfg)
        except Exception as exc:  # runtime failure, not a usage problem
            print(f"run failed: {exc}", file=sys.stderr)
            return EXIT_FAIL
        rows.append(SweepRow(run_id_for(cfg, rep), rep, result.metrics))
        m = result.metrics
        print(f"rep {rep}: wall {m.wall_s:.4f} s, {m.mcups:.3f} Mcup/s, "
              f"hash {m.state_hash[:12]}")
    if args.output:
        emit_csv(rows, args.output)
        print(f"wrote {args.output}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    configs = []
    for token in args.configs.split(","):
        r, _, t = token.lower().partition("x")
        try:
            configs.append((int(r), int(t)))
        except ValueError:
            raise UsageError(f"bad --configs entry {token!r}")
    spec = SweepSpec(
        scaling=args.scaling, grid=_grid_from(args),
        cells_per_core=args.cells_per_core, configs=tuple(configs),
        strategies=tuple(_STRATEGIES[s] for s in args.strategies.split(",")),
        schedulings=tuple(_scheduling_from(s, args.chunk)
                          for s in args.schedulings.split(",")),
        paths=tuple(_PATHS[p] for p in args.paths.split(",")),
        steps=args.steps, repetitions=args.reps, system=_system_from(args),
        solver=_solver_from(args), imbalance=_imbalance_from(args),
        energy=_energy_from(args))
    rows, summaries = run_sweep(spec)
    for key, median in summaries.items():
        print(f"{key}: median wall {median:.4f} s")
    out = args.output or "sweep_results.csv"
    emit_csv(rows, out)
    manifest = Path(out).with_suffix(".manifest.json")
    manifest.write_text(json.dumps({
        "scaling": spec.scaling, "nx": spec.grid.nx,
        "block": spec.grid.block_size, "cells_per_core": spec.cells_per_core,
        "configs": list(spec.configs), "strategies": list(spec.strategies),
        "schedulings": [s.label() for s in spec.schedulings],
        "paths": list(spec.paths), "steps": spec.steps,
        "repetitions": spec.repetitions, "system": spec.system.kind,
        "reconstruction": spec.solver.reconstruction,
    }, indent=2))
    print(f"wrote {out} and {manifest}")
    nerrors = sum(1 for r in rows if r.metrics.error)
    return EXIT_FAIL if nerrors else EXIT_OK


def cmd_validate(args) -> int:
    results = run_validation(fault_skip_exchange=args.fault_inject)
    print(format_report(results))
    return EXIT_OK if all(r.passed for r in results) else EXIT_FAIL


def cmd_serve(args) -> int:
    import uvicorn

    from .service import app
    uvicorn.run(app, host=args.host, port=args.port)
    return EXIT_OK


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        argv = apply_spec_file(parser, argv)
        try:
            args = parser.parse_args(argv)
        except SystemExit as exc:
            return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
        handler = {"run": cmd_run, "sweep": cmd_sweep,
                   "validate": cmd_validate, "serve": cmd_serve}[args.subcommand]
        return handler(args)
    except (UsageError, GridError, BenchError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
