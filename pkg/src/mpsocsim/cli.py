"""Command-line driver.

Verbs:
  run      one experiment (config x benchmark x arrangement list) -> CSV
  sweep    Cartesian parameter grid -> CSV
  analyze  derived metrics (speedups, saturation, crossover) from a CSV
  presets  list the built-in configurations

Exit codes: 0 success, 1 validation or verification failure, 2 simulation
deadlock, 3 I/O error.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import dse
from .config import (
    Arrangement,
    PRESET_NAMES,
    parse_config,
    preset,
    serialize,
    validate,
)
from .errors import (
    AnalysisError,
    ConfigError,
    DeadlockError,
    MemoryMapError,
    MpsocsimError,
    SingularityError,
    ValidationError,
    ValueRangeError,
    VerificationError,
)


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", metavar="FILE", help="config document to load")
    p.add_argument("--preset", metavar="NAME", help="named base configuration")
    p.add_argument("--benchmark", choices=dse.BENCHMARKS, default="stream")
    p.add_argument("--arrangements", default="1x1",
                   help="comma-separated (nodes,cores) points, e.g. 1x1,4x4,16x1")
    p.add_argument("--seed", type=int, default=1, metavar="U64")
    p.add_argument("--out", metavar="CSV", help="write results to this file")
    # benchmark parameters
    p.add_argument("--stream-n", type=int, default=128000, metavar="N")
    p.add_argument("--reps", type=int, default=10, metavar="R")
    p.add_argument("--q-scale", type=float, default=3.0, metavar="Q")
    p.add_argument("--matmul-n", type=int, default=128, metavar="N")
    p.add_argument("--matmul-k", type=int, default=128, metavar="K")
    p.add_argument("--matmul-m", type=int, default=128, metavar="M")
    p.add_argument("--bodies", type=int, default=4096, metavar="N")
    p.add_argument("--timesteps", type=int, default=10, metavar="T")
    p.add_argument("--dt", type=float, default=0.01)
    p.add_argument("--g-const", type=float, default=1.0)


def _load_config(args):
    if args.config:
        with open(args.config) as fh:
            cfg = parse_config(fh.read())
    elif args.preset:
        cfg = preset(args.preset)
    else:
        cfg = preset("BASE")
    report = validate(cfg)
    if report:
        raise ValidationError(report)
    return cfg


def _build_spec(args) -> dse.ExperimentSpec:
    cfg = _load_config(args)
    arrs = tuple(Arrangement.parse(a) for a in args.arrangements.split(","))
    if args.benchmark == "stream":
        params = {"n": args.stream_n, "reps": args.reps, "q": args.q_scale}
    elif args.benchmark == "matmul":
        params = {"n": args.matmul_n, "k": args.matmul_k, "m": args.matmul_m}
    else:
        params = {"n": args.bodies, "steps": args.timesteps,
                  "dt": args.dt, "g": args.g_const}
    return dse.ExperimentSpec(cfg, args.benchmark, params, arrs, args.seed)


def _print_rows(rows) -> None:
    print(",".join(dse.CSV_COLUMNS))
    for r in rows:
        print(",".join(str(x) if x is not None else "" for x in (
            r.config_id, r.benchmark, r.arrangement, r.cycles,
            r.bandwidth_bytes_per_cycle, r.speedup_vs_single,
            round(r.cache_hit_rate, 6), round(r.bus_utilization, 6),
            r.flit_hops, r.packets)))


def _cmd_run(args) -> int:
    rows = dse.run_experiment(_build_spec(args))
    if args.out:
        dse.emit_csv(rows, args.out)
    else:
        _print_rows(rows)
    return 0


def _cmd_sweep(args) -> int:
    axes = {}
    for ax in args.axis or []:
        try:
            key, vals = ax.split("=", 1)
        except ValueError:
            raise ValueRangeError(f"bad --axis {ax!r}; use key=v1,v2,...") from None
        axes[key] = vals.split(",")
    diags: list[str] = []
    rows = dse.sweep(_build_spec(args), axes, jobs=args.jobs, diagnostics=diags)
    for d in diags:
        print(f"skipped: {d}", file=sys.stderr)
    if args.out:
        dse.emit_csv(rows, args.out)
    else:
        _print_rows(rows)
    return 0


def _cmd_analyze(args) -> int:
    rows = dse.read_csv(args.infile)
    report = dse.analyze(rows)
    text = json.dumps(report, indent=2, sort_keys=True)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return 0


def _cmd_presets(_args) -> int:
    for name in PRESET_NAMES:
        cfg = preset(name)
        cache = cfg.cache
        print(f"{name}: {cfg.mesh_x}x{cfg.mesh_y} mesh, {cfg.cores_per_node} "
              f"cores/node, cache {cache.total_bytes // 1024} KiB "
              f"({cache.n_sets}x{cache.n_ways}x{cache.line_bytes}), "
              f"router {cfg.router_kind.value}, {cfg.flow_control.value}")
    return 0


def _cmd_show_config(args) -> int:
    print(serialize(_load_config(args)), end="")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mpsocsim", description=__doc__,
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = ap.add_subparsers(dest="verb", required=True)

    p_run = sub.add_parser("run", help="run one experiment")
    _add_common(p_run)
    p_run.set_defaults(func=_cmd_run)

    p_sweep = sub.add_parser("sweep", help="run a parameter grid")
    _add_common(p_sweep)
    p_sweep.add_argument("--axis", action="append", metavar="KEY=V1,V2",
                         help="grid axis (cores, cache.n_ways, timing.*, ...)")
    p_sweep.add_argument("--jobs", type=int, default=1, metavar="N")
    p_sweep.set_defaults(func=_cmd_sweep)

    p_an = sub.add_parser("analyze", help="derive metrics from a result CSV")
    p_an.add_argument("--in", dest="infile", required=True, metavar="CSV")
    p_an.add_argument("--out", metavar="JSON")
    p_an.set_defaults(func=_cmd_analyze)

    p_pre = sub.add_parser("presets", help="list built-in configurations")
    p_pre.set_defaults(func=_cmd_presets)

    p_show = sub.add_parser("show-config", help="print the effective config document")
    p_show.add_argument("--config", metavar="FILE")
    p_show.add_argument("--preset", metavar="NAME")
    p_show.set_defaults(func=_cmd_show_config)

    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except DeadlockError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (ConfigError, ValidationError, VerificationError, MemoryMapError,
            SingularityError, AnalysisError, MpsocsimError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
