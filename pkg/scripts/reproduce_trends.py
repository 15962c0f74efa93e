#!/usr/bin/env python3
"""Regenerate the headline trend datasets as CSV + JSON reports.

Produces, in the output directory:
  stream_saturation.csv     COPY/SCALE/ADD/TRIAD bandwidth vs core count
  matmul_scaling.csv        128^3 matmul cycles vs core count (BASE32)
  nbody_scaling.csv         4096-body cycles vs core count (BASE32)
  cache_sweep.csv           matmul 128^3 over cache ways x core counts
  noc_matmul.csv            matmul (512,128,32): 16-core SMP vs (16,1)/(4,4)
  nbody_crossover.csv       32-core SMP vs (8,4) mesh over body counts
  crossover_report.json     analyze() output for the crossover dataset

Full fidelity takes a few minutes; --quick shrinks the workloads (the
trends stay visible but the absolute numbers change).
"""

import argparse
import json
import pathlib
import sys
import warnings

from mpsocsim.benchmarks import stream_run
from mpsocsim.config import Arrangement, preset
from mpsocsim.dse import (
    CSV_COLUMNS,
    ExperimentSpec,
    ResultRow,
    analyze,
    emit_csv,
    run_experiment,
    sweep,
)


def stream_rows(n, reps):
    rows = []
    base = None
    for cores in (1, 2, 4, 8, 16, 32):
        res = stream_run(preset("BASE32"), n, cores, reps=reps)
        if base is None:
            base = res.cycles
        rows.append(ResultRow(
            "BASE32", f"stream(n={n},reps={reps})", f"(1,{cores})",
            res.cycles, res.bandwidths["copy"], base / res.cycles,
            res.stats.cache_hit_rate, res.stats.bus_utilization, 0, 0))
    return rows


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="trends", metavar="DIR")
    ap.add_argument("--quick", action="store_true")
    args = ap.parse_args()
    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    warnings.simplefilter("ignore")

    q = args.quick
    arrs = tuple(Arrangement(1, c) for c in (1, 2, 4, 8, 16, 32))

    print("stream saturation ...")
    emit_csv(stream_rows(n=16_000 if q else 128_000, reps=2 if q else 10),
             out / "stream_saturation.csv")

    print("matmul scaling ...")
    nkm = 64 if q else 128
    spec = ExperimentSpec(preset("BASE32"), "matmul",
                          {"n": nkm, "k": nkm, "m": nkm}, arrs)
    emit_csv(run_experiment(spec), out / "matmul_scaling.csv")

    print("nbody scaling ...")
    bodies = 1024 if q else 4096
    spec = ExperimentSpec(preset("BASE32"), "nbody",
                          {"n": bodies, "steps": 10}, arrs)
    emit_csv(run_experiment(spec), out / "nbody_scaling.csv")

    print("cache sweep ...")
    spec = ExperimentSpec(preset("BASE"), "matmul",
                          {"n": nkm, "k": nkm, "m": nkm}, (Arrangement(1, 1),))
    rows = sweep(spec, {"cache.n_ways": [4, 8, 16], "cores": [1, 2, 4]})
    emit_csv(rows, out / "cache_sweep.csv")

    print("noc matmul comparison ...")
    mm_n = 256 if q else 512
    rows = run_experiment(ExperimentSpec(
        preset("BASE32"), "matmul", {"n": mm_n, "k": 128, "m": 32},
        (Arrangement(1, 16),)))
    rows += run_experiment(ExperimentSpec(
        preset("NOC_SW_C"), "matmul", {"n": mm_n, "k": 128, "m": 32},
        (Arrangement(16, 1), Arrangement(4, 4))))
    emit_csv(rows, out / "noc_matmul.csv")

    print("nbody crossover ...")
    sizes = (512, 1024, 2048) if q else (512, 1024, 2048, 4096, 8192)
    rows = []
    for n in sizes:
        rows += run_experiment(ExperimentSpec(
            preset("BASE32"), "nbody", {"n": n, "steps": 10}, (Arrangement(1, 32),)))
        rows += run_experiment(ExperimentSpec(
            preset("NOC_SW_C"), "nbody", {"n": n, "steps": 10}, (Arrangement(8, 4),)))
    emit_csv(rows, out / "nbody_crossover.csv")
    report = analyze(rows)
    (out / "crossover_report.json").write_text(
        json.dumps(report, indent=2, sort_keys=True) + "\n")
    cross = report.get("crossover", {})
    print(f"done; crossover at {cross.get('body_count')} bodies "
          f"({cross.get('qualifier')}); files in {out}/")
    return 0


if __name__ == "__main__":
    sys.exit(main())
