#!/usr/bin/env python3
"""Compare the jitted kernels against the pure-Python fallback.

Runs the same fixed workloads in two subprocesses (MPSOCSIM_NO_NUMBA=0/1),
checks the statistics are byte-identical, and prints a timing table.

Usage: python3 scripts/benchmark_paths.py [--scale small|medium]
"""

import argparse
import json
import os
import subprocess
import sys
import textwrap

WORKER = textwrap.dedent("""
    import json, sys, time, warnings
    warnings.simplefilter("ignore")
    import mpsocsim
    from mpsocsim.benchmarks import matmul_run, nbody_run, stream_run
    from mpsocsim.config import Arrangement, preset

    scale = sys.argv[1]
    sizes = {
        "small":  dict(stream_n=2048, mm=24, nb=48, nb_steps=1),
        "medium": dict(stream_n=16384, mm=48, nb=128, nb_steps=2),
    }[scale]

    results = {"path": "numba" if mpsocsim.USING_NUMBA else "python", "runs": {}}

    # load/compile the kernels outside the timed region
    stream_run(preset("BASE32"), 64, 1, reps=1)
    matmul_run(preset("BASE32"), 8, 8, 8, Arrangement(1, 1), seed=1)
    nbody_run(preset("NOC_SW_C"), 16, 1, Arrangement(2, 1), seed=1)

    def timed(name, fn):
        t0 = time.perf_counter()
        out = fn()
        dt = time.perf_counter() - t0
        results["runs"][name] = {
            "seconds": dt,
            "fingerprint": out.stats.fingerprint().hex()[:32],
            "cycles": out.stats.total_cycles,
        }

    timed("stream", lambda: stream_run(preset("BASE32"), sizes["stream_n"], 4, reps=2))
    timed("matmul", lambda: matmul_run(preset("BASE32"), sizes["mm"], sizes["mm"],
                                       sizes["mm"], Arrangement(1, 4), seed=7))
    timed("nbody-smp", lambda: nbody_run(preset("BASE32"), sizes["nb"],
                                         sizes["nb_steps"], Arrangement(1, 4), seed=7))
    timed("nbody-noc", lambda: nbody_run(preset("NOC_SW_C"), sizes["nb"],
                                         sizes["nb_steps"], Arrangement(4, 2), seed=7))
    print(json.dumps(results))
""")


def run_path(no_numba: bool, scale: str) -> dict:
    env = dict(os.environ)
    env["MPSOCSIM_NO_NUMBA"] = "1" if no_numba else "0"
    out = subprocess.run([sys.executable, "-c", WORKER, scale],
                         capture_output=True, text=True, env=env, check=True)
    return json.loads(out.stdout.strip().splitlines()[-1])


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--scale", choices=("small", "medium"), default="small")
    args = ap.parse_args()

    jit = run_path(no_numba=False, scale=args.scale)
    plain = run_path(no_numba=True, scale=args.scale)

    print(f"{'workload':<12}{'cycles':>14}{'numba [s]':>12}{'python [s]':>12}"
          f"{'speedup':>9}  identical")
    all_same = True
    for name in jit["runs"]:
        j, p = jit["runs"][name], plain["runs"][name]
        same = j["fingerprint"] == p["fingerprint"] and j["cycles"] == p["cycles"]
        all_same &= same
        ratio = p["seconds"] / j["seconds"] if j["seconds"] else float("inf")
        print(f"{name:<12}{j['cycles']:>14}{j['seconds']:>12.3f}"
              f"{p['seconds']:>12.3f}{ratio:>8.0f}x  {'yes' if same else 'NO'}")
    if not all_same:
        print("ERROR: paths diverged", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
