"""Design-space exploration: single experiments, parameter sweeps, derived
metrics (speedup, saturation, SMP/NoC crossover) and CSV reports.

The designer loop is iterative CLI invocations over config files; reports
are deterministic (byte-identical for identical specs) so successive
iterations diff cleanly.
"""

from __future__ import annotations

import csv
import re
from dataclasses import dataclass, field, replace

from .benchmarks import FLOPS_PER_PAIR, matmul_run, nbody_run, stream_run
from .config import Arrangement, SystemConfig, validate
from .errors import AnalysisError, UnknownKeyError, ValidationError, ValueRangeError

CSV_COLUMNS = (
    "config_id", "benchmark", "arrangement", "cycles",
    "bandwidth_bytes_per_cycle", "speedup_vs_single", "cache_hit_rate",
    "bus_utilization", "flit_hops", "packets",
)

BENCHMARKS = ("stream", "matmul", "nbody")


@dataclass(frozen=True)
class ExperimentSpec:
    config: SystemConfig
    benchmark: str                      # stream | matmul | nbody
    params: dict = field(default_factory=dict)
    arrangements: tuple[Arrangement, ...] = (Arrangement(1, 1),)
    seed: int = 1

    def __post_init__(self):
        if self.benchmark not in BENCHMARKS:
            raise ValueRangeError(
                f"unknown benchmark {self.benchmark!r}; choose from {BENCHMARKS}")
        for arr in self.arrangements:
            if arr.nodes > self.config.n_nodes:
                raise ValueRangeError(
                    f"arrangement {arr} exceeds the config's "
                    f"{self.config.mesh_x}x{self.config.mesh_y} mesh")


@dataclass
class ResultRow:
    config_id: str
    benchmark: str
    arrangement: str
    cycles: int
    bandwidth_bytes_per_cycle: float | None
    speedup_vs_single: float | None
    cache_hit_rate: float
    bus_utilization: float
    flit_hops: int
    packets: int


def _benchmark_id(name: str, params: dict) -> str:
    if name == "stream":
        return f"stream(n={params.get('n', 128000)},reps={params.get('reps', 10)})"
    if name == "matmul":
        return (f"matmul(n={params.get('n', 128)},k={params.get('k', 128)},"
                f"m={params.get('m', 128)})")
    return f"nbody(n={params.get('n', 4096)},steps={params.get('steps', 10)})"


_BENCH_RE = re.compile(r"(\w+)\(([^)]*)\)")


def parse_benchmark_id(text: str) -> tuple[str, dict]:
    m = _BENCH_RE.fullmatch(text.strip())
    if not m:
        raise AnalysisError(f"cannot parse benchmark id {text!r}")
    params = {}
    for part in m.group(2).split(","):
        if part:
            k, v = part.split("=")
            params[k] = int(v)
    return m.group(1), params


def _with_arrangement_context(exc: Exception, arr: Arrangement) -> Exception:
    """Prefix the failing arrangement; falls back to the original exception
    for classes whose constructor does not take a message string.
    """
    try:
        return type(exc)(f"arrangement {arr}: {exc}")
    except Exception:
        return exc


def run_experiment(spec: ExperimentSpec) -> list[ResultRow]:
    """One ResultRow per arrangement, deterministic given the spec."""
    rows: list[ResultRow] = []
    bench_id = _benchmark_id(spec.benchmark, spec.params)
    p = spec.params
    for arr in spec.arrangements:
        try:
            if spec.benchmark == "stream":
                if arr.nodes != 1:
                    raise ValueRangeError("STREAM is a single-node benchmark")
                res = stream_run(spec.config, p.get("n", 128000),
                                 arr.cores_per_node, p.get("reps", 10),
                                 p.get("q", 3.0))
                bw = res.bandwidths["copy"]
                stats = res.stats
            elif spec.benchmark == "matmul":
                res = matmul_run(spec.config, p.get("n", 128), p.get("k", 128),
                                 p.get("m", 128), arr, spec.seed)
                bw = None
                stats = res.stats
            else:
                res = nbody_run(spec.config, p.get("n", 4096),
                                p.get("steps", 10), arr, spec.seed,
                                p.get("g", 1.0), p.get("dt", 0.01))
                bw = None
                stats = res.stats
        except Exception as exc:
            raise _with_arrangement_context(exc, arr) from exc
        rows.append(ResultRow(
            config_id=spec.config.label,
            benchmark=bench_id,
            arrangement=str(arr),
            cycles=stats.total_cycles,
            bandwidth_bytes_per_cycle=bw,
            speedup_vs_single=None,
            cache_hit_rate=stats.cache_hit_rate,
            bus_utilization=stats.bus_utilization,
            flit_hops=stats.flit_hops,
            packets=stats.packets_sent,
        ))
    _fill_speedups(rows)
    return rows


def _total_cores(arrangement: str) -> int:
    arr = Arrangement.parse(arrangement)
    return arr.total_cores


def _fill_speedups(rows: list[ResultRow]) -> None:
    """speedup_vs_single = single-core-arrangement cycles / row cycles,
    within rows that share (config_id, benchmark).
    """
    groups: dict[tuple[str, str], list[ResultRow]] = {}
    for r in rows:
        groups.setdefault((r.config_id, r.benchmark), []).append(r)
    for grp in groups.values():
        base = next((r for r in grp if _total_cores(r.arrangement) == 1), None)
        if base is None:
            continue
        for r in grp:
            r.speedup_vs_single = base.cycles / r.cycles


# ---------------------------------------------------------------------------
# Sweeps
# ---------------------------------------------------------------------------

def _apply_axis(cfg: SystemConfig, arrs: tuple[Arrangement, ...], key: str, value):
    """Returns (cfg, arrangements) with one axis value applied.  ``cores``
    rewrites the arrangement list; cache.* and timing.* touch the config.
    """
    key = key.strip()
    if key in ("cores", "cores_per_node"):
        return cfg, (Arrangement(1, int(value)),)
    if key == "coherence":
        return replace(cfg, coherence_enabled=bool(int(value))), arrs
    if key.startswith("cache.") or key in ("n_sets", "n_ways", "line_bytes"):
        attr = key.split(".", 1)[-1]
        if attr not in ("n_sets", "n_ways", "line_bytes"):
            raise UnknownKeyError(f"unknown cache axis {key!r}")
        return replace(cfg, cache=replace(cfg.cache, **{attr: int(value)})), arrs
    if key.startswith("timing."):
        attr = key.split(".", 1)[1]
        if not hasattr(cfg.timing, attr):
            raise UnknownKeyError(f"unknown timing axis {key!r}")
        return replace(cfg, timing=replace(cfg.timing, **{attr: int(value)})), arrs
    raise UnknownKeyError(f"unknown sweep axis {key!r}; use cores, coherence, "
                          "cache.<field> or timing.<field>")


def sweep(spec: ExperimentSpec, axes: dict[str, list], jobs: int = 1,
          diagnostics: list | None = None) -> list[ResultRow]:
    """Cartesian product over axis values; invalid points are reported into
    ``diagnostics`` and skipped.  Row order follows grid order (first axis
    slowest), independent of ``jobs``.
    """
    keys = list(axes)
    grid: list[dict] = [{}]
    for k in keys:
        grid = [dict(g, **{k: v}) for g in grid for v in axes[k]]

    points = []
    for gi, assignment in enumerate(grid):
        cfg, arrs = spec.config, spec.arrangements
        label_parts = []
        try:
            for k, v in assignment.items():
                cfg, arrs = _apply_axis(cfg, arrs, k, v)
                if k not in ("cores", "cores_per_node"):
                    # the cores axis varies the arrangement, not the config,
                    # so those rows must share one speedup baseline
                    label_parts.append(f"{k}={v}")
            cfg = replace(cfg, label=spec.config.label + (
                "[" + ",".join(label_parts) + "]" if label_parts else ""))
            report = validate(cfg)
            if report:
                raise ValidationError(report)
            points.append((gi, ExperimentSpec(cfg, spec.benchmark, spec.params,
                                              tuple(arrs), spec.seed)))
        except Exception as exc:
            if diagnostics is not None:
                diagnostics.append(f"point {assignment}: {exc}")
    if not points:
        raise AnalysisError("all sweep points were invalid")

    if jobs > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(run_experiment, [s for _, s in points]))
    else:
        results = [run_experiment(s) for _, s in points]

    rows: list[ResultRow] = []
    for rws in results:
        rows.extend(rws)
    _fill_speedups(rows)
    return rows


# ---------------------------------------------------------------------------
# Analysis
# ---------------------------------------------------------------------------

def _speedup_series(rows: list[ResultRow]) -> list[tuple[int, float]]:
    by_cores: dict[int, ResultRow] = {}
    for r in rows:
        by_cores[_total_cores(r.arrangement)] = r
    if 1 not in by_cores:
        return []
    base = by_cores[1].cycles
    return sorted((c, base / r.cycles) for c, r in by_cores.items())


def analyze(rows: list[ResultRow]) -> dict:
    """Derive speedups, the saturation point (first core count whose
    marginal speedup gain drops below 10%) and, when both a single-node and
    a multi-node system were swept over N-body sizes, the SMP/NoC crossover
    body count (linear interpolation on the cycle difference).
    """
    if not rows:
        raise AnalysisError("no rows to analyze")
    report: dict = {}

    # speedups and saturation per (config, benchmark) family
    families: dict[tuple[str, str], list[ResultRow]] = {}
    for r in rows:
        families.setdefault((r.config_id, r.benchmark), []).append(r)
    speedup_table = {}
    saturation = {}
    for (cfg_id, bench), fam in sorted(families.items()):
        series = _speedup_series(fam)
        if len(series) < 2:
            continue
        key = f"{cfg_id}|{bench}"
        speedup_table[key] = [[c, s] for c, s in series]
        sat = None
        for (c1, s1), (c2, s2) in zip(series, series[1:]):
            if s1 > 0 and (s2 - s1) / s1 < 0.10:
                sat = c2
                break
        saturation[key] = sat
    report["speedup"] = speedup_table
    report["saturation_point"] = saturation

    # FLOPs/cycle for N-body rows
    flops = {}
    for r in rows:
        name, params = parse_benchmark_id(r.benchmark)
        if name != "nbody":
            continue
        n, steps = params["n"], params["steps"]
        total = FLOPS_PER_PAIR * n * (n - 1) * steps
        flops[f"{r.config_id}|{r.benchmark}|{r.arrangement}"] = total / r.cycles
    if flops:
        report["flops_per_cycle"] = flops

    # SMP/NoC crossover over N-body sizes
    smp: dict[int, int] = {}
    noc: dict[int, int] = {}
    for r in rows:
        name, params = parse_benchmark_id(r.benchmark)
        if name != "nbody":
            continue
        n = params["n"]
        if Arrangement.parse(r.arrangement).nodes == 1:
            smp[n] = r.cycles
        else:
            noc[n] = r.cycles
    common = sorted(set(smp) & set(noc))
    if len(common) >= 2:
        report["crossover"] = _crossover(common, smp, noc)
    return report


def _crossover(sizes: list[int], smp: dict[int, int], noc: dict[int, int]) -> dict:
    diffs = [smp[n] - noc[n] for n in sizes]   # positive => NoC faster
    first = next((i for i, d in enumerate(diffs) if d > 0), None)
    if first is None:
        return {"body_count": None, "qualifier": "none"}
    if first == 0:
        return {"body_count": sizes[0], "qualifier": "<="}
    n0, n1 = sizes[first - 1], sizes[first]
    d0, d1 = diffs[first - 1], diffs[first]
    frac = -d0 / (d1 - d0)
    return {"body_count": n0 + frac * (n1 - n0), "qualifier": "="}


# ---------------------------------------------------------------------------
# CSV
# ---------------------------------------------------------------------------

def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def emit_csv(rows: list[ResultRow], path) -> None:
    try:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(CSV_COLUMNS)
            for r in rows:
                w.writerow([
                    r.config_id, r.benchmark, r.arrangement, r.cycles,
                    _fmt(r.bandwidth_bytes_per_cycle), _fmt(r.speedup_vs_single),
                    _fmt(r.cache_hit_rate), _fmt(r.bus_utilization),
                    r.flit_hops, r.packets,
                ])
    except OSError as exc:
        raise OSError(f"cannot write CSV {path}: {exc}") from exc


def read_csv(path) -> list[ResultRow]:
    try:
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            if tuple(header) != CSV_COLUMNS:
                raise AnalysisError(f"unexpected CSV header in {path}")
            rows = []
            for rec in reader:
                rows.append(ResultRow(
                    config_id=rec[0],
                    benchmark=rec[1],
                    arrangement=rec[2],
                    cycles=int(rec[3]),
                    bandwidth_bytes_per_cycle=float(rec[4]) if rec[4] else None,
                    speedup_vs_single=float(rec[5]) if rec[5] else None,
                    cache_hit_rate=float(rec[6]),
                    bus_utilization=float(rec[7]),
                    flit_hops=int(rec[8]),
                    packets=int(rec[9]),
                ))
            return rows
    except OSError as exc:
        raise OSError(f"cannot read CSV {path}: {exc}") from exc
