"""Simulation driver: assembles packed machine state from a config and
per-core trace programs, runs the event kernel, and returns statistics.

A single simulation is strictly single-threaded and a pure function of
(config, workload); separate simulations never share mutable state, so the
sweep harness may run them concurrently.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernel, trace
from .config import FlowControl, RouterKind, SystemConfig, validate
from .errors import DeadlockError, MemoryMapError, ValidationError
from .noc import MeshTopology, route_links
from .trace import OP_MARK, TraceProgram, from_steps


@dataclass
class SimStats:
    """Counter block produced by one simulation run."""

    total_cycles: int
    per_core_busy: np.ndarray
    cache_hits: np.ndarray
    cache_misses: np.ndarray
    writebacks: np.ndarray
    bus_busy_cycles: np.ndarray
    bus_bytes: np.ndarray
    flit_hops: int
    packets_sent: int
    barrier_wait_cycles: np.ndarray
    marks: np.ndarray = field(default=None, repr=False)

    @property
    def cache_hit_rate(self) -> float:
        total = int(self.cache_hits.sum() + self.cache_misses.sum())
        return float(self.cache_hits.sum()) / total if total else 1.0

    @property
    def bus_utilization(self) -> float:
        """Occupancy of the most-loaded node bus."""
        if self.total_cycles == 0:
            return 0.0
        return float(self.bus_busy_cycles.max()) / float(self.total_cycles)

    def fingerprint(self) -> bytes:
        """Stable byte encoding used by determinism checks."""
        parts = [
            np.int64(self.total_cycles).tobytes(),
            self.per_core_busy.tobytes(),
            self.cache_hits.tobytes(),
            self.cache_misses.tobytes(),
            self.writebacks.tobytes(),
            self.bus_busy_cycles.tobytes(),
            self.bus_bytes.tobytes(),
            np.int64(self.flit_hops).tobytes(),
            np.int64(self.packets_sent).tobytes(),
            self.barrier_wait_cycles.tobytes(),
            self.marks.tobytes() if self.marks is not None else b"",
        ]
        return b"|".join(parts)


def _as_program(obj) -> np.ndarray:
    if isinstance(obj, TraceProgram):
        return obj.build()
    if isinstance(obj, np.ndarray):
        return obj
    return from_steps(obj)


def run_programs(cfg: SystemConfig, programs: list[np.ndarray],
                 barrier_groups: dict[int, list[int]] | None = None) -> SimStats:
    """Execute one packed program per core (index = global core id)."""
    report = validate(cfg)
    if report:
        raise ValidationError(report)
    n_nodes = cfg.n_nodes
    cpn = cfg.cores_per_node
    n_cores = n_nodes * cpn
    if cpn > 64:
        raise ValidationError([f"cores_per_node={cpn} exceeds the supported 64"])
    if len(programs) != n_cores:
        raise ValueError(f"workload has {len(programs)} programs for {n_cores} cores")

    # concatenate programs, rebasing loop end indices
    off = np.zeros(n_cores + 1, dtype=np.int64)
    for c, p in enumerate(programs):
        off[c + 1] = off[c] + len(p)
    prog = np.zeros((int(off[-1]), trace.REC_COLS), dtype=np.int64)
    for c, p in enumerate(programs):
        if len(p) == 0:
            continue
        seg = p.copy()
        is_loop = seg[:, 0] == trace.OP_LOOP
        seg[is_loop, 2] += off[c]
        prog[off[c]:off[c + 1]] = seg

    # barrier groups (derived from the traces unless given explicitly);
    # arbitrary group ids are remapped onto dense kernel indices
    if barrier_groups is None:
        barrier_groups = {}
        for c, p in enumerate(programs):
            for g in trace.barrier_groups_used(p):
                barrier_groups.setdefault(g, []).append(c)
    gids = sorted(barrier_groups)
    gmap = {g: i for i, g in enumerate(gids)}
    if len(prog):
        bar_rows = np.flatnonzero(prog[:, 0] == trace.OP_BARRIER)
        for ri in bar_rows:
            g = int(prog[ri, 1])
            if g not in gmap:
                raise ValueError(f"barrier group {g} has no registered members")
            prog[ri, 1] = gmap[g]
    grp_off = np.zeros(len(gids) + 1, dtype=np.int64)
    members = []
    member_of = np.zeros((max(len(gids), 1), n_cores), dtype=np.int8)
    for g in gids:
        dense = gmap[g]
        cores = sorted(barrier_groups[g])
        members.extend(cores)
        grp_off[dense + 1] = grp_off[dense] + len(cores)
        for c in cores:
            member_of[dense, c] = 1
    grp_members = np.array(members, dtype=np.int64) if members else np.zeros(1, dtype=np.int64)

    # packets
    topo = MeshTopology(cfg.mesh_x, cfg.mesh_y)
    flit = cfg.timing.link_flit_bytes
    sends = [trace.dynamic_sends(p) for p in programs]
    pkt_off = np.zeros(n_cores + 1, dtype=np.int64)
    for c in range(n_cores):
        pkt_off[c + 1] = pkt_off[c] + len(sends[c])
    n_pkts = int(pkt_off[-1])
    max_hops = max(cfg.mesh_x + cfg.mesh_y, 1)
    pkt_src = np.zeros(max(n_pkts, 1), dtype=np.int64)
    pkt_dst = np.zeros(max(n_pkts, 1), dtype=np.int64)
    pkt_tag = np.zeros(max(n_pkts, 1), dtype=np.int64)
    pkt_bytes = np.zeros(max(n_pkts, 1), dtype=np.int64)
    pkt_flits = np.zeros(max(n_pkts, 1), dtype=np.int64)
    pkt_nhops = np.zeros(max(n_pkts, 1), dtype=np.int64)
    pkt_links = np.zeros((max(n_pkts, 1), max_hops), dtype=np.int64)
    for c in range(n_cores):
        src_node = c // cpn
        for i, (dst, tag, nbytes) in enumerate(sends[c]):
            p = int(pkt_off[c]) + i
            if not 0 <= dst < n_nodes:
                raise ValueError(f"send to node {dst} outside the {n_nodes}-node mesh")
            pkt_src[p] = src_node
            pkt_dst[p] = dst
            pkt_tag[p] = tag
            pkt_bytes[p] = nbytes
            pkt_flits[p] = -(-nbytes // flit)
            links = route_links(topo, src_node, dst)
            pkt_nhops[p] = len(links)
            for h, l in enumerate(links):
                pkt_links[p, h] = l

    node_mem = np.array(cfg.mem_map(), dtype=np.int64)
    line_base = np.zeros(n_nodes + 1, dtype=np.int64)
    for n in range(n_nodes):
        line_base[n + 1] = line_base[n] + node_mem[n] // cfg.cache.line_bytes

    n_slots = 1
    if len(prog):
        mark_rows = prog[prog[:, 0] == OP_MARK]
        if len(mark_rows):
            n_slots = int(mark_rows[:, 1].max()) + 1

    status = np.zeros(n_cores, dtype=np.int64)
    ltime = np.zeros(n_cores, dtype=np.int64)
    hits = np.zeros(n_cores, dtype=np.int64)
    misses = np.zeros(n_cores, dtype=np.int64)
    wbs = np.zeros(n_cores, dtype=np.int64)
    busy = np.zeros(n_cores, dtype=np.int64)
    bar_wait = np.zeros(n_cores, dtype=np.int64)
    bus_busy = np.zeros(n_nodes, dtype=np.int64)
    bus_bytes = np.zeros(n_nodes, dtype=np.int64)
    marks = np.full((n_cores, n_slots), -1, dtype=np.int64)
    misc = np.zeros(4, dtype=np.int64)
    err = np.zeros(4, dtype=np.int64)

    t = cfg.timing
    code = _kernel.simulate(
        n_nodes, cpn, cfg.cache.n_sets, cfg.cache.n_ways, cfg.cache.line_bytes,
        1 if cfg.coherence_enabled else 0,
        1 if cfg.router_kind is RouterKind.SOFTWARE_CORE else 0,
        1 if cfg.flow_control is FlowControl.CUT_THROUGH else 0,
        t.cache_hit_cycles, t.bus_addr_overhead_cycles, t.bus_bytes_per_cycle,
        t.hw_router_delay_cycles, t.sw_router_cycles_per_flit, t.nic_cycles_per_flit,
        t.barrier_base_cycles, t.barrier_per_core_cycles,
        prog, off,
        grp_off, grp_members, member_of,
        pkt_off, pkt_src, pkt_dst, pkt_tag, pkt_bytes, pkt_flits,
        pkt_nhops, pkt_links,
        node_mem, line_base,
        status, ltime, hits, misses, wbs, busy, bar_wait,
        bus_busy, bus_bytes, marks, misc, err,
    )

    if code == _kernel.ERR_MEM:
        raise MemoryMapError(
            f"core {err[1]} accessed address {err[2]} beyond its node memory"
        )
    if code == _kernel.ERR_RECV_SIZE:
        raise ValueError(f"core {err[1]}: recv size does not match the matched packet")
    if code == _kernel.ERR_BARRIER_MEMBER:
        raise DeadlockError({int(err[1]): f"barrier {err[2]} membership mismatch"})
    if code in (_kernel.ERR_PKT_OVERFLOW, _kernel.ERR_BAD_OP):
        raise AssertionError(f"internal trace encoding error (code {code})")
    if code == _kernel.ERR_DEADLOCK:
        reasons = {1: "bus", 2: "barrier", 3: "recv"}
        blocked = {c: reasons.get(int(status[c]), "unknown")
                   for c in range(n_cores) if status[c] != _kernel.ST_DONE}
        raise DeadlockError(blocked)

    return SimStats(
        total_cycles=int(misc[0]),
        per_core_busy=busy,
        cache_hits=hits,
        cache_misses=misses,
        writebacks=wbs,
        bus_busy_cycles=bus_busy,
        bus_bytes=bus_bytes,
        flit_hops=int(misc[1]),
        packets_sent=int(misc[2]),
        barrier_wait_cycles=bar_wait,
        marks=marks,
    )


def run(cfg: SystemConfig, workload,
        barrier_groups: dict[int, list[int]] | None = None) -> SimStats:
    """Run a workload given as per-core TraceStep iterables (or prebuilt
    TracePrograms / packed arrays).  ``workload`` may be a list indexed by
    core id or a dict {core id: steps}; absent cores idle.
    """
    n_cores = cfg.n_cores
    if isinstance(workload, dict):
        programs = [_as_program(workload.get(c, ())) for c in range(n_cores)]
    else:
        work = list(workload)
        if len(work) > n_cores:
            raise ValueError(f"workload for {len(work)} cores on a {n_cores}-core system")
        work += [()] * (n_cores - len(work))
        programs = [_as_program(w) for w in work]
    return run_programs(cfg, programs, barrier_groups)
