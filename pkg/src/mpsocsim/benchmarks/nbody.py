"""Gravitational N-body simulation.

All body state is single precision.  Every timestep is staged: forces for
all bodies are computed from the current positions (ascending j for each
body i, so the reduction order never depends on which core owns i), then
velocities and positions are updated, giving bitwise-identical results for
any work partitioning.  The force on body i sums G*m_i*m_j over j != i
along the normalized separation vector; acceleration follows as F_i/m_i and
a semi-implicit Euler step advances v then r.

SMP path: bodies partitioned over cores, barriers after the force and the
update phase.  Distributed path: bodies partitioned over nodes (then over
each node's cores); every node keeps full position/mass copies, and after
each update phase each node broadcasts its slice of the new positions to
every peer before the next step begins.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .._accel import njit
from ..config import Arrangement, SystemConfig
from ..engine import SimStats, run_programs
from ..errors import SingularityError, VerificationError
from ..runtime import partitions
from ..trace import READ, WRITE, TraceProgram
from .layout import NodeAllocator

PAIR_OPS = {"fp_add": 8, "fp_mul": 9, "fp_div": 1, "fp_sqrt": 1}
FLOPS_PER_PAIR = sum(PAIR_OPS.values())   # 19 single-precision ops per interaction


def pair_cycles(t) -> int:
    """Compute cost of one pair interaction under a timing parameter set."""
    return (PAIR_OPS["fp_add"] * t.fp_add_cycles
            + PAIR_OPS["fp_mul"] * t.fp_mul_cycles
            + PAIR_OPS["fp_div"] * t.fp_div_cycles
            + PAIR_OPS["fp_sqrt"] * t.fp_sqrt_cycles)

TAG_INIT_POS = 100   # +0..2 for x,y,z; +3 for masses
TAG_INIT_VEL = 200   # +0..2
TAG_GATHER_VEL = 300
TAG_STEP = 1000      # + step * 4 + array id


@dataclass
class Bodies:
    mass: np.ndarray          # float32[n]
    pos: np.ndarray           # float32[3, n]
    vel: np.ndarray           # float32[3, n]

    def copy(self) -> "Bodies":
        return Bodies(self.mass.copy(), self.pos.copy(), self.vel.copy())


@dataclass
class NbodyResult:
    n: int
    timesteps: int
    arrangement: Arrangement
    stats: SimStats
    bodies: Bodies

    @property
    def cycles(self) -> int:
        return self.stats.total_cycles

    @property
    def flops(self) -> int:
        return FLOPS_PER_PAIR * self.n * (self.n - 1) * self.timesteps

    @property
    def flops_per_cycle(self) -> float:
        return self.flops / self.cycles if self.cycles else 0.0


def make_bodies(n: int, seed: int) -> Bodies:
    """Seeded uniform initial conditions in the unit cube; masses in
    (0.1, 1.0] so every mass is strictly positive.
    """
    rng = np.random.default_rng(seed)
    pos = rng.random((3, n)).astype(np.float32)
    vel = ((rng.random((3, n)) - 0.5) * 0.1).astype(np.float32)
    mass = (0.1 + 0.9 * rng.random(n)).astype(np.float32)
    return Bodies(mass, pos, vel)


@njit(cache=True)
def _accel_range(m, x, y, z, ax, ay, az, i0, i1, g):
    """Forces -> accelerations for bodies [i0, i1); returns -1 or the packed
    (i, j) pair of the first coincident bodies encountered.
    """
    n = m.shape[0]
    for i in range(i0, i1):
        fx = np.float32(0.0)
        fy = np.float32(0.0)
        fz = np.float32(0.0)
        xi = x[i]
        yi = y[i]
        zi = z[i]
        mi = m[i]
        for j in range(n):
            if j == i:
                continue
            dx = x[j] - xi
            dy = y[j] - yi
            dz = z[j] - zi
            d2 = dx * dx + dy * dy + dz * dz
            if d2 == np.float32(0.0):
                return np.int64(i) * n + j
            dist = np.sqrt(d2)
            d3 = d2 * dist
            mm = mi * m[j]
            coef = g * mm / d3
            fx += coef * dx
            fy += coef * dy
            fz += coef * dz
        inv = np.float32(1.0) / mi
        ax[i - i0] = fx * inv
        ay[i - i0] = fy * inv
        az[i - i0] = fz * inv
    return np.int64(-1)


@njit(cache=True)
def _integrate_range(x, y, z, vx, vy, vz, ax, ay, az, i0, i1, v_off, dt):
    """Positions are indexed globally; velocity arrays start at body
    ``i0 - v_off`` and acceleration arrays at body i0.
    """
    for i in range(i0, i1):
        k = i - i0
        v = v_off + k
        vx[v] = vx[v] + ax[k] * dt
        vy[v] = vy[v] + ay[k] * dt
        vz[v] = vz[v] + az[k] * dt
        x[i] = x[i] + vx[v] * dt
        y[i] = y[i] + vy[v] * dt
        z[i] = z[i] + vz[v] * dt


def nbody_step(bodies: Bodies, g: float = 1.0, dt: float = 0.01,
               ranges=None) -> Bodies:
    """One staged timestep; ``ranges`` optionally lists (i0, i1) partitions
    (their concatenation must cover 0..n) to mimic a parallel split - the
    result is bitwise independent of the split.
    """
    n = bodies.mass.shape[0]
    if ranges is None:
        ranges = [(0, n)]
    out = bodies.copy()
    x, y, z = out.pos[0], out.pos[1], out.pos[2]
    vx, vy, vz = out.vel[0], out.vel[1], out.vel[2]
    gf = np.float32(g)
    dtf = np.float32(dt)
    accs = []
    for (i0, i1) in ranges:
        ax = np.empty(i1 - i0, dtype=np.float32)
        ay = np.empty(i1 - i0, dtype=np.float32)
        az = np.empty(i1 - i0, dtype=np.float32)
        bad = _accel_range(bodies.mass, bodies.pos[0], bodies.pos[1], bodies.pos[2],
                           ax, ay, az, i0, i1, gf)
        if bad >= 0:
            raise SingularityError(
                f"bodies {bad // n} and {bad % n} are coincident")
        accs.append((i0, i1, ax, ay, az))
    for (i0, i1, ax, ay, az) in accs:
        _integrate_range(x, y, z, vx, vy, vz, ax, ay, az, i0, i1, i0, dtf)
    return out


def nbody_serial(bodies: Bodies, timesteps: int, g: float = 1.0,
                 dt: float = 0.01) -> Bodies:
    out = bodies
    for _ in range(timesteps):
        out = nbody_step(out, g, dt)
    return out


def total_energy(bodies: Bodies, g: float = 1.0) -> float:
    """Kinetic + potential energy in double precision (sanity metric)."""
    m = bodies.mass.astype(np.float64)
    pos = bodies.pos.astype(np.float64)
    vel = bodies.vel.astype(np.float64)
    ke = 0.5 * float((m * (vel ** 2).sum(axis=0)).sum())
    n = m.shape[0]
    pe = 0.0
    for i in range(n):
        d = pos[:, i + 1:] - pos[:, i:i + 1]
        r = np.sqrt((d ** 2).sum(axis=0))
        pe -= g * float((m[i] * m[i + 1:] / r).sum())
    return ke + pe


# ---------------------------------------------------------------------------
# Trace generation
# ---------------------------------------------------------------------------

def _scan_trace(prog: TraceProgram, plen: int, n: int, x_b: int, y_b: int,
                z_b: int, m_b: int, a_bases, a_off: int, m_off: int,
                t) -> None:
    """Force phase for ``plen`` bodies: for each owned body, stream the full
    position/mass arrays in 16-element line groups, then write the body's
    acceleration.  ``a_off``/``m_off`` are byte offsets of the core's first
    body in the acceleration arrays / mass array.
    """
    pair = pair_cycles(t)
    epi = t.fp_div_cycles + 3 * t.fp_mul_cycles
    if plen == 0:
        return
    groups, tail = divmod(n, 16)
    prog.loop(plen)
    if groups:
        prog.loop(groups)
        prog.access(READ, x_b, 16, 4, stride0=0, stride1=64)
        prog.access(READ, y_b, 16, 4, stride0=0, stride1=64)
        prog.access(READ, z_b, 16, 4, stride0=0, stride1=64)
        prog.access(READ, m_b, 16, 4, stride0=0, stride1=64)
        prog.compute(16 * pair)
        prog.end()
    if tail:
        toff = groups * 64
        prog.access(READ, x_b + toff, tail, 4)
        prog.access(READ, y_b + toff, tail, 4)
        prog.access(READ, z_b + toff, tail, 4)
        prog.access(READ, m_b + toff, tail, 4)
        prog.compute(tail * pair)
    prog.access(READ, m_b + m_off, 1, 4, stride0=4)
    for ab in a_bases:
        prog.access(WRITE, ab + a_off, 1, 4, stride0=4)
    prog.compute(epi)
    prog.end()


def _integrate_trace(prog: TraceProgram, plen: int, pos_bases, pos_off: int,
                     vel_bases, vel_off: int, a_bases, a_off: int, t) -> None:
    """Update phase over the core's bodies in 16-element line groups."""
    integ = 6 * t.fp_mul_cycles + 6 * t.fp_add_cycles
    if plen == 0:
        return
    groups, tail = divmod(plen, 16)

    def group(count, goff):
        for ab in a_bases:
            prog.access(READ, ab + a_off + goff, count, 4, stride0=64)
        for vb in vel_bases:
            prog.access(READ, vb + vel_off + goff, count, 4, stride0=64)
            prog.access(WRITE, vb + vel_off + goff, count, 4, stride0=64)
        for pb in pos_bases:
            prog.access(READ, pb + pos_off + goff, count, 4, stride0=64)
            prog.access(WRITE, pb + pos_off + goff, count, 4, stride0=64)
        prog.compute(count * integ)

    if groups:
        prog.loop(groups)
        group(16, 0)
        prog.end()
    if tail:
        # fixed-address tail after the loop
        toff = groups * 64
        for ab in a_bases:
            prog.access(READ, ab + a_off + toff, tail, 4)
        for vb in vel_bases:
            prog.access(READ, vb + vel_off + toff, tail, 4)
            prog.access(WRITE, vb + vel_off + toff, tail, 4)
        for pb in pos_bases:
            prog.access(READ, pb + pos_off + toff, tail, 4)
            prog.access(WRITE, pb + pos_off + toff, tail, 4)
        prog.compute(tail * integ)


def nbody_run(cfg: SystemConfig, n: int, timesteps: int, arr: Arrangement,
              seed: int = 99, g: float = 1.0, dt: float = 0.01) -> NbodyResult:
    sys_cfg = cfg.with_arrangement(arr)
    t = sys_cfg.timing
    nodes = sys_cfg.n_nodes
    cpn = sys_cfg.cores_per_node
    node_parts = partitions(n, nodes)

    allocs = [NodeAllocator(nd, sys_cfg.node_mem(nd)) for nd in range(nodes)]
    layouts = []
    for nd in range(nodes):
        plen = node_parts[nd].length
        lay = {
            "x": allocs[nd].alloc("x", n * 4),
            "y": allocs[nd].alloc("y", n * 4),
            "z": allocs[nd].alloc("z", n * 4),
            "m": allocs[nd].alloc("m", n * 4),
            "vx": allocs[nd].alloc("vx", max(plen, 1) * 4),
            "vy": allocs[nd].alloc("vy", max(plen, 1) * 4),
            "vz": allocs[nd].alloc("vz", max(plen, 1) * 4),
            "ax": allocs[nd].alloc("ax", max(plen, 1) * 4),
            "ay": allocs[nd].alloc("ay", max(plen, 1) * 4),
            "az": allocs[nd].alloc("az", max(plen, 1) * 4),
        }
        layouts.append(lay)

    programs = []
    groups = {nd: [nd * cpn + i for i in range(cpn)] for nd in range(nodes)}
    for nd in range(nodes):
        npart = node_parts[nd]
        core_parts = partitions(npart.length, cpn)
        lay = layouts[nd]
        pos_bases = (lay["x"], lay["y"], lay["z"])
        vel_bases = (lay["vx"], lay["vy"], lay["vz"])
        a_bases = (lay["ax"], lay["ay"], lay["az"])
        for local in range(cpn):
            cpart = core_parts[local]
            prog = TraceProgram()
            is_master = local == 0
            # initial distribution: root broadcasts positions and masses,
            # scatters velocity slices
            if nodes > 1 and is_master:
                if nd == 0:
                    for peer in range(1, nodes):
                        for ai in range(4):      # x, y, z, masses
                            prog.send(peer, TAG_INIT_POS + ai, n * 4)
                        if node_parts[peer].length:
                            for ai in range(3):
                                prog.send(peer, TAG_INIT_VEL + ai,
                                          node_parts[peer].length * 4)
                else:
                    for ai in range(4):
                        prog.recv(0, TAG_INIT_POS + ai, n * 4)
                    if npart.length:
                        for ai in range(3):
                            prog.recv(0, TAG_INIT_VEL + ai, npart.length * 4)
            prog.barrier(nd)
            for step in range(timesteps):
                # force phase over this core's bodies
                _scan_trace(prog, cpart.length, n, lay["x"], lay["y"], lay["z"],
                            lay["m"], a_bases, cpart.start * 4,
                            (npart.start + cpart.start) * 4, t)
                prog.barrier(nd)
                # update phase
                _integrate_trace(prog, cpart.length, pos_bases,
                                 (npart.start + cpart.start) * 4, vel_bases,
                                 cpart.start * 4, a_bases, cpart.start * 4, t)
                prog.barrier(nd)
                # position exchange between nodes
                if nodes > 1 and is_master:
                    for peer in range(nodes):
                        if peer == nd or npart.length == 0:
                            continue
                        for ai in range(3):
                            prog.send(peer, TAG_STEP + step * 4 + ai, npart.length * 4)
                    for peer in range(nodes):
                        if peer == nd or node_parts[peer].length == 0:
                            continue
                        for ai in range(3):
                            prog.recv(peer, TAG_STEP + step * 4 + ai,
                                      node_parts[peer].length * 4)
                    prog.barrier(nd)
                elif nodes > 1:
                    prog.barrier(nd)
            # final velocity gather to node 0
            if nodes > 1 and is_master:
                if nd == 0:
                    for peer in range(1, nodes):
                        if node_parts[peer].length:
                            for ai in range(3):
                                prog.recv(peer, TAG_GATHER_VEL + ai,
                                          node_parts[peer].length * 4)
                elif npart.length:
                    for ai in range(3):
                        prog.send(0, TAG_GATHER_VEL + ai, npart.length * 4)
            programs.append(prog.build())

    stats = run_programs(sys_cfg, programs, barrier_groups=groups)

    # functional run: staged kernels over the distributed partitioning
    bodies = make_bodies(n, seed)
    ranges = []
    for nd in range(nodes):
        for cp in partitions(node_parts[nd].length, cpn):
            if cp.length:
                ranges.append((node_parts[nd].start + cp.start,
                               node_parts[nd].start + cp.stop))
    state = bodies
    for _ in range(timesteps):
        state = nbody_step(state, g, dt, ranges)

    oracle = nbody_serial(bodies, timesteps, g, dt)
    if not (np.array_equal(state.pos, oracle.pos)
            and np.array_equal(state.vel, oracle.vel)):
        raise VerificationError(
            f"N-body ({n} bodies, {timesteps} steps) on {arr} diverged from "
            "the serial oracle")

    return NbodyResult(n, timesteps, arr, stats, state)
