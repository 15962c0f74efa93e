"""Matrix multiplication benchmark: C (N x M) = A (N x K) * B (K x M).

A and C are row-major, B column-major, all double precision: both operands
of every dot product are contiguous streams.  Rows of A are worksharing-
partitioned; each core sweeps the columns of B in snake order (alternating
direction on consecutive rows) so recently used columns are revisited
first, which is what gives larger caches their payoff under LRU.

Distributed path (more than one node): node 0 scatters row blocks of A,
broadcasts B, every node computes its C block with intra-node worksharing,
and node 0 gathers the blocks - communication handled by one designated
core per node.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .._accel import njit
from ..config import Arrangement, SystemConfig
from ..engine import SimStats, run_programs
from ..errors import VerificationError
from ..runtime import Partition, partitions
from ..trace import READ, WRITE, TraceProgram
from .layout import NodeAllocator

TAG_A, TAG_B, TAG_C = 0, 1, 2


@dataclass
class MatmulResult:
    n: int
    k: int
    m: int
    arrangement: Arrangement
    stats: SimStats
    c_matrix: np.ndarray

    @property
    def cycles(self) -> int:
        return self.stats.total_cycles


@njit(cache=True)
def _mm_rows(a, b_cols, c, row0, row1):
    """C rows [row0, row1): explicit ascending-k accumulation so every
    element's reduction order is identical no matter which core owns it.
    ``b_cols[j, k]`` holds B column j (column-major storage).
    """
    n_cols = b_cols.shape[0]
    kk = a.shape[1]
    for i in range(row0, row1):
        for j in range(n_cols):
            acc = 0.0
            for k in range(kk):
                acc += a[i, k] * b_cols[j, k]
            c[i, j] = acc


def mm_oracle(a: np.ndarray, b_cols: np.ndarray) -> np.ndarray:
    """Serial reference: the same kernel over the whole row range."""
    c = np.zeros((a.shape[0], b_cols.shape[0]), dtype=np.float64)
    _mm_rows(a, b_cols, c, 0, a.shape[0])
    return c


def _dot_trace(prog: TraceProgram, a_row: int, b_col: int, c_addr: int,
               kk: int, fma_cy: int) -> None:
    groups, tail = divmod(kk, 8)
    if groups:
        prog.loop(groups)
        prog.access(READ, a_row, 8, 8, stride0=64)
        prog.access(READ, b_col, 8, 8, stride0=64)
        prog.compute(8 * fma_cy)
        prog.end()
    if tail:
        prog.access(READ, a_row + groups * 64, tail, 8)
        prog.access(READ, b_col + groups * 64, tail, 8)
        prog.compute(tail * fma_cy)
    prog.access(WRITE, c_addr, 1, 8)


def _compute_trace(prog: TraceProgram, rows: Partition, m: int, kk: int,
                   a_base: int, b_base: int, c_base: int, row_index0: int,
                   fma_cy: int) -> None:
    """Dots for one core's rows; ``row_index0`` maps partition-local row 0
    to the row index used by the local A / C buffers.
    """
    for r in range(rows.length):
        i_local = row_index0 + rows.start + r
        a_row = a_base + i_local * kk * 8
        cols = range(m) if r % 2 == 0 else range(m - 1, -1, -1)
        for j in cols:
            b_col = b_base + j * kk * 8
            c_addr = c_base + (i_local * m + j) * 8
            _dot_trace(prog, a_row, b_col, c_addr, kk, fma_cy)


def matmul_run(cfg: SystemConfig, n: int, k: int, m: int, arr: Arrangement,
               seed: int = 1234) -> MatmulResult:
    sys_cfg = cfg.with_arrangement(arr)
    t = sys_cfg.timing
    fma = t.fp_mul_cycles + t.fp_add_cycles
    cpn = sys_cfg.cores_per_node
    nodes = sys_cfg.n_nodes

    rng = np.random.default_rng(seed)
    a = rng.standard_normal((n, k))
    b_cols = rng.standard_normal((m, k))   # b_cols[j] is column j of B

    node_rows = partitions(n, nodes)

    # layouts
    allocs = [NodeAllocator(nd, sys_cfg.node_mem(nd)) for nd in range(nodes)]
    a_base, b_base, c_base = [], [], []
    for nd in range(nodes):
        rows_here = n if nd == 0 else node_rows[nd].length
        a_base.append(allocs[nd].alloc("A", rows_here * k * 8))
        b_base.append(allocs[nd].alloc("B", k * m * 8))
        c_base.append(allocs[nd].alloc("C", rows_here * m * 8))

    programs = []
    groups = {nd: [nd * cpn + i for i in range(cpn)] for nd in range(nodes)}
    for nd in range(nodes):
        rows_nd = node_rows[nd]
        core_parts = partitions(rows_nd.length, cpn)
        for local in range(cpn):
            prog = TraceProgram()
            is_master = local == 0
            if nd == 0:
                if is_master and nodes > 1:
                    for peer in range(1, nodes):
                        if node_rows[peer].length:
                            prog.send(peer, TAG_A, node_rows[peer].length * k * 8)
                    for peer in range(1, nodes):
                        prog.send(peer, TAG_B, k * m * 8)
                prog.barrier(nd)
                # root computes with full-matrix indexing
                _compute_trace(prog, core_parts[local], m, k, a_base[0],
                               b_base[0], c_base[0], rows_nd.start, fma)
                prog.barrier(nd)
                if is_master:
                    for peer in range(1, nodes):
                        if node_rows[peer].length:
                            prog.recv(peer, TAG_C, node_rows[peer].length * m * 8)
            else:
                if is_master:
                    if rows_nd.length:
                        prog.recv(0, TAG_A, rows_nd.length * k * 8)
                    prog.recv(0, TAG_B, k * m * 8)
                prog.barrier(nd)
                _compute_trace(prog, core_parts[local], m, k, a_base[nd],
                               b_base[nd], c_base[nd], 0, fma)
                prog.barrier(nd)
                if is_master and rows_nd.length:
                    prog.send(0, TAG_C, rows_nd.length * m * 8)
            programs.append(prog.build())

    stats = run_programs(sys_cfg, programs, barrier_groups=groups)

    # functional result with real scatter / compute / gather data movement
    c_full = np.zeros((n, m), dtype=np.float64)
    if nodes == 1:
        _mm_rows(a, b_cols, c_full, 0, n)
    else:
        for nd in range(nodes):
            p = node_rows[nd]
            if p.length == 0:
                continue
            a_local = a[p.start:p.stop].copy()       # scatter slice
            b_local = b_cols.copy()                  # bcast copy
            c_local = np.zeros((p.length, m), dtype=np.float64)
            _mm_rows(a_local, b_local, c_local, 0, p.length)
            c_full[p.start:p.stop] = c_local         # gather slice

    oracle = mm_oracle(a, b_cols)
    if not np.array_equal(c_full, oracle):
        raise VerificationError(
            f"matmul ({n}x{k}x{m}) on {arr} diverged from the serial oracle")

    return MatmulResult(n, k, m, arr, stats, c_full)


def element_steps(rows: Partition, m: int, kk: int, a_base: int, b_base: int,
                  c_base: int, cfg: SystemConfig):
    """Per-element TraceStep expansion of one core's dot products (snake
    order), for cross-checking the packed generator: 2 reads plus one
    multiply-accumulate per k, then the C store.
    """
    from ..trace import Access, Compute

    t = cfg.timing
    fma = t.fp_mul_cycles + t.fp_add_cycles
    steps = []
    for r in range(rows.length):
        i = rows.start + r
        cols = range(m) if r % 2 == 0 else range(m - 1, -1, -1)
        for j in cols:
            for k in range(kk):
                steps.append(Access(READ, a_base + (i * kk + k) * 8, 8))
                steps.append(Access(READ, b_base + (j * kk + k) * 8, 8))
                steps.append(Compute(fma))
            steps.append(Access(WRITE, c_base + (i * m + j) * 8, 8))
    return steps
