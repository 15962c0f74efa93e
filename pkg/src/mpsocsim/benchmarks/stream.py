"""STREAM sustainable-bandwidth benchmark.

Four kernels over contiguous double arrays a, b, c:
  COPY  a[i] = b[i]
  SCALE a[i] = q * b[i]
  ADD   a[i] = b[i] + c[i]
  TRIAD a[i] = b[i] + q * c[i]

Each kernel runs over worksharing partitions with a barrier between kernels;
bandwidth counts 16 bytes per element for COPY/SCALE and 24 for ADD/TRIAD
(the reference benchmark's accounting) divided by the kernel's cycle count,
and the reported figure is the best over the configured repetitions.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from ..config import Arrangement, SystemConfig
from ..engine import SimStats, run_programs
from ..errors import ValueRangeError, VerificationError
from ..runtime import partition_even
from ..trace import READ, WRITE, TraceProgram
from .layout import NodeAllocator

KERNELS = ("copy", "scale", "add", "triad")

# (reads, uses_q, uses_add, counted bytes per element)
_KERNEL_SHAPE = {
    "copy": (("b",), False, False, 16),
    "scale": (("b",), True, False, 16),
    "add": (("b", "c"), False, True, 24),
    "triad": (("b", "c"), True, True, 24),
}


@dataclass
class StreamResult:
    n: int
    workers: int
    reps: int
    bandwidths: dict[str, float]          # best counted bytes/cycle
    kernel_cycles: dict[str, list[int]]   # per repetition
    stats: SimStats
    arrays: tuple[np.ndarray, np.ndarray, np.ndarray]

    @property
    def cycles(self) -> int:
        return self.stats.total_cycles


def _emit_kernel(prog: TraceProgram, kernel: str, bases: dict[str, int],
                 part, comp_per_elem: int, int_cy: int) -> None:
    reads, _, _, _ = _KERNEL_SHAPE[kernel]
    if part.length == 0:
        return
    start, length = part.start, part.length
    groups, tail = divmod(length, 8)
    per_group = 8 * (int_cy + comp_per_elem)
    if groups:
        prog.loop(groups)
        for arr in reads:
            prog.access(READ, bases[arr] + start * 8, 8, 8, stride0=64)
        prog.access(WRITE, bases["a"] + start * 8, 8, 8, stride0=64)
        prog.compute(per_group)
        prog.end()
    if tail:
        toff = (start + groups * 8) * 8
        for arr in reads:
            prog.access(READ, bases[arr] + toff, tail, 8)
        prog.access(WRITE, bases["a"] + toff, tail, 8)
        prog.compute(tail * (int_cy + comp_per_elem))


def _apply_kernel(kernel: str, a, b, c, q: float) -> None:
    if kernel == "copy":
        a[:] = b
    elif kernel == "scale":
        a[:] = q * b
    elif kernel == "add":
        a[:] = b + c
    else:
        a[:] = b + q * c


def stream_run(cfg: SystemConfig, n: int, workers: int, reps: int = 10,
               q: float = 3.0, init=(1.0, 2.0, 1.0)) -> StreamResult:
    """Run STREAM on one node with ``workers`` cores."""
    if workers < 1:
        raise ValueRangeError("STREAM needs at least one worker core")
    if n < 1 or reps < 1:
        raise ValueRangeError("STREAM needs n >= 1 and reps >= 1")
    arr_cfg = cfg.with_arrangement(Arrangement(1, workers))
    t = arr_cfg.timing
    if n * 8 <= cfg.cache.total_bytes:
        warnings.warn(
            f"STREAM array of {n * 8} B does not exceed the {cfg.cache.total_bytes} B "
            "cache; bandwidth will reflect cache, not memory", stacklevel=2)

    alloc = NodeAllocator(0, arr_cfg.node_mem(0))
    bases = {name: alloc.alloc(name, n * 8) for name in ("a", "b", "c")}

    comp = {
        "copy": 0,
        "scale": t.fp_mul_cycles,
        "add": t.fp_add_cycles,
        "triad": t.fp_mul_cycles + t.fp_add_cycles,
    }

    programs = []
    for w in range(workers):
        part = partition_even(n, workers, w)
        prog = TraceProgram()
        prog.barrier(0)
        slot = 0
        for _rep in range(reps):
            for kernel in KERNELS:
                prog.mark(slot)
                _emit_kernel(prog, kernel, bases, part, comp[kernel], t.int_op_cycles)
                prog.mark(slot + 1)
                prog.barrier(0)
                slot += 2
        programs.append(prog.build())

    stats = run_programs(arr_cfg, programs)

    # functional execution + validation against the closed-form evolution
    a = np.full(n, init[0], dtype=np.float64)
    b = np.full(n, init[1], dtype=np.float64)
    c = np.full(n, init[2], dtype=np.float64)
    for _rep in range(reps):
        for kernel in KERNELS:
            _apply_kernel(kernel, a, b, c, q)
    exp_b = np.full(n, init[1], dtype=np.float64)
    exp_c = np.full(n, init[2], dtype=np.float64)
    exp_a = exp_b + q * exp_c          # the last kernel executed is TRIAD
    if not (np.array_equal(a, exp_a) and np.array_equal(b, exp_b)
            and np.array_equal(c, exp_c)):
        raise VerificationError("STREAM arrays diverged from the expected evolution")

    kernel_cycles: dict[str, list[int]] = {k: [] for k in KERNELS}
    slot = 0
    for _rep in range(reps):
        for kernel in KERNELS:
            begin = int(stats.marks[:, slot].max())
            endc = int(stats.marks[:, slot + 1].max())
            kernel_cycles[kernel].append(endc - begin)
            slot += 2
    bandwidths = {}
    for kernel in KERNELS:
        counted = _KERNEL_SHAPE[kernel][3] * n
        best = min(kernel_cycles[kernel])
        bandwidths[kernel] = counted / best if best > 0 else float("inf")

    return StreamResult(n, workers, reps, bandwidths, kernel_cycles, stats, (a, b, c))


def element_steps(kernel: str, bases: dict[str, int], part, cfg: SystemConfig):
    """Per-element TraceStep expansion of one kernel over one partition,
    used to cross-check the packed trace generator.
    """
    from ..trace import Access, Compute

    if kernel not in KERNELS:
        raise ValueRangeError(f"unknown STREAM kernel {kernel!r}")
    t = cfg.timing
    comp = {
        "copy": 0,
        "scale": t.fp_mul_cycles,
        "add": t.fp_add_cycles,
        "triad": t.fp_mul_cycles + t.fp_add_cycles,
    }[kernel]
    reads = _KERNEL_SHAPE[kernel][0]
    steps = []
    for i in range(part.start, part.stop):
        for arr in reads:
            steps.append(Access(READ, bases[arr] + i * 8, 8))
        steps.append(Access(WRITE, bases["a"] + i * 8, 8))
        steps.append(Compute(t.int_op_cycles + comp))
    return steps
