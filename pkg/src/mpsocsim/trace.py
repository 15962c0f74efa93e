"""Trace steps and their packed encoding.

A core's workload is a sequence of trace steps: compute bursts, memory
accesses, barriers and message operations.  Internally a program is a packed
``int64[n, 7]`` record array so the event kernel can execute it without
touching Python objects.  Two features keep programs tiny even for
billion-access workloads:

* bulk access records cover a contiguous run of same-size elements; the
  kernel walks them line by line, so they are semantically identical to the
  per-element expansion (the multiset of touched (address, kind) pairs is
  exactly equal),
* counted loops (two levels deep) with per-level address strides replay a
  record group without materializing it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

READ, WRITE = 0, 1

OP_COMPUTE = 0
OP_ACCESS = 1
OP_LOOP = 2
OP_END = 3
OP_BARRIER = 4
OP_SEND = 5
OP_RECV = 6
OP_MARK = 7

REC_COLS = 7  # op + up to 6 arguments


# Public step types -----------------------------------------------------------

@dataclass(frozen=True)
class Compute:
    cycles: int


@dataclass(frozen=True)
class Access:
    kind: int            # READ or WRITE
    addr: int
    bytes: int = 8


@dataclass(frozen=True)
class Barrier:
    group: int


@dataclass(frozen=True)
class Send:
    dst_node: int
    tag: int
    bytes: int


@dataclass(frozen=True)
class Recv:
    src_node: int
    tag: int
    bytes: int


TraceStep = Compute | Access | Barrier | Send | Recv


class TraceProgram:
    """Builder for one core's packed program."""

    def __init__(self):
        self._rows: list[list[int]] = []
        self._loop_stack: list[int] = []
        self.n_marks = 0

    # -- emitters ------------------------------------------------------------

    def compute(self, cycles: int) -> "TraceProgram":
        if cycles < 0:
            raise ValueError("compute cycles must be >= 0")
        if cycles > 0:
            self._rows.append([OP_COMPUTE, cycles, 0, 0, 0, 0, 0])
        return self

    def access(self, kind: int, base: int, count: int = 1, elem_bytes: int = 8,
               stride0: int = 0, stride1: int = 0) -> "TraceProgram":
        if elem_bytes not in (1, 2, 4, 8):
            raise ValueError(f"element size {elem_bytes} not in {{1,2,4,8}}")
        if count < 1:
            raise ValueError("access count must be >= 1")
        if base < 0 or base % elem_bytes:
            raise ValueError(f"base address {base} not aligned to {elem_bytes}")
        if stride0 % elem_bytes or stride1 % elem_bytes:
            raise ValueError("loop strides must be multiples of the element size")
        self._rows.append([OP_ACCESS, kind, base, count, elem_bytes, stride0, stride1])
        return self

    def loop(self, count: int) -> "TraceProgram":
        if len(self._loop_stack) >= 2:
            raise ValueError("loops nest at most two deep")
        if count < 0:
            raise ValueError("loop count must be >= 0")
        self._loop_stack.append(len(self._rows))
        self._rows.append([OP_LOOP, count, 0, 0, 0, 0, 0])
        return self

    def end(self) -> "TraceProgram":
        begin = self._loop_stack.pop()
        self._rows[begin][2] = len(self._rows)          # index of this END
        self._rows.append([OP_END, begin, 0, 0, 0, 0, 0])
        return self

    def barrier(self, group: int) -> "TraceProgram":
        self._rows.append([OP_BARRIER, group, 0, 0, 0, 0, 0])
        return self

    def send(self, dst_node: int, tag: int, nbytes: int) -> "TraceProgram":
        if nbytes < 1:
            raise ValueError("packet payload must be >= 1 byte")
        self._rows.append([OP_SEND, dst_node, tag, nbytes, 0, 0, 0])
        return self

    def recv(self, src_node: int, tag: int, nbytes: int) -> "TraceProgram":
        self._rows.append([OP_RECV, src_node, tag, nbytes, 0, 0, 0])
        return self

    def mark(self, slot: int) -> "TraceProgram":
        self._rows.append([OP_MARK, slot, 0, 0, 0, 0, 0])
        self.n_marks = max(self.n_marks, slot + 1)
        return self

    def add_step(self, step: TraceStep) -> "TraceProgram":
        if isinstance(step, Compute):
            return self.compute(step.cycles)
        if isinstance(step, Access):
            return self.access(step.kind, step.addr, 1, step.bytes)
        if isinstance(step, Barrier):
            return self.barrier(step.group)
        if isinstance(step, Send):
            return self.send(step.dst_node, step.tag, step.bytes)
        if isinstance(step, Recv):
            return self.recv(step.src_node, step.tag, step.bytes)
        raise TypeError(f"not a trace step: {step!r}")

    # -- finalization ----------------------------------------------------------

    def build(self) -> np.ndarray:
        if self._loop_stack:
            raise ValueError("unclosed loop in trace program")
        if not self._rows:
            return np.empty((0, REC_COLS), dtype=np.int64)
        return np.array(self._rows, dtype=np.int64)


def from_steps(steps) -> np.ndarray:
    prog = TraceProgram()
    for s in steps:
        prog.add_step(s)
    return prog.build()


# Static analysis / expansion -------------------------------------------------

def walk_dynamic(prog: np.ndarray):
    """Yield records in dynamic (execution) order with loop iteration indices.

    Yields (row, iter0, iter1) tuples; used for static send/barrier analysis
    and for the per-element expansion below.  Loop counts are finite so the
    walk always terminates.
    """
    def run(pc: int, stop: int, iters: tuple[int, ...]):
        while pc < stop:
            row = prog[pc]
            op = row[0]
            if op == OP_LOOP:
                end = int(row[2])
                for it in range(int(row[1])):
                    yield from run(pc + 1, end, iters + (it,))
                pc = end + 1
            elif op == OP_END:
                raise AssertionError("unmatched loop end")
            else:
                i0 = iters[0] if len(iters) > 0 else 0
                i1 = iters[1] if len(iters) > 1 else 0
                yield row, i0, i1
                pc += 1

    yield from run(0, len(prog), ())


def dynamic_sends(prog: np.ndarray) -> list[tuple[int, int, int]]:
    """(dst, tag, bytes) for every dynamic send, in program order.

    Walks the rows once, expanding only loops that actually contain sends,
    so analysis cost is proportional to the program text plus the number of
    dynamic sends (never to loop trip counts).
    """
    send_rows = np.flatnonzero(prog[:, 0] == OP_SEND) if len(prog) else []
    if len(send_rows) == 0:
        return []

    out: list[tuple[int, int, int]] = []

    def run(pc: int, stop: int) -> None:
        while pc < stop:
            op = prog[pc, 0]
            if op == OP_LOOP:
                end = int(prog[pc, 2])
                count = int(prog[pc, 1])
                has_send = any(pc < r < end for r in send_rows)
                if has_send:
                    for _ in range(count):
                        run(pc + 1, end)
                pc = end + 1
            elif op == OP_SEND:
                out.append((int(prog[pc, 1]), int(prog[pc, 2]), int(prog[pc, 3])))
                pc += 1
            else:
                pc += 1

    run(0, len(prog))
    return out


def barrier_groups_used(prog: np.ndarray) -> set[int]:
    if len(prog) == 0:
        return set()
    rows = prog[prog[:, 0] == OP_BARRIER]
    return {int(g) for g in rows[:, 1]}


def expand_accesses(prog: np.ndarray) -> list[tuple[int, int, int]]:
    """Per-element (kind, addr, bytes) expansion of every access record."""
    out = []
    for row, i0, i1 in walk_dynamic(prog):
        if row[0] != OP_ACCESS:
            continue
        kind, base, count, elem, s0, s1 = (int(v) for v in row[1:7])
        start = base + i0 * s0 + i1 * s1
        for k in range(count):
            out.append((kind, start + k * elem, elem))
    return out
