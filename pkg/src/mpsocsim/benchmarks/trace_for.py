"""Element-granularity trace generation, one TraceStep per access.

These generators define the reference access sequence for each benchmark
kernel; the packed generators used for large runs must touch exactly the
same (address, kind) multiset, which the test suite verifies.  The pair
interaction cost comes from counting the floating-point operations in the
functional kernel: 8 adds, 9 multiplies, 1 divide, 1 square root.
"""

from __future__ import annotations

from ..config import SystemConfig
from ..errors import ValueRangeError
from ..runtime import Partition
from ..trace import READ, WRITE, Access, Compute
from .matmul import element_steps as _matmul_steps
from .nbody import PAIR_OPS, pair_cycles
from .stream import KERNELS as STREAM_KERNELS
from .stream import element_steps as _stream_steps


def pair_interaction_ops() -> dict[str, int]:
    """Operation count of one gravitational pair interaction."""
    return dict(PAIR_OPS)


def pair_interaction_cycles(cfg: SystemConfig) -> int:
    return pair_cycles(cfg.timing)


def _nbody_steps(part: Partition, n: int, layout: dict[str, int],
                 cfg: SystemConfig):
    """Force phase for one core's bodies: per owned body, stream all
    positions and masses then store the acceleration.
    """
    pair = pair_cycles(cfg.timing)
    t = cfg.timing
    steps = []
    for i in range(part.start, part.stop):
        for j in range(n):
            for arr in ("x", "y", "z", "m"):
                steps.append(Access(READ, layout[arr] + 4 * j, 4))
            steps.append(Compute(pair))
        steps.append(Access(READ, layout["m"] + 4 * i, 4))
        for arr in ("ax", "ay", "az"):
            steps.append(Access(WRITE, layout[arr] + 4 * i, 4))
        steps.append(Compute(t.fp_div_cycles + 3 * t.fp_mul_cycles))
    return steps


def trace_for(kernel: str, partition: Partition, layout: dict[str, int],
              cfg: SystemConfig, **shape):
    """Per-core TraceStep sequence for one kernel over one partition.

    ``layout`` maps array names to their node-local base addresses.  Shape
    arguments: matmul needs m= and k=; nbody needs n= (total bodies).
    """
    if kernel in STREAM_KERNELS:
        return _stream_steps(kernel, layout, partition, cfg)
    if kernel == "matmul":
        return _matmul_steps(partition, shape["m"], shape["k"], layout["a"],
                             layout["b"], layout["c"], cfg)
    if kernel == "nbody":
        return _nbody_steps(partition, shape["n"], layout, cfg)
    raise ValueRangeError(f"unknown kernel {kernel!r}")
