"""Benchmark workloads: functional kernels, trace generation, oracles."""

from .matmul import MatmulResult, matmul_run, mm_oracle
from .nbody import (
    Bodies,
    FLOPS_PER_PAIR,
    NbodyResult,
    make_bodies,
    nbody_run,
    nbody_serial,
    nbody_step,
    total_energy,
)
from .stream import KERNELS, StreamResult, stream_run
from .trace_for import pair_interaction_cycles, pair_interaction_ops, trace_for

__all__ = [
    "MatmulResult", "matmul_run", "mm_oracle",
    "Bodies", "FLOPS_PER_PAIR", "NbodyResult", "make_bodies", "nbody_run",
    "nbody_serial", "nbody_step", "total_energy",
    "KERNELS", "StreamResult", "stream_run",
    "pair_interaction_cycles", "pair_interaction_ops", "trace_for",
]
