"""mpsocsim: deterministic cycle-approximate simulation of clustered
multicore SoCs (shared-bus nodes with L1 data caches on a 2-D mesh NoC)
plus a design-space-exploration harness.
"""

from ._accel import USING_NUMBA
from .config import (
    Arrangement,
    CacheConfig,
    FlowControl,
    RouterKind,
    SystemConfig,
    TimingParams,
    parse_config,
    preset,
    PRESET_NAMES,
    serialize,
    validate,
)
from .engine import SimStats, run, run_programs

__version__ = "0.1.0"

__all__ = [
    "Arrangement", "CacheConfig", "FlowControl", "RouterKind", "SystemConfig",
    "TimingParams", "parse_config", "preset", "PRESET_NAMES", "serialize",
    "validate", "SimStats", "run", "run_programs", "USING_NUMBA",
]
