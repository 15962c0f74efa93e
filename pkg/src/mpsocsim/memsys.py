"""Node memory hierarchy: set-associative write-back L1 caches with LRU
replacement, optional MSI snoop-invalidate coherence, and a round-robin
shared bus per node.

This module is the reference (pure Python) model and the documented
semantics; the event kernel implements the same state machine on packed
arrays and is tested for equivalence against it.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

from .config import CacheConfig, TimingParams

INVALID, SHARED, MODIFIED = 0, 1, 2


class AccessKind(enum.Enum):
    READ = 0
    WRITE = 1


@dataclass(frozen=True)
class MemAccess:
    """One core's load or store in node-local address space.

    Accesses must not straddle a cache line; the benchmark allocator
    guarantees this by 64-byte-aligning every array base.
    """

    core_id: int
    kind: AccessKind
    addr: int
    bytes: int = 8

    def check(self, line_bytes: int, node_mem_bytes: int | None = None) -> None:
        if self.bytes not in (1, 2, 4, 8):
            raise ValueError(f"access size {self.bytes} not in {{1,2,4,8}}")
        if self.addr // line_bytes != (self.addr + self.bytes - 1) // line_bytes:
            raise ValueError(f"access at {self.addr} straddles a {line_bytes}-byte line")
        if node_mem_bytes is not None and self.addr + self.bytes > node_mem_bytes:
            raise ValueError(f"access at {self.addr} beyond node memory {node_mem_bytes}")


@dataclass
class AccessResult:
    hit: bool
    victim_dirty: bool = False
    victim_line: int | None = None


class CacheModel:
    """One core's L1 data cache: LRU within each set, MSI line states.

    ``lru`` holds a rank per way (0 = most recent); ranks within a set are
    always a permutation of 0..n_ways-1.
    """

    def __init__(self, cfg: CacheConfig):
        self.cfg = cfg
        n = cfg.n_sets
        w = cfg.n_ways
        self.lines = [[-1] * w for _ in range(n)]   # full line address, -1 invalid
        self.state = [[INVALID] * w for _ in range(n)]
        self.lru = [[k for k in range(w)] for _ in range(n)]
        self.hits = 0
        self.misses = 0
        self.writebacks = 0

    def _set_index(self, addr: int) -> int:
        return (addr // self.cfg.line_bytes) % self.cfg.n_sets

    def _line_addr(self, addr: int) -> int:
        return addr // self.cfg.line_bytes

    def _touch(self, s: int, way: int) -> None:
        old = self.lru[s][way]
        for k in range(self.cfg.n_ways):
            if self.lru[s][k] < old:
                self.lru[s][k] += 1
        self.lru[s][way] = 0

    def lookup(self, addr: int) -> tuple[int, int | None]:
        s = self._set_index(addr)
        line = self._line_addr(addr)
        for way in range(self.cfg.n_ways):
            if self.lines[s][way] == line and self.state[s][way] != INVALID:
                return s, way
        return s, None

    def access(self, a: MemAccess) -> AccessResult:
        """Apply one access; on a miss the LRU way is selected as victim
        and the line is installed (Modified for writes, Shared for reads).
        """
        a.check(self.cfg.line_bytes)
        s, way = self.lookup(a.addr)
        if way is not None:
            self.hits += 1
            self._touch(s, way)
            if a.kind is AccessKind.WRITE:
                self.state[s][way] = MODIFIED
            return AccessResult(hit=True)
        self.misses += 1
        victim = max(range(self.cfg.n_ways), key=lambda k: self.lru[s][k])
        victim_dirty = self.state[s][victim] == MODIFIED
        victim_line = self.lines[s][victim] if self.state[s][victim] != INVALID else None
        if victim_dirty:
            self.writebacks += 1
        line = self._line_addr(a.addr)
        self.lines[s][victim] = line
        self.state[s][victim] = MODIFIED if a.kind is AccessKind.WRITE else SHARED
        self._touch(s, victim)
        return AccessResult(hit=False, victim_dirty=victim_dirty, victim_line=victim_line)

    def holds(self, line_addr: int) -> int:
        """Return the MSI state this cache holds ``line_addr`` in."""
        s = line_addr % self.cfg.n_sets
        for way in range(self.cfg.n_ways):
            if self.lines[s][way] == line_addr and self.state[s][way] != INVALID:
                return self.state[s][way]
        return INVALID

    def drop(self, line_addr: int) -> bool:
        """Invalidate ``line_addr`` if present; True when a copy was dropped."""
        s = line_addr % self.cfg.n_sets
        for way in range(self.cfg.n_ways):
            if self.lines[s][way] == line_addr and self.state[s][way] != INVALID:
                self.state[s][way] = INVALID
                return True
        return False

    def downgrade(self, line_addr: int) -> bool:
        """Modified -> Shared on a remote read; True if a writeback occurred."""
        s = line_addr % self.cfg.n_sets
        for way in range(self.cfg.n_ways):
            if self.lines[s][way] == line_addr and self.state[s][way] == MODIFIED:
                self.state[s][way] = SHARED
                self.writebacks += 1
                return True
        return False


def snoop(caches: list[CacheModel], writer_core: int, line_addr: int,
          coherence_enabled: bool = True) -> set[int]:
    """Invalidate every other core's copy of ``line_addr``; Modified copies
    write back first.  Returns the set of cores that lost a copy.
    """
    if not coherence_enabled:
        return set()
    invalidated = set()
    for core, cache in enumerate(caches):
        if core == writer_core:
            continue
        st = cache.holds(line_addr)
        if st == INVALID:
            continue
        if st == MODIFIED:
            cache.writebacks += 1
        cache.drop(line_addr)
        invalidated.add(core)
    return invalidated


@dataclass
class BusArbiter:
    """Shared-bus occupancy tracker for one node.

    Grants never overlap; a granted transaction is never preempted.  The
    event kernel adds round-robin ordering among simultaneously waiting
    cores; this reference serves requests in call order.
    """

    node_id: int = 0
    timing: TimingParams = field(default_factory=TimingParams)
    busy_until: int = 0
    rr_pointer: int = 0
    busy_cycles: int = 0
    bytes_moved: int = 0

    def service_cycles(self, nbytes: int) -> int:
        if nbytes < 1:
            raise ValueError("zero-byte bus transaction")
        t = self.timing
        return t.bus_addr_overhead_cycles + -(-nbytes // t.bus_bytes_per_cycle)

    def transaction(self, requester: int, nbytes: int, at: int) -> int:
        """Queue one transaction at cycle ``at``; returns its completion cycle."""
        start = max(at, self.busy_until)
        occ = self.service_cycles(nbytes)
        self.busy_until = start + occ
        self.busy_cycles += occ
        self.bytes_moved += nbytes
        self.rr_pointer = requester
        return self.busy_until


def bus_transaction(arb: BusArbiter, requester: int, nbytes: int, at: int) -> int:
    return arb.transaction(requester, nbytes, at)
