import numpy as np
import pytest

from mpsocsim.config import CacheConfig, TimingParams
from mpsocsim.memsys import (
    INVALID,
    MODIFIED,
    AccessKind,
    BusArbiter,
    CacheModel,
    MemAccess,
    bus_transaction,
    snoop,
)

R, W = AccessKind.READ, AccessKind.WRITE


def acc(kind, addr, core=0, size=8):
    return MemAccess(core, kind, addr, size)


class BruteForceLRU:
    """Independent reference: per set, an explicit recency list of resident
    line addresses with a dirty flag; no rank bookkeeping shared with the
    model under test.
    """

    def __init__(self, n_sets, n_ways, line_bytes):
        self.n_sets, self.n_ways, self.line = n_sets, n_ways, line_bytes
        self.sets = [[] for _ in range(n_sets)]   # [(line_addr, dirty)], MRU first

    def access(self, kind, addr):
        line = addr // self.line
        s = line % self.n_sets
        entries = self.sets[s]
        for i, (la, dirty) in enumerate(entries):
            if la == line:
                entries.pop(i)
                entries.insert(0, (line, dirty or kind is W))
                return True, False
        victim_dirty = False
        if len(entries) == self.n_ways:
            _, victim_dirty = entries.pop()
        entries.insert(0, (line, kind is W))
        return False, victim_dirty


class TestCacheModel:
    def test_spatial_locality(self):
        cache = CacheModel(CacheConfig())
        assert cache.access(acc(R, 0)).hit is False
        assert cache.access(acc(R, 8)).hit is True

    def test_lru_eviction_fifth_line(self):
        cache = CacheModel(CacheConfig(n_sets=64, n_ways=4))
        # five distinct lines mapping to set 0 (stride = sets * line)
        stride = 64 * 64
        for i in range(5):
            assert cache.access(acc(R, i * stride)).hit is False
        res = cache.access(acc(R, 0))          # first-touched was evicted
        assert res.hit is False

    def test_sequential_512_bytes_is_8_misses(self):
        cache = CacheModel(CacheConfig())
        misses = 0
        for i in range(64):                    # 64 doubles = 512 B
            if not cache.access(acc(R, i * 8)).hit:
                misses += 1
        assert misses == 8

    def test_write_sets_modified(self):
        cache = CacheModel(CacheConfig())
        cache.access(acc(W, 0))
        assert cache.holds(0) == MODIFIED

    def test_dirty_victim_reported(self):
        cache = CacheModel(CacheConfig(n_sets=1, n_ways=1, line_bytes=64))
        cache.access(acc(W, 0))
        res = cache.access(acc(R, 64))
        assert res.hit is False and res.victim_dirty is True

    def test_straddle_rejected(self):
        cache = CacheModel(CacheConfig())
        with pytest.raises(ValueError, match="straddles"):
            cache.access(MemAccess(0, R, 60, 8))

    def test_lru_rank_permutation_invariant(self):
        cache = CacheModel(CacheConfig(n_sets=4, n_ways=4))
        rng = np.random.default_rng(7)
        for _ in range(500):
            addr = int(rng.integers(0, 64)) * 8
            cache.access(acc(R, addr))
            for s in range(4):
                assert sorted(cache.lru[s]) == [0, 1, 2, 3]

    @pytest.mark.parametrize("n_sets,n_ways", [(64, 4), (16, 8), (8, 1), (4, 16)])
    def test_lru_oracle_10k_accesses(self, n_sets, n_ways):
        cfg = CacheConfig(n_sets=n_sets, n_ways=n_ways)
        cache = CacheModel(cfg)
        ref = BruteForceLRU(n_sets, n_ways, 64)
        rng = np.random.default_rng(n_sets * 1000 + n_ways)
        lines = n_sets * n_ways * 3
        for k in range(10_000):
            addr = int(rng.integers(0, lines)) * 64 + int(rng.integers(0, 8)) * 8
            kind = W if rng.random() < 0.3 else R
            got = cache.access(acc(kind, addr))
            want_hit, want_dirty = ref.access(kind, addr)
            assert got.hit == want_hit, f"access {k}"
            assert got.victim_dirty == want_dirty, f"access {k}"


class TestSnoop:
    def _shared_line(self, n=3):
        caches = [CacheModel(CacheConfig()) for _ in range(n)]
        for c in caches:
            c.access(acc(R, 0))
        return caches

    def test_shared_in_three_write_invalidates_two(self):
        caches = self._shared_line(3)
        inv = snoop(caches, writer_core=0, line_addr=0)
        assert inv == {1, 2}
        assert caches[1].holds(0) == INVALID and caches[2].holds(0) == INVALID
        assert sum(c.writebacks for c in caches) == 0

    def test_modified_elsewhere_writes_back(self):
        caches = [CacheModel(CacheConfig()) for _ in range(2)]
        caches[1].access(acc(W, 0))
        inv = snoop(caches, writer_core=0, line_addr=0)
        assert inv == {1}
        assert caches[1].writebacks == 1

    def test_disabled_coherence_is_empty(self):
        caches = self._shared_line(3)
        assert snoop(caches, 0, 0, coherence_enabled=False) == set()


class MsiValueChecker:
    """Brute-force MSI safety harness: caches carry data versions so a read
    can be checked against the globally last-written version of its line.
    """

    def __init__(self, n_cores, cfg):
        self.caches = [CacheModel(cfg) for _ in range(n_cores)]
        self.versions = [dict() for _ in range(n_cores)]  # line -> version
        self.memory: dict[int, int] = {}
        self.last_write: dict[int, int] = {}
        self.counter = 0
        self.line = cfg.line_bytes

    def access(self, core, kind, addr):
        line = addr // self.line
        cache = self.caches[core]
        st = cache.holds(line)
        if kind is R:
            if st != INVALID:
                observed = self.versions[core][line]
            else:
                # fetch: a Modified copy elsewhere supplies and writes back
                for o, oc in enumerate(self.caches):
                    if o != core and oc.holds(line) == MODIFIED:
                        self.memory[line] = self.versions[o][line]
                        oc.downgrade(line)
                observed = self.memory.get(line, 0)
                res = self.caches[core].access(acc(R, addr, core))
                if res.victim_dirty:
                    self.memory[res.victim_line] = self.versions[core][res.victim_line]
                self.versions[core][line] = observed
            assert observed == self.last_write.get(line, 0), (
                f"core {core} read stale line {line}")
        else:
            self.counter += 1
            if st == INVALID:
                for o, oc in enumerate(self.caches):
                    if o != core and oc.holds(line) == MODIFIED:
                        self.memory[line] = self.versions[o][line]
                res = self.caches[core].access(acc(W, addr, core))
                if res.victim_dirty:
                    self.memory[res.victim_line] = self.versions[core][res.victim_line]
            else:
                self.caches[core].access(acc(W, addr, core))
            snoop(self.caches, core, line)
            self.versions[core][line] = self.counter
            self.last_write[line] = self.counter
        # invariant: at most one Modified copy per line
        for ln in set(self.last_write) | {line}:
            owners = [o for o, oc in enumerate(self.caches)
                      if oc.holds(ln) == MODIFIED]
            assert len(owners) <= 1, f"line {ln} modified in {owners}"


class TestMsiSafety:
    @pytest.mark.parametrize("seed", [1, 2, 3, 4, 5])
    def test_random_traces(self, seed):
        rng = np.random.default_rng(seed)
        chk = MsiValueChecker(4, CacheConfig(n_sets=4, n_ways=2))
        for _ in range(2_000):
            core = int(rng.integers(0, 4))
            kind = W if rng.random() < 0.4 else R
            addr = int(rng.integers(0, 24)) * 64
            chk.access(core, kind, addr)


class TestBus:
    def test_idle_line_fetch_with_defaults(self):
        t = TimingParams(bus_addr_overhead_cycles=4, bus_bytes_per_cycle=8)
        arb = BusArbiter(timing=t)
        assert bus_transaction(arb, 0, 64, at=0) == 12     # 4 + 64/8

    def test_two_simultaneous_requests_serialize(self):
        t = TimingParams(bus_addr_overhead_cycles=4, bus_bytes_per_cycle=8)
        arb = BusArbiter(timing=t)
        assert bus_transaction(arb, 0, 64, at=0) == 12
        assert bus_transaction(arb, 1, 64, at=0) == 24

    def test_zero_byte_rejected(self):
        arb = BusArbiter()
        with pytest.raises(ValueError):
            bus_transaction(arb, 0, 0, at=0)

    def test_grants_never_overlap(self):
        arb = BusArbiter()
        rng = np.random.default_rng(3)
        prev_end = 0
        now = 0
        for _ in range(200):
            now += int(rng.integers(0, 30))
            nbytes = int(rng.integers(1, 9)) * 8
            end = bus_transaction(arb, 0, nbytes, at=now)
            start = end - arb.service_cycles(nbytes)
            assert start >= prev_end     # a granted transaction is never preempted
            assert start >= now
            prev_end = end
