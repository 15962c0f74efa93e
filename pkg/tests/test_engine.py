import dataclasses

import numpy as np
import pytest

from mpsocsim.config import Arrangement, CacheConfig, preset
from mpsocsim.engine import run, run_programs
from mpsocsim.errors import DeadlockError, MemoryMapError
from mpsocsim.memsys import AccessKind, CacheModel, MemAccess, snoop
from mpsocsim.trace import (
    READ,
    WRITE,
    Access,
    Barrier,
    Compute,
    Recv,
    Send,
    TraceProgram,
    expand_accesses,
    from_steps,
)

BASE = preset("BASE")


def smp(cores, **timing):
    cfg = preset("BASE32").with_arrangement(Arrangement(1, cores))
    if timing:
        cfg = dataclasses.replace(cfg, timing=dataclasses.replace(cfg.timing, **timing))
    return cfg


class TestTraceExamples:
    def test_single_compute(self):
        stats = run(BASE, [[Compute(100)]])
        assert stats.total_cycles == 100

    def test_zero_length_burst(self):
        stats = run(BASE, [[Compute(0)]])
        assert stats.total_cycles == 0

    def test_hit_latency(self):
        cfg = smp(1, cache_hit_cycles=2)
        stats = run(cfg, [[Access(READ, 0, 8), Access(READ, 8, 8)]])
        # miss then hit: hit adds exactly cache_hit_cycles
        miss_only = run(cfg, [[Access(READ, 0, 8)]])
        assert stats.total_cycles == miss_only.total_cycles + 2

    def test_miss_latency_formula(self):
        cfg = smp(1, cache_hit_cycles=2, bus_addr_overhead_cycles=4,
                  bus_bytes_per_cycle=8)
        stats = run(cfg, [[Access(READ, 0, 8)]])
        assert stats.total_cycles == 2 + 4 + 64 // 8     # probe + addr + line

    def test_barrier_releases_together(self):
        cfg = smp(2, barrier_base_cycles=20, barrier_per_core_cycles=4)
        stats = run(cfg, [
            [Compute(10), Barrier(0)],
            [Compute(50), Barrier(0)],
        ])
        assert stats.total_cycles == 50 + 20 + 4 * 2

    def test_unmatched_recv_deadlocks(self):
        with pytest.raises(DeadlockError) as ei:
            run(BASE, [[Recv(0, 7, 64)]])
        assert 0 in ei.value.blocked

    def test_missing_barrier_member_deadlocks(self):
        cfg = smp(2)
        with pytest.raises(DeadlockError):
            run(cfg, [[Barrier(0), Barrier(0)], [Barrier(0)]])

    def test_explicit_group_mismatch(self):
        cfg = smp(2)
        with pytest.raises(DeadlockError, match="membership"):
            run(cfg, [[Barrier(0)], []], barrier_groups={0: [1]})

    def test_memory_bound(self):
        with pytest.raises(MemoryMapError):
            run(BASE, [[Access(READ, BASE.node_mem(0), 8)]])


class TestDeterminism:
    def test_bit_identical_stats(self):
        cfg = preset("NOC_SW_C")
        def workload():
            w = {}
            for nd in range(4):
                core = nd * 4
                steps = [Compute(nd * 3)]
                for i in range(40):
                    steps.append(Access(READ if i % 3 else WRITE, (i * 8) % 4096, 8))
                steps.append(Barrier(0))
                if nd:
                    steps.append(Send(0, nd, 64 + nd * 8))
                else:
                    steps += [Recv(k, k, 64 + k * 8) for k in (1, 2, 3)]
                w[core] = steps
            return w
        s1 = run(cfg, workload())
        s2 = run(cfg, workload())
        assert s1.fingerprint() == s2.fingerprint()


class TestEngineInvariants:
    def test_pure_compute_scales_to_any_core_count(self):
        totals = []
        for n in (1, 2, 8, 32):
            cfg = smp(n)
            stats = run(cfg, [[Compute(12345)] for _ in range(n)])
            totals.append(stats.total_cycles)
        assert len(set(totals)) == 1     # no phantom contention

    def test_bus_work_conservation(self):
        cfg = smp(8)
        w = [[Access(READ, (c * 1024 + i * 8) % (1 << 20), 8) for i in range(200)]
             for c in range(8)]
        stats = run(cfg, w)
        assert stats.bus_busy_cycles[0] <= stats.total_cycles
        assert stats.total_cycles >= int(stats.per_core_busy.max())

    def test_bus_bytes_accounting_without_coherence(self):
        cfg = dataclasses.replace(smp(4), coherence_enabled=False)
        rng = np.random.default_rng(11)
        w = []
        for c in range(4):
            steps = []
            for _ in range(500):
                addr = int(rng.integers(0, 1 << 16)) // 8 * 8
                steps.append(Access(WRITE if rng.random() < 0.5 else READ, addr, 8))
            w.append(steps)
        stats = run(cfg, w)
        expect = (stats.cache_misses.sum() + stats.writebacks.sum()) * 64
        assert stats.bus_bytes.sum() == expect
        # inclusion: every access is either a hit or a miss
        assert stats.cache_hits.sum() + stats.cache_misses.sum() == 4 * 500
        # delivered bytes never exceed the bus's peak rate
        assert stats.bus_bytes[0] <= cfg.timing.bus_bytes_per_cycle * stats.total_cycles

    def test_barrier_release_cycle_equal_across_members(self):
        cfg = smp(3)
        w = []
        for c in range(3):
            prog = TraceProgram()
            prog.compute(17 * (c + 1))
            prog.barrier(0)
            prog.mark(0)
            w.append(prog.build())
        stats = run_programs(cfg, w)
        assert len(set(int(m) for m in stats.marks[:, 0])) == 1

    def test_two_simultaneous_line_fetches_serialize(self):
        cfg = smp(2, cache_hit_cycles=2, bus_addr_overhead_cycles=4)
        w = [[Access(READ, 0, 8)], [Access(READ, 1 << 12, 8)]]
        stats = run(cfg, w)
        assert stats.total_cycles == 2 + 12 + 12   # second request queues


class TestBulkElementEquivalence:
    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_single_core_identical_stats(self, seed):
        rng = np.random.default_rng(seed)
        prog = TraceProgram()
        records = []
        for _ in range(60):
            kind = int(rng.integers(0, 2))
            base = int(rng.integers(0, 2000)) * 8
            count = int(rng.integers(1, 40))
            records.append((kind, base, count))
            prog.access(kind, base, count, 8)
            prog.compute(int(rng.integers(0, 5)))
        packed = prog.build()

        steps = []
        ri = 0
        for row in packed:
            if row[0] == 1:    # OP_ACCESS
                kind, base, count = records[ri]
                ri += 1
                for k in range(count):
                    steps.append(Access(kind, base + 8 * k, 8))
            elif row[0] == 0:
                steps.append(Compute(int(row[1])))
        element = from_steps(steps)

        s_packed = run_programs(BASE, [packed])
        s_elem = run_programs(BASE, [element])
        assert s_packed.total_cycles == s_elem.total_cycles
        assert np.array_equal(s_packed.cache_hits, s_elem.cache_hits)
        assert np.array_equal(s_packed.cache_misses, s_elem.cache_misses)
        assert np.array_equal(s_packed.writebacks, s_elem.writebacks)

    def test_loop_expansion_matches(self):
        prog = TraceProgram()
        prog.loop(5)
        prog.access(READ, 0, 4, 8, stride0=64)
        prog.access(WRITE, 4096, 2, 8, stride0=8)
        prog.end()
        packed = prog.build()
        expanded = expand_accesses(packed)
        assert len(expanded) == 5 * 6
        # same multiset when run as single steps
        steps = [Access(k, a, b) for (k, a, b) in expanded]
        s1 = run_programs(BASE, [packed])
        s2 = run(BASE, [steps])
        assert s1.total_cycles == s2.total_cycles
        assert s1.cache_hits[0] == s2.cache_hits[0]


class TestKernelMatchesReferenceModel:
    """Round-robin-serialized multicore traces executed both by the event
    kernel and by the pure-Python cache model with snooping.
    """

    @pytest.mark.parametrize("coherence", [True, False])
    @pytest.mark.parametrize("seed", [3, 4])
    def test_counter_equivalence(self, coherence, seed):
        n_cores = 4
        cache_cfg = CacheConfig(n_sets=8, n_ways=2)
        cfg = dataclasses.replace(
            preset("BASE32").with_arrangement(Arrangement(1, n_cores)),
            cache=cache_cfg, coherence_enabled=coherence)
        rng = np.random.default_rng(seed)
        rounds = 400
        trace = [(int(rng.integers(0, n_cores)),
                  AccessKind.WRITE if rng.random() < 0.4 else AccessKind.READ,
                  int(rng.integers(0, 64)) * 64 + int(rng.integers(0, 8)) * 8)
                 for _ in range(rounds)]

        # engine: barriers force one access per global round
        progs = []
        for c in range(n_cores):
            steps = []
            for (core, kind, addr) in trace:
                if core == c:
                    steps.append(Access(WRITE if kind is AccessKind.WRITE else READ,
                                        addr, 8))
                steps.append(Barrier(0))
            progs.append(from_steps(steps))
        stats = run_programs(cfg, progs)

        # reference: same global order through CacheModel + snoop;
        # read misses only downgrade a remote Modified owner, write misses
        # and upgrades invalidate every other copy
        caches = [CacheModel(cache_cfg) for _ in range(n_cores)]
        for (core, kind, addr) in trace:
            line = addr // 64
            st = caches[core].holds(line)
            if coherence:
                if kind is AccessKind.WRITE:
                    snoop(caches, core, line)
                elif st == 0:
                    for o, oc in enumerate(caches):
                        if o != core:
                            oc.downgrade(line)
            caches[core].access(MemAccess(core, kind, addr, 8))

        for c in range(n_cores):
            assert stats.cache_hits[c] == caches[c].hits
            assert stats.cache_misses[c] == caches[c].misses

    def test_writeback_equivalence_no_coherence(self):
        n_cores = 2
        cache_cfg = CacheConfig(n_sets=4, n_ways=2)
        cfg = dataclasses.replace(
            preset("BASE32").with_arrangement(Arrangement(1, n_cores)),
            cache=cache_cfg, coherence_enabled=False)
        rng = np.random.default_rng(9)
        trace = [(int(rng.integers(0, n_cores)),
                  AccessKind.WRITE if rng.random() < 0.5 else AccessKind.READ,
                  int(rng.integers(0, 32)) * 64) for _ in range(300)]
        progs = []
        for c in range(n_cores):
            steps = []
            for (core, kind, addr) in trace:
                if core == c:
                    steps.append(Access(WRITE if kind is AccessKind.WRITE else READ,
                                        addr, 8))
                steps.append(Barrier(0))
            progs.append(from_steps(steps))
        stats = run_programs(cfg, progs)

        caches = [CacheModel(cache_cfg) for _ in range(n_cores)]
        for (core, kind, addr) in trace:
            caches[core].access(MemAccess(core, kind, addr, 8))
        for c in range(n_cores):
            assert stats.writebacks[c] == caches[c].writebacks
