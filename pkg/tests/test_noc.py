import pytest
from hypothesis import given, strategies as st

from mpsocsim.config import FlowControl, RouterKind, TimingParams, preset
from mpsocsim.engine import run
from mpsocsim.noc import (
    MeshTopology,
    Packet,
    packet_latency_uncontended,
    route_links,
    route_xy,
)
from mpsocsim.trace import Recv, Send

T4 = MeshTopology(4, 4)
SAF, CT = FlowControl.STORE_AND_FORWARD, FlowControl.CUT_THROUGH
HW, SW = RouterKind.HARDWARE_SWITCH, RouterKind.SOFTWARE_CORE


class TestRouting:
    def test_self_route_is_empty(self):
        assert route_xy(T4, 5, 5) == []

    def test_adjacent(self):
        assert route_xy(T4, 5, 6) == [6]

    def test_corner_to_corner_x_first(self):
        assert route_xy(T4, 0, 15) == [1, 2, 3, 7, 11, 15]

    def test_all_pairs_manhattan(self):
        for src in range(16):
            for dst in range(16):
                path = route_xy(T4, src, dst)
                sx, sy = T4.coord(src)
                dx, dy = T4.coord(dst)
                assert len(path) == abs(sx - dx) + abs(sy - dy)
                # adjacency of successive hops
                here = src
                for nxt in path:
                    hx, hy = T4.coord(here)
                    nx, ny = T4.coord(nxt)
                    assert abs(hx - nx) + abs(hy - ny) == 1
                    here = nxt
                if path:
                    assert path[-1] == dst

    def test_links_are_distinct_per_direction(self):
        fwd = route_links(T4, 0, 3)
        rev = route_links(T4, 3, 0)
        assert set(fwd).isdisjoint(set(rev))


class TestLatencyClosedForm:
    def setup_method(self):
        self.t = TimingParams(hw_router_delay_cycles=2,
                              sw_router_cycles_per_flit=20, link_flit_bytes=8)

    def test_saf_example(self):
        p = Packet(0, 15, 0, 64)                      # S = 8 flits
        assert packet_latency_uncontended(p, SAF, HW, self.t, hops=4) == 40

    def test_ct_example(self):
        p = Packet(0, 15, 0, 64)
        assert packet_latency_uncontended(p, CT, HW, self.t, hops=4) == 19

    def test_single_flit_equal(self):
        p = Packet(0, 1, 0, 8)
        for h in range(1, 7):
            saf = packet_latency_uncontended(p, SAF, HW, self.t, hops=h)
            ct = packet_latency_uncontended(p, CT, HW, self.t, hops=h)
            assert saf == ct == h * 3

    @given(h=st.integers(1, 6), s=st.integers(1, 64))
    def test_ct_never_slower_than_saf(self, h, s):
        p = Packet(0, 1, 0, s * 8)
        saf = packet_latency_uncontended(p, SAF, HW, self.t, hops=h)
        ct = packet_latency_uncontended(p, CT, HW, self.t, hops=h)
        assert ct <= saf
        # SAF - CT == (H-1)(S-1): pipelining pays off only with both
        # multiple hops and multiple flits
        assert saf - ct == (h - 1) * (s - 1)
        assert (ct == saf) == (s == 1 or h == 1)

    @given(h=st.integers(1, 6), s=st.integers(1, 64))
    def test_software_router_never_faster(self, h, s):
        p = Packet(0, 1, 0, s * 8)
        for fc in (SAF, CT):
            sw = packet_latency_uncontended(p, fc, SW, self.t, hops=h)
            hw = packet_latency_uncontended(p, fc, HW, self.t, hops=h)
            assert sw >= hw


def _mesh_cfg(fc=CT, router=HW):
    import dataclasses
    cfg = preset("NOC_SW_C")
    return dataclasses.replace(cfg, flow_control=fc, router_kind=router)


class TestTransport:
    @pytest.mark.parametrize("fc", [SAF, CT])
    @pytest.mark.parametrize("router", [HW, SW])
    @pytest.mark.parametrize("src,dst,nbytes", [(0, 15, 64), (0, 1, 8), (5, 6, 256)])
    def test_idle_mesh_matches_closed_form(self, fc, router, src, dst, nbytes):
        cfg = _mesh_cfg(fc, router)
        t = cfg.timing
        hops = len(route_xy(MeshTopology(4, 4), src, dst))
        expect = packet_latency_uncontended(Packet(src, dst, 0, nbytes), fc, router, t, hops)
        flits = -(-nbytes // t.link_flit_bytes)
        marshal = flits * t.nic_cycles_per_flit
        w = {src * 4: [Send(dst, 9, nbytes)], dst * 4: [Recv(src, 9, nbytes)]}
        stats = run(cfg, w)
        # total = marshal + flight + drain
        assert stats.total_cycles == marshal + expect + marshal
        assert stats.flit_hops == hops * flits
        assert stats.packets_sent == 1

    def test_shared_link_serializes(self):
        # two packets that both need link 0->1; second waits for the first
        cfg = _mesh_cfg(SAF, HW)
        t = cfg.timing
        flits = 8
        w = {
            0: [Send(1, 1, 64), Send(1, 2, 64)],
            4: [Recv(0, 1, 64), Recv(0, 2, 64)],
        }
        stats = run(cfg, w)
        marshal = flits * t.nic_cycles_per_flit
        # first: injected at marshal, arrives marshal + (R + S)
        # second: injected at 2*marshal; link is free by then except when
        # marshal < R + S; with nic=40 marshal dominates, so no queueing,
        # but the drain of packet 1 serializes before packet 2's drain.
        first_arrival = marshal + t.hw_router_delay_cycles + flits
        drain_start = max(first_arrival, 0)
        total = max(drain_start + marshal, 2 * marshal + t.hw_router_delay_cycles + flits) + marshal
        assert stats.total_cycles == total

    def test_same_start_contention_delays_exactly_one_occupancy(self):
        # two sources, one shared middle link 1->2: the later-granted packet
        # is delayed by exactly the first packet's link occupancy
        import dataclasses
        cfg = _mesh_cfg(SAF, HW)
        cfg = dataclasses.replace(
            cfg, timing=dataclasses.replace(cfg.timing, nic_cycles_per_flit=1))
        t = cfg.timing
        flits = 8
        # src 0 core and src 1 core both send to node 2 via node 1 (x-first)
        w = {
            0 * 4: [Send(2, 1, 64)],     # route 0 -> 1 -> 2
            1 * 4 + 1: [Send(2, 2, 64)],  # route 1 -> 2
            2 * 4: [Recv(0, 1, 64), Recv(1, 2, 64)],
        }
        stats = run(cfg, w)
        r = t.hw_router_delay_cycles
        inj = flits * t.nic_cycles_per_flit        # both inject at t=8
        arr0 = inj + (r + flits) * 2               # packet 0 through two hops
        # packet 1 wants link 1->2 at inj + r = 10, but packet 0 holds it
        # [18, 26]; packet 1 transmits [26, 34]
        p0_link12_start = inj + (r + flits) + r
        p1_start = p0_link12_start + flits
        arr1 = p1_start + flits
        assert arr0 == p0_link12_start + flits
        drain0 = arr0 + flits * t.nic_cycles_per_flit
        drain1 = max(arr1, drain0) + flits * t.nic_cycles_per_flit
        assert stats.total_cycles == drain1

    def test_opposite_directions_no_delay(self):
        cfg = _mesh_cfg(SAF, HW)
        t = cfg.timing
        flits = 8
        w = {
            0: [Send(1, 1, 64), Recv(1, 2, 64)],
            4: [Send(0, 2, 64), Recv(0, 1, 64)],
        }
        stats = run(cfg, w)
        marshal = flits * t.nic_cycles_per_flit
        one_way = t.hw_router_delay_cycles + flits
        assert stats.total_cycles == marshal + one_way + marshal

    def test_conservation_random_packets(self):
        rng_pairs = [(0, 5), (3, 12), (7, 8), (15, 0), (9, 10), (2, 13)]
        cfg = _mesh_cfg(CT, HW)
        w = {}
        for i, (s, d) in enumerate(rng_pairs):
            w.setdefault(s * 4, []).append(Send(d, i, 8 * (i + 1)))
            w.setdefault(d * 4 + 1, []).append(Recv(s, i, 8 * (i + 1)))
        stats = run(cfg, w)
        assert stats.packets_sent == len(rng_pairs)   # all injected, all delivered

    def test_local_delivery_zero_network(self):
        cfg = _mesh_cfg(SAF, HW)
        w = {0: [Send(0, 1, 64)], 1: [Recv(0, 1, 64)]}
        stats = run(cfg, w)
        assert stats.flit_hops == 0
        assert stats.packets_sent == 0

    def test_local_delivery_wakes_blocked_receiver(self):
        # the receiving core has the lower id, so it blocks before the
        # sender's local delivery happens
        cfg = _mesh_cfg(SAF, HW)
        from mpsocsim.trace import Compute
        w = {0: [Recv(0, 1, 64)], 1: [Compute(500), Send(0, 1, 64)]}
        stats = run(cfg, w)
        nic = cfg.timing.nic_cycles_per_flit
        assert stats.total_cycles == 500 + 8 * nic + 8 * nic
