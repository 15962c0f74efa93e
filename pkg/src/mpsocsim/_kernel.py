"""Deterministic event-driven simulation kernel.

Runs compiled trace programs for every core against the cache / bus / mesh
models.  All state lives in numpy arrays so the whole loop can be jitted;
with ``MPSOCSIM_NO_NUMBA=1`` the identical code runs interpreted.

Determinism: the event heap orders by (time, entity, sequence); entity ids
are cores, then node buses, then packets.  A core popped from the heap runs
inline while its local clock does not exceed the next pending event's time,
so every action that can affect another entity commits in global time order.

Error codes returned by ``simulate``: 0 ok, 1 deadlock, 2 memory bounds,
3 recv size mismatch, 4 barrier non-membership, 5 internal packet overflow,
6 unknown opcode.
"""

import numpy as np

from ._accel import njit
from .trace import (
    OP_ACCESS,
    OP_BARRIER,
    OP_COMPUTE,
    OP_END,
    OP_LOOP,
    OP_MARK,
    OP_RECV,
    OP_SEND,
    WRITE,
)

INF = np.int64(2) ** 62

EV_CORE, EV_BUS, EV_PKT = 0, 1, 2
ST_PENDING, ST_BUS, ST_BARRIER, ST_RECV, ST_DONE = 0, 1, 2, 3, 4

ERR_OK = 0
ERR_DEADLOCK = 1
ERR_MEM = 2
ERR_RECV_SIZE = 3
ERR_BARRIER_MEMBER = 4
ERR_PKT_OVERFLOW = 5
ERR_BAD_OP = 6

INVALID, SHARED, MODIFIED = 0, 1, 2


@njit(cache=True)
def _heap_push(hp, n, t, ent, seq, kind, arg):
    i = n
    hp[i, 0] = t
    hp[i, 1] = ent
    hp[i, 2] = seq
    hp[i, 3] = kind
    hp[i, 4] = arg
    while i > 0:
        p = (i - 1) >> 1
        if (hp[p, 0] > hp[i, 0]
                or (hp[p, 0] == hp[i, 0] and (hp[p, 1] > hp[i, 1]
                    or (hp[p, 1] == hp[i, 1] and hp[p, 2] > hp[i, 2])))):
            for k in range(5):
                tmp = hp[p, k]
                hp[p, k] = hp[i, k]
                hp[i, k] = tmp
            i = p
        else:
            break
    return n + 1


@njit(cache=True)
def _heap_pop(hp, n):
    last = n - 1
    for k in range(5):
        tmp = hp[0, k]
        hp[0, k] = hp[last, k]
        hp[last, k] = tmp
    i = 0
    while True:
        l = 2 * i + 1
        r = l + 1
        best = i
        if l < last:
            if (hp[l, 0] < hp[best, 0]
                    or (hp[l, 0] == hp[best, 0] and (hp[l, 1] < hp[best, 1]
                        or (hp[l, 1] == hp[best, 1] and hp[l, 2] < hp[best, 2])))):
                best = l
        if r < last:
            if (hp[r, 0] < hp[best, 0]
                    or (hp[r, 0] == hp[best, 0] and (hp[r, 1] < hp[best, 1]
                        or (hp[r, 1] == hp[best, 1] and hp[r, 2] < hp[best, 2])))):
                best = r
        if best == i:
            break
        for k in range(5):
            tmp = hp[best, k]
            hp[best, k] = hp[i, k]
            hp[i, k] = tmp
        i = best
    return last


@njit(cache=True)
def _find_way(c_line, c_state, core, s, line):
    for w in range(c_line.shape[2]):
        if c_line[core, s, w] == line and c_state[core, s, w] != INVALID:
            return w
    return -1


@njit(cache=True)
def _lru_touch(c_lru, core, s, way):
    old = c_lru[core, s, way]
    for w in range(c_lru.shape[2]):
        if c_lru[core, s, w] < old:
            c_lru[core, s, w] += 1
    c_lru[core, s, way] = 0


@njit(cache=True)
def _lru_victim(c_lru, core, s):
    worst = 0
    way = 0
    for w in range(c_lru.shape[2]):
        if c_lru[core, s, w] >= worst:
            worst = c_lru[core, s, w]
            way = w
    return way


@njit(cache=True)
def simulate(
    # geometry / flags
    n_nodes, cores_per_node, n_sets, n_ways, line_bytes, coherence,
    router_sw, flow_ct,
    # timing constants
    hit_cy, addr_ov, bus_bpc, hw_r, sw_r, nic_cy,
    bar_base, bar_per_core,
    # programs
    prog, prog_off,
    # barrier groups
    grp_off, grp_members, member_of,
    # packets
    pkt_off, pkt_src, pkt_dst, pkt_tag, pkt_bytes, pkt_flits,
    pkt_nhops, pkt_links,
    # memory map / sharer tracking offsets
    node_mem, line_base,
    # outputs
    status, ltime, hits, misses, wbs, busy, bar_wait,
    bus_busy, bus_bytes, marks, misc, err,
):
    n_cores = n_nodes * cores_per_node
    n_groups = grp_off.shape[0] - 1
    n_pkts = pkt_src.shape[0]
    line_tx = addr_ov + (line_bytes + bus_bpc - 1) // bus_bpc

    pc = prog_off[:n_cores].copy()
    elem_prog = np.zeros(n_cores, dtype=np.int64)
    depth = np.zeros(n_cores, dtype=np.int64)
    l_start = np.zeros((2, n_cores), dtype=np.int64)
    l_rem = np.zeros((2, n_cores), dtype=np.int64)
    l_iter = np.zeros((2, n_cores), dtype=np.int64)
    send_cur = pkt_off[:n_cores].copy()
    rcv_src = np.full(n_cores, -1, dtype=np.int64)
    rcv_tag = np.full(n_cores, -1, dtype=np.int64)

    c_line = np.full((n_cores, n_sets, n_ways), -1, dtype=np.int64)
    c_state = np.zeros((n_cores, n_sets, n_ways), dtype=np.int8)
    c_lru = np.zeros((n_cores, n_sets, n_ways), dtype=np.int16)
    for c in range(n_cores):
        for s in range(n_sets):
            for w in range(n_ways):
                c_lru[c, s, w] = w

    total_lines = line_base[n_nodes]
    sh_mask = np.zeros(total_lines, dtype=np.uint64)
    sh_owner = np.zeros(total_lines, dtype=np.int16)  # local core idx + 1

    bus_until = np.zeros(n_nodes, dtype=np.int64)
    bus_rr = np.full(n_nodes, cores_per_node - 1, dtype=np.int64)
    bus_wait = np.zeros(n_cores, dtype=np.int8)
    bus_nwait = np.zeros(n_nodes, dtype=np.int64)
    bus_ev = np.zeros(n_nodes, dtype=np.int8)

    bar_arrived = np.zeros(n_groups, dtype=np.int64)
    bar_maxarr = np.zeros(n_groups, dtype=np.int64)

    pkt_seq = np.full(n_pkts, -1, dtype=np.int64)
    pkt_hop = np.zeros(n_pkts, dtype=np.int64)
    pkt_done = np.zeros(n_pkts, dtype=np.int8)      # delivered
    pkt_used = np.zeros(n_pkts, dtype=np.int8)      # consumed by a recv
    pkt_dtime = np.zeros(n_pkts, dtype=np.int64)

    link_until = np.zeros(n_nodes * 4, dtype=np.int64)
    router_until = np.zeros(n_nodes, dtype=np.int64)

    cap = 4 * n_cores + 4 * n_pkts + 64
    hp = np.zeros((cap, 5), dtype=np.int64)
    hp_n = 0
    seq = 0

    send_seq = 0
    flit_hops = 0
    packets_sent = 0
    max_time = np.int64(0)

    for c in range(n_cores):
        hp_n = _heap_push(hp, hp_n, 0, c, seq, EV_CORE, c)
        seq += 1

    while hp_n > 0:
        ev_t = hp[0, 0]
        ev_kind = hp[0, 3]
        ev_arg = hp[0, 4]
        hp_n = _heap_pop(hp, hp_n)
        if ev_t > max_time:
            max_time = ev_t

        if ev_kind == EV_BUS:
            node = ev_arg
            # Stale wakeup from an earlier, shorter busy window.
            if ev_t < bus_until[node]:
                if bus_nwait[node] > 0:
                    hp_n = _heap_push(hp, hp_n, bus_until[node], n_cores + node,
                                      seq, EV_BUS, node)
                    seq += 1
                else:
                    bus_ev[node] = 0
                continue
            if bus_nwait[node] == 0:
                bus_ev[node] = 0
                continue
            # round-robin grant among waiting local cores
            gidx = -1
            for k in range(1, cores_per_node + 1):
                idx = (bus_rr[node] + k) % cores_per_node
                cand = node * cores_per_node + idx
                if bus_wait[cand] == 1:
                    gidx = idx
                    break
            if gidx < 0:
                bus_ev[node] = 0
                continue
            c = node * cores_per_node + gidx
            bus_wait[c] = 0
            bus_nwait[node] -= 1
            bus_rr[node] = gidx

            # --- compute and apply the granted transaction (same code as
            # the synchronous path below, kept inline for numba's benefit)
            row_i = pc[c]
            kind = prog[row_i, 1]
            base = prog[row_i, 2]
            elem = prog[row_i, 4]
            a0 = base
            if depth[c] > 0:
                a0 += l_iter[0, c] * prog[row_i, 5]
            if depth[c] > 1:
                a0 += l_iter[1, c] * prog[row_i, 6]
            addr = a0 + elem_prog[c] * elem
            line = addr // line_bytes
            s = line % n_sets
            occ = np.int64(0)
            way = _find_way(c_line, c_state, c, s, line)
            lcl = c - node * cores_per_node
            gl = line_base[node] + line
            if way >= 0:
                # upgrade: Shared -> Modified, invalidating other copies
                occ += 1
                if coherence == 1:
                    m = sh_mask[gl]
                    for o in range(cores_per_node):
                        if o == lcl:
                            continue
                        if (m >> np.uint64(o)) & np.uint64(1):
                            oc = node * cores_per_node + o
                            ow = _find_way(c_line, c_state, oc, s, line)
                            if ow >= 0:
                                c_state[oc, s, ow] = INVALID
                            occ += 1
                    sh_mask[gl] = np.uint64(1) << np.uint64(lcl)
                    sh_owner[gl] = lcl + 1
                c_state[c, s, way] = MODIFIED
                _lru_touch(c_lru, c, s, way)
                hits[c] += 1
                elem_prog[c] += 1
            else:
                misses[c] += 1
                vic = _lru_victim(c_lru, c, s)
                if c_state[c, s, vic] != INVALID:
                    vline = c_line[c, s, vic]
                    if c_state[c, s, vic] == MODIFIED:
                        occ += line_tx
                        bus_bytes[node] += line_bytes
                        wbs[c] += 1
                        if coherence == 1:
                            vgl = line_base[node] + vline
                            sh_owner[vgl] = 0
                            sh_mask[vgl] &= ~(np.uint64(1) << np.uint64(lcl))
                    elif coherence == 1:
                        vgl = line_base[node] + vline
                        sh_mask[vgl] &= ~(np.uint64(1) << np.uint64(lcl))
                if coherence == 1:
                    ow = sh_owner[gl]
                    if ow != 0 and ow - 1 != lcl:
                        oc = node * cores_per_node + (ow - 1)
                        oway = _find_way(c_line, c_state, oc, s, line)
                        occ += line_tx
                        bus_bytes[node] += line_bytes
                        wbs[oc] += 1
                        if kind == WRITE:
                            if oway >= 0:
                                c_state[oc, s, oway] = INVALID
                            sh_mask[gl] &= ~(np.uint64(1) << np.uint64(ow - 1))
                        else:
                            if oway >= 0:
                                c_state[oc, s, oway] = SHARED
                        sh_owner[gl] = 0
                    if kind == WRITE:
                        m = sh_mask[gl]
                        for o in range(cores_per_node):
                            if o == lcl:
                                continue
                            if (m >> np.uint64(o)) & np.uint64(1):
                                oc = node * cores_per_node + o
                                ow2 = _find_way(c_line, c_state, oc, s, line)
                                if ow2 >= 0:
                                    c_state[oc, s, ow2] = INVALID
                                occ += 1
                        sh_mask[gl] = np.uint64(1) << np.uint64(lcl)
                        sh_owner[gl] = lcl + 1
                    else:
                        sh_mask[gl] |= np.uint64(1) << np.uint64(lcl)
                occ += line_tx
                bus_bytes[node] += line_bytes
                c_line[c, s, vic] = line
                c_state[c, s, vic] = MODIFIED if kind == WRITE else SHARED
                _lru_touch(c_lru, c, s, vic)
                elem_prog[c] += 1
            done_t = ev_t + occ
            bus_until[node] = done_t
            bus_busy[node] += occ
            ltime[c] = done_t
            status[c] = ST_PENDING
            hp_n = _heap_push(hp, hp_n, done_t, c, seq, EV_CORE, c)
            seq += 1
            if bus_nwait[node] > 0:
                hp_n = _heap_push(hp, hp_n, done_t, n_cores + node, seq, EV_BUS, node)
                seq += 1
            else:
                bus_ev[node] = 0
            continue

        if ev_kind == EV_PKT:
            p = ev_arg
            h = pkt_hop[p]
            if h == pkt_nhops[p]:
                pkt_done[p] = 1
                pkt_dtime[p] = ev_t
                dnode = pkt_dst[p]
                # wake a core blocked on this channel, lowest core id first
                for k in range(cores_per_node):
                    c = dnode * cores_per_node + k
                    if (status[c] == ST_RECV and rcv_src[c] == pkt_src[p]
                            and rcv_tag[c] == pkt_tag[p]):
                        if pkt_bytes[p] != prog[pc[c], 3]:
                            err[0] = ERR_RECV_SIZE
                            err[1] = c
                            return ERR_RECV_SIZE
                        pkt_used[p] = 1
                        drain = pkt_flits[p] * nic_cy
                        t2 = ev_t + drain
                        if ltime[c] > ev_t:
                            t2 = ltime[c] + drain
                        busy[c] += drain
                        ltime[c] = t2
                        pc[c] += 1
                        status[c] = ST_PENDING
                        rcv_src[c] = -1
                        rcv_tag[c] = -1
                        hp_n = _heap_push(hp, hp_n, t2, c, seq, EV_CORE, c)
                        seq += 1
                        break
                continue
            link = pkt_links[p, h]
            unode = link // 4
            s_fl = pkt_flits[p]
            if router_sw == 1:
                r = s_fl * sw_r
                pstart = ev_t if ev_t > router_until[unode] else router_until[unode]
                ready = pstart + r
                router_until[unode] = ready
            else:
                ready = ev_t + hw_r
            start = ready if ready > link_until[link] else link_until[link]
            link_until[link] = start + s_fl
            flit_hops += s_fl
            pkt_hop[p] += 1
            if flow_ct == 1 and pkt_hop[p] < pkt_nhops[p]:
                nxt = start + 1
            else:
                nxt = start + s_fl
            hp_n = _heap_push(hp, hp_n, nxt, n_cores + n_nodes + p, seq, EV_PKT, p)
            seq += 1
            continue

        # EV_CORE: run the core inline until blocked, done, or past horizon
        c = ev_arg
        if status[c] != ST_PENDING:
            continue
        lt = ltime[c]
        node = c // cores_per_node
        lcl = c - node * cores_per_node
        pend = prog_off[c + 1]
        while True:
            horizon = hp[0, 0] if hp_n > 0 else INF
            if lt > horizon:
                ltime[c] = lt
                hp_n = _heap_push(hp, hp_n, lt, c, seq, EV_CORE, c)
                seq += 1
                break
            if pc[c] >= pend:
                status[c] = ST_DONE
                ltime[c] = lt
                break
            row_i = pc[c]
            op = prog[row_i, 0]

            if op == OP_ACCESS:
                kind = prog[row_i, 1]
                base = prog[row_i, 2]
                count = prog[row_i, 3]
                elem = prog[row_i, 4]
                a0 = base
                if depth[c] > 0:
                    a0 += l_iter[0, c] * prog[row_i, 5]
                if depth[c] > 1:
                    a0 += l_iter[1, c] * prog[row_i, 6]
                if a0 < 0 or a0 + count * elem > node_mem[node]:
                    err[0] = ERR_MEM
                    err[1] = c
                    err[2] = a0
                    return ERR_MEM
                blocked = False
                while elem_prog[c] < count:
                    if lt > horizon:
                        break
                    addr = a0 + elem_prog[c] * elem
                    line = addr // line_bytes
                    s = line % n_sets
                    line_end = (line + 1) * line_bytes
                    run = (line_end - addr) // elem
                    left = count - elem_prog[c]
                    if run > left:
                        run = left
                    way = _find_way(c_line, c_state, c, s, line)
                    if way >= 0 and not (kind == WRITE and coherence == 1
                                         and c_state[c, s, way] == SHARED):
                        # hit batch over the rest of this line
                        if kind == WRITE and c_state[c, s, way] == SHARED:
                            c_state[c, s, way] = MODIFIED  # coherence disabled
                        _lru_touch(c_lru, c, s, way)
                        hits[c] += run
                        cost = run * hit_cy
                        lt += cost
                        busy[c] += cost
                        elem_prog[c] += run
                        continue
                    # upgrade or miss: probe cost, then a bus transaction
                    lt += hit_cy
                    busy[c] += hit_cy
                    if bus_until[node] <= lt and bus_nwait[node] == 0:
                        # synchronous grant on an idle bus
                        gl = line_base[node] + line
                        occ = np.int64(0)
                        if way >= 0:
                            occ += 1
                            if coherence == 1:
                                m = sh_mask[gl]
                                for o in range(cores_per_node):
                                    if o == lcl:
                                        continue
                                    if (m >> np.uint64(o)) & np.uint64(1):
                                        oc = node * cores_per_node + o
                                        ow = _find_way(c_line, c_state, oc, s, line)
                                        if ow >= 0:
                                            c_state[oc, s, ow] = INVALID
                                        occ += 1
                                sh_mask[gl] = np.uint64(1) << np.uint64(lcl)
                                sh_owner[gl] = lcl + 1
                            c_state[c, s, way] = MODIFIED
                            _lru_touch(c_lru, c, s, way)
                            hits[c] += 1
                            elem_prog[c] += 1
                        else:
                            misses[c] += 1
                            vic = _lru_victim(c_lru, c, s)
                            if c_state[c, s, vic] != INVALID:
                                vline = c_line[c, s, vic]
                                if c_state[c, s, vic] == MODIFIED:
                                    occ += line_tx
                                    bus_bytes[node] += line_bytes
                                    wbs[c] += 1
                                    if coherence == 1:
                                        vgl = line_base[node] + vline
                                        sh_owner[vgl] = 0
                                        sh_mask[vgl] &= ~(np.uint64(1) << np.uint64(lcl))
                                elif coherence == 1:
                                    vgl = line_base[node] + vline
                                    sh_mask[vgl] &= ~(np.uint64(1) << np.uint64(lcl))
                            if coherence == 1:
                                ow = sh_owner[gl]
                                if ow != 0 and ow - 1 != lcl:
                                    oc = node * cores_per_node + (ow - 1)
                                    oway = _find_way(c_line, c_state, oc, s, line)
                                    occ += line_tx
                                    bus_bytes[node] += line_bytes
                                    wbs[oc] += 1
                                    if kind == WRITE:
                                        if oway >= 0:
                                            c_state[oc, s, oway] = INVALID
                                        sh_mask[gl] &= ~(np.uint64(1) << np.uint64(ow - 1))
                                    else:
                                        if oway >= 0:
                                            c_state[oc, s, oway] = SHARED
                                    sh_owner[gl] = 0
                                if kind == WRITE:
                                    m = sh_mask[gl]
                                    for o in range(cores_per_node):
                                        if o == lcl:
                                            continue
                                        if (m >> np.uint64(o)) & np.uint64(1):
                                            oc = node * cores_per_node + o
                                            ow2 = _find_way(c_line, c_state, oc, s, line)
                                            if ow2 >= 0:
                                                c_state[oc, s, ow2] = INVALID
                                            occ += 1
                                    sh_mask[gl] = np.uint64(1) << np.uint64(lcl)
                                    sh_owner[gl] = lcl + 1
                                else:
                                    sh_mask[gl] |= np.uint64(1) << np.uint64(lcl)
                            occ += line_tx
                            bus_bytes[node] += line_bytes
                            c_line[c, s, vic] = line
                            c_state[c, s, vic] = MODIFIED if kind == WRITE else SHARED
                            _lru_touch(c_lru, c, s, vic)
                            elem_prog[c] += 1
                        bus_until[node] = lt + occ
                        bus_busy[node] += occ
                        lt = lt + occ
                        continue
                    # bus busy (or others already queued): block
                    bus_wait[c] = 1
                    bus_nwait[node] += 1
                    status[c] = ST_BUS
                    ltime[c] = lt
                    if bus_ev[node] == 0:
                        bus_ev[node] = 1
                        hp_n = _heap_push(hp, hp_n, bus_until[node], n_cores + node,
                                          seq, EV_BUS, node)
                        seq += 1
                    blocked = True
                    break
                if blocked:
                    break
                if elem_prog[c] < count:
                    # paused by the horizon mid-record
                    ltime[c] = lt
                    hp_n = _heap_push(hp, hp_n, lt, c, seq, EV_CORE, c)
                    seq += 1
                    break
                elem_prog[c] = 0
                pc[c] += 1
                continue

            if op == OP_COMPUTE:
                lt += prog[row_i, 1]
                busy[c] += prog[row_i, 1]
                pc[c] += 1
                continue

            if op == OP_LOOP:
                cnt = prog[row_i, 1]
                if cnt == 0:
                    pc[c] = prog[row_i, 2] + 1
                    continue
                d = depth[c]
                l_start[d, c] = row_i + 1
                l_rem[d, c] = cnt
                l_iter[d, c] = 0
                depth[c] += 1
                pc[c] += 1
                continue

            if op == OP_END:
                d = depth[c] - 1
                l_rem[d, c] -= 1
                l_iter[d, c] += 1
                if l_rem[d, c] > 0:
                    pc[c] = l_start[d, c]
                else:
                    depth[c] -= 1
                    pc[c] += 1
                continue

            if op == OP_MARK:
                marks[c, prog[row_i, 1]] = lt
                pc[c] += 1
                continue

            if op == OP_BARRIER:
                g = prog[row_i, 1]
                if member_of[g, c] == 0:
                    err[0] = ERR_BARRIER_MEMBER
                    err[1] = c
                    err[2] = g
                    return ERR_BARRIER_MEMBER
                expected = grp_off[g + 1] - grp_off[g]
                bar_arrived[g] += 1
                if lt > bar_maxarr[g]:
                    bar_maxarr[g] = lt
                if bar_arrived[g] < expected:
                    status[c] = ST_BARRIER
                    ltime[c] = lt
                    break
                release = bar_maxarr[g] + bar_base + bar_per_core * expected
                ltime[c] = lt
                for mi in range(grp_off[g], grp_off[g + 1]):
                    m = grp_members[mi]
                    bar_wait[m] += release - ltime[m]
                    ltime[m] = release
                    pc[m] += 1
                    status[m] = ST_PENDING
                    hp_n = _heap_push(hp, hp_n, release, m, seq, EV_CORE, m)
                    seq += 1
                bar_arrived[g] = 0
                bar_maxarr[g] = 0
                break

            if op == OP_SEND:
                p = send_cur[c]
                if p >= pkt_off[c + 1]:
                    err[0] = ERR_PKT_OVERFLOW
                    err[1] = c
                    return ERR_PKT_OVERFLOW
                send_cur[c] += 1
                pkt_seq[p] = send_seq
                send_seq += 1
                cost = pkt_flits[p] * nic_cy
                lt += cost
                busy[c] += cost
                if pkt_src[p] == pkt_dst[p]:
                    # delivered locally at zero network cost; wake a core of
                    # this node already blocked on the channel
                    pkt_done[p] = 1
                    pkt_dtime[p] = lt
                    for k in range(cores_per_node):
                        w = node * cores_per_node + k
                        if (status[w] == ST_RECV and rcv_src[w] == pkt_src[p]
                                and rcv_tag[w] == pkt_tag[p]):
                            if pkt_bytes[p] != prog[pc[w], 3]:
                                err[0] = ERR_RECV_SIZE
                                err[1] = w
                                return ERR_RECV_SIZE
                            pkt_used[p] = 1
                            drain = pkt_flits[p] * nic_cy
                            t2 = (ltime[w] if ltime[w] > lt else lt) + drain
                            busy[w] += drain
                            ltime[w] = t2
                            pc[w] += 1
                            status[w] = ST_PENDING
                            rcv_src[w] = -1
                            rcv_tag[w] = -1
                            hp_n = _heap_push(hp, hp_n, t2, w, seq, EV_CORE, w)
                            seq += 1
                            break
                else:
                    packets_sent += 1
                    hp_n = _heap_push(hp, hp_n, lt, n_cores + n_nodes + p,
                                      seq, EV_PKT, p)
                    seq += 1
                pc[c] += 1
                continue

            if op == OP_RECV:
                src = prog[row_i, 1]
                tag = prog[row_i, 2]
                best = -1
                best_seq = INF
                for p in range(n_pkts):
                    if (pkt_seq[p] >= 0 and pkt_used[p] == 0
                            and pkt_src[p] == src and pkt_dst[p] == node
                            and pkt_tag[p] == tag and pkt_seq[p] < best_seq):
                        best = p
                        best_seq = pkt_seq[p]
                if best >= 0 and pkt_done[best] == 1:
                    if pkt_bytes[best] != prog[row_i, 3]:
                        err[0] = ERR_RECV_SIZE
                        err[1] = c
                        return ERR_RECV_SIZE
                    pkt_used[best] = 1
                    start = lt if lt > pkt_dtime[best] else pkt_dtime[best]
                    drain = pkt_flits[best] * nic_cy
                    lt = start + drain
                    busy[c] += drain
                    pc[c] += 1
                    continue
                status[c] = ST_RECV
                rcv_src[c] = src
                rcv_tag[c] = tag
                ltime[c] = lt
                break

            err[0] = ERR_BAD_OP
            err[1] = c
            err[2] = op
            return ERR_BAD_OP

    # end of event loop
    all_done = True
    for c in range(n_cores):
        if ltime[c] > max_time:
            max_time = ltime[c]
        if status[c] != ST_DONE:
            all_done = False
    misc[0] = max_time
    misc[1] = flit_hops
    misc[2] = packets_sent
    if not all_done:
        err[0] = ERR_DEADLOCK
        return ERR_DEADLOCK
    return ERR_OK
