"""2-D mesh network: XY routing, link identifiers, and the closed-form
uncontended packet latency for the supported router / flow-control pairs.

Node k sits at column k % mesh_x, row k // mesh_x; node 0 is the corner.
Links are full duplex: each direction is a separate resource.
"""

from __future__ import annotations

from dataclasses import dataclass

from .config import FlowControl, RouterKind, TimingParams

# Directions for the 4 outgoing links of a node.
EAST, WEST, NORTH, SOUTH = 0, 1, 2, 3
_DIR_DELTA = {EAST: (1, 0), WEST: (-1, 0), NORTH: (0, 1), SOUTH: (0, -1)}


@dataclass(frozen=True)
class MeshTopology:
    mesh_x: int
    mesh_y: int

    @property
    def n_nodes(self) -> int:
        return self.mesh_x * self.mesh_y

    def coord(self, node: int) -> tuple[int, int]:
        return node % self.mesh_x, node // self.mesh_x

    def node_at(self, col: int, row: int) -> int:
        return row * self.mesh_x + col

    def neighbor(self, node: int, direction: int) -> int | None:
        col, row = self.coord(node)
        dc, dr = _DIR_DELTA[direction]
        col, row = col + dc, row + dr
        if 0 <= col < self.mesh_x and 0 <= row < self.mesh_y:
            return self.node_at(col, row)
        return None

    def link_id(self, node: int, direction: int) -> int:
        """Dense id of the directed link leaving ``node`` towards ``direction``."""
        return node * 4 + direction


@dataclass(frozen=True)
class Packet:
    """Inter-node message; src == dst is delivered locally at zero cost."""

    src: int
    dst: int
    tag: int
    payload_bytes: int

    def __post_init__(self):
        if self.payload_bytes < 1:
            raise ValueError("packet payload must be at least 1 byte")

    def flits(self, link_flit_bytes: int) -> int:
        return -(-self.payload_bytes // link_flit_bytes)


def route_xy(topo: MeshTopology, src: int, dst: int) -> list[int]:
    """Node sequence visited after ``src``: X fully, then Y; length equals
    the Manhattan distance.  src == dst gives the empty path.
    """
    path = []
    col, row = topo.coord(src)
    dcol, drow = topo.coord(dst)
    while col != dcol:
        col += 1 if dcol > col else -1
        path.append(topo.node_at(col, row))
    while row != drow:
        row += 1 if drow > row else -1
        path.append(topo.node_at(col, row))
    return path


def route_links(topo: MeshTopology, src: int, dst: int) -> list[int]:
    """Directed link ids along the XY route."""
    links = []
    here = src
    for nxt in route_xy(topo, src, dst):
        hc, hr = topo.coord(here)
        nc, nr = topo.coord(nxt)
        if nc > hc:
            d = EAST
        elif nc < hc:
            d = WEST
        elif nr > hr:
            d = NORTH
        else:
            d = SOUTH
        links.append(topo.link_id(here, d))
        here = nxt
    return links


def hop_router_delay(flits: int, rk: RouterKind, t: TimingParams) -> int:
    """Per-hop router processing cost.  A software router pays per flit and
    serializes packets through the node's small core; a hardware switch is
    a fixed pipeline delay.
    """
    if rk is RouterKind.SOFTWARE_CORE:
        return flits * t.sw_router_cycles_per_flit
    return t.hw_router_delay_cycles


def packet_latency_uncontended(p: Packet, fc: FlowControl, rk: RouterKind,
                               t: TimingParams, hops: int) -> int:
    """Closed-form delivery latency on an idle mesh.

    With H hops, S flits and per-hop router delay R:
      store-and-forward: H * (R + S)
      cut-through:       H * (R + 1) + (S - 1)
    """
    if hops == 0:
        return 0
    s = p.flits(t.link_flit_bytes)
    r = hop_router_delay(s, rk, t)
    if fc is FlowControl.STORE_AND_FORWARD:
        return hops * (r + s)
    return hops * (r + 1) + (s - 1)
