"""Node-local data placement for the benchmarks.

Each node's address space starts at 0; arrays are placed contiguously with
64-byte alignment so no element access ever straddles a cache line.
"""

from __future__ import annotations

from ..errors import MemoryMapError


class NodeAllocator:
    def __init__(self, node_id: int, mem_bytes: int, align: int = 64):
        self.node_id = node_id
        self.mem_bytes = mem_bytes
        self.align = align
        self.top = 0
        self.map: dict[str, int] = {}

    def alloc(self, name: str, nbytes: int) -> int:
        addr = -(-self.top // self.align) * self.align
        if addr + nbytes > self.mem_bytes:
            raise MemoryMapError(
                f"node {self.node_id}: allocating {nbytes} B for {name!r} at "
                f"{addr} exceeds the {self.mem_bytes} B local memory"
            )
        self.top = addr + nbytes
        self.map[name] = addr
        return addr
