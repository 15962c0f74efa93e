"""Parallel-programming substrate: hart-ID worksharing, barrier cost model,
message envelopes, and the node-0-rooted collectives (scatter / bcast /
gather).

Collectives are linear: the root loops over peers in ascending node id and
moves each slice as a single packet.  The functional payload copies are
performed on numpy buffers here; the timing cost is charged by the engine
through Send/Recv trace steps that the planners below enumerate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Partition:
    start: int
    length: int

    @property
    def stop(self) -> int:
        return self.start + self.length


def partition_even(n_items: int, n_workers: int, worker: int) -> Partition:
    """Even worksharing split: the first ``n_items % n_workers`` workers get
    one extra item; start is the prefix sum of preceding lengths.
    """
    if n_workers < 1:
        raise ValueError("n_workers must be >= 1")
    if not 0 <= worker < n_workers:
        raise ValueError(f"worker {worker} outside 0..{n_workers - 1}")
    base, rem = divmod(n_items, n_workers)
    length = base + (1 if worker < rem else 0)
    start = worker * base + min(worker, rem)
    return Partition(start, length)


def partitions(n_items: int, n_workers: int) -> list[Partition]:
    return [partition_even(n_items, n_workers, w) for w in range(n_workers)]


def barrier_release_cycle(arrivals, base_cycles: int, per_core_cycles: int) -> int:
    """All members of one barrier generation resume at the same cycle."""
    arrivals = list(arrivals)
    return max(arrivals) + base_cycles + per_core_cycles * len(arrivals)


@dataclass(frozen=True)
class MessageEnvelope:
    """Point-to-point message identity; matching is FIFO per (src, dst, tag)."""

    src: int
    dst: int
    tag: int
    payload_bytes: int


# ---------------------------------------------------------------------------
# Collective planning (send sequences) and functional payload movement
# ---------------------------------------------------------------------------

def scatter_plan(root: int, counts: list[int], n_nodes: int, tag: int,
                 elem_bytes: int = 1) -> list[MessageEnvelope]:
    """Root-to-peers sends, ascending node id, one packet per non-root node."""
    if len(counts) != n_nodes:
        raise ValueError(f"scatter counts cover {len(counts)} nodes, system has {n_nodes}")
    plan = []
    for node in range(n_nodes):
        if node == root or counts[node] == 0:
            continue
        plan.append(MessageEnvelope(root, node, tag, counts[node] * elem_bytes))
    return plan


def bcast_plan(root: int, nbytes: int, n_nodes: int, tag: int) -> list[MessageEnvelope]:
    return [MessageEnvelope(root, node, tag, nbytes)
            for node in range(n_nodes) if node != root]


def gather_plan(root: int, counts: list[int], n_nodes: int, tag: int,
                elem_bytes: int = 1) -> list[MessageEnvelope]:
    """Mirror of scatter: every non-root node sends its slice to the root."""
    if len(counts) != n_nodes:
        raise ValueError(f"gather counts cover {len(counts)} nodes, system has {n_nodes}")
    plan = []
    for node in range(n_nodes):
        if node == root or counts[node] == 0:
            continue
        plan.append(MessageEnvelope(node, root, tag, counts[node] * elem_bytes))
    return plan


def scatter_copy(root_buf: np.ndarray, node_bufs: dict[int, np.ndarray],
                 counts: list[int]) -> None:
    """Functionally place each node's slice of ``root_buf`` into its buffer."""
    if sum(counts) != root_buf.shape[0]:
        raise ValueError("scatter counts do not sum to the source buffer length")
    off = 0
    for node, count in enumerate(counts):
        dst = node_bufs[node]
        if dst.shape[0] < count:
            raise ValueError(f"node {node} buffer too small for scatter slice")
        dst[:count] = root_buf[off:off + count]
        off += count


def bcast_copy(root_buf: np.ndarray, node_bufs: dict[int, np.ndarray]) -> None:
    for buf in node_bufs.values():
        buf[:root_buf.shape[0]] = root_buf


def gather_copy(node_bufs: dict[int, np.ndarray], root_buf: np.ndarray,
                counts: list[int]) -> None:
    """Root's result is the ordered concatenation of node slices."""
    if sum(counts) != root_buf.shape[0]:
        raise ValueError("gather counts do not sum to the destination length")
    off = 0
    for node, count in enumerate(counts):
        src = node_bufs[node]
        if src.shape[0] < count:
            raise ValueError(f"node {node} source slice missing for gather")
        root_buf[off:off + count] = src[:count]
        off += count
