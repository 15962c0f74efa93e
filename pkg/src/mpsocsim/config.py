"""System configuration: explorable parameters, presets, parsing, validation.

A configuration document is flat INI-style text with one section per
subsystem (``[system]``, ``[cache]``, ``[timing]``).  Every key has a
documented default, so the empty document is a valid 1-node, 1-core system.
Sweep files stay diffable because values are plain ``key = value`` lines.
"""

from __future__ import annotations

import configparser
import enum
import io
from dataclasses import dataclass, field, fields, replace

from .errors import (
    ConfigSyntaxError,
    UnknownKeyError,
    UnknownPresetError,
    ValueRangeError,
)

KIB = 1024
MIB = 1024 * KIB


def _is_pow2(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


class RouterKind(enum.Enum):
    SOFTWARE_CORE = "software_core"
    HARDWARE_SWITCH = "hardware_switch"


class FlowControl(enum.Enum):
    STORE_AND_FORWARD = "store_and_forward"
    CUT_THROUGH = "cut_through"


@dataclass(frozen=True)
class CacheConfig:
    """Geometry of one per-core write-back L1 data cache."""

    n_sets: int = 64
    n_ways: int = 4
    line_bytes: int = 64

    @property
    def total_bytes(self) -> int:
        return self.n_sets * self.n_ways * self.line_bytes

    def invariant_violations(self) -> list[str]:
        out = []
        for name in ("n_sets", "n_ways", "line_bytes"):
            val = getattr(self, name)
            if not _is_pow2(val):
                out.append(f"cache.{name}={val} is not a power of two")
        if self.line_bytes < 8:
            out.append(f"cache.line_bytes={self.line_bytes} is below the 8-byte minimum")
        return out


@dataclass(frozen=True)
class TimingParams:
    """Calibration constants, all in cycles (or bytes/cycle where named).

    Defaults are calibrated for a small in-order scalar core behind a
    shared 64-bit bus; ``bus_bytes_per_cycle`` is the bus's peak data rate.
    ``int_op_cycles`` is charged once per benchmark loop iteration and
    absorbs address generation, loop control and other non-modeled
    instruction-side work.  ``nic_cycles_per_flit`` is the cost, on the
    issuing core, of marshaling one flit into / out of the network
    interface FIFO.
    """

    cache_hit_cycles: int = 3
    bus_addr_overhead_cycles: int = 16
    bus_bytes_per_cycle: int = 8
    link_flit_bytes: int = 8
    hw_router_delay_cycles: int = 2
    sw_router_cycles_per_flit: int = 20
    nic_cycles_per_flit: int = 40
    fp_add_cycles: int = 4
    fp_mul_cycles: int = 4
    fp_div_cycles: int = 20
    fp_sqrt_cycles: int = 20
    int_op_cycles: int = 26
    barrier_base_cycles: int = 20
    barrier_per_core_cycles: int = 4

    def invariant_violations(self) -> list[str]:
        out = []
        for f in fields(self):
            val = getattr(self, f.name)
            floor = 0 if f.name == "barrier_base_cycles" else 1
            if val < floor:
                out.append(f"timing.{f.name}={val} is below the minimum of {floor}")
        return out


@dataclass(frozen=True)
class Arrangement:
    """A (nodes, cores_per_node) point within one system's mesh."""

    nodes: int
    cores_per_node: int

    def __str__(self) -> str:
        return f"({self.nodes},{self.cores_per_node})"

    @property
    def total_cores(self) -> int:
        return self.nodes * self.cores_per_node

    @classmethod
    def parse(cls, text: str) -> "Arrangement":
        t = text.strip().strip("()").replace("x", ",")
        parts = [p for p in t.split(",") if p.strip()]
        if len(parts) != 2:
            raise ValueRangeError(f"cannot parse arrangement {text!r}; use NxC or (N,C)")
        n, c = (int(p) for p in parts)
        if n < 1 or c < 1:
            raise ValueRangeError(f"arrangement {text!r} must have nodes >= 1 and cores >= 1")
        return cls(n, c)


@dataclass(frozen=True)
class SystemConfig:
    """One explorable system point: mesh, node composition, caches, timing."""

    label: str = "custom"
    mesh_x: int = 1
    mesh_y: int = 1
    cores_per_node: int = 1
    router_kind: RouterKind = RouterKind.HARDWARE_SWITCH
    flow_control: FlowControl = FlowControl.STORE_AND_FORWARD
    cache: CacheConfig = field(default_factory=CacheConfig)
    node_mem_bytes: int = 8 * MIB
    node_mem_overrides: tuple[tuple[int, int], ...] = ()
    coherence_enabled: bool = True
    timing: TimingParams = field(default_factory=TimingParams)

    @property
    def n_nodes(self) -> int:
        return self.mesh_x * self.mesh_y

    @property
    def n_cores(self) -> int:
        return self.n_nodes * self.cores_per_node

    def node_mem(self, node: int) -> int:
        for n, b in self.node_mem_overrides:
            if n == node:
                return b
        return self.node_mem_bytes

    def mem_map(self) -> list[int]:
        return [self.node_mem(n) for n in range(self.n_nodes)]

    def with_arrangement(self, arr: Arrangement) -> "SystemConfig":
        """Restrict / reshape the system to an arrangement for one run.

        The arrangement uses the first ``arr.nodes`` node ids of this
        config's mesh and replaces cores_per_node.  It must fit the mesh.
        """
        if arr.nodes > self.n_nodes:
            raise ValueRangeError(
                f"arrangement {arr} needs {arr.nodes} nodes; config "
                f"{self.label!r} has a {self.mesh_x}x{self.mesh_y} mesh"
            )
        if arr.nodes == self.n_nodes:
            return replace(self, cores_per_node=arr.cores_per_node)
        # Shrink to a sub-mesh that still contains nodes 0..arr.nodes-1
        # row-major; keep full rows when possible so XY routes stay valid.
        if arr.nodes <= self.mesh_x:
            mx, my = arr.nodes, 1
        else:
            if arr.nodes % self.mesh_x:
                raise ValueRangeError(
                    f"arrangement {arr} does not tile the {self.mesh_x}-wide mesh"
                )
            mx, my = self.mesh_x, arr.nodes // self.mesh_x
        return replace(self, mesh_x=mx, mesh_y=my, cores_per_node=arr.cores_per_node)


def validate(cfg: SystemConfig) -> list[str]:
    """Return one entry per violated invariant; empty means valid."""
    report: list[str] = []
    if cfg.mesh_x < 1 or cfg.mesh_y < 1:
        report.append(f"mesh {cfg.mesh_x}x{cfg.mesh_y} is empty")
    if cfg.cores_per_node < 1:
        report.append(f"cores_per_node={cfg.cores_per_node} must be >= 1")
    report.extend(cfg.cache.invariant_violations())
    report.extend(cfg.timing.invariant_violations())
    seen = set()
    for node, _ in cfg.node_mem_overrides:
        if node in seen:
            report.append(f"node memory map names node {node} twice")
        seen.add(node)
        if not (0 <= node < cfg.n_nodes):
            report.append("node memory map incomplete: "
                          f"override for node {node} outside 0..{cfg.n_nodes - 1}")
    if not cfg.cache.invariant_violations():
        floor = 4 * cfg.cache.total_bytes
        for node in range(cfg.n_nodes):
            if cfg.node_mem(node) < floor:
                report.append(
                    f"node {node} memory {cfg.node_mem(node)} B is below the "
                    f"working-set floor of {floor} B (4x cache size)"
                )
    if cfg.timing.bus_bytes_per_cycle < 1:
        report.append("bus_bytes_per_cycle must be >= 1")
    return report


# ---------------------------------------------------------------------------
# Presets
# ---------------------------------------------------------------------------

def _single_node(label: str, cores: int, ways: int) -> SystemConfig:
    return SystemConfig(
        label=label,
        mesh_x=1,
        mesh_y=1,
        cores_per_node=cores,
        cache=CacheConfig(n_sets=64, n_ways=ways, line_bytes=64),
        node_mem_bytes=8 * MIB,
    )


def _noc(label: str, router: RouterKind, fc: FlowControl) -> SystemConfig:
    return SystemConfig(
        label=label,
        mesh_x=4,
        mesh_y=4,
        cores_per_node=4,
        router_kind=router,
        flow_control=fc,
        cache=CacheConfig(n_sets=64, n_ways=4, line_bytes=64),
        node_mem_bytes=256 * KIB,
        node_mem_overrides=((0, 2 * MIB),),
    )


_PRESETS = {
    "BASE": lambda: _single_node("BASE", 1, 4),
    "BASE32": lambda: _single_node("BASE32", 32, 4),
    "C-64-8": lambda: _single_node("C-64-8", 1, 8),
    "C-64-16": lambda: _single_node("C-64-16", 1, 16),
    "NOC_BASE": lambda: _noc("NOC_BASE", RouterKind.SOFTWARE_CORE, FlowControl.STORE_AND_FORWARD),
    "NOC_SW": lambda: _noc("NOC_SW", RouterKind.HARDWARE_SWITCH, FlowControl.STORE_AND_FORWARD),
    "NOC_SW_C": lambda: _noc("NOC_SW_C", RouterKind.HARDWARE_SWITCH, FlowControl.CUT_THROUGH),
}

PRESET_NAMES = tuple(_PRESETS)


def preset(name: str) -> SystemConfig:
    try:
        return _PRESETS[name]()
    except KeyError:
        raise UnknownPresetError(
            f"unknown preset {name!r}; choose from {', '.join(PRESET_NAMES)}"
        ) from None


# ---------------------------------------------------------------------------
# Parsing / serialization
# ---------------------------------------------------------------------------

_SYSTEM_KEYS = {
    "preset", "label", "mesh_x", "mesh_y", "cores_per_node", "router",
    "flow_control", "node_mem_bytes", "node_mem_override", "coherence", "mmu",
}
_CACHE_KEYS = {"n_sets", "n_ways", "line_bytes"}
_TIMING_KEYS = {f.name for f in fields(TimingParams)}
_SECTIONS = {"system": _SYSTEM_KEYS, "cache": _CACHE_KEYS, "timing": _TIMING_KEYS}


def _get_int(section, key, lo=1):
    raw = section[key]
    try:
        val = int(raw, 0)
    except ValueError:
        raise ValueRangeError(f"{key} = {raw!r} is not an integer") from None
    if val < lo:
        raise ValueRangeError(f"{key} = {val} is out of range (minimum {lo})")
    return val


def _get_pow2(section, key, lo=1):
    val = _get_int(section, key, lo)
    if not _is_pow2(val):
        raise ValueRangeError(f"{key} = {val} is not a power of two")
    return val


def _get_bool(section, key):
    raw = section[key].strip().lower()
    if raw in ("1", "true", "yes", "on"):
        return True
    if raw in ("0", "false", "no", "off"):
        return False
    raise ValueRangeError(f"{key} = {raw!r} is not a boolean")


def parse_config(text: str) -> SystemConfig:
    """Parse a config document; absent keys take documented defaults."""
    cp = configparser.ConfigParser(interpolation=None)
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigSyntaxError(str(exc)) from None

    for sect in cp.sections():
        if sect not in _SECTIONS:
            raise UnknownKeyError(f"unknown section [{sect}]")
        for key in cp[sect]:
            if key not in _SECTIONS[sect]:
                raise UnknownKeyError(f"unknown key {key!r} in section [{sect}]")

    sys_sect = cp["system"] if cp.has_section("system") else {}
    base = preset(sys_sect["preset"]) if "preset" in sys_sect else SystemConfig()
    kw = {}

    if "label" in sys_sect:
        kw["label"] = sys_sect["label"].strip()
    elif "preset" not in sys_sect:
        kw["label"] = "custom"
    if "mesh_x" in sys_sect:
        kw["mesh_x"] = _get_int(sys_sect, "mesh_x")
    if "mesh_y" in sys_sect:
        kw["mesh_y"] = _get_int(sys_sect, "mesh_y")
    if "cores_per_node" in sys_sect:
        kw["cores_per_node"] = _get_int(sys_sect, "cores_per_node")
    if "router" in sys_sect:
        raw = sys_sect["router"].strip().lower()
        try:
            kw["router_kind"] = RouterKind(raw)
        except ValueError:
            raise ValueRangeError(
                f"router = {raw!r}; choose software_core or hardware_switch"
            ) from None
    if "flow_control" in sys_sect:
        raw = sys_sect["flow_control"].strip().lower()
        try:
            kw["flow_control"] = FlowControl(raw)
        except ValueError:
            raise ValueRangeError(
                f"flow_control = {raw!r}; choose store_and_forward or cut_through"
            ) from None
    if "node_mem_bytes" in sys_sect:
        kw["node_mem_bytes"] = _get_int(sys_sect, "node_mem_bytes")
    if "node_mem_override" in sys_sect:
        overrides = []
        raw = sys_sect["node_mem_override"].strip()
        if raw:
            for part in raw.split(";"):
                try:
                    node_s, bytes_s = part.split(":")
                    overrides.append((int(node_s), int(bytes_s)))
                except ValueError:
                    raise ValueRangeError(
                        f"node_mem_override entry {part!r}; use node:bytes;node:bytes"
                    ) from None
        kw["node_mem_overrides"] = tuple(overrides)
    if "coherence" in sys_sect:
        kw["coherence_enabled"] = _get_bool(sys_sect, "coherence")
    # "mmu" is reserved in the schema but has no effect on simulation.

    if cp.has_section("cache"):
        cs = cp["cache"]
        ckw = {}
        if "n_sets" in cs:
            ckw["n_sets"] = _get_pow2(cs, "n_sets")
        if "n_ways" in cs:
            ckw["n_ways"] = _get_pow2(cs, "n_ways")
        if "line_bytes" in cs:
            ckw["line_bytes"] = _get_pow2(cs, "line_bytes", lo=8)
        if ckw:
            kw["cache"] = replace(base.cache, **ckw)

    if cp.has_section("timing"):
        ts = cp["timing"]
        tkw = {}
        for key in _TIMING_KEYS:
            if key in ts:
                lo = 0 if key == "barrier_base_cycles" else 1
                tkw[key] = _get_int(ts, key, lo)
        if tkw:
            kw["timing"] = replace(base.timing, **tkw)

    return replace(base, **kw)


def serialize(cfg: SystemConfig) -> str:
    """Render a config to text such that parse_config round-trips exactly."""
    cp = configparser.ConfigParser(interpolation=None)
    cp["system"] = {
        "label": cfg.label,
        "mesh_x": str(cfg.mesh_x),
        "mesh_y": str(cfg.mesh_y),
        "cores_per_node": str(cfg.cores_per_node),
        "router": cfg.router_kind.value,
        "flow_control": cfg.flow_control.value,
        "node_mem_bytes": str(cfg.node_mem_bytes),
        "node_mem_override": ";".join(f"{n}:{b}" for n, b in cfg.node_mem_overrides),
        "coherence": "true" if cfg.coherence_enabled else "false",
    }
    cp["cache"] = {
        "n_sets": str(cfg.cache.n_sets),
        "n_ways": str(cfg.cache.n_ways),
        "line_bytes": str(cfg.cache.line_bytes),
    }
    cp["timing"] = {
        f.name: str(getattr(cfg.timing, f.name)) for f in fields(TimingParams)
    }
    buf = io.StringIO()
    cp.write(buf)
    return buf.getvalue()
