"""Exception hierarchy.

The CLI maps these onto process exit codes: validation / verification
failures exit 1, simulation deadlock exits 2, I/O problems exit 3.
"""


class MpsocsimError(Exception):
    """Base class for all package errors."""


class ConfigError(MpsocsimError):
    """Base class for configuration problems."""


class ConfigSyntaxError(ConfigError):
    """Malformed config document; message carries the reported position."""


class UnknownKeyError(ConfigError):
    """A key or section not in the documented schema."""


class ValueRangeError(ConfigError):
    """A key parsed but its value violates the documented range."""


class UnknownPresetError(ConfigError):
    """Preset name not in the published preset table."""


class ValidationError(MpsocsimError):
    """A SystemConfig violated invariants; ``.report`` lists them."""

    def __init__(self, report):
        super().__init__("; ".join(report))
        self.report = list(report)


class MemoryMapError(MpsocsimError):
    """Benchmark data does not fit the node-local memory map."""


class DeadlockError(MpsocsimError):
    """Event queue drained while cores were still blocked.

    ``blocked`` maps core id to a short reason string (barrier / recv / bus).
    """

    def __init__(self, blocked):
        self.blocked = dict(blocked)
        desc = ", ".join(f"core {c}: {why}" for c, why in sorted(self.blocked.items()))
        super().__init__(f"simulation deadlock; blocked: {desc}")


class VerificationError(MpsocsimError):
    """A benchmark's functional result differed from its oracle."""


class SingularityError(MpsocsimError):
    """Two bodies are at identical positions (division by zero distance)."""


class AnalysisError(MpsocsimError):
    """analyze() was asked for a report its input rows cannot support."""
