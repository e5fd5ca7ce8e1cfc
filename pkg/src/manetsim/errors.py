"""Exception types shared across the simulator."""


class SimError(Exception):
    """Base class for all simulator errors."""


class PastTimeError(SimError):
    """An event was scheduled before the current simulation clock."""


class UnknownNodeError(SimError):
    """A node id outside the deployed set was referenced."""


class OverlappingLegError(SimError):
    """A movement leg overlaps an existing leg of the same node in time."""


class UnknownScenarioError(SimError):
    """No builtin scenario with the requested name."""


class ScenarioSyntaxError(SimError):
    """Malformed scenario file. Carries the offending line number."""

    def __init__(self, message: str, line: int = 0):
        super().__init__(f"line {line}: {message}" if line else message)
        self.line = line


class ScenarioSemanticError(SimError):
    """Well-formed scenario file with inconsistent content."""


class LedgerOrderError(SimError):
    """Ledger events must arrive in non-decreasing time order."""


class LedgerConsistencyError(SimError):
    """A receive/drop event referenced a packet the ledger never saw sent."""


class NoTransmissionsError(SimError):
    """Transmission efficiency is undefined without any data transmission."""


class ZeroLengthError(SimError):
    """Density is undefined for a zero-length road segment."""


class BadDurationError(SimError):
    """Flow rate requires an observation window in (0, 3600] seconds."""


class DegenerateTrajectoryError(SimError):
    """Mean speed requires at least two strictly time-ordered samples."""
