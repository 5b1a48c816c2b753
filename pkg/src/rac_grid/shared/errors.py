"""Exception hierarchy shared by every rac_grid component."""

from typing import List, Optional

from rac_grid.shared.units import min_disk_for_pinned


class RacGridError(Exception):
    """Base class for all rac_grid errors."""


class UnknownStation(RacGridError):
    def __init__(self, station_id: str):
        super().__init__(f"unknown station: {station_id}")
        self.station_id = station_id


class DuplicateFile(RacGridError):
    def __init__(self, file_id: str):
        super().__init__(f"file already registered: {file_id}")
        self.file_id = file_id


class UnknownFile(RacGridError):
    def __init__(self, file_id: str):
        super().__init__(f"unknown file: {file_id}")
        self.file_id = file_id


class UnknownReplica(RacGridError):
    pass


class PinnedRemovalRefused(RacGridError):
    pass


class NoReplica(RacGridError):
    def __init__(self, file_id: str):
        super().__init__(f"no replica of {file_id}")
        self.file_id = file_id


class EmptyRacList(RacGridError):
    def __init__(self):
        super().__init__("partition requires at least one RAC")


class PinnedOverflow(RacGridError):
    """Pinned data leaves less than the minimum on-demand share of a station's disk."""

    def __init__(self, station_id: str, pinned_bytes: int, disk_capacity: int, min_fraction: float,
                 required_disk: Optional[int] = None):
        budget = disk_capacity - pinned_bytes
        super().__init__(
            f"pinned set at {station_id} needs {pinned_bytes} of {disk_capacity} bytes, "
            f"leaving {budget} bytes on-demand (< {min_fraction:.0%} of disk)"
        )
        self.station_id = station_id
        self.pinned_bytes = pinned_bytes
        self.disk_capacity = disk_capacity
        self.min_fraction = min_fraction
        self.required_disk = (min_disk_for_pinned(pinned_bytes, min_fraction)
                              if required_disk is None else required_disk)

    @property
    def shortfall(self) -> int:
        """Extra disk bytes that would make the pinned set fit."""
        needed = self.required_disk
        return max(0, needed - self.disk_capacity)


class FileLargerThanCache(RacGridError):
    def __init__(self, file_id: str, size: int, area: int):
        super().__init__(f"{file_id} ({size} bytes) exceeds on-demand area of {area} bytes")
        self.file_id = file_id
        self.size = size
        self.area = area


class TapeOverflow(RacGridError):
    def __init__(self, station_id: str, needed: int, capacity: int):
        super().__init__(f"tape at {station_id} needs {needed} of {capacity} bytes")
        self.station_id = station_id


class NoPath(RacGridError):
    def __init__(self, source: str, dest: str):
        super().__init__(f"no network path {source} -> {dest}")


class NoCpuInRegion(RacGridError):
    def __init__(self, region_id: str):
        super().__init__(f"region {region_id} has no CPU")
        self.region_id = region_id


class ValidationFailed(RacGridError):
    """Scenario failed validation; carries the violation list."""

    def __init__(self, violations: List["object"]):
        super().__init__(f"{len(violations)} validation violation(s)")
        self.violations = list(violations)


class ScenarioParseError(RacGridError):
    """Scenario file could not be parsed; positioned by line/column or field path."""

    def __init__(self, message: str, line: Optional[int] = None, column: Optional[int] = None,
                 field: Optional[str] = None):
        super().__init__(message)
        self.message = message
        self.line = line
        self.column = column
        self.field = field

    def location(self) -> str:
        if self.line is not None:
            return f"line {self.line}, column {self.column or 0}"
        if self.field:
            return f"field {self.field}"
        return "file"


class InvariantViolation(RacGridError):
    """Raised by the simulator's self-check mode when a storage invariant breaks."""
