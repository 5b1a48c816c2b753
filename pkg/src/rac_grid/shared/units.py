"""Byte units and the on-demand disk reservation arithmetic."""

KB = 1_000
MB = 1_000_000
GB = 1_000_000_000
TB = 1_000_000_000_000
PB = 1_000_000_000_000_000

# Fractions are fixed to this many parts so the pin limit is exact integer arithmetic.
_FRACTION_SCALE = 1_000_000


def _pinnable_parts(min_on_demand_fraction: float) -> int:
    return round((1.0 - min_on_demand_fraction) * _FRACTION_SCALE)


def pin_limit(disk_capacity: int, min_on_demand_fraction: float) -> int:
    """Largest pinned byte count that still leaves the minimum on-demand share."""
    return disk_capacity * _pinnable_parts(min_on_demand_fraction) // _FRACTION_SCALE


def min_disk_for_pinned(pinned_bytes: int, min_on_demand_fraction: float) -> int:
    """Smallest disk capacity whose pin limit admits ``pinned_bytes``."""
    parts = _pinnable_parts(min_on_demand_fraction)
    if parts <= 0:
        return 0 if pinned_bytes == 0 else -1
    return -(-pinned_bytes * _FRACTION_SCALE // parts)


def format_bytes(value: float) -> str:
    """Human-readable decimal size, e.g. 1.47 PB."""
    for unit, scale in (("PB", PB), ("TB", TB), ("GB", GB), ("MB", MB), ("kB", KB)):
        if abs(value) >= scale:
            return f"{value / scale:.2f} {unit}"
    return f"{int(value)} B"
