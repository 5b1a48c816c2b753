"""Per-station storage: pinned disk area, on-demand disk cache and tape."""

from dataclasses import dataclass
from enum import Enum
from typing import Dict, List

from pydantic import BaseModel, ByteSize, ConfigDict, Field

from rac_grid.shared.errors import FileLargerThanCache, PinnedOverflow, TapeOverflow
from rac_grid.shared.models import FileRecord
from rac_grid.shared.settings import settings
from rac_grid.shared.units import min_disk_for_pinned, pin_limit
from rac_grid.station.eviction import EvictionPolicy, make_policy


class CacheOutcome(str, Enum):
    DISK_HIT = "DiskHit"
    MISS = "Miss"


@dataclass
class CacheStats:
    hits: int = 0
    misses: int = 0
    evictions: int = 0
    admissions: int = 0

    @property
    def requests(self) -> int:
        return self.hits + self.misses


class DiskCache:
    """Disk split into a pinned area and an on-demand area managed by an eviction policy.

    occupancy = pinned_bytes + on-demand bytes <= capacity, and a file never
    sits in both areas.
    """

    def __init__(self, station_id: str, capacity: int,
                 min_on_demand_fraction: float | None = None, eviction: str = "lru"):
        self.station_id = station_id
        self.capacity = int(capacity)
        self.min_on_demand_fraction = (settings.on_demand_min_fraction
                                       if min_on_demand_fraction is None else min_on_demand_fraction)
        self.pinned: Dict[str, int] = {}
        self.pinned_bytes = 0
        self.area: EvictionPolicy = make_policy(eviction)
        self.on_demand_bytes = 0
        self.stats = CacheStats()

    @property
    def occupancy(self) -> int:
        return self.pinned_bytes + self.on_demand_bytes

    @property
    def on_demand_area(self) -> int:
        """Largest on-demand footprint given the current pinned set."""
        return self.capacity - self.pinned_bytes

    def __contains__(self, file_id: str) -> bool:
        return file_id in self.pinned or file_id in self.area

    def is_pinned(self, file_id: str) -> bool:
        return file_id in self.pinned

    def pin(self, file: FileRecord) -> List[str]:
        """Pin ``file``; returns on-demand entries evicted to make room."""
        if file.file_id in self.pinned:
            raise ValueError(f"{file.file_id} already pinned at {self.station_id}")
        new_pinned = self.pinned_bytes + file.size
        if new_pinned > pin_limit(self.capacity, self.min_on_demand_fraction):
            raise PinnedOverflow(self.station_id, new_pinned, self.capacity, self.min_on_demand_fraction,
                                 required_disk=min_disk_for_pinned(new_pinned, self.min_on_demand_fraction))
        if file.file_id in self.area:
            self.on_demand_bytes -= self.area.remove(file.file_id)
        self.pinned[file.file_id] = file.size
        self.pinned_bytes = new_pinned
        return self._evict_until(self.capacity)

    def unpin(self, file_id: str) -> None:
        self.pinned_bytes -= self.pinned.pop(file_id)

    def request(self, file_id: str, now: float = 0.0) -> CacheOutcome:
        """DiskHit when the file is pinned or cached (refreshing on-demand recency), else Miss."""
        if file_id in self.pinned:
            self.stats.hits += 1
            return CacheOutcome.DISK_HIT
        if file_id in self.area:
            self.area.touch(file_id)
            self.stats.hits += 1
            return CacheOutcome.DISK_HIT
        self.stats.misses += 1
        return CacheOutcome.MISS

    def admit(self, file: FileRecord, now: float = 0.0) -> List[str]:
        """Insert ``file`` as most recent, evicting until it fits; returns evicted ids."""
        if file.file_id in self.pinned:
            return []
        if file.file_id in self.area:
            self.area.touch(file.file_id)
            return []
        if file.size > self.on_demand_area:
            raise FileLargerThanCache(file.file_id, file.size, self.on_demand_area)
        evicted = self._evict_until(self.capacity - file.size)
        self.area.insert(file.file_id, file.size)
        self.on_demand_bytes += file.size
        self.stats.admissions += 1
        return evicted

    def _evict_until(self, limit: int) -> List[str]:
        evicted: List[str] = []
        while self.occupancy > limit and len(self.area):
            victim = self.area.victim()
            self.on_demand_bytes -= self.area.remove(victim)
            evicted.append(victim)
        self.stats.evictions += len(evicted)
        return evicted


class TapeConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    mount_latency: float = Field(default_factory=lambda: settings.tape_mount_latency, ge=0)
    stream_rate: ByteSize = Field(default_factory=lambda: settings.tape_stream_rate, gt=0)


class TapeStore:
    """Archival tape; never evicts, overflow is an error."""

    def __init__(self, station_id: str, capacity: int, config: TapeConfig | None = None):
        config = config or TapeConfig()
        self.station_id = station_id
        self.capacity = int(capacity)
        self.occupancy = 0
        self.mount_latency = config.mount_latency
        self.stream_rate = int(config.stream_rate)
        self.stages = 0

    def store(self, size: int, copies: int = 1) -> None:
        needed = self.occupancy + size * copies
        if needed > self.capacity:
            raise TapeOverflow(self.station_id, needed, self.capacity)
        self.occupancy = needed

    def stage(self, size: int) -> float:
        """Record a stage and return its duration."""
        self.stages += 1
        return tape_stage_time(self, size)


def tape_stage_time(tape: TapeStore, size: int) -> float:
    """Seconds to mount and stream ``size`` bytes."""
    if size < 0:
        raise ValueError("size must be >= 0")
    return tape.mount_latency + size / tape.stream_rate
