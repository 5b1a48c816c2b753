from rac_grid.station.eviction import EVICTION_POLICIES, FifoPolicy, LruPolicy
from rac_grid.station.storage import CacheOutcome, DiskCache, TapeConfig, TapeStore, tape_stage_time

__all__ = [
    "EVICTION_POLICIES",
    "CacheOutcome",
    "DiskCache",
    "FifoPolicy",
    "LruPolicy",
    "TapeConfig",
    "TapeStore",
    "tape_stage_time",
]
