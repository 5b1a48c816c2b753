"""Regional database proxy (DAN) caching central database queries."""

from collections import OrderedDict
from enum import Enum
from typing import List, NamedTuple

from pydantic import BaseModel, ConfigDict, Field

from rac_grid.shared.settings import settings


class ServedBy(str, Enum):
    PROXY = "proxy"
    CENTRAL = "central"


class DanResult(NamedTuple):
    served_by: ServedBy
    latency: float


class DanConfig(BaseModel):
    """Per-region proxy settings as written in a scenario file."""
    model_config = ConfigDict(frozen=True, extra="forbid")

    cache_capacity: int = Field(default=1024, gt=0)
    proxy_latency: float = Field(default_factory=lambda: settings.proxy_latency, ge=0)
    central_latency: float = Field(default=0.5, ge=0)
    calibration_keys: int = Field(default=500, gt=0)


class DanProxy:
    """LRU cache of query keys in front of the central database."""

    def __init__(self, region_id: str, cache_capacity: int, proxy_latency: float | None = None):
        if cache_capacity < 1:
            raise ValueError(f"DAN proxy for {region_id} needs cache_capacity >= 1")
        self.region_id = region_id
        self.cache_capacity = cache_capacity
        self.proxy_latency = settings.proxy_latency if proxy_latency is None else proxy_latency
        self.cache: "OrderedDict[str, None]" = OrderedDict()
        self.hits = 0
        self.misses = 0

    def query(self, key: str, central_latency: float) -> DanResult:
        if key in self.cache:
            self.cache.move_to_end(key)
            self.hits += 1
            return DanResult(ServedBy.PROXY, self.proxy_latency)
        self.misses += 1
        self.cache[key] = None
        if len(self.cache) > self.cache_capacity:
            self.cache.popitem(last=False)
        return DanResult(ServedBy.CENTRAL, central_latency)

    def keys(self) -> List[str]:
        """Cached keys from least to most recently used."""
        return list(self.cache)


def dan_query(proxy: DanProxy, central_latency: float, query_key: str) -> DanResult:
    return proxy.query(query_key, central_latency)
